#include <doctest.h>

#include <set>

#include "emrseg/labels.hpp"

using namespace emrseg;

TEST_CASE("exactly 25 labels with unique lowercase canonical forms") {
    CHECK(all_labels().size() == 25);
    std::set<std::string_view> seen;
    for (SectionLabel label : all_labels()) {
        std::string_view text = label_text(label);
        CHECK(!text.empty());
        for (char c : text) CHECK(!(c >= 'A' && c <= 'Z'));
        CHECK(seen.insert(text).second);
        CHECK(label_from_text(text) == label);
    }
    CHECK_FALSE(label_from_text("not a section").has_value());
}

TEST_CASE("label tokens follow text normalization") {
    CHECK(label_tokens(SectionLabel::FollowUpInstruction) ==
          std::vector<std::string>{"follow", "up", "instruction"});
    CHECK(label_tokens(SectionLabel::HistoryOfPresentIllness) ==
          std::vector<std::string>{"history", "of", "present", "illness"});
    CHECK(label_tokens(SectionLabel::Sex) == std::vector<std::string>{"sex"});
}

TEST_CASE("labels enumerate in canonical clinical order") {
    CHECK(static_cast<int>(SectionLabel::AdmissionDate) == 0);
    CHECK(static_cast<int>(SectionLabel::SocialHistory) <
          static_cast<int>(SectionLabel::FamilyHistory));
    CHECK(static_cast<int>(SectionLabel::FollowUpInstruction) == 24);
}
