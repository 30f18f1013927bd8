#include "emrseg/labels.hpp"

#include "emrseg/text.hpp"

namespace emrseg {

namespace {

const std::array<std::string_view, kNumLabels> kLabelText = {
    "admission date",
    "discharge date",
    "date of birth",
    "sex",
    "service",
    "allergies",
    "attending",
    "chief complaint",
    "major surgical or invasive procedure",
    "history of present illness",
    "review of system",
    "past medical history",
    "social history",
    "family history",
    "physical exam",
    "pertinent result",
    "hospital course",
    "medication on admission",
    "discharge medications",
    "discharge disposition",
    "facility",
    "discharge diagnosis",
    "discharge condition",
    "discharge instruction",
    "follow-up instruction",
};

}  // namespace

std::string_view label_text(SectionLabel label) {
    return kLabelText[static_cast<std::size_t>(label)];
}

std::optional<SectionLabel> label_from_text(std::string_view text) {
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        if (kLabelText[i] == text) return static_cast<SectionLabel>(i);
    }
    return std::nullopt;
}

const std::vector<std::string>& label_tokens(SectionLabel label) {
    static const auto table = [] {
        std::array<std::vector<std::string>, kNumLabels> t;
        NormalizerTables norm = NormalizerTables::defaults();
        for (std::size_t i = 0; i < kNumLabels; ++i) {
            t[i] = tokenize(normalize_text(kLabelText[i], norm));
        }
        return t;
    }();
    return table[static_cast<std::size_t>(label)];
}

const std::array<SectionLabel, kNumLabels>& all_labels() {
    static const auto labels = [] {
        std::array<SectionLabel, kNumLabels> a{};
        for (std::size_t i = 0; i < kNumLabels; ++i) a[i] = static_cast<SectionLabel>(i);
        return a;
    }();
    return labels;
}

}  // namespace emrseg
