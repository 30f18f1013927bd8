#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "emrseg/corpus.hpp"
#include "emrseg/errors.hpp"
#include "emrseg/synth.hpp"

using namespace emrseg;

namespace {
const NormalizerTables& tables() {
    static NormalizerTables t = NormalizerTables::defaults();
    return t;
}
}  // namespace

TEST_CASE("default grammar validates") {
    SectionGrammar g = SectionGrammar::defaults();
    g.validate(tables());
}

TEST_CASE("grammar validation rejects bad aliases") {
    SectionGrammar g = SectionGrammar::defaults();
    g.sections[0].headings = {"Totally Unrelated:"};
    CHECK_THROWS_AS(g.validate(tables()), FormatError);

    g = SectionGrammar::defaults();
    g.unmatched.push_back({SectionLabel::PhysicalExam, "EXAM", 1, 2});
    // "EXAM" matches physical exam by Rule 1, so it cannot be an unmatched alias
    CHECK_THROWS_AS(g.validate(tables()), FormatError);
}

TEST_CASE("generation is a pure function of the seed") {
    SectionGrammar g = SectionGrammar::defaults();
    RawNote a = generate_synthetic_note(g, 0, "n");
    RawNote b = generate_synthetic_note(g, 0, "n");
    CHECK(a.text == b.text);
    RawNote c = generate_synthetic_note(g, 1, "n");
    CHECK(a.text != c.text);
}

TEST_CASE("mandatory sections always present and labelable") {
    SectionGrammar g = SectionGrammar::defaults();
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        RawNote raw = generate_synthetic_note(g, seed, "n");
        LabeledNote note = assign_labels(raw, tables());
        bool has_adm = false, has_sex = false, has_service = false;
        for (const auto& s : note.sentences) {
            has_adm = has_adm || s.label == SectionLabel::AdmissionDate;
            has_sex = has_sex || s.label == SectionLabel::Sex;
            has_service = has_service || s.label == SectionLabel::Service;
        }
        CHECK(has_adm);
        CHECK(has_sex);
        CHECK(has_service);
    }
}

TEST_CASE("generated corpus: template order and contiguous label runs") {
    SectionGrammar g = SectionGrammar::defaults();
    std::vector<RawNote> notes = generate_notes(g, 400, 23);
    for (const RawNote& raw : notes) {
        LabeledNote note = assign_labels(raw, tables());
        int prev = -1;
        for (const auto& s : note.sentences) {
            int cur = static_cast<int>(s.label);
            CHECK(cur >= prev);  // order follows the template; runs contiguous
            prev = cur;
        }
    }
}

TEST_CASE("unmatched alias sections exercise Rule 2 on generated fixtures") {
    SectionGrammar g = SectionGrammar::defaults();
    g.unmatched_note_rate = 1.0;
    g.unmatched = {{SectionLabel::PhysicalExam, "LAB", 2, 2}};
    int seen = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        RawNote raw = generate_synthetic_note(g, seed, "n");
        if (raw.text.find("\nLAB\n") == std::string::npos) continue;
        ++seen;
        LabeledNote note = assign_labels(raw, tables());
        // locate the LAB heading sentence: tokens == {lab}
        for (std::size_t i = 0; i < note.sentences.size(); ++i) {
            if (note.sentences[i].heading &&
                note.sentences[i].tokens == std::vector<std::string>{"lab"}) {
                CHECK(note.sentences[i].label == SectionLabel::PhysicalExam);
                CHECK(note.sentences[i + 1].label == SectionLabel::PhysicalExam);
                CHECK(note.sentences[i + 2].label == SectionLabel::PhysicalExam);
            }
        }
    }
    CHECK(seen > 10);  // physical exam is present in ~95% of notes
}

TEST_CASE("about one note in four carries an unmatched-alias section") {
    SectionGrammar g = SectionGrammar::defaults();
    std::vector<RawNote> notes = generate_notes(g, 400, 31);
    int with_alias = 0;
    for (const RawNote& raw : notes) {
        bool found = false;
        for (const UnmatchedAliasSpec& u : g.unmatched) {
            if (raw.text.find("\n" + u.heading + "\n") != std::string::npos) found = true;
        }
        with_alias += found;
    }
    // rate 0.25 before anchoring; anchors are present most of the time
    CHECK(with_alias > 400 / 8);
    CHECK(with_alias < 400 / 2);
}

TEST_CASE("grammar file overrides defaults") {
    std::string path = "/tmp/emrseg_test_grammar.ini";
    {
        std::ofstream f(path);
        f << "# test grammar\n"
          << "[global]\n"
          << "shared_rate = 0.25\n"
          << "unmatched_note_rate = 0\n"
          << "[section physical exam]\n"
          << "presence = 1.0\n"
          << "sentences = 7 7\n"
          << "headings = Physical Exam:\n"
          << "[unmatched NEURO CHECK]\n"
          << "anchor = hospital course\n"
          << "sentences = 1 2\n";
    }
    SectionGrammar g = SectionGrammar::load(path);
    CHECK(g.shared_rate == doctest::Approx(0.25));
    CHECK(g.unmatched_note_rate == 0.0);
    bool found = false;
    for (const SectionSpec& s : g.sections) {
        if (s.label == SectionLabel::PhysicalExam) {
            found = true;
            CHECK(s.min_sentences == 7);
            CHECK(s.max_sentences == 7);
            CHECK(s.headings == std::vector<std::string>{"Physical Exam:"});
        }
    }
    CHECK(found);
    CHECK(g.unmatched.back().heading == "NEURO CHECK");
    CHECK(g.unmatched.back().anchor == SectionLabel::HospitalCourse);
    std::remove(path.c_str());
}

TEST_CASE("grammar loader rejects malformed files") {
    std::string path = "/tmp/emrseg_test_grammar_bad.ini";
    {
        std::ofstream f(path);
        f << "[section no such label]\npresence = 1\n";
    }
    CHECK_THROWS_AS(SectionGrammar::load(path), FormatError);
    {
        std::ofstream f(path);
        f << "stray = 1\n";
    }
    CHECK_THROWS_AS(SectionGrammar::load(path), FormatError);
    std::remove(path.c_str());
}
