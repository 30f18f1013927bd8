#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emrseg/corpus.hpp"
#include "emrseg/labels.hpp"
#include "emrseg/text.hpp"

namespace emrseg {

// What kind of privacy mask a section's content may carry.
enum class MaskKind : std::uint8_t { None = 0, Date, Name, Location, Phone };

struct SectionSpec {
    SectionLabel label = SectionLabel::AdmissionDate;
    double presence = 1.0;
    bool mandatory = false;
    int min_sentences = 1;
    int max_sentences = 3;
    int min_tokens = 4;
    int max_tokens = 10;
    // Rendered heading variants, colon included where intended; every entry
    // must match `label` under Rule 1.
    std::vector<std::string> headings;
    std::vector<std::string> pool;  // label-specific words
    double shared_rate = -1.0;      // < 0: use the grammar-level rate
    double number_rate = 0.0;       // chance a token slot emits digits (+unit)
    double mask_rate = 0.0;         // chance a token slot emits a privacy mask
    MaskKind mask_kind = MaskKind::None;
};

// A deliberately unmatchable heading inserted after its anchor section to
// exercise Rule 2 fall-through.
struct UnmatchedAliasSpec {
    SectionLabel anchor = SectionLabel::PhysicalExam;
    std::string heading;  // e.g. "LAB"
    int min_sentences = 1;
    int max_sentences = 3;
};

struct SectionGrammar {
    std::vector<SectionSpec> sections;  // template order
    std::vector<std::string> shared_pool;
    std::vector<double> shared_weights;  // same length as shared_pool
    double shared_rate = 0.6;
    double cross_noise = 0.08;  // chance a specific token comes from another label's pool
    // Note-level style words: a small subset is drawn once per note and
    // recurs through all of its content sentences, giving every note a
    // common lexical direction.
    std::vector<std::string> style_pool;
    int style_min_words = 3;
    int style_max_words = 6;
    double style_rate = 0.0;
    // chance a content sentence carries no label-specific token at all
    double filler_rate = 0.0;
    // Per-note topical theme: a few sections are drawn per note and their
    // pool words bleed into every content sentence of that note, the way a
    // patient's presenting problem recurs through a whole note.
    int theme_min_labels = 2;
    int theme_max_labels = 3;
    double theme_rate = 0.0;
    std::vector<UnmatchedAliasSpec> unmatched;
    double unmatched_note_rate = 0.25;
    double multi_sentence_line_rate = 0.08;

    static SectionGrammar defaults();
    static SectionGrammar load(const std::string& path);

    // Checks alias/label consistency under Rule 1 and parameter ranges;
    // throws FormatError on violations.
    void validate(const NormalizerTables& tables) const;
};

// One note, fully determined by (grammar, seed, note_id).
RawNote generate_synthetic_note(const SectionGrammar& grammar, std::uint64_t seed,
                                std::string note_id);

// n notes with ids "<prefix>-000001"... ; per-note seeds derive from `seed`.
std::vector<RawNote> generate_notes(const SectionGrammar& grammar, std::size_t n,
                                    std::uint64_t seed,
                                    const std::string& prefix = "synth");

}  // namespace emrseg
