#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emrseg/labels.hpp"
#include "emrseg/text.hpp"

namespace emrseg {

// Heading-format variants of one note.
enum class SampleType : std::uint8_t { Type1 = 0, Type2, Type3, Type4 };

// Training-corpus compositions.
enum class CorpusKind : std::uint8_t { HeadingsOnly = 0, NoHeadings, Mixed };

std::string_view sample_type_text(SampleType t);
std::optional<SampleType> sample_type_from_text(std::string_view s);
std::string_view corpus_kind_text(CorpusKind k);
std::optional<CorpusKind> corpus_kind_from_text(std::string_view s);

struct LabeledSentence {
    std::vector<std::string> tokens;
    SectionLabel label = SectionLabel::AdmissionDate;
    bool heading = false;
};

struct LabeledNote {
    std::string note_id;
    SampleType sample_type = SampleType::Type2;
    std::vector<LabeledSentence> sentences;
};

struct HeadingHit {
    std::size_t line_index = 0;
    std::string text;  // trimmed raw line
};

// A raw line is a heading candidate iff it has at most 8 words and either
// ends with ':' or is entirely upper-case.
std::vector<HeadingHit> detect_headings(const RawNote& note);

// Rule 1: bidirectional substring match between the normalized heading and
// a label's canonical form. Longest canonical form wins ties; equal lengths
// fall back to declaration order. nullopt = unmatched.
std::optional<SectionLabel> match_heading(std::string_view heading_text,
                                          const NormalizerTables& tables);

// Rules 1-2 gold labeling; returns the Type2 (original headings) form.
// Text before the first matched heading is dropped. Throws
// NoAnchorSectionError when no heading matches, EmptyNoteError when nothing
// tokenizable remains.
LabeledNote assign_labels(const RawNote& note, const NormalizerTables& tables,
                          std::size_t max_tokens = kDefaultMaxSentenceTokens);

// XML-style tag tokens used by Type4 samples; synthesized post-normalization
// and preserved verbatim.
std::string open_tag_token(SectionLabel label);
std::string close_tag_token(SectionLabel label);

// Derives one heading-format variant from the Type2 form. Content sentences
// and their labels are identical across all four types.
LabeledNote make_sample(const LabeledNote& type2, SampleType type);

struct BuildStats {
    std::size_t written = 0;
    std::size_t skipped = 0;  // NoAnchorSection notes
};

// Labels every note and renders it in the kind's sample type (Mixed draws a
// type uniformly per note from the seeded generator).
BuildStats build_corpus(const std::vector<RawNote>& notes, CorpusKind kind,
                        std::uint64_t seed, const NormalizerTables& tables,
                        std::vector<LabeledNote>* out,
                        std::size_t max_tokens = kDefaultMaxSentenceTokens);

// Seeded split by note id; output order follows the input corpus order.
// Throws Error when fewer than 2 notes.
template <class NoteT>
std::pair<std::vector<NoteT>, std::vector<NoteT>> split_train_test(
    const std::vector<NoteT>& notes, double train_fraction, std::uint64_t seed);

// JSON Lines corpus: one LabeledNote per line with fields
// {note_id, sample_type, sentences: [{tokens, label, heading?}]}.
// "heading" is emitted only when true.
void write_corpus_jsonl(std::ostream& out, const std::vector<LabeledNote>& notes);
void write_corpus_jsonl(const std::string& path, const std::vector<LabeledNote>& notes);
std::vector<LabeledNote> read_corpus_jsonl(std::istream& in);
std::vector<LabeledNote> read_corpus_jsonl(const std::string& path);

}  // namespace emrseg
