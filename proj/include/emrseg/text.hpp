#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace emrseg {

struct RawNote {
    std::string note_id;
    std::string text;
};

// A normalized sentence plus the raw-text region it came from.
struct Sentence {
    std::vector<std::string> tokens;
    std::size_t span_begin = 0;  // byte offsets into RawNote::text
    std::size_t span_end = 0;
};

// The closed set of mask tokens normalization may emit.
inline constexpr const char* kMaskDate = "[date]";
inline constexpr const char* kMaskName = "[name]";
inline constexpr const char* kMaskLocation = "[location]";
inline constexpr const char* kMaskPhone = "[phone]";
inline constexpr const char* kMaskId = "[id]";
inline constexpr const char* kMaskNum = "[num]";
inline constexpr const char* kMaskUnit = "[unit]";

bool is_mask_token(std::string_view token);

// Unit lexicon and privacy-mask cue words. Defaults are embedded; both can
// be replaced from plain text files (one entry per line; cue lines are
// "<category> <cue>").
struct NormalizerTables {
    std::vector<std::string> units;
    // (category mask token, lowercase cue substring), checked in order.
    std::vector<std::pair<std::string, std::string>> cues;

    static NormalizerTables defaults();
    void load_units(const std::string& path);
    void load_cues(const std::string& path);
};

inline constexpr std::size_t kDefaultMaxSentenceTokens = 512;

// Maps the interior of a [**...**] privacy span to one category mask.
std::string classify_privacy_mask(std::string_view mask_body,
                                  const NormalizerTables& tables);

// Lowercases, substitutes privacy masks, collapses digit runs to [num],
// maps unit-lexicon words to [unit], and replaces remaining symbols with
// spaces. Idempotent. Throws FormatError on invalid UTF-8.
std::string normalize_text(std::string_view raw, const NormalizerTables& tables);

// Whitespace split of already-normalized text.
std::vector<std::string> tokenize(std::string_view normalized);

// Newline-first splitting, then sentence-final punctuation followed by
// whitespace; chunks are normalized and over-long ones are cut into
// consecutive sub-sentences of at most max_tokens tokens.
// Throws EmptyNoteError when nothing tokenizable remains.
std::vector<Sentence> split_sentences(const RawNote& note,
                                      const NormalizerTables& tables,
                                      std::size_t max_tokens = kDefaultMaxSentenceTokens);

// Same splitting over a slice; spans are shifted by base_offset and an empty
// result is not an error.
std::vector<Sentence> split_text(std::string_view text, std::size_t base_offset,
                                 const NormalizerTables& tables,
                                 std::size_t max_tokens = kDefaultMaxSentenceTokens);

}  // namespace emrseg
