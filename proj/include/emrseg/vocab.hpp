#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emrseg/corpus.hpp"
#include "emrseg/parallel.hpp"

namespace emrseg {

// Token statistics over a corpus: dense ids in first-occurrence order,
// counts n_w, and n_all for p(w) = n_w / n_all.
struct Vocabulary {
    std::vector<std::string> words;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
    std::unordered_map<std::string, std::int32_t> index;

    std::size_t size() const { return words.size(); }

    std::optional<std::int32_t> id_of(std::string_view token) const {
        auto it = index.find(std::string(token));
        if (it == index.end()) return std::nullopt;
        return it->second;
    }

    double probability(std::int32_t id) const {
        return static_cast<double>(counts[static_cast<std::size_t>(id)]) /
               static_cast<double>(total);
    }

    // FNV-1a over "word\tcount\n" lines; pairs a vocabulary with its
    // embedding matrix for integrity checks.
    std::uint64_t hash() const;
};

// Serial reference: one pass over the corpus in order.
Vocabulary build_vocabulary_serial(const std::vector<LabeledNote>& corpus);

// OpenMP count-and-merge; ids and counts are identical to the serial
// reference for any thread count.
Vocabulary build_vocabulary(const std::vector<LabeledNote>& corpus,
                            const RunContext& ctx);

}  // namespace emrseg
