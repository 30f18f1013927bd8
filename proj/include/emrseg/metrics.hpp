#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "emrseg/corpus.hpp"
#include "emrseg/labels.hpp"

namespace emrseg {

struct TypeAccuracy {
    std::int64_t sentences = 0;
    std::int64_t correct = 0;
    double accuracy() const {
        return sentences ? static_cast<double>(correct) / static_cast<double>(sentences) : 0.0;
    }
};

struct LabelScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

// Sentence-accuracy report over a labeled test corpus: per sample type and
// overall, a gold x predicted confusion matrix, and per-label P/R/F1.
struct EvalReport {
    std::string corpus_kind;
    std::string encoder;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string corpus_hash;
    std::string model_hash;

    std::map<SampleType, TypeAccuracy> per_type;
    TypeAccuracy overall;
    std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> confusion{};  // [gold][pred]
    std::array<LabelScore, kNumLabels> per_label{};

    nlohmann::ordered_json to_json() const;
    std::string table_text() const;
};

// predictions[i][j] = predicted label id for sentence j of test[i].
EvalReport evaluate(const std::vector<LabeledNote>& test,
                    const std::vector<std::vector<int>>& predictions);

}  // namespace emrseg
