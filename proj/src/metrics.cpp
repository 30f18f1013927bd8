#include "emrseg/metrics.hpp"

#include <cstdio>

#include "emrseg/errors.hpp"

namespace emrseg {

EvalReport evaluate(const std::vector<LabeledNote>& test,
                    const std::vector<std::vector<int>>& predictions) {
    if (test.empty()) throw Error("cannot evaluate an empty test corpus");
    if (test.size() != predictions.size()) {
        throw Error("prediction count does not match test corpus");
    }

    EvalReport r;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const LabeledNote& note = test[i];
        const std::vector<int>& pred = predictions[i];
        if (pred.size() != note.sentences.size()) {
            throw Error("prediction length mismatch for note " + note.note_id);
        }
        TypeAccuracy& t = r.per_type[note.sample_type];
        for (std::size_t j = 0; j < pred.size(); ++j) {
            int gold = static_cast<int>(note.sentences[j].label);
            int p = pred[j];
            if (p < 0 || p >= static_cast<int>(kNumLabels)) {
                throw Error("prediction out of label range");
            }
            ++t.sentences;
            ++r.overall.sentences;
            ++r.confusion[static_cast<std::size_t>(gold)][static_cast<std::size_t>(p)];
            if (gold == p) {
                ++t.correct;
                ++r.overall.correct;
            }
        }
    }

    for (std::size_t label = 0; label < kNumLabels; ++label) {
        std::int64_t tp = r.confusion[label][label];
        std::int64_t gold_total = 0, pred_total = 0;
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            gold_total += r.confusion[label][j];
            pred_total += r.confusion[j][label];
        }
        LabelScore& s = r.per_label[label];
        s.support = gold_total;
        s.precision = pred_total ? static_cast<double>(tp) / static_cast<double>(pred_total) : 0.0;
        s.recall = gold_total ? static_cast<double>(tp) / static_cast<double>(gold_total) : 0.0;
        s.f1 = (s.precision + s.recall) > 0.0
                   ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                   : 0.0;
    }
    return r;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    if (!corpus_kind.empty()) j["corpus_kind"] = corpus_kind;
    j["encoder"] = encoder;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    j["corpus_hash"] = corpus_hash;
    j["model_hash"] = model_hash;

    nlohmann::ordered_json types;
    for (const auto& [type, acc] : per_type) {
        types[std::string(sample_type_text(type))] = {
            {"sentences", acc.sentences},
            {"correct", acc.correct},
            {"accuracy", acc.accuracy()},
        };
    }
    j["per_type"] = std::move(types);
    j["overall"] = {{"sentences", overall.sentences},
                    {"correct", overall.correct},
                    {"accuracy", overall.accuracy()}};

    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        labels.push_back({{"label", label_text(static_cast<SectionLabel>(i))},
                          {"precision", per_label[i].precision},
                          {"recall", per_label[i].recall},
                          {"f1", per_label[i].f1},
                          {"support", per_label[i].support}});
    }
    j["per_label"] = std::move(labels);

    nlohmann::ordered_json confusion_rows = nlohmann::ordered_json::array();
    for (const auto& row : confusion) {
        confusion_rows.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
    }
    j["confusion"] = std::move(confusion_rows);
    return j;
}

std::string EvalReport::table_text() const {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-14s %10s %10s\n", "sample type", "accuracy", "sentences");
    out += buf;
    for (const auto& [type, acc] : per_type) {
        std::snprintf(buf, sizeof(buf), "%-14s %10.4f %10lld\n",
                      std::string(sample_type_text(type)).c_str(), acc.accuracy(),
                      static_cast<long long>(acc.sentences));
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%-14s %10.4f %10lld\n", "overall",
                  overall.accuracy(), static_cast<long long>(overall.sentences));
    out += buf;
    return out;
}

}  // namespace emrseg
