#include "emrseg/word2vec.hpp"

#include <atomic>
#include <cmath>

#include "emrseg/errors.hpp"
#include "emrseg/math.hpp"
#include "emrseg/rng.hpp"

namespace emrseg {

namespace {

// Sentences as id sequences; the unit of work for both training modes.
struct IdCorpus {
    std::vector<std::vector<std::int32_t>> sentences;
    std::int64_t tokens = 0;
};

IdCorpus to_ids(const std::vector<LabeledNote>& corpus, const Vocabulary& vocab) {
    IdCorpus out;
    for (const LabeledNote& note : corpus) {
        for (const LabeledSentence& s : note.sentences) {
            std::vector<std::int32_t> ids;
            ids.reserve(s.tokens.size());
            for (const std::string& tok : s.tokens) {
                auto id = vocab.id_of(tok);
                if (!id) throw Error("token not in vocabulary: " + tok);
                ids.push_back(*id);
            }
            out.tokens += static_cast<std::int64_t>(ids.size());
            if (!ids.empty()) out.sentences.push_back(std::move(ids));
        }
    }
    return out;
}

std::vector<std::int32_t> build_negative_table(const Vocabulary& vocab,
                                               std::size_t table_size) {
    std::vector<std::int32_t> table(table_size);
    double total = 0.0;
    for (std::int64_t c : vocab.counts) total += std::pow(static_cast<double>(c), 0.75);
    std::size_t i = 0;
    double acc = std::pow(static_cast<double>(vocab.counts[0]), 0.75) / total;
    for (std::size_t t = 0; t < table_size; ++t) {
        table[t] = static_cast<std::int32_t>(i);
        if (static_cast<double>(t + 1) / static_cast<double>(table_size) > acc &&
            i + 1 < vocab.size()) {
            ++i;
            acc += std::pow(static_cast<double>(vocab.counts[i]), 0.75) / total;
        }
    }
    return table;
}

struct PairTotals {
    double loss = 0.0;
    std::int64_t pairs = 0;
};

// Runs the skip-gram updates over one range of sentences. lr decays linearly
// in the number of processed center tokens.
void train_range(const IdCorpus& ids, std::size_t begin, std::size_t end,
                 const std::vector<std::int32_t>& neg_table,
                 const SkipGramConfig& cfg, std::uint64_t rng_seed,
                 std::int64_t schedule_total, std::atomic<std::int64_t>* processed,
                 EmbeddingMatrix* w_in, EmbeddingMatrix* w_out, PairTotals* totals) {
    Rng rng(rng_seed);
    const int dim = cfg.dim;
    std::vector<float> neu1e(static_cast<std::size_t>(dim));
    const float min_lr = cfg.learning_rate * 1e-4f;

    for (std::size_t si = begin; si < end; ++si) {
        const auto& sent = ids.sentences[si];
        for (std::size_t i = 0; i < sent.size(); ++i) {
            std::int64_t done = processed->fetch_add(1, std::memory_order_relaxed);
            float lr = cfg.learning_rate *
                       (1.0f - static_cast<float>(done) /
                                   static_cast<float>(schedule_total + 1));
            if (lr < min_lr) lr = min_lr;

            std::int64_t half = rng.range(1, cfg.window);
            std::size_t lo = i >= static_cast<std::size_t>(half) ? i - static_cast<std::size_t>(half) : 0;
            std::size_t hi = std::min(sent.size(), i + static_cast<std::size_t>(half) + 1);
            float* v_c = w_in->row(sent[i]);
            for (std::size_t j = lo; j < hi; ++j) {
                if (j == i) continue;
                std::int32_t context = sent[j];
                std::fill(neu1e.begin(), neu1e.end(), 0.0f);
                double pair_loss = 0.0;
                for (int d = 0; d <= cfg.negatives; ++d) {
                    std::int32_t target;
                    float label;
                    if (d == 0) {
                        target = context;
                        label = 1.0f;
                    } else {
                        target = neg_table[rng.below(neg_table.size())];
                        if (target == context) continue;
                        label = 0.0f;
                    }
                    float* u_t = w_out->row(target);
                    float f = dot(v_c, u_t, static_cast<std::size_t>(dim));
                    float s = sigmoid(f);
                    pair_loss -= (label > 0.5f)
                                     ? (f >= 0 ? -std::log1p(std::exp(-static_cast<double>(f)))
                                               : f - std::log1p(std::exp(static_cast<double>(f))))
                                     : (-f >= 0 ? -std::log1p(std::exp(static_cast<double>(f)))
                                                : -f - std::log1p(std::exp(-static_cast<double>(f))));
                    float g = (label - s) * lr;
                    axpy(g, u_t, neu1e.data(), static_cast<std::size_t>(dim));
                    axpy(g, v_c, u_t, static_cast<std::size_t>(dim));
                }
                axpy(1.0f, neu1e.data(), v_c, static_cast<std::size_t>(dim));
                totals->loss += pair_loss;
                ++totals->pairs;
            }
        }
    }
}

}  // namespace

EmbeddingMatrix train_skipgram(const std::vector<LabeledNote>& corpus,
                               const Vocabulary& vocab, const SkipGramConfig& cfg,
                               const RunContext& ctx, SkipGramStats* stats) {
    if (corpus.empty()) throw Error("cannot train embeddings on an empty corpus");
    if (cfg.dim < 1 || cfg.window < 1 || cfg.negatives < 1 || cfg.epochs < 1) {
        throw Error("bad skip-gram configuration");
    }
    IdCorpus ids = to_ids(corpus, vocab);
    bool any_pair = false;
    for (const auto& s : ids.sentences) any_pair = any_pair || s.size() >= 2;
    if (!any_pair) throw Error("corpus smaller than one skip-gram window");

    EmbeddingMatrix w_in;
    w_in.dim = cfg.dim;
    w_in.vocab_hash = vocab.hash();
    w_in.data.resize(vocab.size() * static_cast<std::size_t>(cfg.dim));
    EmbeddingMatrix w_out = w_in;

    Rng init_rng(cfg.seed);
    for (float& x : w_in.data) {
        x = static_cast<float>((init_rng.uniform() - 0.5) / cfg.dim);
    }
    std::fill(w_out.data.begin(), w_out.data.end(), 0.0f);

    std::vector<std::int32_t> neg_table = build_negative_table(vocab, cfg.negative_table_size);
    std::int64_t schedule_total = ids.tokens * cfg.epochs;
    std::atomic<std::int64_t> processed{0};

    int threads = effective_threads(ctx);
    bool parallel = !ctx.deterministic && threads > 1 && ids.sentences.size() > 1;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        PairTotals epoch_totals;
        if (!parallel) {
            train_range(ids, 0, ids.sentences.size(), neg_table, cfg,
                        cfg.seed + static_cast<std::uint64_t>(epoch) * 0x9E3779B97F4A7C15ULL,
                        schedule_total, &processed, &w_in, &w_out, &epoch_totals);
        } else {
            std::vector<PairTotals> totals(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
            {
#ifdef _OPENMP
                int tid = omp_get_thread_num();
                int nt = omp_get_num_threads();
#else
                int tid = 0, nt = 1;
#endif
                std::size_t n = ids.sentences.size();
                std::size_t begin = n * static_cast<std::size_t>(tid) / static_cast<std::size_t>(nt);
                std::size_t end = n * static_cast<std::size_t>(tid + 1) / static_cast<std::size_t>(nt);
                train_range(ids, begin, end, neg_table, cfg,
                            cfg.seed + static_cast<std::uint64_t>(epoch) * 0x9E3779B97F4A7C15ULL +
                                static_cast<std::uint64_t>(tid + 1),
                            schedule_total, &processed, &w_in, &w_out,
                            &totals[static_cast<std::size_t>(tid)]);
            }
            for (const PairTotals& t : totals) {
                epoch_totals.loss += t.loss;
                epoch_totals.pairs += t.pairs;
            }
        }
        if (stats) {
            stats->epoch_loss.push_back(
                epoch_totals.pairs > 0 ? epoch_totals.loss / static_cast<double>(epoch_totals.pairs)
                                       : 0.0);
        }
    }
    return w_in;
}

}  // namespace emrseg
