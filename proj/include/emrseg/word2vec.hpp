#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "emrseg/corpus.hpp"
#include "emrseg/parallel.hpp"
#include "emrseg/vocab.hpp"

namespace emrseg {

struct SkipGramConfig {
    int dim = 300;
    int window = 16;
    int negatives = 5;
    int epochs = 5;
    float learning_rate = 0.025f;
    std::uint64_t seed = 1;
    std::size_t negative_table_size = 1u << 20;
};

struct EmbeddingMatrix {
    int dim = 0;
    std::vector<float> data;  // rows() x dim, row-major
    std::uint64_t vocab_hash = 0;

    std::size_t rows() const {
        return dim == 0 ? 0 : data.size() / static_cast<std::size_t>(dim);
    }
    float* row(std::int32_t id) {
        return data.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim);
    }
    const float* row(std::int32_t id) const {
        return data.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim);
    }
};

struct SkipGramStats {
    std::vector<double> epoch_loss;  // mean NLL per (center, context) pair
};

// Skip-gram with negative sampling over the whole corpus; negatives are
// drawn proportional to count^0.75. Returns the input-side vectors.
// deterministic mode streams the corpus on one worker; otherwise updates
// are lock-free across threads (hogwild) and not reproducible.
EmbeddingMatrix train_skipgram(const std::vector<LabeledNote>& corpus,
                               const Vocabulary& vocab, const SkipGramConfig& cfg,
                               const RunContext& ctx,
                               SkipGramStats* stats = nullptr);

// Loss and gradients for a single (center, context, negatives) tuple:
//   loss = -log s(u_o.v_c) - sum_k log s(-u_k.v_c)
// Gradient buffers are accumulated into. Templated so tests can run the
// finite-difference check in double.
template <class Real>
Real sgns_pair_loss_grad(const Real* v_c, const Real* u_o,
                         const Real* const* u_neg, int k, int dim, Real* g_vc,
                         Real* g_uo, Real* const* g_uneg) {
    auto dotp = [dim](const Real* a, const Real* b) {
        Real s = 0;
        for (int i = 0; i < dim; ++i) s += a[i] * b[i];
        return s;
    };
    auto addscaled = [dim](Real* y, Real a, const Real* x) {
        for (int i = 0; i < dim; ++i) y[i] += a * x[i];
    };
    auto logsig = [](Real x) {
        // log s(x), stable for large |x|
        return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
    };
    auto sig = [](Real x) { return Real(1) / (Real(1) + std::exp(-x)); };

    Real loss = 0;
    {
        Real f = dotp(v_c, u_o);
        loss -= logsig(f);
        Real d = sig(f) - Real(1);  // d loss / d f
        if (g_uo) addscaled(g_uo, d, v_c);
        if (g_vc) addscaled(g_vc, d, u_o);
    }
    for (int n = 0; n < k; ++n) {
        Real f = dotp(v_c, u_neg[n]);
        loss -= logsig(-f);
        Real d = sig(f);
        if (g_uneg && g_uneg[n]) addscaled(g_uneg[n], d, v_c);
        if (g_vc) addscaled(g_vc, d, u_neg[n]);
    }
    return loss;
}

}  // namespace emrseg
