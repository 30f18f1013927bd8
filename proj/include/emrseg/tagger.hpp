#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "emrseg/crf.hpp"
#include "emrseg/math.hpp"
#include "emrseg/parallel.hpp"
#include "emrseg/rng.hpp"

namespace emrseg {

// One LSTM direction. Gate blocks are stacked [input, forget, cell, output]
// in the 4H rows of wx/wh/b.
template <class Real>
struct LstmParams {
    int input_dim = 0;
    int hidden = 0;
    std::vector<Real> wx;  // 4H x D
    std::vector<Real> wh;  // 4H x H
    std::vector<Real> b;   // 4H

    void init(int d, int h, Rng& rng) {
        input_dim = d;
        hidden = h;
        wx.resize(static_cast<std::size_t>(4 * h) * static_cast<std::size_t>(d));
        wh.resize(static_cast<std::size_t>(4 * h) * static_cast<std::size_t>(h));
        b.assign(static_cast<std::size_t>(4 * h), Real(0));
        const double sx = 1.0 / std::sqrt(static_cast<double>(d));
        const double sh = 1.0 / std::sqrt(static_cast<double>(h));
        for (Real& v : wx) v = static_cast<Real>(rng.uniform(-sx, sx));
        for (Real& v : wh) v = static_cast<Real>(rng.uniform(-sh, sh));
        for (int j = 0; j < h; ++j) b[static_cast<std::size_t>(h + j)] = Real(1);  // forget gate
    }

    void zero_like(const LstmParams& other) {
        input_dim = other.input_dim;
        hidden = other.hidden;
        wx.assign(other.wx.size(), Real(0));
        wh.assign(other.wh.size(), Real(0));
        b.assign(other.b.size(), Real(0));
    }
};

// Single cell update. gates (4H scratch) receives the post-activation
// i/f/g/o values when non-null, for backprop caching.
template <class Real>
void lstm_step(const LstmParams<Real>& p, const Real* x, const Real* h_prev,
               const Real* c_prev, Real* h_out, Real* c_out,
               Real* gates_out = nullptr) {
    const int hid = p.hidden;
    std::vector<Real> local;
    Real* z = gates_out;
    if (!z) {
        local.resize(static_cast<std::size_t>(4 * hid));
        z = local.data();
    }
    matvec(p.wx.data(), static_cast<std::size_t>(4 * hid),
           static_cast<std::size_t>(p.input_dim), x, p.b.data(), z);
    for (int r = 0; r < 4 * hid; ++r) {
        z[r] += dot(p.wh.data() + static_cast<std::size_t>(r) * hid, h_prev,
                    static_cast<std::size_t>(hid));
    }
    Real* zi = z;
    Real* zf = z + hid;
    Real* zg = z + 2 * hid;
    Real* zo = z + 3 * hid;
    for (int j = 0; j < hid; ++j) {
        zi[j] = sigmoid(zi[j]);
        zf[j] = sigmoid(zf[j]);
        zg[j] = std::tanh(zg[j]);
        zo[j] = sigmoid(zo[j]);
        c_out[j] = zf[j] * c_prev[j] + zi[j] * zg[j];
        h_out[j] = zo[j] * std::tanh(c_out[j]);
    }
}

template <class Real>
struct TaggerModelT {
    int input_dim = 0;
    int hidden = 0;
    int num_labels = 0;
    LstmParams<Real> fw, bw;
    std::vector<Real> emit_w;  // Y x 2H
    std::vector<Real> emit_b;  // Y
    CrfTable crf;

    void init(int d_in, int h, int labels, std::uint64_t seed) {
        input_dim = d_in;
        hidden = h;
        num_labels = labels;
        Rng rng(seed);
        fw.init(d_in, h, rng);
        bw.init(d_in, h, rng);
        emit_w.resize(static_cast<std::size_t>(labels) * static_cast<std::size_t>(2 * h));
        const double se = 1.0 / std::sqrt(static_cast<double>(2 * h));
        for (Real& v : emit_w) v = static_cast<Real>(rng.uniform(-se, se));
        emit_b.assign(static_cast<std::size_t>(labels), Real(0));
        crf = CrfTable::zeros(labels);
    }
};

using TaggerModel = TaggerModelT<float>;

// context: len x 2H, [forward h_t ; backward h_t], zero initial states.
template <class Real>
void bilstm_encode(const TaggerModelT<Real>& m, const Real* inputs, int len,
                   Real* context);

// emissions: len x Y in double (CRF precision).
template <class Real>
void compute_emissions(const TaggerModelT<Real>& m, const Real* context, int len,
                       double* emissions);

template <class Real>
void note_emissions(const TaggerModelT<Real>& m, const Real* inputs, int len,
                    double* emissions);

template <class Real>
struct TaggerGrads {
    LstmParams<Real> fw, bw;
    std::vector<Real> emit_w, emit_b;
    std::vector<double> crf;  // (Y+2)^2

    void init_like(const TaggerModelT<Real>& m) {
        fw.zero_like(m.fw);
        bw.zero_like(m.bw);
        emit_w.assign(m.emit_w.size(), Real(0));
        emit_b.assign(m.emit_b.size(), Real(0));
        crf.assign(m.crf.scores.size(), 0.0);
    }
    void add(const TaggerGrads& o);
    void scale(double s);
};

// Full forward + reverse-mode backward for one note; accumulates gradients
// and returns the CRF negative log-likelihood.
template <class Real>
double note_nll_grad(const TaggerModelT<Real>& m, const Real* inputs, int len,
                     const int* gold, TaggerGrads<Real>* grads);

template <class Real>
double note_nll(const TaggerModelT<Real>& m, const Real* inputs, int len,
                const int* gold);

// Viterbi path over the note's emissions. Throws Error on input dim mismatch
// (callers pass len x m.input_dim row-major).
template <class Real>
std::vector<int> tagger_predict(const TaggerModelT<Real>& m, const Real* inputs,
                                int len);

// ---- training -----------------------------------------------------------

struct TaggerExample {
    std::vector<float> inputs;  // len x input_dim row-major
    std::vector<int> gold;
    int length() const { return static_cast<int>(gold.size()); }
};

struct TrainConfig {
    int hidden = 128;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 8;
    int max_epochs = 50;
    int patience = 5;
    double clip_norm = 5.0;
    double dev_fraction = 0.1;  // 0: evaluate on the training notes
    std::uint64_t seed = 1;
};

struct EpochLog {
    int epoch = 0;
    double train_nll = 0.0;
    double dev_nll = 0.0;
    double dev_accuracy = 0.0;
};

// Return false to stop after the current epoch.
using EpochCallback = std::function<bool(const EpochLog&)>;

// Gradient of the mean per-note NLL over a batch. The parallel version
// computes per-note gradients concurrently and reduces them in note order;
// its result is bit-identical to the serial reference for any thread count.
double batch_grads_serial(const TaggerModel& m,
                          const std::vector<TaggerExample>& examples,
                          const std::vector<std::size_t>& batch,
                          TaggerGrads<float>* grads);
double batch_grads(const TaggerModel& m, const std::vector<TaggerExample>& examples,
                   const std::vector<std::size_t>& batch, TaggerGrads<float>* grads,
                   const RunContext& ctx);

// Adam on the mean batch NLL with global-norm clipping and dev-NLL early
// stopping. Deterministic given the seed. Throws Error on NaN loss.
TaggerModel train_tagger(const std::vector<TaggerExample>& examples, int input_dim,
                         int num_labels, const TrainConfig& cfg,
                         const RunContext& ctx, std::vector<EpochLog>* log = nullptr,
                         const EpochCallback& callback = {});

}  // namespace emrseg
