#include "emrseg/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emrseg/errors.hpp"

namespace emrseg {

namespace {

// Per-direction forward caches, indexed by processing step.
template <class Real>
struct DirectionTrace {
    int len = 0;
    int hidden = 0;
    std::vector<Real> gates;  // len x 4H, post-activation [i f g o]
    std::vector<Real> c;      // len x H
    std::vector<Real> tc;     // len x H, tanh(c)
    std::vector<Real> h;      // len x H

    void resize(int l, int hid) {
        len = l;
        hidden = hid;
        gates.resize(static_cast<std::size_t>(l) * static_cast<std::size_t>(4 * hid));
        c.resize(static_cast<std::size_t>(l) * static_cast<std::size_t>(hid));
        tc.resize(static_cast<std::size_t>(l) * static_cast<std::size_t>(hid));
        h.resize(static_cast<std::size_t>(l) * static_cast<std::size_t>(hid));
    }
};

template <class Real>
void run_direction(const LstmParams<Real>& p, const Real* inputs, int len,
                   bool reversed, DirectionTrace<Real>* trace) {
    const int hid = p.hidden;
    const int d = p.input_dim;
    trace->resize(len, hid);
    std::vector<Real> zeros(static_cast<std::size_t>(hid), Real(0));

    for (int s = 0; s < len; ++s) {
        int pos = reversed ? len - 1 - s : s;
        const Real* x = inputs + static_cast<std::size_t>(pos) * d;
        const Real* h_prev = s == 0 ? zeros.data()
                                    : trace->h.data() + static_cast<std::size_t>(s - 1) * hid;
        const Real* c_prev = s == 0 ? zeros.data()
                                    : trace->c.data() + static_cast<std::size_t>(s - 1) * hid;
        Real* z = trace->gates.data() + static_cast<std::size_t>(s) * 4 * hid;
        Real* cs = trace->c.data() + static_cast<std::size_t>(s) * hid;
        Real* hs = trace->h.data() + static_cast<std::size_t>(s) * hid;
        lstm_step(p, x, h_prev, c_prev, hs, cs, z);
        Real* tcs = trace->tc.data() + static_cast<std::size_t>(s) * hid;
        for (int j = 0; j < hid; ++j) tcs[j] = std::tanh(cs[j]);
    }
}

// BPTT over one direction. dh_ctx is len x H indexed by *position* (the
// direction's half of the context gradient).
template <class Real>
void backprop_direction(const LstmParams<Real>& p, const Real* inputs, int len,
                        bool reversed, const DirectionTrace<Real>& trace,
                        const Real* dh_ctx, LstmParams<Real>* g) {
    const int hid = p.hidden;
    const int d = p.input_dim;
    std::vector<Real> zeros(static_cast<std::size_t>(hid), Real(0));
    std::vector<Real> dh_rec(static_cast<std::size_t>(hid), Real(0));
    std::vector<Real> dc_rec(static_cast<std::size_t>(hid), Real(0));
    std::vector<Real> dz(static_cast<std::size_t>(4 * hid));

    for (int s = len - 1; s >= 0; --s) {
        int pos = reversed ? len - 1 - s : s;
        const Real* x = inputs + static_cast<std::size_t>(pos) * d;
        const Real* gi = trace.gates.data() + static_cast<std::size_t>(s) * 4 * hid;
        const Real* gf = gi + hid;
        const Real* gg = gi + 2 * hid;
        const Real* go = gi + 3 * hid;
        const Real* tcs = trace.tc.data() + static_cast<std::size_t>(s) * hid;
        const Real* h_prev = s == 0 ? zeros.data()
                                    : trace.h.data() + static_cast<std::size_t>(s - 1) * hid;
        const Real* c_prev = s == 0 ? zeros.data()
                                    : trace.c.data() + static_cast<std::size_t>(s - 1) * hid;

        Real* dzi = dz.data();
        Real* dzf = dz.data() + hid;
        Real* dzg = dz.data() + 2 * hid;
        Real* dzo = dz.data() + 3 * hid;
        for (int j = 0; j < hid; ++j) {
            Real dh = dh_ctx[static_cast<std::size_t>(pos) * hid + j] + dh_rec[j];
            Real dc = dc_rec[j] + dh * go[j] * (Real(1) - tcs[j] * tcs[j]);
            Real do_ = dh * tcs[j];
            dzo[j] = do_ * go[j] * (Real(1) - go[j]);
            dzf[j] = dc * c_prev[j] * gf[j] * (Real(1) - gf[j]);
            dzi[j] = dc * gg[j] * gi[j] * (Real(1) - gi[j]);
            dzg[j] = dc * gi[j] * (Real(1) - gg[j] * gg[j]);
            dc_rec[j] = dc * gf[j];
        }
        outer_add(g->wx.data(), dz.data(), static_cast<std::size_t>(4 * hid), x,
                  static_cast<std::size_t>(d));
        outer_add(g->wh.data(), dz.data(), static_cast<std::size_t>(4 * hid), h_prev,
                  static_cast<std::size_t>(hid));
        for (int r = 0; r < 4 * hid; ++r) g->b[static_cast<std::size_t>(r)] += dz[static_cast<std::size_t>(r)];
        std::fill(dh_rec.begin(), dh_rec.end(), Real(0));
        matvec_t_add(p.wh.data(), static_cast<std::size_t>(4 * hid),
                     static_cast<std::size_t>(hid), dz.data(), dh_rec.data());
    }
}

}  // namespace

template <class Real>
void bilstm_encode(const TaggerModelT<Real>& m, const Real* inputs, int len,
                   Real* context) {
    const int hid = m.hidden;
    DirectionTrace<Real> fw, bw;
    run_direction(m.fw, inputs, len, false, &fw);
    run_direction(m.bw, inputs, len, true, &bw);
    for (int pos = 0; pos < len; ++pos) {
        Real* out = context + static_cast<std::size_t>(pos) * 2 * hid;
        const Real* hf = fw.h.data() + static_cast<std::size_t>(pos) * hid;
        const Real* hb = bw.h.data() + static_cast<std::size_t>(len - 1 - pos) * hid;
        std::copy(hf, hf + hid, out);
        std::copy(hb, hb + hid, out + hid);
    }
}

template <class Real>
void compute_emissions(const TaggerModelT<Real>& m, const Real* context, int len,
                       double* emissions) {
    const int y = m.num_labels;
    const int c2 = 2 * m.hidden;
    std::vector<Real> row(static_cast<std::size_t>(y));
    for (int pos = 0; pos < len; ++pos) {
        matvec(m.emit_w.data(), static_cast<std::size_t>(y), static_cast<std::size_t>(c2),
               context + static_cast<std::size_t>(pos) * c2, m.emit_b.data(), row.data());
        for (int j = 0; j < y; ++j) {
            emissions[static_cast<std::size_t>(pos) * y + j] = static_cast<double>(row[static_cast<std::size_t>(j)]);
        }
    }
}

template <class Real>
void note_emissions(const TaggerModelT<Real>& m, const Real* inputs, int len,
                    double* emissions) {
    std::vector<Real> context(static_cast<std::size_t>(len) * 2 * m.hidden);
    bilstm_encode(m, inputs, len, context.data());
    compute_emissions(m, context.data(), len, emissions);
}

template <class Real>
void TaggerGrads<Real>::add(const TaggerGrads<Real>& o) {
    auto acc = [](auto& dst, const auto& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    };
    acc(fw.wx, o.fw.wx);
    acc(fw.wh, o.fw.wh);
    acc(fw.b, o.fw.b);
    acc(bw.wx, o.bw.wx);
    acc(bw.wh, o.bw.wh);
    acc(bw.b, o.bw.b);
    acc(emit_w, o.emit_w);
    acc(emit_b, o.emit_b);
    acc(crf, o.crf);
}

template <class Real>
void TaggerGrads<Real>::scale(double s) {
    for (Real& v : fw.wx) v = static_cast<Real>(v * s);
    for (Real& v : fw.wh) v = static_cast<Real>(v * s);
    for (Real& v : fw.b) v = static_cast<Real>(v * s);
    for (Real& v : bw.wx) v = static_cast<Real>(v * s);
    for (Real& v : bw.wh) v = static_cast<Real>(v * s);
    for (Real& v : bw.b) v = static_cast<Real>(v * s);
    for (Real& v : emit_w) v = static_cast<Real>(v * s);
    for (Real& v : emit_b) v = static_cast<Real>(v * s);
    for (double& v : crf) v *= s;
}

template <class Real>
double note_nll_grad(const TaggerModelT<Real>& m, const Real* inputs, int len,
                     const int* gold, TaggerGrads<Real>* grads) {
    const int hid = m.hidden;
    const int y = m.num_labels;
    const int c2 = 2 * hid;

    DirectionTrace<Real> fw, bw;
    run_direction(m.fw, inputs, len, false, &fw);
    run_direction(m.bw, inputs, len, true, &bw);

    std::vector<Real> context(static_cast<std::size_t>(len) * c2);
    for (int pos = 0; pos < len; ++pos) {
        Real* out = context.data() + static_cast<std::size_t>(pos) * c2;
        const Real* hf = fw.h.data() + static_cast<std::size_t>(pos) * hid;
        const Real* hb = bw.h.data() + static_cast<std::size_t>(len - 1 - pos) * hid;
        std::copy(hf, hf + hid, out);
        std::copy(hb, hb + hid, out + hid);
    }

    std::vector<double> emissions(static_cast<std::size_t>(len) * y);
    compute_emissions(m, context.data(), len, emissions.data());

    std::vector<double> d_emissions(emissions.size(), 0.0);
    double nll = crf_nll_grad(emissions.data(), len, m.crf, gold, d_emissions.data(),
                              grads->crf.data());

    // emission layer backward
    std::vector<Real> de(static_cast<std::size_t>(y));
    std::vector<Real> d_context(context.size(), Real(0));
    for (int pos = 0; pos < len; ++pos) {
        for (int j = 0; j < y; ++j) {
            de[static_cast<std::size_t>(j)] =
                static_cast<Real>(d_emissions[static_cast<std::size_t>(pos) * y + j]);
            grads->emit_b[static_cast<std::size_t>(j)] += de[static_cast<std::size_t>(j)];
        }
        const Real* ctx = context.data() + static_cast<std::size_t>(pos) * c2;
        outer_add(grads->emit_w.data(), de.data(), static_cast<std::size_t>(y), ctx,
                  static_cast<std::size_t>(c2));
        matvec_t_add(m.emit_w.data(), static_cast<std::size_t>(y),
                     static_cast<std::size_t>(c2), de.data(),
                     d_context.data() + static_cast<std::size_t>(pos) * c2);
    }

    // split context grads into direction halves (by position)
    std::vector<Real> dh_fw(static_cast<std::size_t>(len) * hid);
    std::vector<Real> dh_bw(static_cast<std::size_t>(len) * hid);
    for (int pos = 0; pos < len; ++pos) {
        const Real* dc = d_context.data() + static_cast<std::size_t>(pos) * c2;
        std::copy(dc, dc + hid, dh_fw.data() + static_cast<std::size_t>(pos) * hid);
        std::copy(dc + hid, dc + c2, dh_bw.data() + static_cast<std::size_t>(pos) * hid);
    }
    backprop_direction(m.fw, inputs, len, false, fw, dh_fw.data(), &grads->fw);
    backprop_direction(m.bw, inputs, len, true, bw, dh_bw.data(), &grads->bw);
    return nll;
}

template <class Real>
double note_nll(const TaggerModelT<Real>& m, const Real* inputs, int len,
                const int* gold) {
    std::vector<double> emissions(static_cast<std::size_t>(len) * m.num_labels);
    note_emissions(m, inputs, len, emissions.data());
    return crf_nll(emissions.data(), len, m.crf, gold);
}

template <class Real>
std::vector<int> tagger_predict(const TaggerModelT<Real>& m, const Real* inputs,
                                int len) {
    std::vector<double> emissions(static_cast<std::size_t>(len) * m.num_labels);
    note_emissions(m, inputs, len, emissions.data());
    return viterbi_decode(emissions.data(), len, m.crf).first;
}

template void bilstm_encode<float>(const TaggerModelT<float>&, const float*, int, float*);
template void bilstm_encode<double>(const TaggerModelT<double>&, const double*, int, double*);
template void compute_emissions<float>(const TaggerModelT<float>&, const float*, int, double*);
template void compute_emissions<double>(const TaggerModelT<double>&, const double*, int, double*);
template void note_emissions<float>(const TaggerModelT<float>&, const float*, int, double*);
template void note_emissions<double>(const TaggerModelT<double>&, const double*, int, double*);
template struct TaggerGrads<float>;
template struct TaggerGrads<double>;
template double note_nll_grad<float>(const TaggerModelT<float>&, const float*, int,
                                     const int*, TaggerGrads<float>*);
template double note_nll_grad<double>(const TaggerModelT<double>&, const double*, int,
                                      const int*, TaggerGrads<double>*);
template double note_nll<float>(const TaggerModelT<float>&, const float*, int, const int*);
template double note_nll<double>(const TaggerModelT<double>&, const double*, int, const int*);
template std::vector<int> tagger_predict<float>(const TaggerModelT<float>&, const float*, int);
template std::vector<int> tagger_predict<double>(const TaggerModelT<double>&, const double*, int);

// ---- training -----------------------------------------------------------

namespace {

struct AdamState {
    std::vector<float> m_f, v_f;      // concatenated float tensors
    std::vector<double> m_c, v_c;     // crf
};

// Order is fixed; it defines the flat float parameter layout.
std::vector<std::vector<float>*> float_tensors(TaggerModel& m) {
    return {&m.fw.wx, &m.fw.wh, &m.fw.b, &m.bw.wx, &m.bw.wh, &m.bw.b,
            &m.emit_w, &m.emit_b};
}
std::vector<std::vector<float>*> float_tensors(TaggerGrads<float>& g) {
    return {&g.fw.wx, &g.fw.wh, &g.fw.b, &g.bw.wx, &g.bw.wh, &g.bw.b,
            &g.emit_w, &g.emit_b};
}

double grad_norm(TaggerGrads<float>& g) {
    double s = 0.0;
    for (auto* t : float_tensors(g)) {
        for (float v : *t) s += static_cast<double>(v) * static_cast<double>(v);
    }
    for (double v : g.crf) s += v * v;
    return std::sqrt(s);
}

void adam_step(TaggerModel& model, TaggerGrads<float>& g, AdamState& st, int t,
               const TrainConfig& cfg) {
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, t);
    const double corr2 = 1.0 - std::pow(b2, t);
    const double lr = cfg.learning_rate;

    std::size_t off = 0;
    auto params = float_tensors(model);
    auto grads = float_tensors(g);
    for (std::size_t k = 0; k < params.size(); ++k) {
        std::vector<float>& p = *params[k];
        const std::vector<float>& gv = *grads[k];
        for (std::size_t i = 0; i < p.size(); ++i, ++off) {
            double grad = gv[i];
            double m = st.m_f[off] = static_cast<float>(b1 * st.m_f[off] + (1 - b1) * grad);
            double v = st.v_f[off] = static_cast<float>(b2 * st.v_f[off] + (1 - b2) * grad * grad);
            p[i] -= static_cast<float>(lr * (m / corr1) / (std::sqrt(v / corr2) + cfg.adam_eps));
        }
    }
    for (std::size_t i = 0; i < model.crf.scores.size(); ++i) {
        double grad = g.crf[i];
        double m = st.m_c[i] = b1 * st.m_c[i] + (1 - b1) * grad;
        double v = st.v_c[i] = b2 * st.v_c[i] + (1 - b2) * grad * grad;
        model.crf.scores[i] -= lr * (m / corr1) / (std::sqrt(v / corr2) + cfg.adam_eps);
    }
}

}  // namespace

double batch_grads_serial(const TaggerModel& m,
                          const std::vector<TaggerExample>& examples,
                          const std::vector<std::size_t>& batch,
                          TaggerGrads<float>* grads) {
    // Per-note buffer then ordered add, the exact addition sequence of the
    // parallel path, so both are bit-identical.
    double nll = 0.0;
    TaggerGrads<float> note_grads;
    for (std::size_t idx : batch) {
        note_grads.init_like(m);
        const TaggerExample& ex = examples[idx];
        nll += note_nll_grad(m, ex.inputs.data(), ex.length(), ex.gold.data(),
                             &note_grads);
        grads->add(note_grads);
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    grads->scale(inv);
    return nll * inv;
}

double batch_grads(const TaggerModel& m, const std::vector<TaggerExample>& examples,
                   const std::vector<std::size_t>& batch, TaggerGrads<float>* grads,
                   const RunContext& ctx) {
    int threads = effective_threads(ctx);
    if (threads <= 1 || batch.size() < 2) {
        return batch_grads_serial(m, examples, batch, grads);
    }
    std::vector<TaggerGrads<float>> per_note(batch.size());
    std::vector<double> nlls(batch.size(), 0.0);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(batch.size()); ++i) {
        auto k = static_cast<std::size_t>(i);
        per_note[k].init_like(m);
        const TaggerExample& ex = examples[batch[k]];
        nlls[k] = note_nll_grad(m, ex.inputs.data(), ex.length(), ex.gold.data(),
                                &per_note[k]);
    }
    double nll = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {  // fixed order reduction
        grads->add(per_note[k]);
        nll += nlls[k];
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    grads->scale(inv);
    return nll * inv;
}

TaggerModel train_tagger(const std::vector<TaggerExample>& examples, int input_dim,
                         int num_labels, const TrainConfig& cfg,
                         const RunContext& ctx, std::vector<EpochLog>* log,
                         const EpochCallback& callback) {
    if (examples.empty()) throw Error("cannot train on an empty corpus");
    for (const TaggerExample& ex : examples) {
        if (ex.length() == 0 ||
            ex.inputs.size() != static_cast<std::size_t>(ex.length()) *
                                    static_cast<std::size_t>(input_dim)) {
            throw Error("tagger example shape mismatch");
        }
    }

    TaggerModel model;
    model.init(input_dim, cfg.hidden, num_labels, cfg.seed);

    // dev split by note; dev_fraction 0 evaluates on the training notes
    std::vector<std::size_t> all(examples.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> train_idx, dev_idx;
    if (cfg.dev_fraction > 0.0 && examples.size() >= 2) {
        std::vector<std::size_t> shuffled = all;
        Rng split_rng(cfg.seed ^ 0x5DEECE66DULL);
        split_rng.shuffle(shuffled);
        auto dev_n = static_cast<std::size_t>(
            std::llround(cfg.dev_fraction * static_cast<double>(examples.size())));
        dev_n = std::clamp<std::size_t>(dev_n, 1, examples.size() - 1);
        dev_idx.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(dev_n));
        train_idx.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(dev_n), shuffled.end());
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(dev_idx.begin(), dev_idx.end());
    } else {
        train_idx = all;
        dev_idx = all;
    }

    AdamState st;
    std::size_t float_count = 0;
    for (auto* t : float_tensors(model)) float_count += t->size();
    st.m_f.assign(float_count, 0.0f);
    st.v_f.assign(float_count, 0.0f);
    st.m_c.assign(model.crf.scores.size(), 0.0);
    st.v_c.assign(model.crf.scores.size(), 0.0);

    Rng epoch_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    TaggerModel best = model;
    double best_dev = std::numeric_limits<double>::infinity();
    int since_best = 0;
    int adam_t = 0;
    TaggerGrads<float> grads;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        epoch_rng.shuffle(train_idx);
        double train_nll_sum = 0.0;
        std::size_t train_notes = 0;
        for (std::size_t b = 0; b < train_idx.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t e = std::min(train_idx.size(), b + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::size_t> batch(train_idx.begin() + static_cast<std::ptrdiff_t>(b),
                                           train_idx.begin() + static_cast<std::ptrdiff_t>(e));
            grads.init_like(model);
            double nll = batch_grads(model, examples, batch, &grads, ctx);
            if (!std::isfinite(nll)) {
                throw Error("training diverged: non-finite loss at epoch " +
                            std::to_string(epoch));
            }
            train_nll_sum += nll * static_cast<double>(batch.size());
            train_notes += batch.size();

            double norm = grad_norm(grads);
            if (norm > cfg.clip_norm && norm > 0.0) grads.scale(cfg.clip_norm / norm);
            ++adam_t;
            adam_step(model, grads, st, adam_t, cfg);
        }

        double dev_nll = 0.0;
        std::size_t dev_correct = 0, dev_total = 0;
        for (std::size_t idx : dev_idx) {
            const TaggerExample& ex = examples[idx];
            dev_nll += note_nll(model, ex.inputs.data(), ex.length(), ex.gold.data());
            std::vector<int> path = tagger_predict(model, ex.inputs.data(), ex.length());
            for (int i = 0; i < ex.length(); ++i) {
                dev_correct += path[static_cast<std::size_t>(i)] == ex.gold[static_cast<std::size_t>(i)];
            }
            dev_total += static_cast<std::size_t>(ex.length());
        }
        dev_nll /= static_cast<double>(dev_idx.size());

        EpochLog row;
        row.epoch = epoch;
        row.train_nll = train_nll_sum / static_cast<double>(train_notes);
        row.dev_nll = dev_nll;
        row.dev_accuracy = dev_total ? static_cast<double>(dev_correct) / static_cast<double>(dev_total) : 0.0;
        if (log) log->push_back(row);

        if (dev_nll < best_dev) {
            best_dev = dev_nll;
            best = model;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (callback && !callback(row)) break;
        if (since_best > cfg.patience) break;
    }
    return best;
}

}  // namespace emrseg
