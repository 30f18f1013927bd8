#include "emrseg/sif.hpp"

#include <cmath>

#include "emrseg/errors.hpp"

namespace emrseg {

std::string_view encode_mode_text(EncodeMode m) {
    return m == EncodeMode::Sif ? "sif" : "ave";
}

std::optional<EncodeMode> encode_mode_from_text(std::string_view s) {
    if (s == "sif") return EncodeMode::Sif;
    if (s == "ave") return EncodeMode::Ave;
    return std::nullopt;
}

double sif_weight(double p, double alpha) { return alpha / (alpha + p); }

std::vector<double> weighted_sentence_vector(const std::vector<std::string>& tokens,
                                             const Vocabulary& vocab,
                                             const EmbeddingMatrix& emb,
                                             const SifConfig& cfg, bool* all_oov) {
    std::vector<double> s(static_cast<std::size_t>(emb.dim), 0.0);
    std::size_t in_vocab = 0;
    for (const std::string& tok : tokens) {
        auto id = vocab.id_of(tok);
        if (!id) continue;
        double w = sif_weight(vocab.probability(*id), cfg.alpha);
        const float* e = emb.row(*id);
        for (int d = 0; d < emb.dim; ++d) s[static_cast<std::size_t>(d)] += w * e[d];
        ++in_vocab;
    }
    if (in_vocab == 0) {
        if (all_oov) *all_oov = true;
        return s;
    }
    for (double& x : s) x /= static_cast<double>(in_vocab);
    if (all_oov) *all_oov = false;
    return s;
}

std::vector<double> dominant_direction(const double* vectors, std::size_t count,
                                       int dim, const SifConfig& cfg) {
    std::size_t d = static_cast<std::size_t>(dim);
    auto norm2 = [d](const double* v) {
        double s = 0;
        for (std::size_t i = 0; i < d; ++i) s += v[i] * v[i];
        return s;
    };

    // Start from the largest sentence vector; it cannot be orthogonal to
    // itself, so iteration on S S^T makes progress whenever S != 0.
    std::size_t best = count;
    double best_n2 = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        double n2 = norm2(vectors + j * d);
        if (n2 > best_n2) {
            best_n2 = n2;
            best = j;
        }
    }
    std::vector<double> u(d, 0.0);
    if (best == count) return u;  // all zero
    double inv = 1.0 / std::sqrt(best_n2);
    for (std::size_t i = 0; i < d; ++i) u[i] = vectors[best * d + i] * inv;

    std::vector<double> next(d);
    for (int it = 0; it < cfg.power_iters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t j = 0; j < count; ++j) {
            const double* s = vectors + j * d;
            double t = 0;
            for (std::size_t i = 0; i < d; ++i) t += s[i] * u[i];
            for (std::size_t i = 0; i < d; ++i) next[i] += t * s[i];
        }
        double n2 = norm2(next.data());
        if (n2 == 0.0) break;  // u orthogonal to the span; keep current u
        double invn = 1.0 / std::sqrt(n2);
        double cosine = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            next[i] *= invn;
            cosine += next[i] * u[i];
        }
        u.swap(next);
        if (cosine >= 1.0 - cfg.power_tol) break;
    }
    return u;
}

void remove_common_component(double* vectors, std::size_t count, int dim,
                             const SifConfig& cfg) {
    std::vector<double> u = dominant_direction(vectors, count, dim, cfg);
    double un2 = 0;
    for (double x : u) un2 += x * x;
    if (un2 == 0.0) return;  // all-zero input
    std::size_t d = static_cast<std::size_t>(dim);
    for (std::size_t j = 0; j < count; ++j) {
        double* s = vectors + j * d;
        double proj = 0;
        for (std::size_t i = 0; i < d; ++i) proj += u[i] * s[i];
        for (std::size_t i = 0; i < d; ++i) s[i] -= proj * u[i];
    }
}

EncodedNote encode_note(const LabeledNote& note, const Vocabulary& vocab,
                        const EmbeddingMatrix& emb, const SifConfig& cfg,
                        EncodeMode mode) {
    EncodedNote out;
    out.dim = emb.dim;
    out.length = note.sentences.size();
    out.data.resize(out.length * static_cast<std::size_t>(emb.dim), 0.0);
    out.all_oov.assign(out.length, 0);

    for (std::size_t j = 0; j < note.sentences.size(); ++j) {
        const auto& tokens = note.sentences[j].tokens;
        bool oov = false;
        std::vector<double> s;
        if (mode == EncodeMode::Sif) {
            s = weighted_sentence_vector(tokens, vocab, emb, cfg, &oov);
        } else {
            // plain average: every in-vocabulary token weighs 1
            s.assign(static_cast<std::size_t>(emb.dim), 0.0);
            std::size_t in_vocab = 0;
            for (const std::string& tok : tokens) {
                auto id = vocab.id_of(tok);
                if (!id) continue;
                const float* e = emb.row(*id);
                for (int d = 0; d < emb.dim; ++d) s[static_cast<std::size_t>(d)] += e[d];
                ++in_vocab;
            }
            if (in_vocab > 0) {
                for (double& x : s) x /= static_cast<double>(in_vocab);
            } else {
                oov = true;
            }
        }
        out.all_oov[j] = oov ? 1 : 0;
        std::copy(s.begin(), s.end(), out.row(j));
    }

    if (mode == EncodeMode::Sif && out.length > 0) {
        remove_common_component(out.data.data(), out.length, out.dim, cfg);
    }
    return out;
}

std::vector<EncodedNote> encode_corpus_serial(const std::vector<LabeledNote>& corpus,
                                              const Vocabulary& vocab,
                                              const EmbeddingMatrix& emb,
                                              const SifConfig& cfg, EncodeMode mode) {
    std::vector<EncodedNote> out(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        out[i] = encode_note(corpus[i], vocab, emb, cfg, mode);
    }
    return out;
}

std::vector<EncodedNote> encode_corpus(const std::vector<LabeledNote>& corpus,
                                       const Vocabulary& vocab,
                                       const EmbeddingMatrix& emb,
                                       const SifConfig& cfg, EncodeMode mode,
                                       const RunContext& ctx) {
    int threads = effective_threads(ctx);
    if (threads <= 1 || corpus.size() < 2) {
        return encode_corpus_serial(corpus, vocab, emb, cfg, mode);
    }
    std::vector<EncodedNote> out(corpus.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.size()); ++i) {
        out[static_cast<std::size_t>(i)] =
            encode_note(corpus[static_cast<std::size_t>(i)], vocab, emb, cfg, mode);
    }
    return out;
}

}  // namespace emrseg
