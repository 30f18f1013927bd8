#pragma once

#include <cstdint>
#include <vector>

#include "emrseg/corpus.hpp"
#include "emrseg/parallel.hpp"
#include "emrseg/vocab.hpp"
#include "emrseg/word2vec.hpp"

namespace emrseg {

struct SifConfig {
    double alpha = 0.001;
    int power_iters = 100;
    double power_tol = 1e-10;
};

enum class EncodeMode : std::uint8_t { Sif = 0, Ave };

std::string_view encode_mode_text(EncodeMode m);
std::optional<EncodeMode> encode_mode_from_text(std::string_view s);

// alpha / (alpha + p): in (0, 1], strictly decreasing in p.
double sif_weight(double p, double alpha);

// One note's sentence vectors, row-major length x dim. all_oov flags the
// sentences that had no in-vocabulary token (zero vectors).
struct EncodedNote {
    int dim = 0;
    std::size_t length = 0;
    std::vector<double> data;
    std::vector<std::uint8_t> all_oov;

    double* row(std::size_t i) { return data.data() + i * static_cast<std::size_t>(dim); }
    const double* row(std::size_t i) const {
        return data.data() + i * static_cast<std::size_t>(dim);
    }
};

// Probability-weighted mean of in-vocabulary word vectors; OOV tokens are
// skipped (their p is 0, their vector absent). All-OOV -> zero vector and
// *all_oov = true.
std::vector<double> weighted_sentence_vector(const std::vector<std::string>& tokens,
                                             const Vocabulary& vocab,
                                             const EmbeddingMatrix& emb,
                                             const SifConfig& cfg, bool* all_oov);

// First left singular vector of the note's sentence-vector matrix via
// matrix-free power iteration; zeros when every vector is zero.
std::vector<double> dominant_direction(const double* vectors, std::size_t count,
                                       int dim, const SifConfig& cfg);

// s_j <- s_j - u (u . s_j) in place; all-zero input is returned unchanged.
void remove_common_component(double* vectors, std::size_t count, int dim,
                             const SifConfig& cfg);

// Sif: weighted vectors then per-note common-component removal.
// Ave: plain mean of word vectors, no removal.
EncodedNote encode_note(const LabeledNote& note, const Vocabulary& vocab,
                        const EmbeddingMatrix& emb, const SifConfig& cfg,
                        EncodeMode mode);

std::vector<EncodedNote> encode_corpus_serial(const std::vector<LabeledNote>& corpus,
                                              const Vocabulary& vocab,
                                              const EmbeddingMatrix& emb,
                                              const SifConfig& cfg, EncodeMode mode);

// Notes encode independently; the OpenMP path is bit-identical to the
// serial reference.
std::vector<EncodedNote> encode_corpus(const std::vector<LabeledNote>& corpus,
                                       const Vocabulary& vocab,
                                       const EmbeddingMatrix& emb,
                                       const SifConfig& cfg, EncodeMode mode,
                                       const RunContext& ctx);

}  // namespace emrseg
