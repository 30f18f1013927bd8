#pragma once

#include <string>

#include "emrseg/sif.hpp"
#include "emrseg/tagger.hpp"
#include "emrseg/vocab.hpp"
#include "emrseg/word2vec.hpp"

namespace emrseg {

struct EmbeddingsFile {
    Vocabulary vocab;
    EmbeddingMatrix matrix;
};

// Native store: container with the matrix, the vocabulary blob, and its
// hash, plus a "word<TAB>count" sidecar at <path>.counts.
void save_embeddings(const std::string& path, const EmbeddingMatrix& matrix,
                     const Vocabulary& vocab);

// Accepts the native container or word2vec text ("V d" header then
// "word v1 ... vd" rows). Text files take counts from <path>.counts when
// present, otherwise every count defaults to 1.
EmbeddingsFile load_embeddings(const std::string& path);

void save_embeddings_text(const std::string& path, const EmbeddingMatrix& matrix,
                          const Vocabulary& vocab);

// Tagger-only container; round-trips are bit-exact.
void save_tagger(const std::string& path, const TaggerModel& model);
TaggerModel load_tagger(const std::string& path);

// Self-contained segmenter: embeddings + vocabulary + encoder settings +
// tagger, one file. What `segment` consumes.
struct SegmenterBundle {
    Vocabulary vocab;
    EmbeddingMatrix embeddings;
    SifConfig sif;
    EncodeMode mode = EncodeMode::Sif;
    TaggerModel tagger;
};

void save_bundle(const std::string& path, const SegmenterBundle& bundle);
SegmenterBundle load_bundle(const std::string& path);

}  // namespace emrseg
