#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "emrseg/corpus.hpp"
#include "emrseg/metrics.hpp"
#include "emrseg/model_io.hpp"
#include "emrseg/parallel.hpp"
#include "emrseg/sif.hpp"
#include "emrseg/synth.hpp"
#include "emrseg/tagger.hpp"
#include "emrseg/word2vec.hpp"

namespace emrseg {

// Flat key = value configuration; CLI flags override file values.
struct PipelineConfig {
    std::uint64_t seed = 1;
    RunContext run;

    std::string grammar_path;  // empty: built-in default grammar
    std::size_t synth_notes = 2500;

    CorpusKind kind = CorpusKind::Mixed;
    double train_fraction = 0.8;
    std::size_t max_sentence_tokens = kDefaultMaxSentenceTokens;
    std::string units_path;
    std::string cues_path;

    SkipGramConfig skipgram;
    SifConfig sif;
    EncodeMode encoder = EncodeMode::Sif;
    TrainConfig train;

    std::size_t reproduce_train_notes = 2000;
    std::size_t reproduce_test_notes = 500;

    void load_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);

    // Canonical rendering of every setting; hashed into reports.
    std::string canonical_text() const;
    std::string hash() const;

    NormalizerTables tables() const;
    SectionGrammar grammar() const;
};

// CRC-32 of a file's bytes, 8 hex digits; provenance for reports.
std::string file_hash(const std::string& path);

// synth: n labeled Type2 notes from the grammar. raw_dir, when non-empty,
// also receives one raw .txt per note. Returns the number written.
std::size_t run_synth(const PipelineConfig& cfg, const std::string& out_corpus,
                      const std::string& raw_dir = "");

struct PrepStats {
    std::size_t train_notes = 0;
    std::size_t test_notes = 0;
    std::size_t skipped = 0;
};

// prep: raw notes (directory of .txt) or a Type2 corpus (.jsonl) ->
// train corpus of the configured kind + test corpus. The test side renders
// all four sample types per note when test_all_types is set, else the
// kind's own type.
PrepStats run_prep(const PipelineConfig& cfg, const std::string& input,
                   const std::string& out_train, const std::string& out_test,
                   bool test_all_types);

// train-embeddings: skip-gram over a corpus file -> native container +
// counts sidecar.
void run_train_embeddings(const PipelineConfig& cfg, const std::string& corpus_path,
                          const std::string& out_path);

// train: corpus + embeddings -> self-contained segmenter bundle, plus an
// epoch log ("epoch\ttrain_nll\tdev_nll\tdev_acc" rows) when log_path given.
void run_train(const PipelineConfig& cfg, const std::string& corpus_path,
               const std::string& embeddings_path, const std::string& model_out,
               const std::string& log_path = "");

struct SegmentRecord {
    std::string text;
    SectionLabel label = SectionLabel::AdmissionDate;
    std::string note_id;
    std::size_t index = 0;
};

// segment: raw note text -> one labeled record per sentence.
std::vector<SegmentRecord> run_segment(const PipelineConfig& cfg,
                                       const SegmenterBundle& bundle,
                                       const RawNote& note);
void write_segments_jsonl(std::ostream& out, const std::vector<SegmentRecord>& records);

// eval: bundle + labeled corpus -> report (accuracy per sample type present).
EvalReport run_eval(const PipelineConfig& cfg, const std::string& model_path,
                    const std::string& corpus_path);

struct ReproduceReport {
    std::uint64_t seed = 0;
    std::string config_hash;
    // training corpus kind -> sample type -> accuracy (12 cells)
    std::map<CorpusKind, std::map<SampleType, double>> cells;
    // AVE-encoder comparison row (mixed training corpus)
    std::map<SampleType, double> ave_mixed;
    double mixed_sif_overall = 0.0;
    double mixed_ave_overall = 0.0;

    nlohmann::ordered_json to_json() const;
    std::string table_text() const;
};

// reproduce: synthesize train/test corpora, train embeddings once, train one
// model per corpus kind, evaluate each on the four test sample types.
// with_ave adds the AVE-encoder mixed model. Artifacts land in out_dir.
ReproduceReport run_reproduce(const PipelineConfig& cfg, const std::string& out_dir,
                              bool with_ave, std::ostream* progress = nullptr);

// Encodes a labeled corpus into float training examples (gold = label ids).
std::vector<TaggerExample> examples_from_corpus(const std::vector<LabeledNote>& corpus,
                                                const Vocabulary& vocab,
                                                const EmbeddingMatrix& emb,
                                                const SifConfig& sif, EncodeMode mode,
                                                const RunContext& ctx);

}  // namespace emrseg
