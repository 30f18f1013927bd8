// Benchmark comparing the serial reference kernels against their OpenMP
// counterparts: vocabulary build, corpus encoding, and batch gradients.
// Usage: emrseg_bench [notes] [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "emrseg/pipeline.hpp"
#include "emrseg/sif.hpp"
#include "emrseg/synth.hpp"
#include "emrseg/tagger.hpp"
#include "emrseg/vocab.hpp"
#include "emrseg/word2vec.hpp"

using namespace emrseg;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
double time_call(F&& f) {
    auto start = Clock::now();
    f();
    return seconds_since(start);
}

void report(const char* name, double serial_s, double parallel_s) {
    std::printf("%-24s serial %8.3fs   openmp %8.3fs   speedup %5.2fx\n", name,
                serial_s, parallel_s, parallel_s > 0 ? serial_s / parallel_s : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n_notes = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 300;
    int threads = argc > 2 ? std::atoi(argv[2]) : 0;

    RunContext par;
    par.threads = threads;
    std::printf("notes: %zu   threads: %d\n\n", n_notes, effective_threads(par));

    SectionGrammar grammar = SectionGrammar::defaults();
    NormalizerTables tables = NormalizerTables::defaults();
    std::vector<RawNote> raw = generate_notes(grammar, n_notes, 1);
    std::vector<LabeledNote> corpus;
    build_corpus(raw, CorpusKind::Mixed, 1, tables, &corpus);

    Vocabulary vocab;
    double t_serial = time_call([&] { vocab = build_vocabulary_serial(corpus); });
    Vocabulary vocab_par;
    double t_par = time_call([&] { vocab_par = build_vocabulary(corpus, par); });
    report("vocabulary build", t_serial, t_par);

    SkipGramConfig sg;
    sg.dim = 64;
    sg.window = 8;
    sg.epochs = 1;
    sg.seed = 1;
    RunContext det;
    EmbeddingMatrix emb;
    t_serial = time_call([&] { emb = train_skipgram(corpus, vocab, sg, det); });
    RunContext hogwild = par;
    hogwild.deterministic = false;
    t_par = time_call([&] { train_skipgram(corpus, vocab, sg, hogwild); });
    report("skip-gram epoch", t_serial, t_par);

    SifConfig sif;
    t_serial = time_call([&] { encode_corpus_serial(corpus, vocab, emb, sif, EncodeMode::Sif); });
    t_par = time_call([&] { encode_corpus(corpus, vocab, emb, sif, EncodeMode::Sif, par); });
    report("sif encode", t_serial, t_par);

    std::vector<TaggerExample> examples =
        examples_from_corpus(corpus, vocab, emb, sif, EncodeMode::Sif, par);
    TaggerModel model;
    model.init(emb.dim, 64, static_cast<int>(kNumLabels), 3);
    std::vector<std::size_t> batch(std::min<std::size_t>(corpus.size(), 32));
    std::iota(batch.begin(), batch.end(), 0);

    TaggerGrads<float> grads;
    grads.init_like(model);
    t_serial = time_call([&] { batch_grads_serial(model, examples, batch, &grads); });
    grads.init_like(model);
    t_par = time_call([&] { batch_grads(model, examples, batch, &grads, par); });
    report("batch gradients (32)", t_serial, t_par);

    return 0;
}
