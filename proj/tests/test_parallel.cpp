#include <doctest.h>

#include "emrseg/pipeline.hpp"
#include "emrseg/sif.hpp"
#include "emrseg/synth.hpp"
#include "emrseg/tagger.hpp"
#include "emrseg/vocab.hpp"
#include "emrseg/word2vec.hpp"

using namespace emrseg;

// The OpenMP kernels must reproduce their serial references exactly: the
// parallel work units are independent and the reductions run in a fixed
// order, so results are bit-identical for any thread count.

namespace {

struct Fixture {
    std::vector<LabeledNote> corpus;
    Vocabulary vocab;
    EmbeddingMatrix emb;

    Fixture() {
        SectionGrammar grammar = SectionGrammar::defaults();
        NormalizerTables tables = NormalizerTables::defaults();
        std::vector<RawNote> raw = generate_notes(grammar, 80, 19);
        build_corpus(raw, CorpusKind::Mixed, 2, tables, &corpus);
        vocab = build_vocabulary_serial(corpus);
        SkipGramConfig cfg;
        cfg.dim = 16;
        cfg.window = 3;
        cfg.epochs = 1;
        cfg.seed = 4;
        RunContext ctx;
        emb = train_skipgram(corpus, vocab, cfg, ctx);
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("vocabulary: OpenMP count-and-merge equals the serial reference") {
    const auto& f = fixture();
    Vocabulary serial = build_vocabulary_serial(f.corpus);
    for (int threads : {2, 4}) {
        RunContext ctx;
        ctx.threads = threads;
        Vocabulary parallel = build_vocabulary(f.corpus, ctx);
        CHECK(parallel.words == serial.words);
        CHECK(parallel.counts == serial.counts);
        CHECK(parallel.total == serial.total);
        CHECK(parallel.hash() == serial.hash());
    }
}

TEST_CASE("encoding: OpenMP note loop is bit-identical to the serial reference") {
    const auto& f = fixture();
    SifConfig cfg;
    for (EncodeMode mode : {EncodeMode::Sif, EncodeMode::Ave}) {
        auto serial = encode_corpus_serial(f.corpus, f.vocab, f.emb, cfg, mode);
        RunContext ctx;
        ctx.threads = 4;
        auto parallel = encode_corpus(f.corpus, f.vocab, f.emb, cfg, mode, ctx);
        REQUIRE(parallel.size() == serial.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(parallel[i].data == serial[i].data);
            CHECK(parallel[i].all_oov == serial[i].all_oov);
        }
    }
}

TEST_CASE("batch gradients: ordered parallel reduction equals serial") {
    const auto& f = fixture();
    SifConfig sif;
    RunContext serial_ctx;
    std::vector<TaggerExample> examples =
        examples_from_corpus(f.corpus, f.vocab, f.emb, sif, EncodeMode::Sif, serial_ctx);

    TaggerModel model;
    model.init(f.emb.dim, 8, static_cast<int>(kNumLabels), 31);
    std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5, 6, 7};

    TaggerGrads<float> g_serial;
    g_serial.init_like(model);
    double nll_serial = batch_grads_serial(model, examples, batch, &g_serial);

    for (int threads : {2, 4}) {
        RunContext ctx;
        ctx.threads = threads;
        TaggerGrads<float> g_par;
        g_par.init_like(model);
        double nll_par = batch_grads(model, examples, batch, &g_par, ctx);
        CHECK(nll_par == nll_serial);
        CHECK(g_par.fw.wx == g_serial.fw.wx);
        CHECK(g_par.fw.wh == g_serial.fw.wh);
        CHECK(g_par.bw.wx == g_serial.bw.wx);
        CHECK(g_par.emit_w == g_serial.emit_w);
        CHECK(g_par.emit_b == g_serial.emit_b);
        CHECK(g_par.crf == g_serial.crf);
    }
}

TEST_CASE("full training is bit-identical across thread counts") {
    const auto& f = fixture();
    SifConfig sif;
    RunContext serial_ctx;
    serial_ctx.threads = 1;
    std::vector<TaggerExample> examples =
        examples_from_corpus(f.corpus, f.vocab, f.emb, sif, EncodeMode::Sif, serial_ctx);

    TrainConfig cfg;
    cfg.hidden = 8;
    cfg.batch_size = 8;
    cfg.max_epochs = 2;
    cfg.dev_fraction = 0.1;
    cfg.seed = 12;

    TaggerModel one = train_tagger(examples, f.emb.dim, static_cast<int>(kNumLabels),
                                   cfg, serial_ctx);
    RunContext four;
    four.threads = 4;
    TaggerModel many = train_tagger(examples, f.emb.dim, static_cast<int>(kNumLabels),
                                    cfg, four);
    CHECK(one.fw.wx == many.fw.wx);
    CHECK(one.bw.wh == many.bw.wh);
    CHECK(one.emit_w == many.emit_w);
    CHECK(one.crf.scores == many.crf.scores);
}

TEST_CASE("hogwild skip-gram trains and stays finite") {
    const auto& f = fixture();
    SkipGramConfig cfg;
    cfg.dim = 16;
    cfg.window = 3;
    cfg.epochs = 2;
    cfg.seed = 9;
    RunContext ctx;
    ctx.deterministic = false;
    ctx.threads = 4;
    SkipGramStats stats;
    EmbeddingMatrix emb = train_skipgram(f.corpus, f.vocab, cfg, ctx, &stats);
    REQUIRE(stats.epoch_loss.size() == 2);
    CHECK(stats.epoch_loss[1] < stats.epoch_loss[0] * 1.05);
    for (float x : emb.data) CHECK(std::isfinite(x));
}
