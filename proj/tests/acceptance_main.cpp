// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Each criterion carries its own tolerance and runtime
// budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "emrseg/corpus.hpp"
#include "emrseg/crf.hpp"
#include "emrseg/errors.hpp"
#include "emrseg/metrics.hpp"
#include "emrseg/model_io.hpp"
#include "emrseg/pipeline.hpp"
#include "emrseg/rng.hpp"
#include "emrseg/sif.hpp"
#include "emrseg/synth.hpp"
#include "emrseg/tagger.hpp"
#include "emrseg/vocab.hpp"
#include "emrseg/word2vec.hpp"

using namespace emrseg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void require(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
};

using Clock = std::chrono::steady_clock;

double run_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

// ---- criterion 1: CRF oracle equivalence --------------------------------

Outcome criterion_crf_oracle() {
    Outcome out;
    Rng rng(1001);
    for (int trial = 0; trial < 200; ++trial) {
        int y = 2 + static_cast<int>(rng.below(4));   // <= 5
        int len = 1 + static_cast<int>(rng.below(4)); // <= 4
        CrfTable t = CrfTable::zeros(y);
        for (int a = 0; a < t.side(); ++a)
            for (int b = 0; b < t.side(); ++b)
                if (t.valid(a, b)) t.at(a, b) = rng.uniform(-2, 2);
        std::vector<double> e(static_cast<std::size_t>(len * y));
        for (double& x : e) x = rng.uniform(-3, 3);

        auto enumerated = oracle::enumerate_paths(e.data(), len, t);
        double log_z = crf_log_partition(e.data(), len, t);
        if (std::abs(log_z - enumerated.log_z) > 1e-9) {
            out.fail("logZ mismatch at trial " + std::to_string(trial));
            break;
        }
        auto [path, score] = viterbi_decode(e.data(), len, t);
        if (std::abs(score - enumerated.best_score) > 1e-9 ||
            path != enumerated.best_path) {
            out.fail("viterbi mismatch at trial " + std::to_string(trial));
            break;
        }
        double sum = 0;
        for (double s : enumerated.scores) sum += std::exp(s - log_z);
        if (std::abs(sum - 1.0) > 1e-9) {
            out.fail("path probabilities sum to " + std::to_string(sum));
            break;
        }
    }
    if (out.pass) out.detail = "200 instances vs exhaustive enumeration, 1e-9";
    return out;
}

// ---- criterion 2: full-loss gradient check ------------------------------

Outcome criterion_gradcheck() {
    Outcome out;
    const int d_in = 5, hidden = 4, labels = 3, len = 4;
    TaggerModelT<double> m;
    m.init(d_in, hidden, labels, 2024);
    Rng rng(2025);
    std::vector<double> inputs(static_cast<std::size_t>(len * d_in));
    for (double& x : inputs) x = rng.uniform(-1, 1);
    std::vector<int> gold(static_cast<std::size_t>(len));
    for (int& g : gold) g = static_cast<int>(rng.below(labels));

    TaggerGrads<double> grads;
    grads.init_like(m);
    note_nll_grad(m, inputs.data(), len, gold.data(), &grads);
    auto loss = [&]() { return note_nll(m, inputs.data(), len, gold.data()); };

    const double h = 1e-5;
    int checked = 0;
    double worst = 0.0;
    auto check_block = [&](std::vector<double>& params,
                           const std::vector<double>& analytic, const char* name) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            double saved = params[i];
            params[i] = saved + h;
            double up = loss();
            params[i] = saved - h;
            double down = loss();
            params[i] = saved;
            double numeric = (up - down) / (2 * h);
            double denom = std::max(1e-8, std::abs(numeric) + std::abs(analytic[i]));
            double rel = std::abs(numeric - analytic[i]) / denom;
            worst = std::max(worst, rel);
            ++checked;
            if (rel >= 1e-4) {
                out.fail(std::string(name) + "[" + std::to_string(i) + "] rel err " +
                         std::to_string(rel));
            }
        }
    };
    check_block(m.fw.wx, grads.fw.wx, "fw.wx");
    check_block(m.fw.wh, grads.fw.wh, "fw.wh");
    check_block(m.fw.b, grads.fw.b, "fw.b");
    check_block(m.bw.wx, grads.bw.wx, "bw.wx");
    check_block(m.bw.wh, grads.bw.wh, "bw.wh");
    check_block(m.bw.b, grads.bw.b, "bw.b");
    check_block(m.emit_w, grads.emit_w, "emit.w");
    check_block(m.emit_b, grads.emit_b, "emit.b");
    for (int a = 0; a < m.crf.side(); ++a) {
        for (int b = 0; b < m.crf.side(); ++b) {
            if (!m.crf.valid(a, b)) continue;
            double saved = m.crf.at(a, b);
            m.crf.at(a, b) = saved + h;
            double up = loss();
            m.crf.at(a, b) = saved - h;
            double down = loss();
            m.crf.at(a, b) = saved;
            double numeric = (up - down) / (2 * h);
            double analytic = grads.crf[static_cast<std::size_t>(a * m.crf.side() + b)];
            double denom = std::max(1e-8, std::abs(numeric) + std::abs(analytic));
            double rel = std::abs(numeric - analytic) / denom;
            worst = std::max(worst, rel);
            ++checked;
            if (rel >= 1e-4) out.fail("crf grad rel err " + std::to_string(rel));
        }
    }
    if (out.pass) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%d parameters, worst rel err %.2e", checked,
                      worst);
        out.detail = buf;
    }
    return out;
}

// ---- criterion 3: SIF correctness ---------------------------------------

Outcome criterion_sif() {
    Outcome out;
    out.require(sif_weight(0.001, 0.001) == 0.5, "weight(p=alpha) != 0.5");
    out.require(sif_weight(0.0, 0.001) == 1.0, "weight(p=0) != 1");

    // single-sentence note collapses to the zero vector
    Vocabulary v;
    for (auto [w, c] : std::vector<std::pair<std::string, std::int64_t>>{
             {"a", 3}, {"b", 7}}) {
        v.index.emplace(w, static_cast<std::int32_t>(v.words.size()));
        v.words.push_back(w);
        v.counts.push_back(c);
        v.total += c;
    }
    EmbeddingMatrix m;
    m.dim = 5;
    m.data = {1.f, -2.f, 0.5f, 3.f, 0.f, 2.f, 1.f, 1.f, -1.f, 0.25f};
    LabeledNote single;
    single.note_id = "s";
    LabeledSentence ls;
    ls.tokens = {"a", "b"};
    single.sentences = {ls};
    EncodedNote enc = encode_note(single, v, m, SifConfig{}, EncodeMode::Sif);
    for (std::size_t i = 0; i < enc.data.size(); ++i) {
        out.require(std::abs(enc.data[i]) <= 1e-9, "single-sentence vector not zero");
    }

    // power iteration vs the dense SVD oracle on 50 random small notes
    SifConfig cfg;
    Rng rng(3003);
    for (int trial = 0; trial < 50; ++trial) {
        int dim = 4 + static_cast<int>(rng.below(8));
        std::size_t count = 2 + rng.below(4);  // J <= 5
        std::vector<double> vectors(count * static_cast<std::size_t>(dim));
        for (double& x : vectors) x = rng.uniform(-1, 1);
        std::vector<double> u = dominant_direction(vectors.data(), count, dim, cfg);
        std::vector<double> su = oracle::dense_svd_direction(vectors.data(), count, dim);
        double dot = 0;
        for (int i = 0; i < dim; ++i) dot += u[static_cast<std::size_t>(i)] * su[static_cast<std::size_t>(i)];
        if (std::abs(dot) < 1.0 - 1e-6) {
            out.fail("power iteration cosine " + std::to_string(std::abs(dot)) +
                     " at trial " + std::to_string(trial));
            break;
        }
        // removal leaves every vector orthogonal to u
        remove_common_component(vectors.data(), count, dim, cfg);
        for (std::size_t j = 0; j < count; ++j) {
            double proj = 0, norm = 0;
            for (int i = 0; i < dim; ++i) {
                proj += u[static_cast<std::size_t>(i)] * vectors[j * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)];
                norm += vectors[j * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)] *
                        vectors[j * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)];
            }
            out.require(std::abs(proj) <= 1e-6 * std::max(1.0, std::sqrt(norm)),
                        "orthogonality violated");
        }
    }
    if (out.pass) out.detail = "weights exact, 50-note SVD oracle, orthogonality 1e-6";
    return out;
}

// ---- criterion 4: rule-based labeler fixtures ---------------------------

struct LabelFixture {
    std::string name;
    std::string text;
    std::vector<SectionLabel> expected;  // empty means NoAnchorSection
};

std::vector<LabelFixture> labeler_fixtures() {
    using L = SectionLabel;
    std::vector<LabelFixture> f;
    f.push_back({"rule1 exact",
                 "Chief Complaint:\nchest pain\nFamily History:\nfather with cancer\n",
                 {L::ChiefComplaint, L::ChiefComplaint, L::FamilyHistory, L::FamilyHistory}});
    f.push_back({"rule1 substring heading",
                 "Service:\nmedicine\nExam:\nlungs clear\n",
                 {L::Service, L::Service, L::PhysicalExam, L::PhysicalExam}});
    f.push_back({"rule1 superstring heading",
                 "Physical Examination:\nno edema\n",
                 {L::PhysicalExam, L::PhysicalExam}});
    f.push_back({"rule2 LAB after physical exam",
                 "Physical Exam:\nvitals stable\nLAB\nwbc 9.8\nFamily History:\nnoncontributory\n",
                 {L::PhysicalExam, L::PhysicalExam, L::PhysicalExam, L::PhysicalExam,
                  L::FamilyHistory, L::FamilyHistory}});
    f.push_back({"rule2 unmatched after family history",
                 "Family History:\nmother with diabetes\nGENETICS\nbrca negative\n",
                 {L::FamilyHistory, L::FamilyHistory, L::FamilyHistory, L::FamilyHistory}});
    f.push_back({"rule2 chained unmatched",
                 "Pertinent Result:\ntroponin elevated\nLAB\nsodium 140\nEKG\nsinus rhythm\n",
                 {L::PertinentResult, L::PertinentResult, L::PertinentResult,
                  L::PertinentResult, L::PertinentResult, L::PertinentResult}});
    f.push_back({"preamble dropped",
                 "some preamble text\nMISC\nmore preamble\nService:\nsurgery\n",
                 {L::Service, L::Service}});
    f.push_back({"no anchor: unmatched heading only", "ZZZ\nsome text\n", {}});
    f.push_back({"no anchor: no headings",
                 "no headings here just prose\nanother line\n", {}});
    f.push_back({"all-caps heading",
                 "PHYSICAL EXAM\nalert and oriented\n",
                 {L::PhysicalExam, L::PhysicalExam}});
    f.push_back({"substring tie goes to the longest then first label",
                 "Date:\n[**2118-6-7**]\n",
                 {L::AdmissionDate, L::AdmissionDate}});
    f.push_back({"medications matches discharge medications",
                 "Medications:\naspirin 81 mg daily\n",
                 {L::DischargeMedications, L::DischargeMedications}});
    f.push_back({"long colon line is not a heading",
                 "Hospital Course:\nthe patient did well and was monitored closely "
                 "overnight on telemetry:\nstable overnight\n",
                 {L::HospitalCourse, L::HospitalCourse, L::HospitalCourse}});
    f.push_back({"terminal punctuation splits content",
                 "Hospital Course:\nhe was stable. he was discharged.\n",
                 {L::HospitalCourse, L::HospitalCourse, L::HospitalCourse}});
    f.push_back({"masks and numbers",
                 "Admission Date:\n[**2118-6-7**]\nPhysical Exam:\nbp 120/80 mmhg\n",
                 {L::AdmissionDate, L::AdmissionDate, L::PhysicalExam, L::PhysicalExam}});
    f.push_back({"plural superstring review of systems",
                 "Review of Systems:\nnegative for fever\n",
                 {L::ReviewOfSystem, L::ReviewOfSystem}});
    f.push_back({"blank lines ignored",
                 "Social History:\n\nlives alone\n\nFamily History:\nnoncontributory\n",
                 {L::SocialHistory, L::SocialHistory, L::FamilyHistory, L::FamilyHistory}});
    f.push_back({"unmatched heading before first anchor dropped",
                 "IMAGING\nct head negative\nChief Complaint:\nfall\n",
                 {L::ChiefComplaint, L::ChiefComplaint}});
    f.push_back({"condition matches discharge condition",
                 "Discharge Diagnosis:\npneumonia\nCondition:\nstable\n",
                 {L::DischargeDiagnosis, L::DischargeDiagnosis, L::DischargeCondition,
                  L::DischargeCondition}});
    f.push_back({"case-insensitive headings",
                 "family history:\nbrother with cad\nSOCIAL HISTORY\ntobacco use\n",
                 {L::FamilyHistory, L::FamilyHistory, L::SocialHistory, L::SocialHistory}});
    return f;
}

Outcome criterion_labeler_fixtures() {
    Outcome out;
    NormalizerTables tables = NormalizerTables::defaults();
    auto fixtures = labeler_fixtures();
    if (fixtures.size() != 20) {
        out.fail("expected 20 fixtures, have " + std::to_string(fixtures.size()));
        return out;
    }
    for (const LabelFixture& fx : fixtures) {
        RawNote note;
        note.note_id = fx.name;
        note.text = fx.text;
        if (fx.expected.empty()) {
            try {
                assign_labels(note, tables);
                out.fail(fx.name + ": expected NoAnchorSection");
            } catch (const NoAnchorSectionError&) {
            }
            continue;
        }
        LabeledNote labeled;
        try {
            labeled = assign_labels(note, tables);
        } catch (const Error& e) {
            out.fail(fx.name + ": " + e.what());
            continue;
        }
        std::vector<SectionLabel> got;
        for (const auto& s : labeled.sentences) got.push_back(s.label);
        if (got != fx.expected) {
            std::string detail = fx.name + ": got [";
            for (SectionLabel l : got) detail += std::string(label_text(l)) + ", ";
            detail += "]";
            out.fail(detail);
        }
    }
    if (out.pass) out.detail = "20 fixtures, exact label sequences";
    return out;
}

// ---- criterion 5: overfit capacity --------------------------------------

Outcome criterion_overfit() {
    Outcome out;
    SectionGrammar grammar = SectionGrammar::defaults();
    NormalizerTables tables = NormalizerTables::defaults();
    std::vector<RawNote> raw = generate_notes(grammar, 10, 50);
    std::vector<LabeledNote> corpus;
    build_corpus(raw, CorpusKind::Mixed, 50, tables, &corpus);

    RunContext ctx;
    Vocabulary vocab = build_vocabulary(corpus, ctx);
    SkipGramConfig sg;
    sg.dim = 50;
    sg.window = 5;
    sg.epochs = 3;
    sg.seed = 50;
    EmbeddingMatrix emb = train_skipgram(corpus, vocab, sg, ctx);

    std::vector<TaggerExample> examples =
        examples_from_corpus(corpus, vocab, emb, SifConfig{}, EncodeMode::Sif, ctx);

    TrainConfig cfg;
    cfg.hidden = 64;
    cfg.batch_size = 4;
    cfg.max_epochs = 200;
    cfg.patience = 1000;       // run on capacity, not early stopping
    cfg.dev_fraction = 0.0;    // evaluate on the training notes themselves
    cfg.seed = 50;
    int epochs_used = 0;
    TaggerModel model = train_tagger(
        examples, emb.dim, static_cast<int>(kNumLabels), cfg, ctx, nullptr,
        [&epochs_used](const EpochLog& row) {
            epochs_used = row.epoch;
            return row.dev_accuracy < 0.995;  // stop once comfortably past 0.99
        });

    std::size_t correct = 0, total = 0;
    for (const auto& ex : examples) {
        std::vector<int> path = tagger_predict(model, ex.inputs.data(), ex.length());
        for (int i = 0; i < ex.length(); ++i) {
            correct += path[static_cast<std::size_t>(i)] == ex.gold[static_cast<std::size_t>(i)];
        }
        total += static_cast<std::size_t>(ex.length());
    }
    double acc = static_cast<double>(correct) / static_cast<double>(total);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "accuracy %.4f after %d epochs (H=64)", acc,
                  epochs_used);
    out.detail = buf;
    out.require(acc >= 0.99, "sentence accuracy below 0.99");
    out.require(epochs_used <= 200, "needed more than 200 epochs");
    return out;
}

// ---- criterion 6: end-to-end synthetic reproduction ----------------------

Outcome criterion_reproduce(ReproduceReport* report_out) {
    Outcome out;
    PipelineConfig cfg;
    cfg.seed = 42;
    cfg.reproduce_train_notes = 2000;
    cfg.reproduce_test_notes = 500;
    cfg.skipgram.dim = 300;
    cfg.skipgram.window = 16;
    cfg.skipgram.negatives = 5;
    cfg.skipgram.epochs = 3;
    cfg.train.hidden = 64;
    cfg.train.batch_size = 8;
    cfg.train.max_epochs = 15;
    cfg.train.patience = 3;
    cfg.train.dev_fraction = 0.1;

    fs::path dir = fs::temp_directory_path() / "emrseg_acceptance_reproduce";
    fs::remove_all(dir);
    ReproduceReport report = run_reproduce(cfg, dir.string(), true, &std::cerr);
    if (report_out) *report_out = report;

    const auto& mixed = report.cells.at(CorpusKind::Mixed);
    const auto& ho = report.cells.at(CorpusKind::HeadingsOnly);
    const auto& nh = report.cells.at(CorpusKind::NoHeadings);

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "mixed %.4f/%.4f/%.4f/%.4f ho t1 %.4f t2 %.4f nh t4 %.4f sif %.4f ave %.4f",
                  mixed.at(SampleType::Type1), mixed.at(SampleType::Type2),
                  mixed.at(SampleType::Type3), mixed.at(SampleType::Type4),
                  ho.at(SampleType::Type1), ho.at(SampleType::Type2),
                  nh.at(SampleType::Type4), report.mixed_sif_overall,
                  report.mixed_ave_overall);
    out.detail = buf;

    for (SampleType t : {SampleType::Type1, SampleType::Type2, SampleType::Type3,
                         SampleType::Type4}) {
        out.require(mixed.at(t) >= 0.95,
                    "(a) mixed model below 0.95 on " + std::string(sample_type_text(t)));
    }
    out.require(ho.at(SampleType::Type2) - ho.at(SampleType::Type1) >= 0.2,
                "(b) headings-only type1 drop below 0.2");
    for (SampleType t : {SampleType::Type1, SampleType::Type2, SampleType::Type3}) {
        out.require(nh.at(SampleType::Type4) < nh.at(t),
                    "(c) no-headings type4 is not the weakest cell");
    }
    out.require(report.mixed_sif_overall >= report.mixed_ave_overall,
                "(d) SIF mixed model below AVE mixed model");
    return out;
}

// ---- criterion 7: determinism and serialization --------------------------

Outcome criterion_determinism() {
    Outcome out;
    fs::path dir = fs::temp_directory_path() / "emrseg_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto p = [&dir](const std::string& name) { return (dir / name).string(); };

    PipelineConfig cfg;
    cfg.seed = 77;
    cfg.synth_notes = 40;
    cfg.skipgram.dim = 32;
    cfg.skipgram.window = 4;
    cfg.skipgram.epochs = 2;
    cfg.train.hidden = 12;
    cfg.train.max_epochs = 6;
    cfg.train.batch_size = 4;

    run_synth(cfg, p("a.jsonl"));
    run_synth(cfg, p("b.jsonl"));
    out.require(read_bytes(p("a.jsonl")) == read_bytes(p("b.jsonl")),
                "synth corpora differ across runs");

    run_prep(cfg, p("a.jsonl"), p("train1.jsonl"), p("test1.jsonl"), true);
    run_prep(cfg, p("a.jsonl"), p("train2.jsonl"), p("test2.jsonl"), true);
    out.require(read_bytes(p("train1.jsonl")) == read_bytes(p("train2.jsonl")),
                "prep train corpora differ");
    out.require(read_bytes(p("test1.jsonl")) == read_bytes(p("test2.jsonl")),
                "prep test corpora differ");

    run_train_embeddings(cfg, p("train1.jsonl"), p("emb1.bin"));
    run_train_embeddings(cfg, p("train1.jsonl"), p("emb2.bin"));
    out.require(read_bytes(p("emb1.bin")) == read_bytes(p("emb2.bin")),
                "embedding containers differ");

    run_train(cfg, p("train1.jsonl"), p("emb1.bin"), p("model1.bin"), p("log1.tsv"));
    run_train(cfg, p("train1.jsonl"), p("emb1.bin"), p("model2.bin"), p("log2.tsv"));
    out.require(read_bytes(p("model1.bin")) == read_bytes(p("model2.bin")),
                "models differ across identical runs");
    out.require(read_bytes(p("log1.tsv")) == read_bytes(p("log2.tsv")),
                "training logs differ");

    EvalReport r1 = run_eval(cfg, p("model1.bin"), p("test1.jsonl"));
    EvalReport r2 = run_eval(cfg, p("model1.bin"), p("test1.jsonl"));
    out.require(r1.to_json().dump() == r2.to_json().dump(), "reports differ");

    // save/load round-trip: bit-exact bytes and unchanged predictions
    SegmenterBundle bundle = load_bundle(p("model1.bin"));
    save_bundle(p("model_resaved.bin"), bundle);
    out.require(read_bytes(p("model1.bin")) == read_bytes(p("model_resaved.bin")),
                "bundle save/load round-trip is not bit-exact");

    SegmenterBundle reloaded = load_bundle(p("model_resaved.bin"));
    std::vector<LabeledNote> test = read_corpus_jsonl(p("test1.jsonl"));
    RunContext ctx;
    std::vector<TaggerExample> examples = examples_from_corpus(
        test, bundle.vocab, bundle.embeddings, bundle.sif, bundle.mode, ctx);
    for (const auto& ex : examples) {
        auto before = tagger_predict(bundle.tagger, ex.inputs.data(), ex.length());
        auto after = tagger_predict(reloaded.tagger, ex.inputs.data(), ex.length());
        if (before != after) {
            out.fail("predictions changed across reload");
            break;
        }
    }
    if (out.pass) out.detail = "byte-identical corpora, embeddings, models, reports";
    return out;
}

struct Criterion {
    int number;
    std::string title;
    double budget_seconds;
    Outcome (*run)();
};

}  // namespace

int main() {
    int failures = 0;
    ReproduceReport reproduce_report;

    struct Row {
        int number;
        const char* title;
        double budget;
        std::function<Outcome()> run;
    };
    std::vector<Row> rows = {
        {1, "CRF oracle equivalence", 10.0, criterion_crf_oracle},
        {2, "gradient check", 30.0, criterion_gradcheck},
        {3, "SIF correctness", 10.0, criterion_sif},
        {4, "rule-based labeler fixtures", 60.0, criterion_labeler_fixtures},
        {5, "overfit capacity", 180.0, criterion_overfit},
        {6, "end-to-end synthetic reproduction", 900.0,
         [&reproduce_report] { return criterion_reproduce(&reproduce_report); }},
        {7, "determinism and serialization", 120.0, criterion_determinism},
    };

    for (const Row& row : rows) {
        auto start = Clock::now();
        Outcome out;
        try {
            out = row.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        double elapsed = run_seconds(start);
        if (elapsed > row.budget) {
            out.fail("runtime " + std::to_string(elapsed) + "s over budget " +
                     std::to_string(row.budget) + "s");
        }
        std::printf("[%s] criterion %d: %s (%.1fs) %s\n", out.pass ? "PASS" : "FAIL",
                    row.number, row.title, elapsed,
                    out.detail.empty() ? "" : out.detail.c_str());
        std::fflush(stdout);
        failures += out.pass ? 0 : 1;
    }

    if (reproduce_report.cells.size() == 3) {
        std::printf("\n%s", reproduce_report.table_text().c_str());
    }
    return failures;
}
