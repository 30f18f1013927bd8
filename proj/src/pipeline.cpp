#include "emrseg/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "emrseg/errors.hpp"

namespace fs = std::filesystem;

namespace emrseg {

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw FormatError("expected a boolean, got '" + v + "'");
}

std::string crc_hex(std::uint32_t crc) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08x", crc);
    return buf;
}

}  // namespace

void PipelineConfig::apply(const std::string& key, const std::string& value) {
    if (key == "seed") seed = std::stoull(value);
    else if (key == "threads") run.threads = std::stoi(value);
    else if (key == "deterministic") run.deterministic = parse_bool(value);
    else if (key == "grammar") grammar_path = value;
    else if (key == "synth.notes") synth_notes = std::stoull(value);
    else if (key == "prep.kind") {
        auto k = corpus_kind_from_text(value);
        if (!k) throw FormatError("unknown corpus kind: " + value);
        kind = *k;
    } else if (key == "prep.train_fraction") train_fraction = std::stod(value);
    else if (key == "prep.max_sentence_tokens") max_sentence_tokens = std::stoull(value);
    else if (key == "units") units_path = value;
    else if (key == "cues") cues_path = value;
    else if (key == "sg.dim") skipgram.dim = std::stoi(value);
    else if (key == "sg.window") skipgram.window = std::stoi(value);
    else if (key == "sg.negatives") skipgram.negatives = std::stoi(value);
    else if (key == "sg.epochs") skipgram.epochs = std::stoi(value);
    else if (key == "sg.lr") skipgram.learning_rate = std::stof(value);
    else if (key == "sif.alpha") sif.alpha = std::stod(value);
    else if (key == "sif.power_iters") sif.power_iters = std::stoi(value);
    else if (key == "sif.power_tol") sif.power_tol = std::stod(value);
    else if (key == "encoder") {
        auto m = encode_mode_from_text(value);
        if (!m) throw FormatError("unknown encoder mode: " + value);
        encoder = *m;
    } else if (key == "train.hidden") train.hidden = std::stoi(value);
    else if (key == "train.lr") train.learning_rate = std::stod(value);
    else if (key == "train.batch") train.batch_size = std::stoi(value);
    else if (key == "train.epochs") train.max_epochs = std::stoi(value);
    else if (key == "train.patience") train.patience = std::stoi(value);
    else if (key == "train.clip") train.clip_norm = std::stod(value);
    else if (key == "train.dev_fraction") train.dev_fraction = std::stod(value);
    else if (key == "reproduce.train_notes") reproduce_train_notes = std::stoull(value);
    else if (key == "reproduce.test_notes") reproduce_test_notes = std::stoull(value);
    else throw FormatError("unknown config key: " + key);
}

void PipelineConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim_copy(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        apply(trim_copy(t.substr(0, eq)), trim_copy(t.substr(eq + 1)));
    }
}

std::string PipelineConfig::canonical_text() const {
    std::ostringstream o;
    o << "seed = " << seed << '\n';
    o << "threads = " << run.threads << '\n';
    o << "deterministic = " << (run.deterministic ? "true" : "false") << '\n';
    o << "grammar = " << grammar_path << '\n';
    o << "synth.notes = " << synth_notes << '\n';
    o << "prep.kind = " << corpus_kind_text(kind) << '\n';
    o << "prep.train_fraction = " << train_fraction << '\n';
    o << "prep.max_sentence_tokens = " << max_sentence_tokens << '\n';
    o << "units = " << units_path << '\n';
    o << "cues = " << cues_path << '\n';
    o << "sg.dim = " << skipgram.dim << '\n';
    o << "sg.window = " << skipgram.window << '\n';
    o << "sg.negatives = " << skipgram.negatives << '\n';
    o << "sg.epochs = " << skipgram.epochs << '\n';
    o << "sg.lr = " << skipgram.learning_rate << '\n';
    o << "sif.alpha = " << sif.alpha << '\n';
    o << "sif.power_iters = " << sif.power_iters << '\n';
    o << "sif.power_tol = " << sif.power_tol << '\n';
    o << "encoder = " << encode_mode_text(encoder) << '\n';
    o << "train.hidden = " << train.hidden << '\n';
    o << "train.lr = " << train.learning_rate << '\n';
    o << "train.batch = " << train.batch_size << '\n';
    o << "train.epochs = " << train.max_epochs << '\n';
    o << "train.patience = " << train.patience << '\n';
    o << "train.clip = " << train.clip_norm << '\n';
    o << "train.dev_fraction = " << train.dev_fraction << '\n';
    o << "reproduce.train_notes = " << reproduce_train_notes << '\n';
    o << "reproduce.test_notes = " << reproduce_test_notes << '\n';
    return o.str();
}

std::string PipelineConfig::hash() const {
    std::string text = canonical_text();
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(text.data()),
                static_cast<uInt>(text.size()));
    return crc_hex(static_cast<std::uint32_t>(crc));
}

NormalizerTables PipelineConfig::tables() const {
    NormalizerTables t = NormalizerTables::defaults();
    if (!units_path.empty()) t.load_units(units_path);
    if (!cues_path.empty()) t.load_cues(cues_path);
    return t;
}

SectionGrammar PipelineConfig::grammar() const {
    if (grammar_path.empty()) {
        SectionGrammar g = SectionGrammar::defaults();
        g.validate(tables());
        return g;
    }
    return SectionGrammar::load(grammar_path);
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash file: " + path);
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize n = in.gcount();
        if (n > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(n));
    }
    return crc_hex(static_cast<std::uint32_t>(crc));
}

std::size_t run_synth(const PipelineConfig& cfg, const std::string& out_corpus,
                      const std::string& raw_dir) {
    NormalizerTables tables = cfg.tables();
    SectionGrammar grammar = cfg.grammar();
    std::vector<RawNote> raw = generate_notes(grammar, cfg.synth_notes, cfg.seed);

    if (!raw_dir.empty()) {
        fs::create_directories(raw_dir);
        for (const RawNote& note : raw) {
            std::ofstream f(fs::path(raw_dir) / (note.note_id + ".txt"), std::ios::binary);
            if (!f) throw IoError("cannot write raw note in " + raw_dir);
            f << note.text;
        }
    }

    std::vector<LabeledNote> corpus;
    corpus.reserve(raw.size());
    for (const RawNote& note : raw) {
        corpus.push_back(assign_labels(note, tables, cfg.max_sentence_tokens));
    }
    write_corpus_jsonl(out_corpus, corpus);
    return corpus.size();
}

namespace {

std::vector<RawNote> read_raw_dir(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RawNote> notes;
    notes.reserve(files.size());
    for (const fs::path& p : files) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IoError("cannot read note: " + p.string());
        RawNote note;
        note.note_id = p.stem().string();
        note.text.assign((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        notes.push_back(std::move(note));
    }
    return notes;
}

SampleType kind_sample_type(CorpusKind kind, Rng* rng) {
    switch (kind) {
        case CorpusKind::HeadingsOnly: return SampleType::Type2;
        case CorpusKind::NoHeadings: return SampleType::Type1;
        case CorpusKind::Mixed: return static_cast<SampleType>(rng->below(4));
    }
    return SampleType::Type2;
}

}  // namespace

PrepStats run_prep(const PipelineConfig& cfg, const std::string& input,
                   const std::string& out_train, const std::string& out_test,
                   bool test_all_types) {
    NormalizerTables tables = cfg.tables();
    PrepStats stats;

    // Base Type2 notes, either labeled here from raw text or reloaded.
    std::vector<LabeledNote> base;
    if (fs::is_directory(input)) {
        for (const RawNote& note : read_raw_dir(input)) {
            try {
                base.push_back(assign_labels(note, tables, cfg.max_sentence_tokens));
            } catch (const NoAnchorSectionError&) {
                ++stats.skipped;
            } catch (const EmptyNoteError&) {
                ++stats.skipped;
            }
        }
    } else {
        base = read_corpus_jsonl(input);
    }

    auto [train_base, test_base] = split_train_test(base, cfg.train_fraction, cfg.seed);

    Rng type_rng(cfg.seed ^ 0xC0FFEEULL);
    std::vector<LabeledNote> train;
    train.reserve(train_base.size());
    for (const LabeledNote& note : train_base) {
        train.push_back(make_sample(note, kind_sample_type(cfg.kind, &type_rng)));
    }
    std::vector<LabeledNote> test;
    for (const LabeledNote& note : test_base) {
        if (test_all_types) {
            for (SampleType t : {SampleType::Type1, SampleType::Type2, SampleType::Type3,
                                 SampleType::Type4}) {
                test.push_back(make_sample(note, t));
            }
        } else {
            test.push_back(make_sample(note, kind_sample_type(cfg.kind, &type_rng)));
        }
    }

    write_corpus_jsonl(out_train, train);
    write_corpus_jsonl(out_test, test);
    stats.train_notes = train.size();
    stats.test_notes = test.size();
    return stats;
}

void run_train_embeddings(const PipelineConfig& cfg, const std::string& corpus_path,
                          const std::string& out_path) {
    std::vector<LabeledNote> corpus = read_corpus_jsonl(corpus_path);
    Vocabulary vocab = build_vocabulary(corpus, cfg.run);
    SkipGramConfig sg = cfg.skipgram;
    sg.seed = cfg.seed;
    EmbeddingMatrix matrix = train_skipgram(corpus, vocab, sg, cfg.run);
    save_embeddings(out_path, matrix, vocab);
}

std::vector<TaggerExample> examples_from_corpus(const std::vector<LabeledNote>& corpus,
                                                const Vocabulary& vocab,
                                                const EmbeddingMatrix& emb,
                                                const SifConfig& sif, EncodeMode mode,
                                                const RunContext& ctx) {
    std::vector<TaggerExample> examples(corpus.size());
    int threads = effective_threads(ctx);
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.size()); ++i) {
        auto k = static_cast<std::size_t>(i);
        EncodedNote enc = encode_note(corpus[k], vocab, emb, sif, mode);
        TaggerExample& ex = examples[k];
        ex.inputs.resize(enc.data.size());
        for (std::size_t j = 0; j < enc.data.size(); ++j) {
            ex.inputs[j] = static_cast<float>(enc.data[j]);
        }
        ex.gold.reserve(corpus[k].sentences.size());
        for (const LabeledSentence& s : corpus[k].sentences) {
            ex.gold.push_back(static_cast<int>(s.label));
        }
    }
    return examples;
}

namespace {

std::vector<std::vector<int>> predict_examples(const TaggerModel& model,
                                               const std::vector<TaggerExample>& examples,
                                               const RunContext& ctx) {
    std::vector<std::vector<int>> out(examples.size());
    int threads = effective_threads(ctx);
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(examples.size()); ++i) {
        auto k = static_cast<std::size_t>(i);
        out[k] = tagger_predict(model, examples[k].inputs.data(), examples[k].length());
    }
    return out;
}

void write_epoch_log(const std::string& path, const std::vector<EpochLog>& log) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write training log: " + path);
    f << "epoch\ttrain_nll\tdev_nll\tdev_acc\n";
    char buf[128];
    for (const EpochLog& row : log) {
        std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6f\n", row.epoch,
                      row.train_nll, row.dev_nll, row.dev_accuracy);
        f << buf;
    }
}

}  // namespace

void run_train(const PipelineConfig& cfg, const std::string& corpus_path,
               const std::string& embeddings_path, const std::string& model_out,
               const std::string& log_path) {
    std::vector<LabeledNote> corpus = read_corpus_jsonl(corpus_path);
    if (corpus.empty()) throw Error("training corpus is empty: " + corpus_path);
    EmbeddingsFile emb = load_embeddings(embeddings_path);

    std::vector<TaggerExample> examples =
        examples_from_corpus(corpus, emb.vocab, emb.matrix, cfg.sif, cfg.encoder, cfg.run);

    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;
    std::vector<EpochLog> log;
    TaggerModel model = train_tagger(examples, emb.matrix.dim,
                                     static_cast<int>(kNumLabels), train_cfg, cfg.run,
                                     &log);

    SegmenterBundle bundle;
    bundle.vocab = std::move(emb.vocab);
    bundle.embeddings = std::move(emb.matrix);
    bundle.sif = cfg.sif;
    bundle.mode = cfg.encoder;
    bundle.tagger = std::move(model);
    save_bundle(model_out, bundle);
    if (!log_path.empty()) write_epoch_log(log_path, log);
}

std::vector<SegmentRecord> run_segment(const PipelineConfig& cfg,
                                       const SegmenterBundle& bundle,
                                       const RawNote& note) {
    NormalizerTables tables = cfg.tables();
    std::vector<Sentence> sentences =
        split_sentences(note, tables, cfg.max_sentence_tokens);

    LabeledNote shim;
    shim.note_id = note.note_id;
    for (Sentence& s : sentences) {
        LabeledSentence ls;
        ls.tokens = s.tokens;
        shim.sentences.push_back(std::move(ls));
    }
    EncodedNote enc =
        encode_note(shim, bundle.vocab, bundle.embeddings, bundle.sif, bundle.mode);
    std::vector<float> inputs(enc.data.size());
    for (std::size_t i = 0; i < enc.data.size(); ++i) {
        inputs[i] = static_cast<float>(enc.data[i]);
    }
    if (bundle.tagger.input_dim != enc.dim) {
        throw FormatError("model expects input dim " +
                          std::to_string(bundle.tagger.input_dim) + ", got " +
                          std::to_string(enc.dim));
    }
    std::vector<int> path = tagger_predict(bundle.tagger, inputs.data(),
                                           static_cast<int>(enc.length));

    std::vector<SegmentRecord> records;
    records.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        SegmentRecord r;
        std::string_view text(note.text);
        std::string_view slice =
            text.substr(sentences[i].span_begin,
                        sentences[i].span_end - sentences[i].span_begin);
        while (!slice.empty() && (slice.front() == ' ' || slice.front() == '\t')) slice.remove_prefix(1);
        while (!slice.empty() && (slice.back() == ' ' || slice.back() == '\t' || slice.back() == '\r')) slice.remove_suffix(1);
        r.text = std::string(slice);
        r.label = static_cast<SectionLabel>(path[i]);
        r.note_id = note.note_id;
        r.index = i;
        records.push_back(std::move(r));
    }
    return records;
}

void write_segments_jsonl(std::ostream& out, const std::vector<SegmentRecord>& records) {
    for (const SegmentRecord& r : records) {
        nlohmann::ordered_json j;
        j["text"] = r.text;
        j["label"] = label_text(r.label);
        j["note_id"] = r.note_id;
        j["index"] = r.index;
        out << j.dump() << '\n';
    }
}

EvalReport run_eval(const PipelineConfig& cfg, const std::string& model_path,
                    const std::string& corpus_path) {
    SegmenterBundle bundle = load_bundle(model_path);
    std::vector<LabeledNote> test = read_corpus_jsonl(corpus_path);
    if (test.empty()) throw Error("test corpus is empty: " + corpus_path);

    std::vector<TaggerExample> examples = examples_from_corpus(
        test, bundle.vocab, bundle.embeddings, bundle.sif, bundle.mode, cfg.run);
    std::vector<std::vector<int>> preds = predict_examples(bundle.tagger, examples, cfg.run);

    EvalReport report = evaluate(test, preds);
    report.encoder = std::string(encode_mode_text(bundle.mode));
    report.seed = cfg.seed;
    report.config_hash = cfg.hash();
    report.corpus_hash = file_hash(corpus_path);
    report.model_hash = file_hash(model_path);
    return report;
}

nlohmann::ordered_json ReproduceReport::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    nlohmann::ordered_json matrix;
    for (const auto& [kind, row] : cells) {
        nlohmann::ordered_json r;
        for (const auto& [type, acc] : row) r[std::string(sample_type_text(type))] = acc;
        matrix[std::string(corpus_kind_text(kind))] = std::move(r);
    }
    j["cells"] = std::move(matrix);
    if (!ave_mixed.empty()) {
        nlohmann::ordered_json r;
        for (const auto& [type, acc] : ave_mixed) r[std::string(sample_type_text(type))] = acc;
        j["ave_mixed"] = std::move(r);
        j["mixed_sif_overall"] = mixed_sif_overall;
        j["mixed_ave_overall"] = mixed_ave_overall;
    }
    return j;
}

std::string ReproduceReport::table_text() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-22s %8s %8s %8s %8s\n", "training corpus",
                  "type1", "type2", "type3", "type4");
    out += buf;
    for (const auto& [kind, row] : cells) {
        std::snprintf(buf, sizeof(buf), "%-22s %8.4f %8.4f %8.4f %8.4f\n",
                      std::string(corpus_kind_text(kind)).c_str(),
                      row.at(SampleType::Type1), row.at(SampleType::Type2),
                      row.at(SampleType::Type3), row.at(SampleType::Type4));
        out += buf;
    }
    if (!ave_mixed.empty()) {
        std::snprintf(buf, sizeof(buf), "%-22s %8.4f %8.4f %8.4f %8.4f\n", "mixed (ave encoder)",
                      ave_mixed.at(SampleType::Type1), ave_mixed.at(SampleType::Type2),
                      ave_mixed.at(SampleType::Type3), ave_mixed.at(SampleType::Type4));
        out += buf;
    }
    return out;
}

ReproduceReport run_reproduce(const PipelineConfig& cfg, const std::string& out_dir,
                              bool with_ave, std::ostream* progress) {
    auto say = [progress](const std::string& msg) {
        if (progress) *progress << "[reproduce] " << msg << std::endl;
    };
    fs::create_directories(out_dir);
    NormalizerTables tables = cfg.tables();
    SectionGrammar grammar = cfg.grammar();

    std::size_t n_total = cfg.reproduce_train_notes + cfg.reproduce_test_notes;
    say("generating " + std::to_string(n_total) + " synthetic notes");
    std::vector<RawNote> notes = generate_notes(grammar, n_total, cfg.seed);
    double fraction = static_cast<double>(cfg.reproduce_train_notes) /
                      static_cast<double>(n_total);
    auto [train_raw, test_raw] = split_train_test(notes, fraction, cfg.seed ^ 0x517CC1B7ULL);

    auto corpus_path = [&out_dir](const std::string& name) {
        return (fs::path(out_dir) / name).string();
    };

    std::map<CorpusKind, std::vector<LabeledNote>> train;
    for (CorpusKind kind : {CorpusKind::HeadingsOnly, CorpusKind::NoHeadings,
                            CorpusKind::Mixed}) {
        std::vector<LabeledNote> corpus;
        BuildStats st = build_corpus(train_raw, kind, cfg.seed + static_cast<std::uint64_t>(kind),
                                     tables, &corpus, cfg.max_sentence_tokens);
        if (st.skipped) say(std::to_string(st.skipped) + " notes skipped (no anchor section)");
        write_corpus_jsonl(corpus_path("train_" + std::string(corpus_kind_text(kind)) + ".jsonl"),
                           corpus);
        train[kind] = std::move(corpus);
    }

    std::map<SampleType, std::vector<LabeledNote>> test;
    for (const RawNote& note : test_raw) {
        LabeledNote base;
        try {
            base = assign_labels(note, tables, cfg.max_sentence_tokens);
        } catch (const NoAnchorSectionError&) {
            continue;
        }
        for (SampleType t : {SampleType::Type1, SampleType::Type2, SampleType::Type3,
                             SampleType::Type4}) {
            test[t].push_back(make_sample(base, t));
        }
    }
    for (const auto& [t, corpus] : test) {
        write_corpus_jsonl(corpus_path("test_" + std::string(sample_type_text(t)) + ".jsonl"),
                           corpus);
    }

    say("building vocabulary and training embeddings on the mixed corpus");
    Vocabulary vocab = build_vocabulary(train[CorpusKind::Mixed], cfg.run);
    SkipGramConfig sg = cfg.skipgram;
    sg.seed = cfg.seed;
    EmbeddingMatrix emb = train_skipgram(train[CorpusKind::Mixed], vocab, sg, cfg.run);
    save_embeddings(corpus_path("embeddings.bin"), emb, vocab);

    std::map<SampleType, std::vector<TaggerExample>> test_sif;
    for (const auto& [t, corpus] : test) {
        test_sif[t] = examples_from_corpus(corpus, vocab, emb, cfg.sif, EncodeMode::Sif,
                                           cfg.run);
    }

    ReproduceReport report;
    report.seed = cfg.seed;
    report.config_hash = cfg.hash();

    std::int64_t mixed_correct = 0, mixed_total = 0;
    for (CorpusKind kind : {CorpusKind::HeadingsOnly, CorpusKind::NoHeadings,
                            CorpusKind::Mixed}) {
        say("training tagger on the " + std::string(corpus_kind_text(kind)) + " corpus");
        std::vector<TaggerExample> examples = examples_from_corpus(
            train[kind], vocab, emb, cfg.sif, EncodeMode::Sif, cfg.run);
        TrainConfig tc = cfg.train;
        tc.seed = cfg.seed;
        std::vector<EpochLog> log;
        TaggerModel model = train_tagger(examples, emb.dim, static_cast<int>(kNumLabels),
                                         tc, cfg.run, &log);
        write_epoch_log(corpus_path("train_" + std::string(corpus_kind_text(kind)) + ".log"), log);

        SegmenterBundle bundle;
        bundle.vocab = vocab;
        bundle.embeddings = emb;
        bundle.sif = cfg.sif;
        bundle.mode = EncodeMode::Sif;
        bundle.tagger = model;
        save_bundle(corpus_path("model_" + std::string(corpus_kind_text(kind)) + ".bin"), bundle);

        for (const auto& [t, corpus] : test) {
            std::vector<std::vector<int>> preds =
                predict_examples(model, test_sif[t], cfg.run);
            EvalReport er = evaluate(corpus, preds);
            report.cells[kind][t] = er.overall.accuracy();
            if (kind == CorpusKind::Mixed) {
                mixed_correct += er.overall.correct;
                mixed_total += er.overall.sentences;
            }
        }
    }
    report.mixed_sif_overall =
        mixed_total ? static_cast<double>(mixed_correct) / static_cast<double>(mixed_total) : 0.0;

    if (with_ave) {
        say("training the ave-encoder comparison model on the mixed corpus");
        std::vector<TaggerExample> examples = examples_from_corpus(
            train[CorpusKind::Mixed], vocab, emb, cfg.sif, EncodeMode::Ave, cfg.run);
        TrainConfig tc = cfg.train;
        tc.seed = cfg.seed;
        TaggerModel model = train_tagger(examples, emb.dim, static_cast<int>(kNumLabels),
                                         tc, cfg.run, nullptr);
        std::int64_t correct = 0, total = 0;
        for (const auto& [t, corpus] : test) {
            std::vector<TaggerExample> test_ave = examples_from_corpus(
                corpus, vocab, emb, cfg.sif, EncodeMode::Ave, cfg.run);
            std::vector<std::vector<int>> preds = predict_examples(model, test_ave, cfg.run);
            EvalReport er = evaluate(corpus, preds);
            report.ave_mixed[t] = er.overall.accuracy();
            correct += er.overall.correct;
            total += er.overall.sentences;
        }
        report.mixed_ave_overall =
            total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    }

    std::ofstream json_out(corpus_path("report.json"), std::ios::binary);
    if (!json_out) throw IoError("cannot write report in " + out_dir);
    json_out << report.to_json().dump(2) << '\n';
    std::ofstream table_out(corpus_path("report.txt"), std::ios::binary);
    table_out << report.table_text();
    say("done");
    return report;
}

}  // namespace emrseg
