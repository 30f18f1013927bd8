#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "emrseg/errors.hpp"
#include "emrseg/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitModelIo = 2;
constexpr int kExitEmptyInput = 3;

std::string read_input(const std::string& path) {
    if (path == "-") {
        return std::string((std::istreambuf_iterator<char>(std::cin)),
                           std::istreambuf_iterator<char>());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw emrseg::IoError("cannot read input: " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

int main(int argc, char** argv) {
    using namespace emrseg;

    CLI::App app{"emrseg - trainable section segmenter for clinical discharge notes"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<bool> deterministic_flag;
    std::optional<int> threads_flag;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seed_flag, "seed for every random choice");
    app.add_flag("--deterministic,!--no-deterministic", deterministic_flag,
                 "bit-reproducible mode (default on)");
    app.add_option("--threads", threads_flag, "worker threads (0 = library default)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string synth_out, synth_raw_dir, synth_grammar;
    std::optional<std::size_t> synth_notes;
    synth->add_option("--out", synth_out, "corpus file (JSON Lines)")->required();
    synth->add_option("--notes", synth_notes, "number of notes");
    synth->add_option("--grammar", synth_grammar, "grammar file (default: built-in)");
    synth->add_option("--raw-dir", synth_raw_dir, "also write one raw .txt per note here");

    // prep
    auto* prep = app.add_subcommand("prep", "label raw notes and build train/test corpora");
    std::string prep_in, prep_out_train, prep_out_test, prep_kind;
    std::optional<double> prep_fraction;
    bool prep_all_types = true;
    prep->add_option("--in", prep_in, "directory of raw .txt notes, or a Type2 corpus .jsonl")
        ->required();
    prep->add_option("--out-train", prep_out_train, "train corpus path")->required();
    prep->add_option("--out-test", prep_out_test, "test corpus path")->required();
    prep->add_option("--kind", prep_kind, "headings-only | no-headings | mixed");
    prep->add_option("--train-fraction", prep_fraction, "train split fraction");
    prep->add_flag("--test-all-types,!--test-kind-only", prep_all_types,
                   "render all four sample types on the test side (default)");

    // train-embeddings
    auto* temb = app.add_subcommand("train-embeddings", "train word vectors on a corpus");
    std::string temb_corpus, temb_out;
    std::optional<int> temb_dim, temb_window, temb_negatives, temb_epochs;
    temb->add_option("--corpus", temb_corpus, "training corpus (JSON Lines)")->required();
    temb->add_option("--out", temb_out, "embeddings container path")->required();
    temb->add_option("--dim", temb_dim, "vector dimension");
    temb->add_option("--window", temb_window, "context window");
    temb->add_option("--negatives", temb_negatives, "negatives per positive");
    temb->add_option("--epochs", temb_epochs, "training epochs");

    // train
    auto* train = app.add_subcommand("train", "train a segmenter model");
    std::string train_corpus, train_embeddings, train_out, train_log, train_encoder;
    std::optional<int> train_hidden, train_epochs, train_batch, train_patience;
    std::optional<double> train_lr, train_dev_fraction;
    train->add_option("--corpus", train_corpus, "training corpus (JSON Lines)")->required();
    train->add_option("--embeddings", train_embeddings, "embeddings path")->required();
    train->add_option("--out", train_out, "model bundle path")->required();
    train->add_option("--log", train_log, "epoch log path");
    train->add_option("--encoder", train_encoder, "sif | ave");
    train->add_option("--hidden", train_hidden, "LSTM hidden size per direction");
    train->add_option("--epochs", train_epochs, "max epochs");
    train->add_option("--batch", train_batch, "batch size (notes)");
    train->add_option("--patience", train_patience, "early-stop patience");
    train->add_option("--lr", train_lr, "learning rate");
    train->add_option("--dev-fraction", train_dev_fraction, "held-out fraction");

    // segment
    auto* segment = app.add_subcommand("segment", "label every sentence of one note");
    std::string segment_model, segment_in = "-", segment_out, segment_note_id = "note";
    segment->add_option("--model", segment_model, "model bundle path")->required();
    segment->add_option("input", segment_in, "note text file, or - for stdin");
    segment->add_option("--out", segment_out, "output JSON Lines (default stdout)");
    segment->add_option("--note-id", segment_note_id, "note id for the output records");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a model on a labeled corpus");
    std::string eval_model, eval_corpus, eval_out;
    bool eval_table = false;
    eval->add_option("--model", eval_model, "model bundle path")->required();
    eval->add_option("--corpus", eval_corpus, "test corpus (JSON Lines)")->required();
    eval->add_option("--out", eval_out, "report JSON path (default stdout)");
    eval->add_flag("--table", eval_table, "also print an aligned accuracy table");

    // reproduce
    auto* repro = app.add_subcommand(
        "reproduce", "train on three corpus kinds and evaluate on four sample types");
    std::string repro_out_dir;
    std::optional<std::size_t> repro_train_notes, repro_test_notes;
    bool repro_with_ave = true;
    repro->add_option("--out-dir", repro_out_dir, "artifact directory")->required();
    repro->add_option("--train-notes", repro_train_notes, "synthetic training notes");
    repro->add_option("--test-notes", repro_test_notes, "synthetic test notes");
    repro->add_flag("--with-ave,!--no-ave", repro_with_ave,
                    "include the ave-encoder comparison model (default)");

    for (CLI::App* sub : {synth, prep, temb, train, segment, eval, repro}) {
        sub->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        if (seed_flag) cfg.seed = *seed_flag;
        if (deterministic_flag) cfg.run.deterministic = *deterministic_flag;
        if (threads_flag) cfg.run.threads = *threads_flag;

        if (synth->parsed()) {
            if (synth_notes) cfg.synth_notes = *synth_notes;
            if (!synth_grammar.empty()) cfg.grammar_path = synth_grammar;
            std::size_t n = run_synth(cfg, synth_out, synth_raw_dir);
            if (n == 0) std::cerr << "warning: wrote an empty corpus\n";
            std::cerr << "wrote " << n << " notes to " << synth_out << "\n";
            return kExitOk;
        }

        if (prep->parsed()) {
            if (!prep_kind.empty()) cfg.apply("prep.kind", prep_kind);
            if (prep_fraction) cfg.train_fraction = *prep_fraction;
            PrepStats st = run_prep(cfg, prep_in, prep_out_train, prep_out_test, prep_all_types);
            if (st.skipped) {
                std::cerr << "skipped " << st.skipped << " notes with no matching heading\n";
            }
            std::cerr << "wrote " << st.train_notes << " train / " << st.test_notes
                      << " test notes\n";
            return kExitOk;
        }

        if (temb->parsed()) {
            if (temb_dim) cfg.skipgram.dim = *temb_dim;
            if (temb_window) cfg.skipgram.window = *temb_window;
            if (temb_negatives) cfg.skipgram.negatives = *temb_negatives;
            if (temb_epochs) cfg.skipgram.epochs = *temb_epochs;
            run_train_embeddings(cfg, temb_corpus, temb_out);
            std::cerr << "wrote embeddings to " << temb_out << "\n";
            return kExitOk;
        }

        if (train->parsed()) {
            if (!train_encoder.empty()) cfg.apply("encoder", train_encoder);
            if (train_hidden) cfg.train.hidden = *train_hidden;
            if (train_epochs) cfg.train.max_epochs = *train_epochs;
            if (train_batch) cfg.train.batch_size = *train_batch;
            if (train_patience) cfg.train.patience = *train_patience;
            if (train_lr) cfg.train.learning_rate = *train_lr;
            if (train_dev_fraction) cfg.train.dev_fraction = *train_dev_fraction;
            run_train(cfg, train_corpus, train_embeddings, train_out, train_log);
            std::cerr << "wrote model to " << train_out << "\n";
            return kExitOk;
        }

        if (segment->parsed()) {
            SegmenterBundle bundle;
            try {
                bundle = load_bundle(segment_model);
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitModelIo;
            }
            RawNote note;
            note.note_id = segment_note_id;
            note.text = read_input(segment_in);
            std::vector<SegmentRecord> records;
            try {
                records = run_segment(cfg, bundle, note);
            } catch (const EmptyNoteError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitEmptyInput;
            }
            if (segment_out.empty()) {
                write_segments_jsonl(std::cout, records);
            } else {
                std::ofstream out(segment_out, std::ios::binary);
                if (!out) throw IoError("cannot write: " + segment_out);
                write_segments_jsonl(out, records);
            }
            return kExitOk;
        }

        if (eval->parsed()) {
            EvalReport report;
            try {
                report = run_eval(cfg, eval_model, eval_corpus);
            } catch (const FormatError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitModelIo;
            }
            std::string json = report.to_json().dump(2) + "\n";
            if (eval_out.empty()) {
                std::cout << json;
            } else {
                std::ofstream out(eval_out, std::ios::binary);
                if (!out) throw IoError("cannot write: " + eval_out);
                out << json;
            }
            if (eval_table) std::cout << report.table_text();
            return kExitOk;
        }

        if (repro->parsed()) {
            if (repro_train_notes) cfg.reproduce_train_notes = *repro_train_notes;
            if (repro_test_notes) cfg.reproduce_test_notes = *repro_test_notes;
            ReproduceReport report = run_reproduce(cfg, repro_out_dir, repro_with_ave, &std::cerr);
            std::cout << report.table_text();
            return kExitOk;
        }
    } catch (const EmptyNoteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
