#include "emrseg/model_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "emrseg/container.hpp"
#include "emrseg/errors.hpp"
#include "emrseg/labels.hpp"

namespace emrseg {

namespace {

std::string vocab_blob(const Vocabulary& vocab) {
    std::string blob;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        blob += vocab.words[i];
        blob += '\t';
        blob += std::to_string(vocab.counts[i]);
        blob += '\n';
    }
    return blob;
}

Vocabulary vocab_from_blob(const std::string& blob) {
    Vocabulary v;
    std::istringstream in(blob);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("bad vocabulary line: " + line);
        std::string word = line.substr(0, tab);
        std::int64_t count = std::stoll(line.substr(tab + 1));
        if (count < 1) throw FormatError("vocabulary count < 1 for " + word);
        v.index.emplace(word, static_cast<std::int32_t>(v.words.size()));
        v.words.push_back(std::move(word));
        v.counts.push_back(count);
        v.total += count;
    }
    return v;
}

void add_embeddings(ContainerWriter* w, const EmbeddingMatrix& matrix,
                    const Vocabulary& vocab) {
    if (matrix.rows() != vocab.size()) {
        throw Error("embedding matrix rows do not match vocabulary size");
    }
    w->add_f32("embedding.matrix", {matrix.rows(), static_cast<std::size_t>(matrix.dim)},
               matrix.data.data());
    w->add_bytes("embedding.vocab", vocab_blob(vocab));
    std::uint64_t h = vocab.hash();
    w->add_u64("embedding.vocab_hash", {1}, &h);
}

EmbeddingsFile embeddings_from(const Container& c) {
    EmbeddingsFile out;
    out.vocab = vocab_from_blob(c.bytes("embedding.vocab"));
    const TensorMeta& m = c.meta("embedding.matrix");
    if (m.shape.size() != 2) throw FormatError("embedding.matrix must be 2-d");
    out.matrix.dim = static_cast<int>(m.shape[1]);
    out.matrix.data = c.f32("embedding.matrix");
    out.matrix.vocab_hash = c.u64("embedding.vocab_hash").at(0);
    if (m.shape[0] != out.vocab.size()) {
        throw FormatError("embedding rows do not match vocabulary size");
    }
    if (out.vocab.hash() != out.matrix.vocab_hash) {
        throw FormatError("vocabulary hash mismatch");
    }
    return out;
}

void add_tagger(ContainerWriter* w, const TaggerModel& model) {
    auto h4 = static_cast<std::size_t>(4 * model.hidden);
    auto h = static_cast<std::size_t>(model.hidden);
    auto d = static_cast<std::size_t>(model.input_dim);
    auto y = static_cast<std::size_t>(model.num_labels);
    w->add_f32("tagger.fw.wx", {h4, d}, model.fw.wx.data());
    w->add_f32("tagger.fw.wh", {h4, h}, model.fw.wh.data());
    w->add_f32("tagger.fw.b", {h4}, model.fw.b.data());
    w->add_f32("tagger.bw.wx", {h4, d}, model.bw.wx.data());
    w->add_f32("tagger.bw.wh", {h4, h}, model.bw.wh.data());
    w->add_f32("tagger.bw.b", {h4}, model.bw.b.data());
    w->add_f32("tagger.emit.w", {y, 2 * h}, model.emit_w.data());
    w->add_f32("tagger.emit.b", {y}, model.emit_b.data());
    w->add_f64("tagger.crf", {y + 2, y + 2}, model.crf.scores.data());
    std::string labels;
    for (int i = 0; i < model.num_labels; ++i) {
        labels += label_text(static_cast<SectionLabel>(i));
        labels += '\n';
    }
    w->add_bytes("tagger.labels", labels);
}

TaggerModel tagger_from(const Container& c) {
    TaggerModel m;
    const TensorMeta& wx = c.meta("tagger.fw.wx");
    if (wx.shape.size() != 2 || wx.shape[0] % 4 != 0) {
        throw FormatError("tagger.fw.wx has a bad shape");
    }
    m.hidden = static_cast<int>(wx.shape[0] / 4);
    m.input_dim = static_cast<int>(wx.shape[1]);
    const TensorMeta& eb = c.meta("tagger.emit.b");
    m.num_labels = static_cast<int>(eb.shape.at(0));

    auto expect = [&c](const std::string& name, std::vector<std::size_t> shape) {
        const TensorMeta& t = c.meta(name);
        if (t.shape != shape) {
            throw FormatError("tensor " + name + " has an unexpected shape");
        }
    };
    auto h4 = static_cast<std::size_t>(4 * m.hidden);
    auto h = static_cast<std::size_t>(m.hidden);
    auto d = static_cast<std::size_t>(m.input_dim);
    auto y = static_cast<std::size_t>(m.num_labels);
    expect("tagger.fw.wh", {h4, h});
    expect("tagger.fw.b", {h4});
    expect("tagger.bw.wx", {h4, d});
    expect("tagger.bw.wh", {h4, h});
    expect("tagger.bw.b", {h4});
    expect("tagger.emit.w", {y, 2 * h});
    expect("tagger.crf", {y + 2, y + 2});

    m.fw.input_dim = m.input_dim;
    m.fw.hidden = m.hidden;
    m.fw.wx = c.f32("tagger.fw.wx");
    m.fw.wh = c.f32("tagger.fw.wh");
    m.fw.b = c.f32("tagger.fw.b");
    m.bw.input_dim = m.input_dim;
    m.bw.hidden = m.hidden;
    m.bw.wx = c.f32("tagger.bw.wx");
    m.bw.wh = c.f32("tagger.bw.wh");
    m.bw.b = c.f32("tagger.bw.b");
    m.emit_w = c.f32("tagger.emit.w");
    m.emit_b = c.f32("tagger.emit.b");
    m.crf.num_labels = m.num_labels;
    m.crf.scores = c.f64("tagger.crf");

    std::string labels = c.bytes("tagger.labels");
    std::istringstream in(labels);
    std::string line;
    int i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (i >= m.num_labels || label_text(static_cast<SectionLabel>(i)) != line) {
            throw FormatError("model label inventory mismatch at '" + line + "'");
        }
        ++i;
    }
    if (i != m.num_labels) throw FormatError("model label inventory is incomplete");
    return m;
}

}  // namespace

void save_embeddings(const std::string& path, const EmbeddingMatrix& matrix,
                     const Vocabulary& vocab) {
    ContainerWriter w;
    add_embeddings(&w, matrix, vocab);
    w.write(path);
    std::ofstream counts(path + ".counts", std::ios::binary);
    if (!counts) throw IoError("cannot write counts sidecar: " + path + ".counts");
    counts << vocab_blob(vocab);
}

void save_embeddings_text(const std::string& path, const EmbeddingMatrix& matrix,
                          const Vocabulary& vocab) {
    if (matrix.rows() != vocab.size()) {
        throw Error("embedding matrix rows do not match vocabulary size");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write embeddings: " + path);
    out << vocab.size() << ' ' << matrix.dim << '\n';
    out.precision(9);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        out << vocab.words[i];
        const float* row = matrix.row(static_cast<std::int32_t>(i));
        for (int d = 0; d < matrix.dim; ++d) out << ' ' << row[d];
        out << '\n';
    }
}

namespace {

EmbeddingsFile load_embeddings_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read embeddings: " + path);
    std::string header;
    if (!std::getline(in, header)) throw FormatError("empty embeddings file: " + path);
    std::istringstream hs(header);
    std::size_t rows = 0;
    int dim = 0;
    if (!(hs >> rows >> dim) || dim < 1) {
        throw FormatError("unknown embeddings header: '" + header + "'");
    }
    EmbeddingsFile out;
    out.matrix.dim = dim;
    out.matrix.data.reserve(rows * static_cast<std::size_t>(dim));
    std::string line;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) throw FormatError("bad embeddings row " + std::to_string(seen + 1));
        for (int d = 0; d < dim; ++d) {
            float v;
            if (!(ls >> v)) {
                throw FormatError("embeddings row " + std::to_string(seen + 1) +
                                  " has fewer than " + std::to_string(dim) + " values");
            }
            out.matrix.data.push_back(v);
        }
        out.vocab.index.emplace(word, static_cast<std::int32_t>(out.vocab.words.size()));
        out.vocab.words.push_back(word);
        ++seen;
    }
    if (seen != rows) {
        throw FormatError("embeddings header promises " + std::to_string(rows) +
                          " rows, file has " + std::to_string(seen));
    }

    // counts from the sidecar when present, else uniform
    std::string sidecar = path + ".counts";
    out.vocab.counts.assign(out.vocab.size(), 1);
    out.vocab.total = static_cast<std::int64_t>(out.vocab.size());
    if (std::filesystem::exists(sidecar)) {
        std::ifstream cs(sidecar, std::ios::binary);
        std::string cline;
        while (std::getline(cs, cline)) {
            if (cline.empty()) continue;
            std::size_t tab = cline.find('\t');
            if (tab == std::string::npos) throw FormatError("bad counts line: " + cline);
            auto id = out.vocab.id_of(cline.substr(0, tab));
            if (!id) continue;
            std::int64_t count = std::stoll(cline.substr(tab + 1));
            out.vocab.total += count - out.vocab.counts[static_cast<std::size_t>(*id)];
            out.vocab.counts[static_cast<std::size_t>(*id)] = count;
        }
    }
    out.matrix.vocab_hash = out.vocab.hash();
    return out;
}

bool is_container_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read: " + path);
    char magic[sizeof(kContainerMagic)] = {};
    in.read(magic, sizeof(magic));
    return in.gcount() == sizeof(magic) &&
           std::memcmp(magic, kContainerMagic, sizeof(magic)) == 0;
}

}  // namespace

EmbeddingsFile load_embeddings(const std::string& path) {
    if (is_container_file(path)) {
        return embeddings_from(Container::read(path));
    }
    return load_embeddings_text(path);
}

void save_tagger(const std::string& path, const TaggerModel& model) {
    ContainerWriter w;
    add_tagger(&w, model);
    w.write(path);
}

TaggerModel load_tagger(const std::string& path) {
    return tagger_from(Container::read(path));
}

void save_bundle(const std::string& path, const SegmenterBundle& bundle) {
    ContainerWriter w;
    add_embeddings(&w, bundle.embeddings, bundle.vocab);
    double alpha = bundle.sif.alpha;
    w.add_f64("sif.alpha", {1}, &alpha);
    double tol = bundle.sif.power_tol;
    w.add_f64("sif.power_tol", {1}, &tol);
    std::uint64_t iters = static_cast<std::uint64_t>(bundle.sif.power_iters);
    w.add_u64("sif.power_iters", {1}, &iters);
    std::uint64_t mode = bundle.mode == EncodeMode::Sif ? 0 : 1;
    w.add_u64("encoder.mode", {1}, &mode);
    add_tagger(&w, bundle.tagger);
    w.write(path);
}

SegmenterBundle load_bundle(const std::string& path) {
    Container c = Container::read(path);
    SegmenterBundle b;
    EmbeddingsFile emb = embeddings_from(c);
    b.vocab = std::move(emb.vocab);
    b.embeddings = std::move(emb.matrix);
    b.sif.alpha = c.f64("sif.alpha").at(0);
    b.sif.power_tol = c.f64("sif.power_tol").at(0);
    b.sif.power_iters = static_cast<int>(c.u64("sif.power_iters").at(0));
    b.mode = c.u64("encoder.mode").at(0) == 0 ? EncodeMode::Sif : EncodeMode::Ave;
    b.tagger = tagger_from(c);
    if (b.tagger.input_dim != b.embeddings.dim) {
        throw FormatError("tagger input dim " + std::to_string(b.tagger.input_dim) +
                          " does not match embedding dim " +
                          std::to_string(b.embeddings.dim));
    }
    return b;
}

}  // namespace emrseg
