#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "emrseg/container.hpp"
#include "emrseg/errors.hpp"
#include "emrseg/model_io.hpp"
#include "emrseg/rng.hpp"

using namespace emrseg;

namespace {

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() {
        std::remove(path.c_str());
        std::remove((path + ".counts").c_str());
    }
};

Vocabulary small_vocab() {
    Vocabulary v;
    for (auto [w, c] : std::vector<std::pair<std::string, std::int64_t>>{
             {"alpha", 5}, {"beta", 3}, {"[num]", 2}}) {
        v.index.emplace(w, static_cast<std::int32_t>(v.words.size()));
        v.words.push_back(w);
        v.counts.push_back(c);
        v.total += c;
    }
    return v;
}

}  // namespace

TEST_CASE("container round-trip and integrity") {
    TempFile f("/tmp/emrseg_test_container.bin");
    ContainerWriter w;
    std::vector<double> d = {1.5, -2.25, 1e300, -std::numeric_limits<double>::infinity()};
    std::vector<float> fdata = {0.5f, -0.25f};
    std::uint64_t u = 0xDEADBEEFCAFEF00DULL;
    w.add_f64("block.d", {2, 2}, d.data());
    w.add_f32("block.f", {2}, fdata.data());
    w.add_u64("block.u", {1}, &u);
    w.add_bytes("block.text", "hello\tworld\n");
    w.write(f.path);

    Container c = Container::read(f.path);
    CHECK(c.f64("block.d") == d);
    CHECK(c.f32("block.f") == fdata);
    CHECK(c.u64("block.u") == std::vector<std::uint64_t>{u});
    CHECK(c.bytes("block.text") == "hello\tworld\n");
    CHECK(c.meta("block.d").shape == std::vector<std::size_t>{2, 2});
    CHECK_THROWS_AS(c.f64("missing"), FormatError);
    CHECK_THROWS_AS(c.f32("block.d"), FormatError);  // dtype mismatch

    // writing the same content twice is byte-identical
    TempFile f2("/tmp/emrseg_test_container2.bin");
    ContainerWriter w2;
    w2.add_f64("block.d", {2, 2}, d.data());
    w2.add_f32("block.f", {2}, fdata.data());
    w2.add_u64("block.u", {1}, &u);
    w2.add_bytes("block.text", "hello\tworld\n");
    w2.write(f2.path);
    CHECK(read_bytes(f.path) == read_bytes(f2.path));
}

TEST_CASE("container detects corruption and bad headers") {
    TempFile f("/tmp/emrseg_test_corrupt.bin");
    ContainerWriter w;
    std::vector<double> d = {1.0, 2.0, 3.0};
    w.add_f64("x", {3}, d.data());
    w.write(f.path);

    std::string bytes = read_bytes(f.path);
    std::string flipped = bytes;
    flipped[flipped.size() / 2] = static_cast<char>(flipped[flipped.size() / 2] ^ 0x40);
    write_bytes(f.path, flipped);
    CHECK_THROWS_WITH_AS(Container::read(f.path),
                         doctest::Contains("checksum"), FormatError);

    write_bytes(f.path, "NOTMAGIC" + bytes.substr(8));
    CHECK_THROWS_WITH_AS(Container::read(f.path),
                         doctest::Contains("header"), FormatError);
}

TEST_CASE("embeddings container round-trip with vocabulary hash") {
    TempFile f("/tmp/emrseg_test_emb.bin");
    Vocabulary v = small_vocab();
    EmbeddingMatrix m;
    m.dim = 4;
    Rng rng(3);
    m.data.resize(v.size() * 4);
    for (float& x : m.data) x = static_cast<float>(rng.uniform(-1, 1));
    m.vocab_hash = v.hash();

    save_embeddings(f.path, m, v);
    CHECK(std::filesystem::exists(f.path + ".counts"));
    EmbeddingsFile back = load_embeddings(f.path);
    CHECK(back.matrix.data == m.data);
    CHECK(back.matrix.dim == 4);
    CHECK(back.vocab.words == v.words);
    CHECK(back.vocab.counts == v.counts);
    CHECK(back.vocab.total == v.total);

    // save -> load -> save is byte-identical
    TempFile f2("/tmp/emrseg_test_emb2.bin");
    save_embeddings(f2.path, back.matrix, back.vocab);
    CHECK(read_bytes(f.path) == read_bytes(f2.path));
}

TEST_CASE("external word2vec text format") {
    TempFile f("/tmp/emrseg_test_w2v.txt");
    write_bytes(f.path, "3 4\nalpha 1 2 3 4\nbeta 0.5 0 -1 2\ngamma 9 8 7 6\n");
    EmbeddingsFile e = load_embeddings(f.path);
    CHECK(e.matrix.dim == 4);
    CHECK(e.matrix.rows() == 3);
    CHECK(e.vocab.words == std::vector<std::string>{"alpha", "beta", "gamma"});
    CHECK(e.matrix.row(1)[0] == doctest::Approx(0.5));
    // counts default to 1 without a sidecar
    CHECK(e.vocab.total == 3);

    write_bytes(f.path, "3 4\nalpha 1 2 3 4\nbeta 0.5 0 -1 2\n");
    CHECK_THROWS_WITH_AS(load_embeddings(f.path), doctest::Contains("promises"),
                         FormatError);

    write_bytes(f.path, "x y\nalpha 1\n");
    CHECK_THROWS_WITH_AS(load_embeddings(f.path), doctest::Contains("header"),
                         FormatError);

    write_bytes(f.path, "1 4\nalpha 1 2 3\n");
    CHECK_THROWS_AS(load_embeddings(f.path), FormatError);
}

TEST_CASE("text embeddings pick up a counts sidecar") {
    TempFile f("/tmp/emrseg_test_w2v2.txt");
    write_bytes(f.path, "2 2\nalpha 1 2\nbeta 3 4\n");
    write_bytes(f.path + ".counts", "alpha\t9\nbeta\t1\n");
    EmbeddingsFile e = load_embeddings(f.path);
    CHECK(e.vocab.total == 10);
    CHECK(e.vocab.probability(*e.vocab.id_of("alpha")) == doctest::Approx(0.9));
}

TEST_CASE("tagger model save/load round-trip is bit-exact") {
    TempFile f("/tmp/emrseg_test_tagger.bin");
    TaggerModel m;
    m.init(6, 3, 25, 77);
    save_tagger(f.path, m);
    TaggerModel back = load_tagger(f.path);
    CHECK(back.input_dim == 6);
    CHECK(back.hidden == 3);
    CHECK(back.num_labels == 25);
    CHECK(back.fw.wx == m.fw.wx);
    CHECK(back.bw.b == m.bw.b);
    CHECK(back.emit_w == m.emit_w);
    CHECK(back.crf.scores == m.crf.scores);

    // identical predictions across a reload
    Rng rng(5);
    std::vector<float> inputs(5 * 6);
    for (float& x : inputs) x = static_cast<float>(rng.uniform(-1, 1));
    CHECK(tagger_predict(m, inputs.data(), 5) == tagger_predict(back, inputs.data(), 5));

    TempFile f2("/tmp/emrseg_test_tagger2.bin");
    save_tagger(f2.path, back);
    CHECK(read_bytes(f.path) == read_bytes(f2.path));
}

TEST_CASE("bundle round-trip and dimension validation") {
    TempFile f("/tmp/emrseg_test_bundle.bin");
    SegmenterBundle b;
    b.vocab = small_vocab();
    b.embeddings.dim = 4;
    b.embeddings.data.assign(b.vocab.size() * 4, 0.25f);
    b.embeddings.vocab_hash = b.vocab.hash();
    b.sif.alpha = 0.002;
    b.mode = EncodeMode::Ave;
    b.tagger.init(4, 3, 25, 9);
    save_bundle(f.path, b);

    SegmenterBundle back = load_bundle(f.path);
    CHECK(back.sif.alpha == 0.002);
    CHECK(back.mode == EncodeMode::Ave);
    CHECK(back.tagger.fw.wx == b.tagger.fw.wx);
    CHECK(back.vocab.words == b.vocab.words);

    // a tagger whose input dim disagrees with the embeddings is rejected
    SegmenterBundle bad = b;
    bad.tagger.init(7, 3, 25, 9);
    TempFile f2("/tmp/emrseg_test_bundle_bad.bin");
    save_bundle(f2.path, bad);
    CHECK_THROWS_WITH_AS(load_bundle(f2.path), doctest::Contains("input dim"),
                         FormatError);
}
