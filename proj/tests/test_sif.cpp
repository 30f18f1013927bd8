#include <doctest.h>

#include <cmath>

#include "oracles.hpp"

#include "emrseg/rng.hpp"
#include "emrseg/sif.hpp"

using namespace emrseg;

namespace {

// Vocabulary with explicit counts; filler tokens pad n_all.
Vocabulary vocab_with(std::vector<std::pair<std::string, std::int64_t>> entries,
                      std::int64_t total) {
    Vocabulary v;
    std::int64_t used = 0;
    for (auto& [word, count] : entries) {
        v.index.emplace(word, static_cast<std::int32_t>(v.words.size()));
        v.words.push_back(word);
        v.counts.push_back(count);
        used += count;
    }
    if (total > used) {
        v.index.emplace("__filler__", static_cast<std::int32_t>(v.words.size()));
        v.words.push_back("__filler__");
        v.counts.push_back(total - used);
    }
    v.total = total;
    return v;
}

EmbeddingMatrix matrix_of(std::vector<std::vector<float>> rows) {
    EmbeddingMatrix m;
    m.dim = static_cast<int>(rows[0].size());
    for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
    return m;
}

LabeledNote note_of(std::vector<std::vector<std::string>> sentences) {
    LabeledNote n;
    n.note_id = "s";
    for (auto& tokens : sentences) {
        LabeledSentence s;
        s.tokens = std::move(tokens);
        n.sentences.push_back(std::move(s));
    }
    return n;
}

}  // namespace

TEST_CASE("sif_weight formula") {
    CHECK(sif_weight(0.001, 0.001) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sif_weight(0.0, 0.001) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sif_weight(0.009, 0.001) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("sif_weight is in (0,1] and strictly decreasing in p") {
    double prev = 2.0;
    for (double p = 0.0; p <= 0.5; p += 0.01) {
        double w = sif_weight(p, 0.001);
        CHECK(w > 0.0);
        CHECK(w <= 1.0);
        CHECK(w < prev);
        prev = w;
    }
}

TEST_CASE("weighted_sentence_vector is the weighted mean over in-vocab tokens") {
    // p(a) = 0.001 -> weight 0.5; p(b) = 0.009 -> weight 0.1
    Vocabulary v = vocab_with({{"a", 1}, {"b", 9}}, 1000);
    EmbeddingMatrix m = matrix_of({{2.f, 0.f, 4.f}, {0.f, 10.f, -10.f},
                                   {0.f, 0.f, 0.f}});
    SifConfig cfg;
    bool oov = true;
    auto s = weighted_sentence_vector({"a", "b"}, v, m, cfg, &oov);
    CHECK_FALSE(oov);
    // (0.5*e_a + 0.1*e_b) / 2
    CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s[2] == doctest::Approx(0.5).epsilon(1e-12));

    auto one = weighted_sentence_vector({"a"}, v, m, cfg, &oov);
    CHECK(one[0] == doctest::Approx(1.0));  // 0.5 * 2
    CHECK(one[2] == doctest::Approx(2.0));

    // out-of-vocabulary tokens are skipped, not averaged in
    auto skip = weighted_sentence_vector({"a", "zzz"}, v, m, cfg, &oov);
    CHECK_FALSE(oov);
    CHECK(skip[0] == doctest::Approx(1.0));

    auto all_oov = weighted_sentence_vector({"zzz", "qqq"}, v, m, cfg, &oov);
    CHECK(oov);
    CHECK(all_oov == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("remove_common_component: degenerate cases") {
    SifConfig cfg;

    // a single nonzero vector projects to zero
    std::vector<double> single = {3.0, 4.0};
    remove_common_component(single.data(), 1, 2, cfg);
    CHECK(std::abs(single[0]) < 1e-12);
    CHECK(std::abs(single[1]) < 1e-12);

    // collinear vectors all vanish
    std::vector<double> collinear = {2.0, 0.0, 1.0, 0.0};
    remove_common_component(collinear.data(), 2, 2, cfg);
    for (double x : collinear) CHECK(std::abs(x) < 1e-12);

    // axis-aligned: u is the first axis (singular values 2 > 1)
    std::vector<double> axes = {2.0, 0.0, 0.0, 1.0};
    remove_common_component(axes.data(), 2, 2, cfg);
    CHECK(std::abs(axes[0]) < 1e-12);
    CHECK(std::abs(axes[1]) < 1e-12);
    CHECK(std::abs(axes[2]) < 1e-12);
    CHECK(axes[3] == doctest::Approx(1.0));

    // all-zero input returned unchanged
    std::vector<double> zeros(6, 0.0);
    remove_common_component(zeros.data(), 3, 2, cfg);
    for (double x : zeros) CHECK(x == 0.0);
}

TEST_CASE("power iteration matches the dense SVD oracle") {
    SifConfig cfg;
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        int dim = 3 + static_cast<int>(rng.below(6));
        std::size_t count = 2 + rng.below(4);
        std::vector<double> vectors(count * static_cast<std::size_t>(dim));
        for (double& x : vectors) x = rng.uniform(-1, 1);
        std::vector<double> u = dominant_direction(vectors.data(), count, dim, cfg);
        std::vector<double> oracle_u = oracle::dense_svd_direction(vectors.data(), count, dim);
        double dot = 0;
        for (int i = 0; i < dim; ++i) dot += u[static_cast<std::size_t>(i)] * oracle_u[static_cast<std::size_t>(i)];
        CHECK(std::abs(dot) >= 1.0 - 1e-6);
    }
}

TEST_CASE("SIF encoding matches an independent dense-SVD computation") {
    Vocabulary v = vocab_with({{"a", 1}, {"b", 9}, {"c", 40}}, 1000);
    EmbeddingMatrix m = matrix_of({
        {1.f, 0.f, 0.f, 2.f},
        {0.f, 1.f, 1.f, 0.f},
        {0.5f, -1.f, 2.f, 0.f},
        {0.f, 0.f, 0.f, 0.f},
    });
    LabeledNote note = note_of({{"a", "b"}, {"b", "c"}, {"a", "c", "b"}});
    SifConfig cfg;

    // expected: weighted vectors, then subtract the projection on the oracle u
    std::vector<std::vector<double>> weighted;
    for (const auto& s : note.sentences) {
        bool oov = false;
        weighted.push_back(weighted_sentence_vector(s.tokens, v, m, cfg, &oov));
    }
    std::vector<double> flat;
    for (const auto& w : weighted) flat.insert(flat.end(), w.begin(), w.end());
    std::vector<double> u = oracle::dense_svd_direction(flat.data(), weighted.size(), m.dim);

    EncodedNote enc = encode_note(note, v, m, cfg, EncodeMode::Sif);
    REQUIRE(enc.length == 3);
    for (std::size_t j = 0; j < enc.length; ++j) {
        double proj = 0;
        for (int i = 0; i < m.dim; ++i) proj += u[static_cast<std::size_t>(i)] * weighted[j][static_cast<std::size_t>(i)];
        for (int i = 0; i < m.dim; ++i) {
            double expected = weighted[j][static_cast<std::size_t>(i)] - proj * u[static_cast<std::size_t>(i)];
            CHECK(enc.row(j)[i] == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("post-removal vectors are orthogonal to u and never longer") {
    SifConfig cfg;
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        int dim = 5;
        std::size_t count = 1 + rng.below(6);
        std::vector<double> vectors(count * static_cast<std::size_t>(dim));
        for (double& x : vectors) x = rng.uniform(-2, 2);
        std::vector<double> before = vectors;
        std::vector<double> u = dominant_direction(vectors.data(), count, dim, cfg);
        remove_common_component(vectors.data(), count, dim, cfg);
        for (std::size_t j = 0; j < count; ++j) {
            double dot = 0, norm_after = 0, norm_before = 0;
            for (int i = 0; i < dim; ++i) {
                dot += u[static_cast<std::size_t>(i)] * vectors[j * 5 + static_cast<std::size_t>(i)];
                norm_after += vectors[j * 5 + static_cast<std::size_t>(i)] * vectors[j * 5 + static_cast<std::size_t>(i)];
                norm_before += before[j * 5 + static_cast<std::size_t>(i)] * before[j * 5 + static_cast<std::size_t>(i)];
            }
            CHECK(std::abs(dot) <= 1e-6 * std::max(1.0, std::sqrt(norm_after)));
            CHECK(std::sqrt(norm_after) <= std::sqrt(norm_before) + 1e-12);
        }
    }
}

TEST_CASE("AVE mode: plain mean, no removal") {
    Vocabulary v = vocab_with({{"a", 1}, {"b", 9}}, 1000);
    EmbeddingMatrix m = matrix_of({{1.f, 3.f}, {1.f, 3.f}, {0.f, 0.f}});
    LabeledNote note = note_of({{"a", "b"}, {"a"}});
    EncodedNote enc = encode_note(note, v, m, SifConfig{}, EncodeMode::Ave);
    // all tokens share the same vector, so the mean is that vector
    CHECK(enc.row(0)[0] == doctest::Approx(1.0));
    CHECK(enc.row(0)[1] == doctest::Approx(3.0));
    CHECK(enc.row(1)[0] == doctest::Approx(1.0));
}

TEST_CASE("scale equivariance: scaling word vectors scales SIF outputs") {
    Vocabulary v = vocab_with({{"a", 3}, {"b", 9}, {"c", 27}}, 500);
    Rng rng(31);
    std::vector<std::vector<float>> rows(4, std::vector<float>(6));
    for (auto& r : rows)
        for (float& x : r) x = static_cast<float>(rng.uniform(-1, 1));
    EmbeddingMatrix m = matrix_of(rows);
    EmbeddingMatrix m4 = m;
    for (float& x : m4.data) x *= 4.0f;

    LabeledNote note = note_of({{"a", "b"}, {"c"}, {"b", "c", "a"}});
    EncodedNote e1 = encode_note(note, v, m, SifConfig{}, EncodeMode::Sif);
    EncodedNote e4 = encode_note(note, v, m4, SifConfig{}, EncodeMode::Sif);
    for (std::size_t i = 0; i < e1.data.size(); ++i) {
        CHECK(e4.data[i] == doctest::Approx(4.0 * e1.data[i]).epsilon(1e-9));
    }
}
