#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csr/attention.hpp"
#include "csr/grad_check.hpp"
#include "csr/rng.hpp"

using namespace csr;

TEST_CASE("dot_score basis vectors") {
    Tensor s = Tensor::row({1, 0});
    Tensor h = Tensor::matrix({{1, 0}, {0, 1}});
    Tensor sc = dot_score(s, h);
    CHECK(sc[0] == 1.0);
    CHECK(sc[1] == 0.0);
}

TEST_CASE("dot_score zero state gives uniform attention") {
    Tensor h = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
    Tensor sc = dot_score(Tensor::row({0, 0}), h);
    AttentionOutput out = attend(sc, h);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(out.weights[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("dot_score matches loop oracle") {
    Rng rng(5);
    Tensor s = Tensor::uniform({6}, -2, 2, rng);
    Tensor h = Tensor::uniform({4, 6}, -2, 2, rng);
    Tensor sc = dot_score(s, h);
    for (std::size_t i = 0; i < 4; ++i) {
        double want = 0.0;
        for (std::size_t j = 0; j < 6; ++j) want += s[j] * h.at(i, j);
        CHECK(std::abs(sc[i] - want) < 1e-12);
    }
    CHECK_THROWS_AS(dot_score(Tensor::row({1, 2, 3}), h), ShapeError);
}

TEST_CASE("matrix_score with identity equals dot_score bit-for-bit") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t d = 1 + rng.next_below(8), t = 1 + rng.next_below(6);
        Tensor s = Tensor::uniform({d}, -3, 3, rng);
        Tensor h = Tensor::uniform({t, d}, -3, 3, rng);
        Tensor a = dot_score(s, h);
        Tensor b = matrix_score(s, h, Tensor::identity(d));
        for (std::size_t i = 0; i < t; ++i) CHECK(a[i] == b[i]);
    }
}

TEST_CASE("matrix_score zero matrix gives uniform weights") {
    Tensor s = Tensor::row({1, 2});
    Tensor h = Tensor::matrix({{5, 1}, {1, 5}});
    Tensor sc = matrix_score(s, h, Tensor::zeros({2, 2}));
    AttentionOutput out = attend(sc, h);
    CHECK(out.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("matrix_score matches bilinear loop oracle") {
    Rng rng(17);
    Tensor s = Tensor::uniform({3}, -1, 1, rng);
    Tensor h = Tensor::uniform({5, 4}, -1, 1, rng);
    Tensor w = Tensor::uniform({3, 4}, -1, 1, rng);
    Tensor sc = matrix_score(s, h, w);
    for (std::size_t i = 0; i < 5; ++i) {
        double want = 0.0;
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 4; ++b) want += s[a] * w.at(a, b) * h.at(i, b);
        CHECK(std::abs(sc[i] - want) < 1e-12);
    }
}

TEST_CASE("attend singleton forces weight 1") {
    Tensor h = Tensor::matrix({{3, -2, 7}});
    AttentionOutput out = attend(Tensor::row({0.37}), h);
    CHECK(out.weights[0] == 1.0);
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.context[c] == h.at(0, c));
}

TEST_CASE("attend uniform scores average two rows") {
    Tensor h = Tensor::matrix({{2, 4}, {6, 8}});
    AttentionOutput out = attend(Tensor::row({1.5, 1.5}), h);
    CHECK(out.context[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(out.context[1] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("attend matches weighted-sum oracle") {
    Rng rng(23);
    Tensor h = Tensor::uniform({6, 3}, -2, 2, rng);
    Tensor sc = Tensor::uniform({6}, -2, 2, rng);
    AttentionOutput out = attend(sc, h);
    Tensor w = softmax(sc);
    for (std::size_t c = 0; c < 3; ++c) {
        double want = 0.0;
        for (std::size_t j = 0; j < 6; ++j) want += w[j] * h.at(j, c);
        CHECK(std::abs(out.context[c] - want) < 1e-10);
    }
    CHECK_THROWS_AS(attend(Tensor::row({1.0}), Tensor::zeros({0, 3})), ShapeError);
}

TEST_CASE("attend weights sum to 1 over 1000 random cases") {
    Rng rng(29);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t t = 1 + rng.next_below(10), d = 1 + rng.next_below(6);
        Tensor h = Tensor::uniform({t, d}, -5, 5, rng);
        Tensor sc = Tensor::uniform({t}, -10, 10, rng);
        AttentionOutput out = attend(sc, h);
        double s = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            CHECK(out.weights[i] >= 0.0);
            s += out.weights[i];
        }
        CHECK(std::abs(s - 1.0) < 1e-6);
    }
}

TEST_CASE("attend argmax invariant under score shift") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t t = 2 + rng.next_below(8);
        Tensor sc = Tensor::uniform({t}, -4, 4, rng);
        Tensor h = Tensor::uniform({t, 2}, -1, 1, rng);
        Tensor shifted = sc;
        double c = rng.uniform(-20, 20);
        for (std::size_t i = 0; i < t; ++i) shifted[i] += c;
        auto argmax = [](const Tensor& w) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < w.size(); ++i)
                if (w[i] > w[best]) best = i;
            return best;
        };
        CHECK(argmax(attend(sc, h).weights) == argmax(attend(shifted, h).weights));
    }
}

TEST_CASE("scaled_dot_attention single key forces V row") {
    Rng rng(37);
    Tensor q = Tensor::uniform({3, 4}, -2, 2, rng);
    Tensor k = Tensor::uniform({1, 4}, -2, 2, rng);
    Tensor v = Tensor::matrix({{9, -1}});
    Tensor out = scaled_dot_attention(q, k, v);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out.at(i, 0) == 9.0);
        CHECK(out.at(i, 1) == -1.0);
    }
}

TEST_CASE("scaled_dot_attention zero query averages V") {
    Tensor q = Tensor::zeros({1, 2});
    Tensor k = Tensor::matrix({{1, 0}, {0, 1}, {1, 1}});
    Tensor v = Tensor::matrix({{3, 0}, {0, 3}, {6, 6}});
    Tensor out = scaled_dot_attention(q, k, v);
    CHECK(out.at(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(out.at(0, 1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("scaled_dot_attention d_k 64 as in the 768/12 head split") {
    // 12-head split of a 768-wide model attends in 64-dim subspaces.
    CHECK(768 / 12 == 64);
    Rng rng(41);
    Tensor q = Tensor::uniform({2, 64}, -1, 1, rng);
    Tensor k = Tensor::uniform({5, 64}, -1, 1, rng);
    Tensor v = Tensor::uniform({5, 8}, -1, 1, rng);
    Tensor out = scaled_dot_attention(q, k, v);
    CHECK(out.rows() == 2);
    CHECK(out.cols() == 8);
    CHECK(out.all_finite());
}

TEST_CASE("scaled_dot_attention rows stay in the convex hull of V") {
    Rng rng(43);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.next_below(4), m = 1 + rng.next_below(6),
                    dk = 1 + rng.next_below(5), dv = 1 + rng.next_below(5);
        Tensor q = Tensor::uniform({n, dk}, -4, 4, rng);
        Tensor k = Tensor::uniform({m, dk}, -4, 4, rng);
        Tensor v = Tensor::uniform({m, dv}, -4, 4, rng);
        Tensor out = scaled_dot_attention(q, k, v);
        for (std::size_t c = 0; c < dv; ++c) {
            double lo = v.at(0, c), hi = v.at(0, c);
            for (std::size_t r = 1; r < m; ++r) {
                lo = std::min(lo, v.at(r, c));
                hi = std::max(hi, v.at(r, c));
            }
            for (std::size_t r = 0; r < n; ++r) {
                CHECK(out.at(r, c) >= lo - 1e-12);
                CHECK(out.at(r, c) <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("multi_head with one identity head reduces to scaled_dot_attention") {
    Rng rng(47);
    Tensor q = Tensor::uniform({3, 4}, -1, 1, rng);
    Tensor k = Tensor::uniform({5, 4}, -1, 1, rng);
    Tensor v = Tensor::uniform({5, 4}, -1, 1, rng);
    MhaWeights w{Tensor::identity(4), Tensor::identity(4), Tensor::identity(4),
                 Tensor::identity(4)};
    Tensor a = multi_head(q, k, v, 1, w);
    Tensor b = scaled_dot_attention(q, k, v);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("multi_head output shape law") {
    Rng rng(53);
    Tensor q = Tensor::uniform({7, 8}, -1, 1, rng);
    Tensor k = Tensor::uniform({4, 8}, -1, 1, rng);
    Tensor v = Tensor::uniform({4, 8}, -1, 1, rng);
    for (std::size_t heads : {1, 2, 4, 8}) {
        MhaWeights w{Tensor::uniform({8, 8}, -1, 1, rng), Tensor::uniform({8, 8}, -1, 1, rng),
                     Tensor::uniform({8, 8}, -1, 1, rng), Tensor::uniform({8, 8}, -1, 1, rng)};
        Tensor out = multi_head(q, k, v, heads, w);
        CHECK(out.rows() == 7);
        CHECK(out.cols() == 8);
    }
    MhaWeights w{Tensor::identity(8), Tensor::identity(8), Tensor::identity(8),
                 Tensor::identity(8)};
    CHECK_THROWS_AS(multi_head(q, k, v, 3, w), ShapeError);
}

TEST_CASE("multi_head 2-head case matches split-compute-concat oracle") {
    Rng rng(59);
    std::size_t d = 6, dk = 3;
    Tensor q = Tensor::uniform({2, d}, -1, 1, rng);
    Tensor k = Tensor::uniform({4, d}, -1, 1, rng);
    Tensor v = Tensor::uniform({4, d}, -1, 1, rng);
    MhaWeights w{Tensor::uniform({d, d}, -1, 1, rng), Tensor::uniform({d, d}, -1, 1, rng),
                 Tensor::uniform({d, d}, -1, 1, rng), Tensor::uniform({d, d}, -1, 1, rng)};
    Tensor got = multi_head(q, k, v, 2, w);

    // Manual split-compute-concat.
    Tensor qp = matmul(q, w.wq), kp = matmul(k, w.wk), vp = matmul(v, w.wv);
    auto cols = [&](const Tensor& m, std::size_t c0) {
        Tensor s({m.rows(), dk});
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < dk; ++j) s.at(i, j) = m.at(i, c0 + j);
        return s;
    };
    Tensor h0 = scaled_dot_attention(cols(qp, 0), cols(kp, 0), cols(vp, 0));
    Tensor h1 = scaled_dot_attention(cols(qp, dk), cols(kp, dk), cols(vp, dk));
    Tensor cat({2, d});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < dk; ++j) {
            cat.at(i, j) = h0.at(i, j);
            cat.at(i, dk + j) = h1.at(i, j);
        }
    Tensor want = matmul(cat, w.wo);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("positional encoding basics") {
    PositionalEncoding pe = positional_encoding(8, 6);
    // Position 0: sin(0)=0, cos(0)=1 alternating.
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(pe.table.at(0, 2 * i) == 0.0);
        CHECK(pe.table.at(0, 2 * i + 1) == 1.0);
    }
    for (double x : pe.table.data()) {
        CHECK(x >= -1.0);
        CHECK(x <= 1.0);
    }
    // PE(1, 0) = sin(1) for any d_model.
    PositionalEncoding pe2 = positional_encoding(2, 2);
    CHECK(pe2.table.at(1, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
    CHECK(pe2.table.at(1, 0) == doctest::Approx(0.84147).epsilon(1e-5));
    CHECK_THROWS_AS(positional_encoding(4, 3), ShapeError);
}

TEST_CASE("transformer layers are differentiable") {
    Rng rng(61);
    ParamStore store;
    TransformerEncoderLayer enc(store, "enc", 4, 2, rng);
    TransformerDecoderLayer dec(store, "dec", 4, 2, rng);
    Tensor x = Tensor::uniform({3, 4}, -1, 1, rng);
    Tensor mem = Tensor::uniform({5, 4}, -1, 1, rng);
    Tensor self_mask = causal_mask(3);
    auto loss = [&] {
        Var e = enc.apply(Var::constant(mem));
        Var d = dec.apply(Var::constant(x), e, &self_mask, nullptr);
        return mean(mul(d, d));
    };
    CHECK(grad_check(loss, store.all(), 1e-5) < 1e-4);
}

TEST_CASE("causal mask blocks the future") {
    Rng rng(67);
    ParamStore store;
    MultiHeadAttention mha(store, "mha", 4, 2, rng);
    Tensor x = Tensor::uniform({4, 4}, -1, 1, rng);
    Tensor mask = causal_mask(4);
    Var out1 = mha.apply(Var::constant(x), Var::constant(x), Var::constant(x), &mask);
    // Changing the last row must not affect the first row's output.
    Tensor x2 = x;
    for (std::size_t j = 0; j < 4; ++j) x2.at(3, j) += 1.0;
    Var out2 = mha.apply(Var::constant(x2), Var::constant(x2), Var::constant(x2), &mask);
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(out1.value().at(0, j) == doctest::Approx(out2.value().at(0, j)).epsilon(1e-12));
}
