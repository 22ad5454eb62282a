#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "paralens/axioms.hpp"
#include "paralens/boolean.hpp"
#include "paralens/components.hpp"

using namespace paralens;

namespace {

// central difference of a loss forward, for one port block
Vec<double> fd_grad(const LossLens<double>& loss, Vec<double> bt, Vec<double> bp,
                    bool wrt_truth, double h = 1e-6) {
    std::size_t b = bt.size();
    Vec<double> g(b);
    for (std::size_t i = 0; i < b; ++i) {
        Vec<double>& v = wrt_truth ? bt : bp;
        double keep = v[i];
        v[i] = keep + h;
        double up = loss.para.body.get(concat(bt, bp))[0];
        v[i] = keep - h;
        double dn = loss.para.body.get(concat(bt, bp))[0];
        v[i] = keep;
        g[i] = (up - dn) / (2 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("quadratic loss: forward values and analytic backward") {
    LossLens<double> q = loss_quadratic(2);
    CHECK(q.para.body.get({1, 2, 1, 2})[0] == 0.0);

    LossLens<double> q1 = loss_quadratic(1);
    CHECK(q1.para.body.get({0, 2})[0] == 2.0);
    // truth port alpha*(b_t - b_p), prediction port alpha*(b_p - b_t)
    Vec<double> back = q1.para.body.put({0, 2}, {1.0});
    CHECK(back == Vec<double>{-2.0, 2.0});
}

TEST_CASE("quadratic backward matches finite differences on both ports") {
    std::mt19937_64 rng(1);
    LossLens<double> q = loss_quadratic(3);
    for (int t = 0; t < 20; ++t) {
        Vec<double> bt = random_vec(rng, 3), bp = random_vec(rng, 3);
        Vec<double> back = q.para.body.put(concat(bt, bp), {1.0});
        Vec<double> gt = fd_grad(q, bt, bp, true), gp = fd_grad(q, bt, bp, false);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(back[i] == doctest::Approx(gt[i]).epsilon(1e-6));
            CHECK(back[3 + i] == doctest::Approx(gp[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("softmax cross entropy: closed forms and oracle") {
    LossLens<double> s = loss_softmax_ce(2);
    // uniform logits, one-hot truth
    Vec<double> back = s.para.body.put({1, 0, 0, 0}, {1.0});
    CHECK(back[2] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(back[3] == doctest::Approx(0.5).epsilon(1e-12));

    LossLens<double> s4 = loss_softmax_ce(4);
    Vec<double> bt{0, 0, 1, 0}, bp{0.3, 0.3, 0.3, 0.3};
    Vec<double> b4 = s4.para.body.put(concat(bt, bp), {1.0});
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(b4[4 + i] == doctest::Approx(0.25 - bt[i]).epsilon(1e-9));

    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        Vec<double> logit = random_vec(rng, 4, 2.0);
        Vec<double> truth{0, 0, 0, 0};
        truth[t % 4] = 1.0;
        Vec<double> got = s4.para.body.put(concat(truth, logit), {1.0});
        Vec<double> gt = fd_grad(s4, truth, logit, true),
                    gp = fd_grad(s4, truth, logit, false);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(got[i] == doctest::Approx(gt[i]).epsilon(1e-5));
            CHECK(got[4 + i] == doctest::Approx(gp[i]).epsilon(1e-5));
        }
    }
}

TEST_CASE("softmax forward is finite on large logits") {
    LossLens<double> s = loss_softmax_ce(3);
    double v = s.para.body.get({1, 0, 0, 1000, -1000, 0})[0];
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("xor loss equals the reverse lens of the XOR polynomial") {
    LossLens<Z2> x = loss_boolean_xor(1);
    CHECK(x.para.body.get({Z2(1), Z2(1)})[0] == Z2(0));
    CHECK(z2_eq(x.para.body.put({Z2(0), Z2(1)}, {Z2(1)}), {Z2(1), Z2(1)}));

    Z2Tuple xort{Z2Poly::var(2, 0) + Z2Poly::var(2, 1)};
    Para<Z2> rx = bool_reverse(xort);
    for (std::size_t m = 0; m < 4; ++m)
        for (std::size_t v = 0; v < 2; ++v) {
            Vec<Z2> in = bits_of(m, 2);
            Vec<Z2> change{Z2(static_cast<std::uint8_t>(v))};
            CHECK(x.para.body.get(in) == rx.body.get(in));
            CHECK(z2_eq(x.para.body.put(in, change), rx.body.put(in, change)));
        }
}

TEST_CASE("dot loss: masking and scaled backward") {
    LossLens<double> d = loss_dot(2);
    CHECK(d.para.body.get({1, 0, 3, 5})[0] == 3.0);
    CHECK(d.para.body.put({1, 0, 3, 5}, {2.0}) == Vec<double>{6, 10, 2, 0});

    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        Vec<double> bt = random_vec(rng, 2), bp = random_vec(rng, 2);
        Vec<double> back = d.para.body.put(concat(bt, bp), {1.0});
        Vec<double> gt = fd_grad(d, bt, bp, true), gp = fd_grad(d, bt, bp, false);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(back[i] == doctest::Approx(gt[i]).epsilon(1e-6));
            CHECK(back[2 + i] == doctest::Approx(gp[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("learning rates") {
    RateLens<double> c = rate_constant(0.1);
    CHECK(c.put({17.3}, {}) == Vec<double>{-0.1});
    CHECK(c.put({0.0}, {}) == Vec<double>{-0.1});

    RateLens<Z2> id = rate_identity(3);
    CHECK(z2_eq(id.put({Z2(1), Z2(0), Z2(1)}, {}), {Z2(1), Z2(0), Z2(1)}));

    RateLens<double> sc = rate_scaled(0.1);
    CHECK(sc.put({2.0}, {}) == Vec<double>{-0.2});
    CHECK(sc.put({0.0}, {}) == Vec<double>{0.0});
    CHECK(sc.put({3.0}, {})[0] ==
          doctest::Approx(sc.put({1.0}, {})[0] + sc.put({2.0}, {})[0]).epsilon(1e-15));

    CHECK_THROWS(rate_constant(0.0));
    CHECK_THROWS(rate_scaled(-1.0));
}

TEST_CASE("basic gradient update adds the change") {
    OptimizerLens<double> g = opt_gradient<double>(2);
    CHECK(g.lens.put({1, 2}, {0.5, -1}) == Vec<double>{1.5, 1.0});
    CHECK(g.lens.put({1, 2}, {0, 0}) == Vec<double>{1, 2});

    OptimizerLens<Z2> gz = opt_gradient<Z2>(1);
    CHECK(gz.lens.put({Z2(1)}, {Z2(1)})[0] == Z2(0));
}

TEST_CASE("momentum: worked example and gamma=0 degeneration") {
    OptimizerLens<double> m = opt_momentum(0.5, 1);
    Vec<double> out = m.lens.put({1, 0}, {1});
    CHECK(out == Vec<double>{0.5, 0.5});

    OptimizerLens<double> m0 = opt_momentum(0.0, 3);
    OptimizerLens<double> g = opt_gradient<double>(3);
    std::mt19937_64 rng(4);
    Vec<double> s(3, 0.0), p = random_vec(rng, 3), pg = p;
    for (int t = 0; t < 100; ++t) {
        Vec<double> pp = random_vec(rng, 3);
        Vec<double> sp = m0.lens.put(concat(s, p), pp);
        auto [s2, p2] = split(sp, 3);
        s = s2;
        p = p2;
        pg = g.lens.put(pg, pp);
        REQUIRE(p == pg);  // bit-identical
    }
}

TEST_CASE("nesterov: lookahead get, momentum put") {
    OptimizerLens<double> n = opt_nesterov(0.5, 1);
    CHECK(n.lens.get({2, 1}) == Vec<double>{2.0});  // 1 + 0.5*2
    OptimizerLens<double> n0 = opt_nesterov(0.0, 1);
    CHECK(n0.lens.get({2, 1}) == Vec<double>{1.0});

    OptimizerLens<double> m = opt_momentum(0.5, 1);
    CHECK(n.lens.get({2, 1})[0] - m.lens.get({2, 1})[0] == 0.5 * 2);
    CHECK(n.lens.put({2, 1}, {3}) == m.lens.put({2, 1}, {3}));
}

TEST_CASE("adagrad: accumulator and scaled update") {
    OptimizerLens<double> a = opt_adagrad(1.0, 1e-7, 1);
    Vec<double> out = a.lens.put({0, 0}, {1});
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(1.0 / (1e-7 + 1.0)).epsilon(1e-12));

    // zero change is a fixed point
    CHECK(a.lens.put({0, 5}, {0}) == Vec<double>{0, 5});

    // accumulator is nondecreasing
    std::mt19937_64 rng(5);
    Vec<double> s{0}, p{0};
    double prev = 0;
    for (int t = 0; t < 20; ++t) {
        Vec<double> sp = a.lens.put(concat(s, p), random_vec(rng, 1));
        auto [s2, p2] = split(sp, 1);
        CHECK(s2[0] >= prev);
        prev = s2[0];
        s = s2;
        p = p2;
    }
}

TEST_CASE("adam: worked first step, raw moments stored, counter advances") {
    OptimizerLens<double> a = opt_adam(0.9, 0.999, 0.001, 1e-8, 1);
    Vec<double> s0 = a.init_state();
    REQUIRE(s0.size() == 3);  // m, v, t
    CHECK(s0[2] == 1.0);
    Vec<double> out = a.lens.put(concat(s0, Vec<double>{0.0}), {1.0});
    CHECK(out[0] == doctest::Approx(0.1).epsilon(1e-15));    // m' raw
    CHECK(out[1] == doctest::Approx(0.001).epsilon(1e-15));  // v' raw
    CHECK(out[2] == 2.0);                                    // t advanced
    // mhat = 1, vhat = 1 -> p + 0.001/(1e-8 + 1)
    CHECK(out[3] == doctest::Approx(0.001 / (1e-8 + 1.0)).epsilon(1e-12));

    // zero change at zero moments leaves parameters unchanged
    Vec<double> fix = a.lens.put(concat(a.init_state(), Vec<double>{7.0}), {0.0});
    CHECK(fix[0] == 0.0);
    CHECK(fix[1] == 0.0);
    CHECK(fix[3] == 7.0);
}

TEST_CASE("optimizer lookaheads leave parameters untouched for stateless kinds") {
    OptimizerLens<double> g = opt_gradient<double>(2);
    CHECK(g.lens.get({3, 4}) == Vec<double>{3, 4});
    OptimizerLens<double> a = opt_adam(0.9, 0.999, 0.001, 1e-8, 2);
    CHECK(a.lens.get(concat(a.init_state(), Vec<double>{3, 4})) == Vec<double>{3, 4});
}
