#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "paralens/para.hpp"

using namespace paralens;

namespace {

// (p, x) |-> p*x with the exact reverse-mode backward
Para<double> scaler() {
    Lens<double> body = make_lens<double>(
        iface(2), iface(1),
        [](const Vec<double>& in) { return Vec<double>{in[0] * in[1]}; },
        [](const Vec<double>& in, const Vec<double>& v) {
            return Vec<double>{v[0] * in[1], v[0] * in[0]};
        });
    return make_para(iface(1), iface(1), body);
}

// (q, y) |-> q + y
Para<double> adder_p() {
    Lens<double> body = make_lens<double>(
        iface(2), iface(1),
        [](const Vec<double>& in) { return Vec<double>{in[0] + in[1]}; },
        [](const Vec<double>&, const Vec<double>& v) { return Vec<double>{v[0], v[0]}; });
    return make_para(iface(1), iface(1), body);
}

// random affine parametrised scalar map with a random linear backward
Para<double> random_para(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double w = u(rng), k = u(rng), c = u(rng);
    Lens<double> body = make_lens<double>(
        iface(2), iface(1),
        [w, k, c](const Vec<double>& in) { return Vec<double>{w * in[0] + k * in[1] + c}; },
        [w, k](const Vec<double>& in, const Vec<double>& v) {
            return Vec<double>{w * v[0] + in[1], k * v[0] + in[0]};
        });
    return make_para(iface(1), iface(1), body);
}

Lens<double> random_reparam_lens(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double a = u(rng), b = u(rng);
    return make_lens<double>(
        iface(1), iface(1), [a](const Vec<double>& q) { return Vec<double>{a * q[0]}; },
        [b](const Vec<double>& q, const Vec<double>& pp) {
            return Vec<double>{b * pp[0] + q[0]};
        });
}

bool para_equal(const Para<double>& f, const Para<double>& g, std::mt19937_64& rng,
                std::size_t samples = 100) {
    if (!(f.param == g.param) || !(f.dom == g.dom) || !(f.cod == g.cod)) return false;
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (std::size_t k = 0; k < samples; ++k) {
        Vec<double> in(f.body.dom.fwd), v(f.body.cod.bwd);
        for (auto& x : in) x = u(rng);
        for (auto& x : v) x = u(rng);
        Vec<double> a = f.body.get(in), b = g.body.get(in);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != doctest::Approx(b[i]).epsilon(1e-12)) return false;
        Vec<double> pa = f.body.put(in, v), pb = g.body.put(in, v);
        for (std::size_t i = 0; i < pa.size(); ++i)
            if (pa[i] != doctest::Approx(pb[i]).epsilon(1e-12)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("composite forward with the later map's parameters first") {
    Para<double> c = para_compose(scaler(), adder_p());
    // layout [q | p | x]
    CHECK(c.body.get({2, 3, 4})[0] == 14);
    CHECK(c.param.fwd == 2);
}

TEST_CASE("parameterless identity is a unit for composition") {
    std::mt19937_64 rng(3);
    Para<double> f = scaler();
    CHECK(para_equal(para_compose(para_identity<double>(f.dom), f), f, rng));
    CHECK(para_equal(para_compose(f, para_identity<double>(f.cod)), f, rng));
}

TEST_CASE("composition is associative, extensionally") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        Para<double> f = random_para(rng), g = random_para(rng), h = random_para(rng);
        Para<double> left = para_compose(para_compose(f, g), h);
        Para<double> right = para_compose(f, para_compose(g, h));
        CHECK(para_equal(left, right, rng));
    }
}

TEST_CASE("tensor acts componentwise, layout [f.param | g.param | f.in | g.in]") {
    Para<double> t = para_tensor(scaler(), adder_p());
    Vec<double> out = t.body.get({3, 2, 4, 5});
    CHECK(out == Vec<double>{12, 7});

    Para<double> ids = para_tensor(para_identity<double>(iface(1)),
                                   para_identity<double>(iface(2)));
    CHECK(ids.body.get({1, 2, 3}) == Vec<double>{1, 2, 3});

    std::mt19937_64 rng(5);
    Para<double> f = random_para(rng);
    Para<double> unit = para_identity<double>(unit_interface());
    CHECK(para_equal(para_tensor(f, unit), f, rng));
}

TEST_CASE("reparameterisation substitutes on the parameter port") {
    Lens<double> twice = make_lens<double>(
        iface(1), iface(1), [](const Vec<double>& q) { return Vec<double>{2 * q[0]}; },
        [](const Vec<double>&, const Vec<double>& pp) { return pp; });
    Para<double> f = para_reparam(scaler(), twice);
    CHECK(f.body.get({3, 4})[0] == 24);

    std::mt19937_64 rng(17);
    Para<double> g = random_para(rng);
    CHECK(para_equal(para_reparam(g, lens_identity<double>(g.param)), g, rng));
}

TEST_CASE("reparameterise-then-compose equals compose-then-reparameterise") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        Para<double> f = random_para(rng), g = random_para(rng);
        Lens<double> rf = random_reparam_lens(rng), rg = random_reparam_lens(rng);
        Para<double> left = para_compose(para_reparam(f, rf), para_reparam(g, rg));
        // composite parameters are [g.param | f.param], so the joint
        // reparameterisation is the tensor in that order
        Para<double> right = para_reparam(para_compose(f, g), lens_tensor(rg, rf));
        CHECK(para_equal(left, right, rng));
    }
}

TEST_CASE("parameter blocks split and concatenate losslessly") {
    Vec<double> p{1, 2}, a{3};
    Vec<double> joined = concat(p, a);
    auto [p2, a2] = split(joined, 2);
    CHECK(p2 == p);
    CHECK(a2 == a);
}

TEST_CASE("composing mismatched interfaces is an error") {
    Para<double> f = scaler();
    Para<double> wide = para_identity<double>(iface(3));
    CHECK_THROWS_AS(para_compose(f, wide), shape_error);
}
