#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <span>

#include "paralens/para.hpp"

namespace paralens {

enum class Act { Sigmoid, Relu, Tanh };

// A closed combinator language of differentiable primitives over real
// vectors.  Every expression denotes a smooth map R^param x R^dom -> R^cod
// and carries enough structure to derive its reverse lens.
//
// Parameter block layout: Compose(f, g) is [g.param | f.param] (later map
// first, matching Para composition); Tensor(f, g) is [f.param | g.param].
class SmoothExpr {
public:
    enum class Kind { Linear, Bias, Activation, Add, Identity, Compose, Tensor };

    struct Node {
        Kind kind;
        std::size_t dom = 0, cod = 0, param = 0;
        Act act = Act::Sigmoid;
        std::shared_ptr<const Node> lhs, rhs;
    };

    explicit SmoothExpr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    const Node& node() const { return *n_; }
    const std::shared_ptr<const Node>& ptr() const { return n_; }
    std::size_t dom_len() const { return n_->dom; }
    std::size_t cod_len() const { return n_->cod; }
    std::size_t param_len() const { return n_->param; }

private:
    std::shared_ptr<const Node> n_;
};

// M*a with the out x in matrix M (row-major) supplied as the parameter block.
inline SmoothExpr linear(std::size_t out, std::size_t in) {
    require(out >= 1 && in >= 1, "linear: dimensions must be >= 1");
    auto n = std::make_shared<SmoothExpr::Node>();
    n->kind = SmoothExpr::Kind::Linear;
    n->dom = in;
    n->cod = out;
    n->param = out * in;
    return SmoothExpr(n);
}

// p + a, parameter length = vector length.
inline SmoothExpr bias(std::size_t len) {
    auto n = std::make_shared<SmoothExpr::Node>();
    n->kind = SmoothExpr::Kind::Bias;
    n->dom = len;
    n->cod = len;
    n->param = len;
    return SmoothExpr(n);
}

inline SmoothExpr activation(Act a, std::size_t len) {
    auto n = std::make_shared<SmoothExpr::Node>();
    n->kind = SmoothExpr::Kind::Activation;
    n->dom = len;
    n->cod = len;
    n->act = a;
    return SmoothExpr(n);
}

// Pointwise sum of the two halves of a 2n-vector.
inline SmoothExpr adder(std::size_t len) {
    auto n = std::make_shared<SmoothExpr::Node>();
    n->kind = SmoothExpr::Kind::Add;
    n->dom = 2 * len;
    n->cod = len;
    return SmoothExpr(n);
}

inline SmoothExpr identity_map(std::size_t len) {
    auto n = std::make_shared<SmoothExpr::Node>();
    n->kind = SmoothExpr::Kind::Identity;
    n->dom = len;
    n->cod = len;
    return SmoothExpr(n);
}

inline SmoothExpr compose(const SmoothExpr& f, const SmoothExpr& g) {
    require(f.cod_len() == g.dom_len(), "compose: cod/dom mismatch, " +
                                            std::to_string(f.cod_len()) + " vs " +
                                            std::to_string(g.dom_len()));
    auto n = std::make_shared<SmoothExpr::Node>();
    n->kind = SmoothExpr::Kind::Compose;
    n->dom = f.dom_len();
    n->cod = g.cod_len();
    n->param = f.param_len() + g.param_len();
    n->lhs = f.ptr();
    n->rhs = g.ptr();
    return SmoothExpr(n);
}

inline SmoothExpr tensor(const SmoothExpr& f, const SmoothExpr& g) {
    auto n = std::make_shared<SmoothExpr::Node>();
    n->kind = SmoothExpr::Kind::Tensor;
    n->dom = f.dom_len() + g.dom_len();
    n->cod = f.cod_len() + g.cod_len();
    n->param = f.param_len() + g.param_len();
    n->lhs = f.ptr();
    n->rhs = g.ptr();
    return SmoothExpr(n);
}

// linear(a, b) then bias(b) then activation; parameter length b*a + b.
inline SmoothExpr dense(std::size_t a, std::size_t b, Act act) {
    return compose(compose(linear(b, a), bias(b)), activation(act, b));
}

// Dense layer without the nonlinearity (logit output layers).
inline SmoothExpr affine(std::size_t a, std::size_t b) {
    return compose(linear(b, a), bias(b));
}

inline double act_apply(Act a, double x) {
    switch (a) {
        case Act::Sigmoid:
            return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
        case Act::Relu: return x > 0 ? x : 0.0;
        case Act::Tanh: return std::tanh(x);
    }
    return 0;
}

// Derivative at x; relu uses subgradient 0 at the kink.
inline double act_deriv(Act a, double x) {
    switch (a) {
        case Act::Sigmoid: {
            double s = act_apply(Act::Sigmoid, x);
            return s * (1.0 - s);
        }
        case Act::Relu: return x > 0 ? 1.0 : 0.0;
        case Act::Tanh: {
            double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    return 0;
}

namespace detail {

using dspan = std::span<const double>;

inline Vec<double> smooth_forward_rec(const SmoothExpr::Node& n, dspan p, dspan a) {
    using K = SmoothExpr::Kind;
    switch (n.kind) {
        case K::Linear: {
            Vec<double> y(n.cod, 0.0);
            for (std::size_t i = 0; i < n.cod; ++i) {
                double acc = 0;
                for (std::size_t j = 0; j < n.dom; ++j) acc += p[i * n.dom + j] * a[j];
                y[i] = acc;
            }
            return y;
        }
        case K::Bias: {
            Vec<double> y(n.cod);
            for (std::size_t i = 0; i < n.cod; ++i) y[i] = p[i] + a[i];
            return y;
        }
        case K::Activation: {
            Vec<double> y(n.cod);
            for (std::size_t i = 0; i < n.cod; ++i) y[i] = act_apply(n.act, a[i]);
            return y;
        }
        case K::Add: {
            Vec<double> y(n.cod);
            for (std::size_t i = 0; i < n.cod; ++i) y[i] = a[i] + a[n.cod + i];
            return y;
        }
        case K::Identity: return Vec<double>(a.begin(), a.end());
        case K::Compose: {
            const auto& f = *n.lhs;
            const auto& g = *n.rhs;
            Vec<double> mid = smooth_forward_rec(f, p.subspan(g.param), a);
            return smooth_forward_rec(g, p.subspan(0, g.param), mid);
        }
        case K::Tensor: {
            const auto& f = *n.lhs;
            const auto& g = *n.rhs;
            Vec<double> fy = smooth_forward_rec(f, p.subspan(0, f.param), a.subspan(0, f.dom));
            Vec<double> gy = smooth_forward_rec(g, p.subspan(f.param), a.subspan(f.dom));
            fy.insert(fy.end(), gy.begin(), gy.end());
            return fy;
        }
    }
    throw shape_error("smooth_forward: bad node");
}

inline double margin_rec(const SmoothExpr::Node& n, dspan p, dspan a, Vec<double>& out) {
    using K = SmoothExpr::Kind;
    double margin = std::numeric_limits<double>::infinity();
    switch (n.kind) {
        case K::Activation:
            if (n.act == Act::Relu)
                for (std::size_t i = 0; i < n.dom; ++i)
                    margin = std::min(margin, std::abs(a[i]));
            out = smooth_forward_rec(n, p, a);
            return margin;
        case K::Compose: {
            const auto& f = *n.lhs;
            const auto& g = *n.rhs;
            Vec<double> mid;
            double m1 = margin_rec(f, p.subspan(g.param), a, mid);
            double m2 = margin_rec(g, p.subspan(0, g.param), mid, out);
            return std::min(m1, m2);
        }
        case K::Tensor: {
            const auto& f = *n.lhs;
            const auto& g = *n.rhs;
            Vec<double> fy, gy;
            double m1 = margin_rec(f, p.subspan(0, f.param), a.subspan(0, f.dom), fy);
            double m2 = margin_rec(g, p.subspan(f.param), a.subspan(f.dom), gy);
            fy.insert(fy.end(), gy.begin(), gy.end());
            out = std::move(fy);
            return std::min(m1, m2);
        }
        default:
            out = smooth_forward_rec(n, p, a);
            return margin;
    }
}

}  // namespace detail

// Smallest |pre-activation| seen at any relu gate during evaluation
// (infinity if the expression has no relu).  Used to exclude finite
// difference checks near kinks.
inline double relu_kink_margin(const SmoothExpr& e, const Vec<double>& p,
                               const Vec<double>& a) {
    Vec<double> scratch;
    return detail::margin_rec(e.node(), p, a, scratch);
}

// Direct recursive evaluation of the denoted map (independent of the lens
// route; the two are cross-checked in the tests).
inline Vec<double> smooth_forward(const SmoothExpr& e, const Vec<double>& p,
                                  const Vec<double>& a) {
    check_len(p, e.param_len(), "smooth_forward params");
    check_len(a, e.dom_len(), "smooth_forward input");
    return detail::smooth_forward_rec(e.node(), p, a);
}

namespace detail {

inline Para<double> reverse_rec(const SmoothExpr::Node& n);

inline Para<double> reverse_primitive(const SmoothExpr::Node& n) {
    using K = SmoothExpr::Kind;
    std::size_t dom = n.dom, cod = n.cod, plen = n.param;
    Act act = n.act;
    switch (n.kind) {
        case K::Linear: {
            Lens<double> body = make_lens<double>(
                iface(plen + dom), iface(cod),
                [=](const Vec<double>& in) {
                    Vec<double> y(cod, 0.0);
                    for (std::size_t i = 0; i < cod; ++i) {
                        double acc = 0;
                        for (std::size_t j = 0; j < dom; ++j)
                            acc += in[i * dom + j] * in[plen + j];
                        y[i] = acc;
                    }
                    return y;
                },
                [=](const Vec<double>& in, const Vec<double>& bp) {
                    // p' = outer(b', a), a' = M^T b'
                    Vec<double> out(plen + dom, 0.0);
                    for (std::size_t i = 0; i < cod; ++i)
                        for (std::size_t j = 0; j < dom; ++j)
                            out[i * dom + j] = bp[i] * in[plen + j];
                    for (std::size_t j = 0; j < dom; ++j) {
                        double acc = 0;
                        for (std::size_t i = 0; i < cod; ++i)
                            acc += in[i * dom + j] * bp[i];
                        out[plen + j] = acc;
                    }
                    return out;
                });
            return make_para(iface(plen), iface(dom), body);
        }
        case K::Bias: {
            Lens<double> body = make_lens<double>(
                iface(2 * dom), iface(cod),
                [=](const Vec<double>& in) {
                    Vec<double> y(cod);
                    for (std::size_t i = 0; i < cod; ++i) y[i] = in[i] + in[dom + i];
                    return y;
                },
                [=](const Vec<double>&, const Vec<double>& bp) {
                    Vec<double> out(2 * dom);
                    for (std::size_t i = 0; i < dom; ++i) out[i] = bp[i];
                    for (std::size_t i = 0; i < dom; ++i) out[dom + i] = bp[i];
                    return out;
                });
            return make_para(iface(dom), iface(dom), body);
        }
        case K::Activation: {
            Lens<double> body = make_lens<double>(
                iface(dom), iface(cod),
                [=](const Vec<double>& in) {
                    Vec<double> y(cod);
                    for (std::size_t i = 0; i < cod; ++i) y[i] = act_apply(act, in[i]);
                    return y;
                },
                [=](const Vec<double>& in, const Vec<double>& bp) {
                    Vec<double> out(dom);
                    for (std::size_t i = 0; i < dom; ++i)
                        out[i] = act_deriv(act, in[i]) * bp[i];
                    return out;
                });
            return make_para(unit_interface(), iface(dom), body);
        }
        case K::Add: {
            Lens<double> body = make_lens<double>(
                iface(dom), iface(cod),
                [=](const Vec<double>& in) {
                    Vec<double> y(cod);
                    for (std::size_t i = 0; i < cod; ++i) y[i] = in[i] + in[cod + i];
                    return y;
                },
                [=](const Vec<double>&, const Vec<double>& bp) {
                    Vec<double> out(dom);
                    for (std::size_t i = 0; i < cod; ++i) out[i] = bp[i];
                    for (std::size_t i = 0; i < cod; ++i) out[cod + i] = bp[i];
                    return out;
                });
            return make_para(unit_interface(), iface(dom), body);
        }
        case K::Identity:
            return para_identity<double>(iface(dom));
        default: break;
    }
    throw shape_error("reverse: not a primitive");
}

inline Para<double> reverse_rec(const SmoothExpr::Node& n) {
    using K = SmoothExpr::Kind;
    switch (n.kind) {
        case K::Compose:
            return para_compose(reverse_rec(*n.lhs), reverse_rec(*n.rhs));
        case K::Tensor:
            return para_tensor(reverse_rec(*n.lhs), reverse_rec(*n.rhs));
        default:
            return reverse_primitive(n);
    }
}

}  // namespace detail

// The structural reverse-derivative lens: forward is the denoted map,
// backward computes transposed-Jacobian-vector products via the chain rule.
inline Para<double> reverse(const SmoothExpr& e) {
    return detail::reverse_rec(e.node());
}

struct Jacobian {
    std::size_t rows = 0;  // cod length
    std::size_t cols = 0;  // param length + dom length
    Vec<double> entries;   // row-major

    double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
};

// Central-difference Jacobian in each joint (p, a) coordinate.
inline Jacobian finite_difference_jacobian(const SmoothExpr& e, const Vec<double>& p,
                                           const Vec<double>& a, double h) {
    require(h > 0, "finite_difference_jacobian: h must be positive");
    std::size_t plen = p.size(), alen = a.size();
    Jacobian j;
    j.rows = e.cod_len();
    j.cols = plen + alen;
    j.entries.assign(j.rows * j.cols, 0.0);
    Vec<double> pp = p, aa = a;
    for (std::size_t c = 0; c < j.cols; ++c) {
        double* x = c < plen ? &pp[c] : &aa[c - plen];
        double saved = *x;
        *x = saved + h;
        Vec<double> hi = smooth_forward(e, pp, aa);
        *x = saved - h;
        Vec<double> lo = smooth_forward(e, pp, aa);
        *x = saved;
        for (std::size_t r = 0; r < j.rows; ++r)
            j.entries[r * j.cols + c] = (hi[r] - lo[r]) / (2.0 * h);
    }
    return j;
}

// J^T v restricted to columns [begin, end).
inline Vec<double> jacobian_tv(const Jacobian& j, const Vec<double>& v,
                               std::size_t begin, std::size_t end) {
    Vec<double> out(end - begin, 0.0);
    for (std::size_t c = begin; c < end; ++c) {
        double acc = 0;
        for (std::size_t r = 0; r < j.rows; ++r) acc += j.at(r, c) * v[r];
        out[c - begin] = acc;
    }
    return out;
}

namespace detail {

inline void init_params_rec(const SmoothExpr::Node& n, std::span<double> out,
                            std::mt19937_64& rng) {
    using K = SmoothExpr::Kind;
    auto fill = [&](std::span<double> dst, std::size_t fan_in) {
        double b = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-b, b);
        for (double& x : dst) x = u(rng);
    };
    switch (n.kind) {
        case K::Linear: fill(out, n.dom); return;
        case K::Bias: fill(out, n.cod); return;
        case K::Compose:
            init_params_rec(*n.rhs, out.subspan(0, n.rhs->param), rng);
            init_params_rec(*n.lhs, out.subspan(n.rhs->param), rng);
            return;
        case K::Tensor:
            init_params_rec(*n.lhs, out.subspan(0, n.lhs->param), rng);
            init_params_rec(*n.rhs, out.subspan(n.lhs->param), rng);
            return;
        default: return;
    }
}

}  // namespace detail

// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] per parameterised node, drawn
// in parameter-layout order from the given generator.
inline Vec<double> init_params(const SmoothExpr& e, std::mt19937_64& rng) {
    Vec<double> p(e.param_len(), 0.0);
    detail::init_params_rec(e.node(), p, rng);
    return p;
}

}  // namespace paralens
