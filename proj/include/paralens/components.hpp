#pragma once

#include <cmath>

#include "paralens/para.hpp"
#include "paralens/z2.hpp"

namespace paralens {

// A loss map as a parametrised lens from the prediction interface to the
// loss interface, with the ground truth riding on the parameter port.
// body.dom = [truth | prediction], body.cod = loss.
template <class S>
struct LossLens {
    Para<S> para;
    std::size_t dim = 0;       // prediction / truth length
    std::size_t loss_dim = 0;  // L
};

namespace detail {

inline double logsumexp(const Vec<double>& x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    double acc = 0;
    for (double v : x) acc += std::exp(v - m);
    return m + std::log(acc);
}

inline Vec<double> softmax(const Vec<double>& x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    double z = 0;
    Vec<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - m);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

}  // namespace detail

// e(b_t, b_p) = 1/2 sum_i (b_p_i - b_t_i)^2.
// Backward: truth port alpha*(b_t - b_p), prediction port alpha*(b_p - b_t)
// (the partial derivatives of e; see the closed-form update tests).
inline LossLens<double> loss_quadratic(std::size_t b) {
    require(b >= 1, "loss_quadratic: b must be >= 1");
    Lens<double> body = make_lens<double>(
        iface(2 * b), iface(1),
        [b](const Vec<double>& in) {
            double acc = 0;
            for (std::size_t i = 0; i < b; ++i) {
                double d = in[b + i] - in[i];
                acc += d * d;
            }
            return Vec<double>{0.5 * acc};
        },
        [b](const Vec<double>& in, const Vec<double>& alpha) {
            Vec<double> out(2 * b);
            for (std::size_t i = 0; i < b; ++i) {
                double d = in[b + i] - in[i];  // b_p - b_t
                out[i] = alpha[0] * -d;
                out[b + i] = alpha[0] * d;
            }
            return out;
        });
    return {make_para(iface(b), iface(b), body), b, 1};
}

// Softmax cross entropy: e(b_t, b_p) = -sum_i b_t_i log Softmax(b_p)_i,
// computed with the max-subtraction trick.  Backward: prediction port
// alpha*(Softmax(b_p) - b_t) (exact gradient when sum b_t = 1), truth port
// alpha*(-log Softmax(b_p)).
inline LossLens<double> loss_softmax_ce(std::size_t b) {
    require(b >= 1, "loss_softmax_ce: b must be >= 1");
    Lens<double> body = make_lens<double>(
        iface(2 * b), iface(1),
        [b](const Vec<double>& in) {
            Vec<double> bp(in.begin() + static_cast<std::ptrdiff_t>(b), in.end());
            double lse = detail::logsumexp(bp);
            double acc = 0;
            for (std::size_t i = 0; i < b; ++i) acc += in[i] * (lse - bp[i]);
            return Vec<double>{acc};
        },
        [b](const Vec<double>& in, const Vec<double>& alpha) {
            Vec<double> bp(in.begin() + static_cast<std::ptrdiff_t>(b), in.end());
            Vec<double> sm = detail::softmax(bp);
            double lse = detail::logsumexp(bp);
            Vec<double> out(2 * b);
            for (std::size_t i = 0; i < b; ++i) {
                out[i] = alpha[0] * (lse - bp[i]);        // -log softmax_i
                out[b + i] = alpha[0] * (sm[i] - in[i]);  // softmax - b_t
            }
            return out;
        });
    return {make_para(iface(b), iface(b), body), b, 1};
}

// e(b_t, b_p) = b_t XOR b_p componentwise; backward is (alpha, alpha).
inline LossLens<Z2> loss_boolean_xor(std::size_t b) {
    require(b >= 1, "loss_boolean_xor: b must be >= 1");
    Lens<Z2> body = make_lens<Z2>(
        iface(2 * b), iface(b),
        [b](const Vec<Z2>& in) {
            Vec<Z2> out(b);
            for (std::size_t i = 0; i < b; ++i) out[i] = in[i] + in[b + i];
            return out;
        },
        [b](const Vec<Z2>&, const Vec<Z2>& alpha) {
            Vec<Z2> out(2 * b);
            for (std::size_t i = 0; i < b; ++i) out[i] = out[b + i] = alpha[i];
            return out;
        });
    return {make_para(iface(b), iface(b), body), b, b};
}

// e(b_t, b_p) = b_t . b_p; backward (alpha*b_p, alpha*b_t).
inline LossLens<double> loss_dot(std::size_t b) {
    require(b >= 1, "loss_dot: b must be >= 1");
    Lens<double> body = make_lens<double>(
        iface(2 * b), iface(1),
        [b](const Vec<double>& in) {
            double acc = 0;
            for (std::size_t i = 0; i < b; ++i) acc += in[i] * in[b + i];
            return Vec<double>{acc};
        },
        [b](const Vec<double>& in, const Vec<double>& alpha) {
            Vec<double> out(2 * b);
            for (std::size_t i = 0; i < b; ++i) {
                out[i] = alpha[0] * in[b + i];
                out[b + i] = alpha[0] * in[i];
            }
            return out;
        });
    return {make_para(iface(b), iface(b), body), b, 1};
}

// A learning rate is a lens (L, L) -> (1, 1): get discards the loss value,
// put injects the backward signal at the loss port.
template <class S>
using RateLens = Lens<S>;

// put(l) = alpha constantly (any loss dimension 1).
inline RateLens<double> rate_constant_raw(double alpha) {
    return make_lens<double>(
        iface(1), unit_interface(),
        [](const Vec<double>&) { return Vec<double>{}; },
        [alpha](const Vec<double>&, const Vec<double>&) { return Vec<double>{alpha}; });
}

// The standard smooth learning rate: constantly -eps.
inline RateLens<double> rate_constant(double eps) {
    require(eps > 0, "rate_constant: eps must be positive");
    return rate_constant_raw(-eps);
}

// The Boolean learning rate: put(l) = l.
inline RateLens<Z2> rate_identity(std::size_t l) {
    return make_lens<Z2>(
        iface(l), unit_interface(),
        [](const Vec<Z2>&) { return Vec<Z2>{}; },
        [](const Vec<Z2>& lv, const Vec<Z2>&) { return lv; });
}

// put(l) = -eps * l.
inline RateLens<double> rate_scaled(double eps) {
    require(eps > 0, "rate_scaled: eps must be positive");
    return make_lens<double>(
        iface(1), unit_interface(),
        [](const Vec<double>&) { return Vec<double>{}; },
        [eps](const Vec<double>& l, const Vec<double>&) {
            return Vec<double>{-eps * l[0]};
        });
}

// A stateful parameter update: a lens (S x P, S x P) -> (P, P').  get may
// compute a lookahead; put folds the requested change into state and
// parameters.  Sign convention: updates ADD p'; descent comes entirely
// from the negative learning rate.
template <class S>
struct OptimizerLens {
    std::size_t state_dim = 0;
    std::size_t param_dim = 0;
    Lens<S> lens;   // dom (S+P, S+P), cod (P, P)
    Vec<S> state0;  // initial state

    Vec<S> init_state() const { return state0; }
};

// G(p) = p, G*(p, p') = p + p' (carrier addition: XOR over Z2).
template <class S>
OptimizerLens<S> opt_gradient(std::size_t p) {
    OptimizerLens<S> o;
    o.state_dim = 0;
    o.param_dim = p;
    o.lens = make_lens<S>(
        iface(p), iface(p),
        [](const Vec<S>& v) { return v; },
        [p](const Vec<S>& v, const Vec<S>& pp) {
            Vec<S> out(p);
            for (std::size_t i = 0; i < p; ++i) out[i] = v[i] + pp[i];
            return out;
        });
    return o;
}

// S = P; get(s, p) = p; put(s, p, p') = (s', p + s') with s' = -gamma*s + p'.
inline OptimizerLens<double> opt_momentum(double gamma, std::size_t p) {
    require(gamma >= 0, "opt_momentum: gamma must be >= 0");
    OptimizerLens<double> o;
    o.state_dim = p;
    o.param_dim = p;
    o.state0.assign(p, 0.0);
    o.lens = make_lens<double>(
        iface(2 * p), iface(p),
        [p](const Vec<double>& sp) {
            return Vec<double>(sp.begin() + static_cast<std::ptrdiff_t>(p), sp.end());
        },
        [gamma, p](const Vec<double>& sp, const Vec<double>& pp) {
            Vec<double> out(2 * p);
            for (std::size_t i = 0; i < p; ++i) {
                double snew = -gamma * sp[i] + pp[i];
                out[i] = snew;
                out[p + i] = sp[p + i] + snew;
            }
            return out;
        });
    return o;
}

// Momentum with the lookahead get(s, p) = p + gamma*s.
inline OptimizerLens<double> opt_nesterov(double gamma, std::size_t p) {
    OptimizerLens<double> o = opt_momentum(gamma, p);
    o.lens.get = [gamma, p](const Vec<double>& sp) {
        check_len(sp, 2 * p, "nesterov get input");
        Vec<double> out(p);
        for (std::size_t i = 0; i < p; ++i) out[i] = sp[p + i] + gamma * sp[i];
        return out;
    };
    return o;
}

// S = P (accumulator g); put: g' = g + p' (.) p',
// p_new = p + (eps / (delta + sqrt(g'))) (.) p'.
inline OptimizerLens<double> opt_adagrad(double eps, double delta, std::size_t p) {
    require(eps > 0 && delta > 0, "opt_adagrad: eps and delta must be positive");
    OptimizerLens<double> o;
    o.state_dim = p;
    o.param_dim = p;
    o.state0.assign(p, 0.0);
    o.lens = make_lens<double>(
        iface(2 * p), iface(p),
        [p](const Vec<double>& sp) {
            return Vec<double>(sp.begin() + static_cast<std::ptrdiff_t>(p), sp.end());
        },
        [eps, delta, p](const Vec<double>& sp, const Vec<double>& pp) {
            Vec<double> out(2 * p);
            for (std::size_t i = 0; i < p; ++i) {
                double g = sp[i] + pp[i] * pp[i];
                out[i] = g;
                out[p + i] = sp[p + i] + (eps / (delta + std::sqrt(g))) * pp[i];
            }
            return out;
        });
    return o;
}

// S = P x P plus a step counter: state layout [m | v | t], t starts at 1.
// Raw m', v' are stored; bias-corrected values are used only in the update.
inline OptimizerLens<double> opt_adam(double beta1, double beta2, double eps,
                                      double delta, std::size_t p) {
    require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1,
            "opt_adam: betas must be in [0, 1)");
    require(eps > 0 && delta > 0, "opt_adam: eps and delta must be positive");
    OptimizerLens<double> o;
    o.state_dim = 2 * p + 1;
    o.param_dim = p;
    o.state0.assign(2 * p + 1, 0.0);
    o.state0[2 * p] = 1.0;  // t
    std::size_t sd = o.state_dim;
    o.lens = make_lens<double>(
        iface(sd + p), iface(p),
        [sd, p](const Vec<double>& sp) {
            return Vec<double>(sp.begin() + static_cast<std::ptrdiff_t>(sd), sp.end());
        },
        [beta1, beta2, eps, delta, p, sd](const Vec<double>& sp, const Vec<double>& pp) {
            double t = sp[2 * p];
            double c1 = 1.0 - std::pow(beta1, t);
            double c2 = 1.0 - std::pow(beta2, t);
            Vec<double> out(sd + p);
            for (std::size_t i = 0; i < p; ++i) {
                double m = beta1 * sp[i] + (1.0 - beta1) * pp[i];
                double v = beta2 * sp[p + i] + (1.0 - beta2) * pp[i] * pp[i];
                out[i] = m;
                out[p + i] = v;
                double mhat = m / c1;
                double vhat = v / c2;
                out[sd + i] = sp[sd + i] + (eps / (delta + std::sqrt(vhat))) * mhat;
            }
            out[2 * p] = t + 1.0;
            return out;
        });
    return o;
}

}  // namespace paralens
