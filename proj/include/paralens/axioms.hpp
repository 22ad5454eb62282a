#pragma once

#include <random>

#include "paralens/boolean.hpp"
#include "paralens/smooth.hpp"

namespace paralens {

struct AxiomReport {
    std::string name;
    bool pass = true;
    double max_err = 0.0;
    std::size_t cases = 0;
    std::size_t excluded = 0;  // kink-adjacent points skipped
};

// ---- random instance generators ------------------------------------------

inline Vec<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vec<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

// A random chain of 'layers' dense blocks with dims in [1, max_dim].
inline SmoothExpr random_smooth_chain(std::mt19937_64& rng, std::size_t layers,
                                      std::size_t max_dim, bool allow_relu = true) {
    std::uniform_int_distribution<std::size_t> dim(1, max_dim);
    std::uniform_int_distribution<int> actk(0, allow_relu ? 2 : 1);
    auto pick_act = [&] {
        switch (actk(rng)) {
            case 0: return Act::Sigmoid;
            case 1: return Act::Tanh;
            default: return Act::Relu;
        }
    };
    std::size_t in = dim(rng);
    std::size_t out = dim(rng);
    SmoothExpr e = dense(in, out, pick_act());
    for (std::size_t k = 1; k < layers; ++k) {
        std::size_t next = dim(rng);
        e = compose(e, dense(out, next, pick_act()));
        out = next;
    }
    return e;
}

inline Z2Poly random_z2_poly(std::mt19937_64& rng, std::size_t arity) {
    // each of the 2^arity multilinear monomials present with prob 1/2
    Z2Poly p = Z2Poly::zero(arity);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t mask = 0; mask < (std::size_t(1) << arity); ++mask) {
        if (!coin(rng)) continue;
        Z2Poly::Monomial m;
        for (unsigned i = 0; i < arity; ++i)
            if (mask & (std::size_t(1) << i)) m.push_back(i);
        p = p + Z2Poly::monomial(arity, m);
    }
    return p;
}

inline Z2Tuple random_z2_tuple(std::mt19937_64& rng, std::size_t arity, std::size_t outs) {
    Z2Tuple t;
    for (std::size_t i = 0; i < outs; ++i) t.push_back(random_z2_poly(rng, arity));
    return t;
}

inline Vec<Z2> bits_of(std::size_t mask, std::size_t n) {
    Vec<Z2> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = Z2(int((mask >> i) & 1));
    return v;
}

// ---- error helpers --------------------------------------------------------

inline double rel_err(const Vec<double>& got, const Vec<double>& want) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num = std::max(num, std::abs(got[i] - want[i]));
        den = std::max(den, std::abs(want[i]));
    }
    return num / std::max(den, 1.0);
}

// ---- smooth suites --------------------------------------------------------

// RD.1: R[f+g] = R[f] + R[g].  f+g is built inside the combinator language
// as Copy;(f⊗g);Add with Copy a Linear node holding a fixed stacked-identity
// parameter block, so both sides are exact algebraic routes.
inline AxiomReport smooth_rd1(std::mt19937_64& rng, std::size_t samples, double tol) {
    AxiomReport r{"RD.1 (smooth)"};
    std::uniform_int_distribution<std::size_t> layers(1, 2);
    while (r.cases < samples) {
        SmoothExpr f = random_smooth_chain(rng, layers(rng), 3, false);
        SmoothExpr g = random_smooth_chain(rng, layers(rng), 3, false);
        std::size_t in = f.dom_len(), out = f.cod_len();
        if (g.dom_len() != in || g.cod_len() != out) continue;
        SmoothExpr sum = compose(linear(2 * in, in), compose(tensor(f, g), adder(out)));
        Vec<double> copy_mat(2 * in * in, 0.0);
        for (std::size_t i = 0; i < in; ++i) {
            copy_mat[i * in + i] = 1.0;
            copy_mat[(in + i) * in + i] = 1.0;
        }
        Vec<double> pf = random_vec(rng, f.param_len());
        Vec<double> pg = random_vec(rng, g.param_len());
        // sum layout: [adder(0) | pf | pg | copy] by Compose/Tensor layout rules
        Vec<double> psum = concat(concat(pf, pg), copy_mat);
        Vec<double> a = random_vec(rng, in);
        Vec<double> v = random_vec(rng, out);
        Para<double> rsum = reverse(sum), rf = reverse(f), rg = reverse(g);
        Vec<double> lhs_full = rsum.body.put(concat(psum, a), v);
        // input-cotangent block of the sum construction
        Vec<double> lhs(lhs_full.end() - static_cast<std::ptrdiff_t>(in), lhs_full.end());
        auto [fpp, fap] = split(rf.body.put(concat(pf, a), v), f.param_len());
        auto [gpp, gap] = split(rg.body.put(concat(pg, a), v), g.param_len());
        Vec<double> rhs(in);
        for (std::size_t i = 0; i < in; ++i) rhs[i] = fap[i] + gap[i];
        r.max_err = std::max(r.max_err, rel_err(lhs, rhs));
        // parameter cotangents of f and g must match the embedded copies
        Vec<double> lhs_pf(lhs_full.begin(), lhs_full.begin() + static_cast<std::ptrdiff_t>(f.param_len()));
        r.max_err = std::max(r.max_err, rel_err(lhs_pf, fpp));
        ++r.cases;
    }
    r.pass = r.max_err <= tol;
    return r;
}

// RD.2: put is additive in the change vector, and put(p, a, 0) = 0.
inline AxiomReport smooth_rd2(std::mt19937_64& rng, std::size_t samples, double tol) {
    AxiomReport r{"RD.2 (smooth)"};
    for (std::size_t k = 0; k < samples; ++k) {
        SmoothExpr e = random_smooth_chain(rng, 1 + k % 3, 4, false);
        Vec<double> p = random_vec(rng, e.param_len());
        Vec<double> a = random_vec(rng, e.dom_len());
        Vec<double> v1 = random_vec(rng, e.cod_len());
        Vec<double> v2 = random_vec(rng, e.cod_len());
        Para<double> re = reverse(e);
        Vec<double> pa = concat(p, a);
        Vec<double> sum_v(v1.size());
        for (std::size_t i = 0; i < v1.size(); ++i) sum_v[i] = v1[i] + v2[i];
        Vec<double> lhs = re.body.put(pa, sum_v);
        Vec<double> o1 = re.body.put(pa, v1);
        Vec<double> o2 = re.body.put(pa, v2);
        Vec<double> rhs(o1.size());
        for (std::size_t i = 0; i < o1.size(); ++i) rhs[i] = o1[i] + o2[i];
        r.max_err = std::max(r.max_err, rel_err(lhs, rhs));
        Vec<double> zero_out = re.body.put(pa, Vec<double>(e.cod_len(), 0.0));
        for (double x : zero_out) r.max_err = std::max(r.max_err, std::abs(x));
        ++r.cases;
    }
    r.pass = r.max_err <= tol;
    return r;
}

// RD.3: reverse of the identity is (id, pi_1) -- exact.
inline AxiomReport smooth_rd3(std::mt19937_64& rng, std::size_t samples, double tol) {
    AxiomReport r{"RD.3 (smooth)"};
    for (std::size_t k = 0; k < samples; ++k) {
        std::size_t n = 1 + k % 5;
        Para<double> id = reverse(identity_map(n));
        Vec<double> a = random_vec(rng, n);
        Vec<double> v = random_vec(rng, n);
        r.max_err = std::max(r.max_err, rel_err(id.body.get(a), a));
        r.max_err = std::max(r.max_err, rel_err(id.body.put(a, v), v));
        ++r.cases;
    }
    r.pass = r.max_err <= tol;
    return r;
}

// RD.4: the backward pass of a tensor equals the sum of injected blockwise
// pulls (the sum-of-injections form).
inline AxiomReport smooth_rd4(std::mt19937_64& rng, std::size_t samples, double tol) {
    AxiomReport r{"RD.4 (smooth)"};
    for (std::size_t k = 0; k < samples; ++k) {
        SmoothExpr f = random_smooth_chain(rng, 1, 3, false);
        SmoothExpr g = random_smooth_chain(rng, 1, 3, false);
        SmoothExpr t = tensor(f, g);
        Para<double> rt = reverse(t);
        Vec<double> p = random_vec(rng, t.param_len());
        Vec<double> a = random_vec(rng, t.dom_len());
        Vec<double> v = random_vec(rng, t.cod_len());
        Vec<double> pa = concat(p, a);
        Vec<double> whole = rt.body.put(pa, v);
        Vec<double> vf = v, vg = v;
        for (std::size_t i = f.cod_len(); i < v.size(); ++i) vf[i] = 0.0;
        for (std::size_t i = 0; i < f.cod_len(); ++i) vg[i] = 0.0;
        Vec<double> inj_f = rt.body.put(pa, vf);
        Vec<double> inj_g = rt.body.put(pa, vg);
        Vec<double> rhs(whole.size());
        for (std::size_t i = 0; i < whole.size(); ++i) rhs[i] = inj_f[i] + inj_g[i];
        r.max_err = std::max(r.max_err, rel_err(whole, rhs));
        ++r.cases;
    }
    r.pass = r.max_err <= tol;
    return r;
}

// RD.5: the structurally composed backward pass equals the manual chain
// (backward through g at the intermediate point, then through f).
inline AxiomReport smooth_rd5(std::mt19937_64& rng, std::size_t samples, double tol) {
    AxiomReport r{"RD.5 (smooth)"};
    while (r.cases < samples) {
        SmoothExpr f = random_smooth_chain(rng, 1, 4, false);
        SmoothExpr g = random_smooth_chain(rng, 1, 4, false);
        if (f.cod_len() != g.dom_len()) continue;
        SmoothExpr fg = compose(f, g);
        Para<double> rfg = reverse(fg), rf = reverse(f), rg = reverse(g);
        Vec<double> pf = random_vec(rng, f.param_len());
        Vec<double> pg = random_vec(rng, g.param_len());
        Vec<double> a = random_vec(rng, f.dom_len());
        Vec<double> v = random_vec(rng, g.cod_len());
        Vec<double> lhs = rfg.body.put(concat(concat(pg, pf), a), v);
        Vec<double> b = rf.body.get(concat(pf, a));
        auto [gpp, bpp] = split(rg.body.put(concat(pg, b), v), g.param_len());
        auto [fpp, app] = split(rf.body.put(concat(pf, a), bpp), f.param_len());
        Vec<double> rhs = concat(concat(gpp, fpp), app);
        r.max_err = std::max(r.max_err, rel_err(lhs, rhs));
        ++r.cases;
    }
    r.pass = r.max_err <= tol;
    return r;
}

// ---- boolean suites -------------------------------------------------------

// Boolean-difference Jacobian by two-point evaluation (the truth-table
// oracle; independent of the formal partial-derivative code path).
inline Vec<Z2> bool_oracle_pullback(const Z2Tuple& f, const Vec<Z2>& x, const Vec<Z2>& v) {
    std::size_t arity = f[0].arity();
    Vec<Z2> out(arity, Z2(0));
    for (std::size_t j = 0; j < f.size(); ++j) {
        if (!v[j]) continue;
        for (std::size_t i = 0; i < arity; ++i) {
            Vec<Z2> x0 = x, x1 = x;
            x0[i] = Z2(0);
            x1[i] = Z2(1);
            out[i] += f[j].eval(x0) + f[j].eval(x1);
        }
    }
    return out;
}

inline bool z2_eq(const Vec<Z2>& a, const Vec<Z2>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

// Exhaustive RD.1-RD.5 over a corpus of random tuples of arity <= max_arity.
inline std::vector<AxiomReport> boolean_axioms(std::mt19937_64& rng,
                                               std::size_t corpus_size,
                                               std::size_t max_arity) {
    AxiomReport rd1{"RD.1 (Z2)"}, rd2{"RD.2 (Z2)"}, rd3{"RD.3 (Z2)"},
        rd4{"RD.4 (Z2)"}, rd5{"RD.5 (Z2)"};
    std::uniform_int_distribution<std::size_t> ar(1, max_arity);
    std::uniform_int_distribution<std::size_t> outs(1, 3);
    for (std::size_t c = 0; c < corpus_size; ++c) {
        std::size_t arity = ar(rng);
        std::size_t m = outs(rng);
        Z2Tuple f = random_z2_tuple(rng, arity, m);
        Z2Tuple g = random_z2_tuple(rng, arity, m);
        Para<Z2> rf = bool_reverse(f), rg = bool_reverse(g);
        // sum tuple
        Z2Tuple s;
        for (std::size_t j = 0; j < m; ++j) s.push_back(f[j] + g[j]);
        Para<Z2> rs = bool_reverse(s);
        // outer tuple for RD.5: arity = m
        Z2Tuple h = random_z2_tuple(rng, m, outs(rng));
        Lens<Z2> chain = lens_compose(rf.body, bool_reverse(h).body);
        for (std::size_t xm = 0; xm < (std::size_t(1) << arity); ++xm) {
            Vec<Z2> x = bits_of(xm, arity);
            for (std::size_t vm = 0; vm < (std::size_t(1) << m); ++vm) {
                Vec<Z2> v = bits_of(vm, m);
                // RD.1
                Vec<Z2> lhs = rs.body.put(x, v);
                Vec<Z2> pf = rf.body.put(x, v), pg = rg.body.put(x, v);
                Vec<Z2> rhs(arity);
                for (std::size_t i = 0; i < arity; ++i) rhs[i] = pf[i] + pg[i];
                rd1.pass = rd1.pass && z2_eq(lhs, rhs);
                ++rd1.cases;
                // RD.2: additivity against every second vector
                for (std::size_t wm = 0; wm < (std::size_t(1) << m); ++wm) {
                    Vec<Z2> w = bits_of(wm, m);
                    Vec<Z2> vw(m);
                    for (std::size_t j = 0; j < m; ++j) vw[j] = v[j] + w[j];
                    Vec<Z2> pv = rf.body.put(x, v), pw = rf.body.put(x, w);
                    Vec<Z2> pvw = rf.body.put(x, vw);
                    Vec<Z2> psum(arity);
                    for (std::size_t i = 0; i < arity; ++i) psum[i] = pv[i] + pw[i];
                    rd2.pass = rd2.pass && z2_eq(pvw, psum);
                    ++rd2.cases;
                }
                // RD.4: formal-partial pullback vs truth-table oracle
                rd4.pass = rd4.pass && z2_eq(rf.body.put(x, v), bool_oracle_pullback(f, x, v));
                ++rd4.cases;
            }
            // RD.3: identity tuple
            Z2Tuple idt;
            for (unsigned i = 0; i < arity; ++i) idt.push_back(Z2Poly::var(arity, i));
            Para<Z2> rid = bool_reverse(idt);
            for (std::size_t vm = 0; vm < (std::size_t(1) << arity); ++vm) {
                Vec<Z2> v = bits_of(vm, arity);
                rd3.pass = rd3.pass && z2_eq(rid.body.put(x, v), v);
                ++rd3.cases;
            }
            // RD.5: the structural lens chain through the formal partials
            // equals the product of the factors' two-point-evaluation
            // Jacobian transposes.  (Comparing against the derivative of the
            // reduced composite instead would be wrong: the idempotent
            // quotient is not functorial under reconvergent substitution,
            // e.g. x |-> (x, x) followed by y0*y1.)
            Vec<Z2> b = rf.body.get(x);
            for (std::size_t vm = 0; vm < (std::size_t(1) << h.size()); ++vm) {
                Vec<Z2> v = bits_of(vm, h.size());
                Vec<Z2> w = bool_oracle_pullback(h, b, v);
                Vec<Z2> want = bool_oracle_pullback(f, x, w);
                rd5.pass = rd5.pass && z2_eq(chain.put(x, v), want);
                ++rd5.cases;
            }
        }
    }
    return {rd1, rd2, rd3, rd4, rd5};
}

inline std::vector<AxiomReport> smooth_axioms(std::mt19937_64& rng, std::size_t samples,
                                              double tol) {
    return {smooth_rd1(rng, samples, tol), smooth_rd2(rng, samples, tol),
            smooth_rd3(rng, samples, tol), smooth_rd4(rng, samples, tol),
            smooth_rd5(rng, samples, tol)};
}

// ---- gradient check -------------------------------------------------------

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t points = 0;
    std::size_t excluded = 0;
};

// Compares the reverse lens against finite-difference transposed-Jacobian
// products at random points.  Points within kink_margin of a relu kink are
// excluded and counted.
inline GradCheckReport gradcheck(const SmoothExpr& e, std::mt19937_64& rng,
                                 std::size_t points, double h,
                                 double kink_margin = 1e-3) {
    GradCheckReport rep;
    Para<double> re = reverse(e);
    while (rep.points < points) {
        Vec<double> p = random_vec(rng, e.param_len());
        Vec<double> a = random_vec(rng, e.dom_len());
        if (relu_kink_margin(e, p, a) < kink_margin) {
            ++rep.excluded;
            continue;
        }
        Vec<double> v = random_vec(rng, e.cod_len());
        Jacobian j = finite_difference_jacobian(e, p, a, h);
        Vec<double> want = jacobian_tv(j, v, 0, j.cols);
        Vec<double> got = re.body.put(concat(p, a), v);
        rep.max_rel_err = std::max(rep.max_rel_err, rel_err(got, want));
        ++rep.points;
    }
    return rep;
}

}  // namespace paralens
