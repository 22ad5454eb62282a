#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "paralens/para.hpp"
#include "paralens/z2.hpp"

namespace paralens {

// A multilinear polynomial over Z2: a set of monomials, each a sorted set of
// variable indices.  The empty monomial is the constant 1.  Coefficients live
// in Z2, so a monomial is either present or absent, and x*x collapses to x.
class Z2Poly {
public:
    using Monomial = std::vector<unsigned>;  // sorted, distinct indices

    explicit Z2Poly(std::size_t arity) : arity_(arity) {}

    static Z2Poly zero(std::size_t arity) { return Z2Poly(arity); }

    static Z2Poly one(std::size_t arity) {
        Z2Poly p(arity);
        p.mons_.insert(Monomial{});
        return p;
    }

    static Z2Poly var(std::size_t arity, unsigned i) {
        require(i < arity, "Z2Poly::var: index out of range");
        Z2Poly p(arity);
        p.mons_.insert({i});
        return p;
    }

    static Z2Poly monomial(std::size_t arity, Monomial vars) {
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        for (unsigned v : vars) require(v < arity, "Z2Poly::monomial: index out of range");
        Z2Poly p(arity);
        p.mons_.insert(std::move(vars));
        return p;
    }

    std::size_t arity() const { return arity_; }
    const std::set<Monomial>& monomials() const { return mons_; }
    bool is_zero() const { return mons_.empty(); }

    // Addition is symmetric difference of monomial sets.
    friend Z2Poly operator+(const Z2Poly& a, const Z2Poly& b) {
        require(a.arity_ == b.arity_, "Z2Poly+: arity mismatch");
        Z2Poly out(a.arity_);
        std::set_symmetric_difference(a.mons_.begin(), a.mons_.end(), b.mons_.begin(),
                                      b.mons_.end(),
                                      std::inserter(out.mons_, out.mons_.end()));
        return out;
    }

    // Multiplication with the multilinear quotient x*x = x.
    friend Z2Poly operator*(const Z2Poly& a, const Z2Poly& b) {
        require(a.arity_ == b.arity_, "Z2Poly*: arity mismatch");
        Z2Poly out(a.arity_);
        for (const auto& ma : a.mons_)
            for (const auto& mb : b.mons_) {
                Monomial m;
                std::set_union(ma.begin(), ma.end(), mb.begin(), mb.end(),
                               std::back_inserter(m));
                auto [it, inserted] = out.mons_.insert(std::move(m));
                if (!inserted) out.mons_.erase(it);
            }
        return out;
    }

    friend bool operator==(const Z2Poly&, const Z2Poly&) = default;

    Z2 eval(const Vec<Z2>& x) const {
        check_len(x, arity_, "Z2Poly::eval input");
        Z2 acc = 0;
        for (const auto& m : mons_) {
            Z2 term = 1;
            for (unsigned v : m) term *= x[v];
            acc += term;
        }
        return acc;
    }

    // Boolean difference: drop x_i from monomials containing it, delete the
    // rest.  Equals f(x[i:=0]) + f(x[i:=1]) on the multilinear quotient.
    Z2Poly partial(unsigned i) const {
        require(i < arity_, "Z2Poly::partial: index out of range");
        Z2Poly out(arity_);
        for (const auto& m : mons_) {
            auto it = std::find(m.begin(), m.end(), i);
            if (it == m.end()) continue;
            Monomial dropped;
            dropped.reserve(m.size() - 1);
            for (unsigned v : m)
                if (v != i) dropped.push_back(v);
            auto [pos, inserted] = out.mons_.insert(std::move(dropped));
            if (!inserted) out.mons_.erase(pos);
        }
        return out;
    }

    std::string to_string() const {
        if (mons_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& m : mons_) {
            if (!first) os << " + ";
            first = false;
            if (m.empty()) {
                os << "1";
            } else {
                for (std::size_t k = 0; k < m.size(); ++k) {
                    if (k) os << "*";
                    os << "x" << m[k];
                }
            }
        }
        return os.str();
    }

private:
    std::size_t arity_;
    std::set<Monomial> mons_;
};

// A morphism A -> B: a B-tuple of polynomials sharing arity A.
using Z2Tuple = std::vector<Z2Poly>;

inline Vec<Z2> poly_eval(const Z2Tuple& f, const Vec<Z2>& x) {
    Vec<Z2> out;
    out.reserve(f.size());
    for (const auto& p : f) out.push_back(p.eval(x));
    return out;
}

// Parses one polynomial: monomials like "x0*x2" joined by "+", constants
// "1"/"0" allowed.
inline Z2Poly parse_poly(const std::string& line, std::size_t arity) {
    Z2Poly acc = Z2Poly::zero(arity);
    std::string term;
    auto flush = [&](std::string t) {
        // strip whitespace
        std::string s;
        for (char c : t)
            if (!isspace(static_cast<unsigned char>(c))) s.push_back(c);
        if (s.empty()) throw shape_error("parse_poly: empty monomial");
        if (s == "0") return;
        if (s == "1") {
            acc = acc + Z2Poly::one(arity);
            return;
        }
        Z2Poly::Monomial vars;
        std::size_t pos = 0;
        while (pos < s.size()) {
            if (s[pos] != 'x') throw shape_error("parse_poly: expected 'x' in " + s);
            ++pos;
            std::size_t start = pos;
            while (pos < s.size() && isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (start == pos) throw shape_error("parse_poly: missing index in " + s);
            vars.push_back(static_cast<unsigned>(std::stoul(s.substr(start, pos - start))));
            if (pos < s.size()) {
                if (s[pos] != '*') throw shape_error("parse_poly: expected '*' in " + s);
                ++pos;
            }
        }
        acc = acc + Z2Poly::monomial(arity, std::move(vars));
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '+') {
            flush(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return acc;
}

// One output polynomial per line; arity inferred from the largest variable
// index unless given explicitly.
inline Z2Tuple parse_circuit(const std::string& text, std::size_t arity = 0) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        bool blank = true;
        for (char c : line)
            if (!isspace(static_cast<unsigned char>(c))) blank = false;
        if (!blank && line[0] != '#') lines.push_back(line);
    }
    if (arity == 0) {
        for (const auto& l : lines)
            for (std::size_t i = 0; i + 1 < l.size(); ++i)
                if (l[i] == 'x' && isdigit(static_cast<unsigned char>(l[i + 1]))) {
                    std::size_t j = i + 1;
                    while (j < l.size() && isdigit(static_cast<unsigned char>(l[j]))) ++j;
                    arity = std::max(arity, std::stoul(l.substr(i + 1, j - i - 1)) + 1);
                }
    }
    Z2Tuple out;
    for (const auto& l : lines) out.push_back(parse_poly(l, arity));
    return out;
}

inline std::string print_circuit(const Z2Tuple& f) {
    std::string out;
    for (const auto& p : f) {
        out += p.to_string();
        out += '\n';
    }
    return out;
}

// Substitutes the tuple f into each polynomial of g: the composite f then g
// as a tuple morphism over f's variables.
inline Z2Tuple compose_tuple(const Z2Tuple& f, const Z2Tuple& g) {
    require(!f.empty(), "compose_tuple: empty inner tuple");
    std::size_t arity = f[0].arity();
    Z2Tuple out;
    out.reserve(g.size());
    for (const auto& poly : g) {
        require(poly.arity() == f.size(), "compose_tuple: arity mismatch");
        Z2Poly acc = Z2Poly::zero(arity);
        for (const auto& m : poly.monomials()) {
            Z2Poly term = Z2Poly::one(arity);
            for (unsigned v : m) term = term * f[v];
            acc = acc + term;
        }
        out.push_back(acc);
    }
    return out;
}

// The reverse-derivative lens of a tuple morphism: forward evaluates the
// circuit, backward pulls v back through the Boolean-difference Jacobian:
// a'_i = XOR_j v_j * (d f_j / d x_i)(x).  Partials are precomputed.
inline Para<Z2> bool_reverse(const Z2Tuple& f) {
    require(!f.empty(), "bool_reverse: empty tuple");
    std::size_t arity = f[0].arity();
    for (const auto& p : f) require(p.arity() == arity, "bool_reverse: mixed arities");
    std::size_t cod = f.size();
    auto partials = std::make_shared<std::vector<Z2Poly>>();  // [j * arity + i]
    for (const auto& p : f)
        for (unsigned i = 0; i < arity; ++i) partials->push_back(p.partial(i));
    auto tuple = std::make_shared<Z2Tuple>(f);
    Lens<Z2> body = make_lens<Z2>(
        iface(arity), iface(cod),
        [tuple](const Vec<Z2>& x) { return poly_eval(*tuple, x); },
        [partials, arity, cod](const Vec<Z2>& x, const Vec<Z2>& v) {
            Vec<Z2> out(arity, Z2(0));
            for (std::size_t j = 0; j < cod; ++j) {
                if (!v[j]) continue;
                for (std::size_t i = 0; i < arity; ++i)
                    out[i] += (*partials)[j * arity + i].eval(x);
            }
            return out;
        });
    return para_from_lens(body);
}

// Treats the first nparams variables of the tuple as the parameter block,
// giving a parametric lens over the remaining inputs.
inline Para<Z2> make_circuit_para(const Z2Tuple& f, std::size_t nparams) {
    Para<Z2> plain = bool_reverse(f);
    require(nparams <= plain.dom.fwd, "make_circuit_para: too many parameters");
    std::size_t in = plain.dom.fwd - nparams;
    return make_para(iface(nparams), iface(in), plain.body);
}

}  // namespace paralens
