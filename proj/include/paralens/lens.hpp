#pragma once

#include <functional>

#include "paralens/core.hpp"

namespace paralens {

// A bidirectional map between typed interfaces:
//   get : dom.fwd -> cod.fwd
//   put : dom.fwd x cod.bwd -> dom.bwd
// Lenses are immutable values; get/put must be pure.
template <class S>
struct Lens {
    Interface dom;
    Interface cod;
    std::function<Vec<S>(const Vec<S>&)> get;
    std::function<Vec<S>(const Vec<S>&, const Vec<S>&)> put;
};

// Wraps get/put with interface length checks on every call.
template <class S, class G, class P>
Lens<S> make_lens(Interface dom, Interface cod, G&& get, P&& put) {
    Lens<S> l;
    l.dom = dom;
    l.cod = cod;
    l.get = [dom, cod, g = std::forward<G>(get)](const Vec<S>& a) {
        check_len(a, dom.fwd, "lens get input");
        Vec<S> b = g(a);
        check_len(b, cod.fwd, "lens get output");
        return b;
    };
    l.put = [dom, cod, p = std::forward<P>(put)](const Vec<S>& a, const Vec<S>& bp) {
        check_len(a, dom.fwd, "lens put input");
        check_len(bp, cod.bwd, "lens put change");
        Vec<S> ap = p(a, bp);
        check_len(ap, dom.bwd, "lens put output");
        return ap;
    };
    return l;
}

// (1_A, pi_1): get is the identity, put returns the incoming change.
template <class S>
Lens<S> lens_identity(Interface i) {
    return make_lens<S>(
        i, i,
        [](const Vec<S>& a) { return a; },
        [](const Vec<S>&, const Vec<S>& bp) { return bp; });
}

template <class S>
Lens<S> lens_unit() {
    return lens_identity<S>(unit_interface());
}

// Sequential composition: get = f;g, put threads the change back through g
// at the intermediate point and then through f.
template <class S>
Lens<S> lens_compose(const Lens<S>& f, const Lens<S>& g) {
    require(f.cod == g.dom, "lens_compose: interface mismatch, f.cod=" + describe(f.cod) +
                                " g.dom=" + describe(g.dom));
    return make_lens<S>(
        f.dom, g.cod,
        [f, g](const Vec<S>& a) { return g.get(f.get(a)); },
        [f, g](const Vec<S>& a, const Vec<S>& cp) {
            return f.put(a, g.put(f.get(a), cp));
        });
}

// Monoidal product: acts blockwise on concatenated wires.
template <class S>
Lens<S> lens_tensor(const Lens<S>& f, const Lens<S>& g) {
    Interface dom = f.dom * g.dom;
    Interface cod = f.cod * g.cod;
    return make_lens<S>(
        dom, cod,
        [f, g](const Vec<S>& a) {
            auto [fa, ga] = split(a, f.dom.fwd);
            return concat(f.get(fa), g.get(ga));
        },
        [f, g](const Vec<S>& a, const Vec<S>& bp) {
            auto [fa, ga] = split(a, f.dom.fwd);
            auto [fb, gb] = split(bp, f.cod.bwd);
            return concat(f.put(fa, fb), g.put(ga, gb));
        });
}

}  // namespace paralens
