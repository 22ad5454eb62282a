#pragma once

#include "paralens/lens.hpp"

namespace paralens {

// A parametrised morphism: a lens whose domain is the parameter block
// followed by the input block.  body.dom = param * dom, body.cod = cod.
//
// Composite parameter blocks are laid out [later map's params | earlier
// map's params | input]; this single convention is relied on everywhere.
template <class S>
struct Para {
    Interface param;
    Interface dom;
    Interface cod;
    Lens<S> body;
};

template <class S>
Para<S> make_para(Interface param, Interface dom, const Lens<S>& body) {
    require(body.dom == param * dom,
            "make_para: body domain " + describe(body.dom) + " != param*dom " +
                describe(param * dom));
    return Para<S>{param, dom, body.cod, body};
}

// A parameterless morphism is a lens with trivial parameter block.
template <class S>
Para<S> para_from_lens(const Lens<S>& l) {
    return Para<S>{unit_interface(), l.dom, l.cod, l};
}

template <class S>
Para<S> para_identity(Interface i) {
    return para_from_lens(lens_identity<S>(i));
}

// (Q ⊗ P, (1_Q ⊗ f);g): hook the codomain of f to the domain of g and
// stack the parameter blocks with g's on the outside.
template <class S>
Para<S> para_compose(const Para<S>& f, const Para<S>& g) {
    require(f.cod == g.dom, "para_compose: interface mismatch, f.cod=" + describe(f.cod) +
                                " g.dom=" + describe(g.dom));
    Lens<S> body =
        lens_compose(lens_tensor(lens_identity<S>(g.param), f.body), g.body);
    return Para<S>{g.param * f.param, f.dom, g.cod, body};
}

// Parallel product; blocks laid out [f.param | g.param | f.dom | g.dom].
template <class S>
Para<S> para_tensor(const Para<S>& f, const Para<S>& g) {
    Interface param = f.param * g.param;
    Interface dom = f.dom * g.dom;
    Interface cod = f.cod * g.cod;
    Lens<S> fb = f.body, gb = g.body;
    Interface fparam = f.param, fdom = f.dom, fcod = f.cod;
    Interface gparam = g.param;
    Lens<S> body = make_lens<S>(
        param * dom, cod,
        [=](const Vec<S>& in) {
            auto [fp, rest1] = split(in, fparam.fwd);
            auto [gp, rest2] = split(rest1, gparam.fwd);
            auto [fa, ga] = split(rest2, fdom.fwd);
            return concat(fb.get(concat(fp, fa)), gb.get(concat(gp, ga)));
        },
        [=](const Vec<S>& in, const Vec<S>& bp) {
            auto [fp, rest1] = split(in, fparam.fwd);
            auto [gp, rest2] = split(rest1, gparam.fwd);
            auto [fa, ga] = split(rest2, fdom.fwd);
            auto [fbp, gbp] = split(bp, fcod.bwd);
            auto [fpp, fap] = split(fb.put(concat(fp, fa), fbp), fparam.bwd);
            auto [gpp, gap] = split(gb.put(concat(gp, ga), gbp), gparam.bwd);
            return concat(concat(fpp, gpp), concat(fap, gap));
        });
    return Para<S>{param, dom, cod, body};
}

// Change the parameter interface of f via a lens r with r.cod = f.param:
// forward feeds r.get(q) as the parameter, backward routes the requested
// parameter change through r.put.
template <class S>
Para<S> para_reparam(const Para<S>& f, const Lens<S>& r) {
    require(r.cod == f.param, "para_reparam: r.cod=" + describe(r.cod) +
                                  " != f.param=" + describe(f.param));
    Interface param = r.dom;
    Interface dom = f.dom;
    Lens<S> fb = f.body;
    Interface fparam = f.param;
    Lens<S> body = make_lens<S>(
        param * dom, f.cod,
        [=](const Vec<S>& in) {
            auto [q, a] = split(in, param.fwd);
            return fb.get(concat(r.get(q), a));
        },
        [=](const Vec<S>& in, const Vec<S>& bp) {
            auto [q, a] = split(in, param.fwd);
            Vec<S> p = r.get(q);
            auto [pp, ap] = split(fb.put(concat(p, a), bp), fparam.bwd);
            return concat(r.put(q, pp), ap);
        });
    return Para<S>{param, dom, f.cod, body};
}

}  // namespace paralens
