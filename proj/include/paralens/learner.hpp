#pragma once

#include "paralens/components.hpp"

namespace paralens {

// The eta lens: turns the input port into a parameter port.
// param = (A, A), dom = unit, cod = (A, A); get = 1_A, put = pi_1.
template <class S>
Para<S> state_lens(std::size_t a) {
    return make_para(iface(a), unit_interface(), lens_identity<S>(iface(a)));
}

// Model + loss + learning rate + optimizer, ready for assembly.
template <class S>
struct SupervisedSystem {
    Para<S> model;
    LossLens<S> loss;
    RateLens<S> rate;
    OptimizerLens<S> optimizer;

    std::size_t input_dim() const { return model.dom.fwd; }
    std::size_t param_dim() const { return model.param.fwd; }
    std::size_t output_dim() const { return model.cod.fwd; }
    std::size_t loss_dim() const { return loss.loss_dim; }
    std::size_t state_dim() const { return optimizer.state_dim; }
};

template <class S>
struct StepOut {
    Vec<S> state;
    Vec<S> value;  // updated parameters (supervised) or input (dreaming)
    Vec<S> loss;   // forward loss, surfaced for logging
};

// The extracted put map of the closed parametric lens for parameter
// learning:
//   pbar = U(s, p); b_p = f(pbar, a); l = loss(b_t, b_p);
//   (b_t', b_p') = R[loss](b_t, b_p, alpha(l));
//   (p', a') = R[f](pbar, a, b_p');
//   result = U*(s, p, p').
// The a' and b_t' wires are discarded.
template <class S>
class SupervisedStep {
public:
    explicit SupervisedStep(SupervisedSystem<S> sys) : sys_(std::move(sys)) {
        require(sys_.model.cod == sys_.loss.para.dom,
                "build_supervised: model output " + describe(sys_.model.cod) +
                    " != loss input " + describe(sys_.loss.para.dom));
        require(sys_.loss.para.cod == sys_.rate.dom,
                "build_supervised: loss output " + describe(sys_.loss.para.cod) +
                    " != rate input " + describe(sys_.rate.dom));
        require(sys_.optimizer.param_dim == sys_.model.param.fwd,
                "build_supervised: optimizer parameter length " +
                    std::to_string(sys_.optimizer.param_dim) + " != model parameter length " +
                    std::to_string(sys_.model.param.fwd));
    }

    const SupervisedSystem<S>& system() const { return sys_; }

    StepOut<S> operator()(const Vec<S>& a, const Vec<S>& s, const Vec<S>& p,
                          const Vec<S>& bt) const {
        check_len(s, sys_.state_dim(), "step state");
        check_len(p, sys_.param_dim(), "step params");
        Vec<S> sp = concat(s, p);
        Vec<S> pbar = sys_.optimizer.lens.get(sp);
        Vec<S> bp = sys_.model.body.get(concat(pbar, a));
        Vec<S> l = sys_.loss.para.body.get(concat(bt, bp));
        Vec<S> alpha = sys_.rate.put(l, Vec<S>{});
        auto [btp, bpp] = split(sys_.loss.para.body.put(concat(bt, bp), alpha),
                                sys_.loss.para.param.bwd);
        auto [pp, ap] = split(sys_.model.body.put(concat(pbar, a), bpp),
                              sys_.model.param.bwd);
        Vec<S> spnew = sys_.optimizer.lens.put(sp, pp);
        auto [snew, pnew] = split(spnew, sys_.state_dim());
        return {std::move(snew), std::move(pnew), std::move(l)};
    }

    // Mini-batch variant: one lookahead, gradients averaged in index order,
    // one optimizer application.  Opt-in approximation of the per-sample
    // semantics; real carrier only.
    StepOut<S> batch(std::span<const Vec<S>> as, std::span<const Vec<S>> bts,
                     const Vec<S>& s, const Vec<S>& p, std::size_t* correct = nullptr) const
        requires std::is_same_v<S, double>
    {
        require(as.size() == bts.size() && !as.empty(), "batch: bad sample count");
        Vec<S> sp = concat(s, p);
        Vec<S> pbar = sys_.optimizer.lens.get(sp);
        std::size_t plen = sys_.param_dim();
        Vec<S> grad(plen, 0.0);
        Vec<S> lsum(sys_.loss_dim(), 0.0);
        for (std::size_t k = 0; k < as.size(); ++k) {
            Vec<S> pa = concat(pbar, as[k]);
            Vec<S> bp = sys_.model.body.get(pa);
            if (correct && argmax(bp) == argmax(bts[k])) ++*correct;
            Vec<S> l = sys_.loss.para.body.get(concat(bts[k], bp));
            for (std::size_t i = 0; i < l.size(); ++i) lsum[i] += l[i];
            Vec<S> alpha = sys_.rate.put(l, Vec<S>{});
            auto [btp, bpp] = split(sys_.loss.para.body.put(concat(bts[k], bp), alpha),
                                    sys_.loss.para.param.bwd);
            auto [pp, ap] = split(sys_.model.body.put(pa, bpp), sys_.model.param.bwd);
            for (std::size_t i = 0; i < plen; ++i) grad[i] += pp[i];
        }
        double inv = 1.0 / static_cast<double>(as.size());
        for (double& g : grad) g *= inv;
        for (double& l : lsum) l *= inv;
        Vec<S> spnew = sys_.optimizer.lens.put(sp, grad);
        auto [snew, pnew] = split(spnew, sys_.state_dim());
        return {std::move(snew), std::move(pnew), std::move(lsum)};
    }

    static std::size_t argmax(const Vec<double>& v) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[best]) best = i;  // ties broken by lowest index
        return best;
    }

private:
    SupervisedSystem<S> sys_;
};

template <class S>
SupervisedStep<S> build_supervised(SupervisedSystem<S> sys) {
    return SupervisedStep<S>(std::move(sys));
}

// The dreaming variant: optimizer attached to the input port, parameters
// fixed.  abar = U(s, a); (p', a') = R[f](p, abar, b_p'); result = U*(s, a, a').
template <class S>
class DreamStep {
public:
    explicit DreamStep(SupervisedSystem<S> sys) : sys_(std::move(sys)) {
        require(sys_.model.cod == sys_.loss.para.dom,
                "build_dreamer: model output " + describe(sys_.model.cod) +
                    " != loss input " + describe(sys_.loss.para.dom));
        require(sys_.loss.para.cod == sys_.rate.dom,
                "build_dreamer: loss output " + describe(sys_.loss.para.cod) +
                    " != rate input " + describe(sys_.rate.dom));
        require(sys_.optimizer.param_dim == sys_.model.dom.fwd,
                "build_dreamer: optimizer dimension " +
                    std::to_string(sys_.optimizer.param_dim) + " must match input length " +
                    std::to_string(sys_.model.dom.fwd));
    }

    StepOut<S> operator()(const Vec<S>& s, const Vec<S>& a, const Vec<S>& p,
                          const Vec<S>& bt) const {
        Vec<S> sa = concat(s, a);
        Vec<S> abar = sys_.optimizer.lens.get(sa);
        Vec<S> bp = sys_.model.body.get(concat(p, abar));
        Vec<S> l = sys_.loss.para.body.get(concat(bt, bp));
        Vec<S> alpha = sys_.rate.put(l, Vec<S>{});
        auto [btp, bpp] = split(sys_.loss.para.body.put(concat(bt, bp), alpha),
                                sys_.loss.para.param.bwd);
        auto [pp, ap] = split(sys_.model.body.put(concat(p, abar), bpp),
                              sys_.model.param.bwd);
        Vec<S> sanew = sys_.optimizer.lens.put(sa, ap);
        auto [snew, anew] = split(sanew, sys_.optimizer.state_dim);
        return {std::move(snew), std::move(anew), std::move(l)};
    }

private:
    SupervisedSystem<S> sys_;
};

template <class S>
DreamStep<S> build_dreamer(SupervisedSystem<S> sys) {
    return DreamStep<S>(std::move(sys));
}

template <class S>
struct TrajectoryPoint {
    std::size_t step = 0;
    Vec<S> loss;
};

template <class S>
struct Trajectory {
    std::vector<TrajectoryPoint<S>> points;
    Vec<S> final_state;
    Vec<S> final_value;
};

// Folds the step over the data in order; deterministic, loss logged per step.
template <class S, class Step>
Trajectory<S> iterate(const Step& step, std::span<const std::pair<Vec<S>, Vec<S>>> data,
                      Vec<S> s0, Vec<S> p0) {
    Trajectory<S> tr;
    tr.points.reserve(data.size());
    Vec<S> s = std::move(s0), p = std::move(p0);
    std::size_t idx = 0;
    for (const auto& [a, bt] : data) {
        StepOut<S> out = step(a, s, p, bt);
        tr.points.push_back({idx++, out.loss});
        s = std::move(out.state);
        p = std::move(out.value);
    }
    tr.final_state = std::move(s);
    tr.final_value = std::move(p);
    return tr;
}

}  // namespace paralens
