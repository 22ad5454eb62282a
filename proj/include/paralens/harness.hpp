#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "paralens/axioms.hpp"
#include "paralens/boolean.hpp"
#include "paralens/io.hpp"
#include "paralens/learner.hpp"
#include "paralens/mnist.hpp"
#include "paralens/smooth.hpp"

namespace paralens {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A single experiment description, loaded from a JSON config file.  Every
// run is fully determined by the config plus the seed.
struct ExperimentConfig {
    std::string task;            // train | dream | gradcheck | axioms | eval
    std::string carrier;         // real | z2

    // model: either a dense layer stack (real) or a circuit file (z2)
    std::vector<std::size_t> layers;
    std::vector<std::string> activations;  // per layer gap: sigmoid|relu|tanh|none
    std::string circuit_path;
    std::size_t circuit_params = 0;

    std::string loss = "quadratic";  // quadratic | softmax-ce | boolean-xor | dot
    std::string rate_kind = "constant";  // constant | scaled | ascent | identity
    double rate_eps = 0.01;

    std::string opt_kind = "gradient";  // gradient | momentum | nesterov | adagrad | adam
    double opt_gamma = 0.9;
    double opt_eps = 0.01;
    double opt_beta1 = 0.9;
    double opt_beta2 = 0.999;
    double opt_delta = 1e-8;

    // data
    std::string data_kind;  // mnist-idx | csv | synthetic | exhaustive
    std::string train_images, train_labels, test_images, test_labels;
    std::string csv_path;
    std::string generator;  // synthetic: linreg
    std::size_t samples = 256;
    std::string target_circuit;  // exhaustive z2 target

    std::uint64_t seed = 0;
    std::size_t max_steps = 0;  // gradcheck points / dream steps / z2 iteration cap
    std::size_t batch_size = 1;
    std::size_t epochs = 1;
    std::size_t log_every = 1;
    bool shuffle = true;
    bool pgm = false;
    std::string out_dir = ".";
    std::string params_path;  // pretrained parameters (dream, eval)

    std::size_t dream_target = 0;  // one-hot class index
    std::string dream_init = "zeros";  // zeros | random
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known) throw config_error("unknown config key '" + it.key() + "' in " + where);
    }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using nlohmann::json;
    ExperimentConfig c;
    detail::reject_unknown(j, {"task", "carrier", "model", "loss", "rate", "optimizer",
                               "data", "seed", "max_steps", "batch_size", "epochs",
                               "log_every", "shuffle", "pgm", "out", "params", "dream"},
                           "config root");
    c.task = j.value("task", "");
    c.carrier = j.value("carrier", "real");
    if (j.contains("model")) {
        const json& m = j.at("model");
        detail::reject_unknown(m, {"layers", "activations", "circuit", "params"}, "model");
        if (m.contains("layers")) c.layers = m.at("layers").get<std::vector<std::size_t>>();
        if (m.contains("activations"))
            c.activations = m.at("activations").get<std::vector<std::string>>();
        c.circuit_path = m.value("circuit", "");
        c.circuit_params = m.value("params", std::size_t{0});
    }
    c.loss = j.value("loss", c.loss);
    if (j.contains("rate")) {
        const json& r = j.at("rate");
        detail::reject_unknown(r, {"kind", "eps"}, "rate");
        c.rate_kind = r.value("kind", c.rate_kind);
        c.rate_eps = r.value("eps", c.rate_eps);
    }
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        detail::reject_unknown(o, {"kind", "gamma", "eps", "beta1", "beta2", "delta"},
                               "optimizer");
        c.opt_kind = o.value("kind", c.opt_kind);
        c.opt_gamma = o.value("gamma", c.opt_gamma);
        c.opt_eps = o.value("eps", c.opt_eps);
        c.opt_beta1 = o.value("beta1", c.opt_beta1);
        c.opt_beta2 = o.value("beta2", c.opt_beta2);
        c.opt_delta = o.value("delta", c.opt_delta);
    }
    if (j.contains("data")) {
        const json& d = j.at("data");
        detail::reject_unknown(d, {"kind", "dir", "train_images", "train_labels",
                                   "test_images", "test_labels", "path", "generator",
                                   "samples", "target_circuit"},
                               "data");
        c.data_kind = d.value("kind", "");
        if (d.contains("dir")) {
            std::string dir = d.at("dir").get<std::string>();
            c.train_images = dir + "/train-images-idx3-ubyte";
            c.train_labels = dir + "/train-labels-idx1-ubyte";
            c.test_images = dir + "/t10k-images-idx3-ubyte";
            c.test_labels = dir + "/t10k-labels-idx1-ubyte";
        }
        if (d.contains("train_images")) c.train_images = d.at("train_images");
        if (d.contains("train_labels")) c.train_labels = d.at("train_labels");
        if (d.contains("test_images")) c.test_images = d.at("test_images");
        if (d.contains("test_labels")) c.test_labels = d.at("test_labels");
        c.csv_path = d.value("path", "");
        c.generator = d.value("generator", "");
        c.samples = d.value("samples", c.samples);
        c.target_circuit = d.value("target_circuit", "");
    }
    c.seed = j.value("seed", c.seed);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.log_every = j.value("log_every", c.log_every);
    c.shuffle = j.value("shuffle", c.shuffle);
    c.pgm = j.value("pgm", c.pgm);
    c.out_dir = j.value("out", c.out_dir);
    c.params_path = j.value("params", c.params_path);
    if (j.contains("dream")) {
        const json& d = j.at("dream");
        detail::reject_unknown(d, {"target_class", "init"}, "dream");
        c.dream_target = d.value("target_class", c.dream_target);
        c.dream_init = d.value("init", c.dream_init);
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config parse failure in " + path + ": " + e.what());
    }
    ExperimentConfig c = parse_config(j);
    // file references resolve relative to the config file's directory
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto anchor = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
    };
    anchor(c.circuit_path);
    anchor(c.train_images);
    anchor(c.train_labels);
    anchor(c.test_images);
    anchor(c.test_labels);
    anchor(c.csv_path);
    anchor(c.target_circuit);
    anchor(c.params_path);
    return c;
}

// All validation happens here, before any compute.
inline void validate_config(const ExperimentConfig& c) {
    auto is_one_of = [](const std::string& v, std::initializer_list<const char*> opts) {
        for (const char* o : opts)
            if (v == o) return true;
        return false;
    };
    if (!is_one_of(c.task, {"train", "dream", "gradcheck", "axioms", "eval"}))
        throw config_error("task must be one of train/dream/gradcheck/axioms/eval, got '" +
                           c.task + "'");
    if (!is_one_of(c.carrier, {"real", "z2"}))
        throw config_error("carrier must be real or z2, got '" + c.carrier + "'");
    if (c.task == "axioms") return;  // self-contained

    if (c.carrier == "real") {
        if (c.layers.size() < 2)
            throw config_error("real model needs at least two layer sizes");
        if (c.activations.size() != c.layers.size() - 1)
            throw config_error("need one activation per layer gap: " +
                               std::to_string(c.layers.size() - 1) + " expected, " +
                               std::to_string(c.activations.size()) + " given");
        for (const auto& a : c.activations)
            if (!is_one_of(a, {"sigmoid", "relu", "tanh", "none"}))
                throw config_error("unknown activation '" + a + "'");
        for (std::size_t l : c.layers)
            if (l == 0) throw config_error("layer sizes must be positive");
        if (!is_one_of(c.loss, {"quadratic", "softmax-ce", "dot"}))
            throw config_error("real-carrier loss must be quadratic/softmax-ce/dot");
        if (!is_one_of(c.rate_kind, {"constant", "scaled", "ascent"}))
            throw config_error("real-carrier rate must be constant/scaled/ascent");
        if (c.rate_eps <= 0) throw config_error("rate eps must be positive");
        if (!is_one_of(c.opt_kind, {"gradient", "momentum", "nesterov", "adagrad", "adam"}))
            throw config_error("unknown optimizer '" + c.opt_kind + "'");
    } else {
        if (c.task == "gradcheck")
            throw config_error("gradcheck requires the real carrier");
        if (c.circuit_path.empty())
            throw config_error("z2 model needs a circuit file");
        if (!std::filesystem::exists(c.circuit_path))
            throw config_error("circuit file does not exist: " + c.circuit_path);
        if (c.loss != "boolean-xor")
            throw config_error("z2 carrier supports loss boolean-xor only");
        if (c.rate_kind != "identity")
            throw config_error("z2 carrier supports rate identity only");
        if (c.opt_kind != "gradient")
            throw config_error("z2 carrier supports optimizer gradient only");
    }

    if (c.task == "train" || c.task == "eval") {
        if (c.data_kind == "mnist-idx") {
            for (const std::string& p :
                 {c.train_images, c.train_labels, c.test_images, c.test_labels}) {
                if (p.empty()) throw config_error("mnist-idx data needs all four file paths");
                if (!std::filesystem::exists(p))
                    throw config_error("dataset file does not exist: " + p);
            }
        } else if (c.data_kind == "csv") {
            if (c.csv_path.empty() || !std::filesystem::exists(c.csv_path))
                throw config_error("csv dataset file does not exist: " + c.csv_path);
        } else if (c.data_kind == "synthetic") {
            if (c.generator != "linreg")
                throw config_error("unknown synthetic generator '" + c.generator + "'");
        } else if (c.data_kind == "exhaustive") {
            if (c.carrier != "z2")
                throw config_error("exhaustive data requires the z2 carrier");
            if (c.target_circuit.empty() || !std::filesystem::exists(c.target_circuit))
                throw config_error("target circuit file does not exist: " + c.target_circuit);
        } else {
            throw config_error("data kind must be mnist-idx/csv/synthetic/exhaustive, got '" +
                               c.data_kind + "'");
        }
    }
    if ((c.task == "dream" || c.task == "eval") && c.carrier == "real") {
        if (c.params_path.empty() || !std::filesystem::exists(c.params_path))
            throw config_error("pretrained parameter file does not exist: " + c.params_path);
    }
    if (c.task == "train" && c.batch_size == 0)
        throw config_error("batch_size must be positive");
}

// ---- model / component builders -------------------------------------------

inline SmoothExpr build_dense_stack(const std::vector<std::size_t>& layers,
                                    const std::vector<std::string>& acts) {
    auto one = [](std::size_t a, std::size_t b, const std::string& act) {
        if (act == "none") return affine(a, b);
        Act k = act == "sigmoid" ? Act::Sigmoid : act == "relu" ? Act::Relu : Act::Tanh;
        return dense(a, b, k);
    };
    SmoothExpr e = one(layers[0], layers[1], acts[0]);
    for (std::size_t i = 1; i + 1 < layers.size(); ++i)
        e = compose(e, one(layers[i], layers[i + 1], acts[i]));
    return e;
}

inline LossLens<double> build_loss_real(const std::string& name, std::size_t b) {
    if (name == "quadratic") return loss_quadratic(b);
    if (name == "softmax-ce") return loss_softmax_ce(b);
    return loss_dot(b);
}

inline RateLens<double> build_rate_real(const std::string& kind, double eps) {
    if (kind == "constant") return rate_constant(eps);
    if (kind == "scaled") return rate_scaled(eps);
    return rate_constant_raw(eps);  // ascent: +eps, used for dreaming
}

inline OptimizerLens<double> build_opt_real(const ExperimentConfig& c, std::size_t p) {
    if (c.opt_kind == "momentum") return opt_momentum(c.opt_gamma, p);
    if (c.opt_kind == "nesterov") return opt_nesterov(c.opt_gamma, p);
    if (c.opt_kind == "adagrad") return opt_adagrad(c.opt_eps, c.opt_delta, p);
    if (c.opt_kind == "adam")
        return opt_adam(c.opt_beta1, c.opt_beta2, c.opt_eps, c.opt_delta, p);
    return opt_gradient<double>(p);
}

// Per-layer parameter lengths in block order (output layer first).
inline std::vector<std::size_t> layer_param_lens(const std::vector<std::size_t>& layers) {
    std::vector<std::size_t> lens;
    for (std::size_t i = layers.size() - 1; i >= 1; --i)
        lens.push_back(layers[i] * layers[i - 1] + layers[i]);
    return lens;
}

inline void save_layered_params(const std::string& path,
                                const std::vector<std::size_t>& layers,
                                const Vec<double>& flat) {
    std::vector<Vec<double>> per_layer;
    std::size_t off = 0;
    for (std::size_t n : layer_param_lens(layers)) {
        per_layer.emplace_back(flat.begin() + off, flat.begin() + off + n);
        off += n;
    }
    require(off == flat.size(), "save_layered_params: length mismatch");
    save_params(path, layers, per_layer);
}

// ---- datasets --------------------------------------------------------------

inline Dataset load_csv_dataset(const std::string& path, std::size_t in_dim,
                                std::size_t out_dim) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open csv dataset: " + path);
    Dataset d;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Vec<double> row;
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != in_dim + out_dim)
            throw io_error("csv row " + std::to_string(lineno) + " has " +
                           std::to_string(row.size()) + " fields, expected " +
                           std::to_string(in_dim + out_dim));
        d.inputs.emplace_back(row.begin(), row.begin() + in_dim);
        d.targets.emplace_back(row.begin() + in_dim, row.end());
    }
    if (d.inputs.empty()) throw io_error("empty csv dataset: " + path);
    return d;
}

// y = 2x + 1 with x uniform on [-1, 1]; the standing regression example.
inline Dataset synthetic_linreg(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        double x = u(rng);
        d.inputs.push_back({x});
        d.targets.push_back({2.0 * x + 1.0});
    }
    return d;
}

inline Dataset load_train_data(const ExperimentConfig& c, std::size_t in_dim,
                               std::size_t out_dim, std::mt19937_64& rng) {
    if (c.data_kind == "mnist-idx") return load_mnist_idx(c.train_images, c.train_labels);
    if (c.data_kind == "csv") return load_csv_dataset(c.csv_path, in_dim, out_dim);
    return synthetic_linreg(c.samples, rng);
}

// ---- evaluation -------------------------------------------------------------

struct EvalResult {
    double mean_loss = 0.0;
    double accuracy = 0.0;
    std::size_t samples = 0;
};

inline EvalResult evaluate_model(const Para<double>& model, const LossLens<double>& loss,
                                 const Vec<double>& params, const Dataset& data) {
    EvalResult r;
    r.samples = data.inputs.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.inputs.size(); ++i) {
        Vec<double> bp = model.body.get(concat(params, data.inputs[i]));
        if (SupervisedStep<double>::argmax(bp) ==
            SupervisedStep<double>::argmax(data.targets[i]))
            ++correct;
        Vec<double> l = loss.para.body.get(concat(data.targets[i], bp));
        for (double x : l) r.mean_loss += x;
    }
    r.mean_loss /= static_cast<double>(r.samples);
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.samples);
    return r;
}

// ---- z2 helpers -------------------------------------------------------------

inline Z2Tuple load_circuit_file(const std::string& path, std::size_t arity = 0) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open circuit file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_circuit(ss.str(), arity);
}

inline void save_bits(const std::string& path, const Vec<Z2>& bits) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot write parameter file: " + path);
    os << "paralens-bits 1\n";
    for (std::size_t i = 0; i < bits.size(); ++i) os << (i ? " " : "") << unsigned(bits[i].v);
    os << '\n';
}

inline Vec<Z2> load_bits(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open parameter file: " + path);
    std::string header;
    std::getline(is, header);
    if (header != "paralens-bits 1") throw io_error("bad bit-file header: " + path);
    Vec<Z2> bits;
    unsigned b;
    while (is >> b) {
        if (b > 1) throw io_error("non-bit value in " + path);
        bits.push_back(Z2(static_cast<std::uint8_t>(b)));
    }
    return bits;
}

// Exhaustive (input, target) pairs for a target tuple over n free inputs,
// in increasing bit-mask order.
inline std::pair<std::vector<Vec<Z2>>, std::vector<Vec<Z2>>> exhaustive_z2_data(
    const Z2Tuple& target, std::size_t n) {
    std::vector<Vec<Z2>> xs, ys;
    for (std::size_t m = 0; m < (std::size_t(1) << n); ++m) {
        Vec<Z2> x = bits_of(m, n);
        ys.push_back(poly_eval(target, x));
        xs.push_back(std::move(x));
    }
    return {std::move(xs), std::move(ys)};
}

// ---- runs -------------------------------------------------------------------

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace detail

inline int run_train_real(const ExperimentConfig& c, std::ostream& log) {
    std::filesystem::create_directories(c.out_dir);
    SmoothExpr expr = build_dense_stack(c.layers, c.activations);
    std::size_t out_dim = expr.cod_len();
    SupervisedSystem<double> sys{reverse(expr), build_loss_real(c.loss, out_dim),
                                 build_rate_real(c.rate_kind, c.rate_eps),
                                 build_opt_real(c, expr.param_len())};
    SupervisedStep<double> step = build_supervised(std::move(sys));

    std::mt19937_64 rng(c.seed);
    Vec<double> p = init_params(expr, rng);
    Vec<double> s = step.system().optimizer.init_state();
    Dataset data = load_train_data(c, expr.dom_len(), out_dim, rng);

    bool classify = c.loss == "softmax-ce";
    MetricsWriter metrics(c.out_dir + "/metrics.csv");
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(data.inputs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t global_step = 0;

    for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
        if (c.shuffle) std::shuffle(order.begin(), order.end(), rng);
        double loss_acc = 0.0;
        std::size_t correct = 0, seen = 0, logged_batches = 0;
        for (std::size_t at = 0; at < order.size(); at += c.batch_size) {
            std::size_t take = std::min(c.batch_size, order.size() - at);
            StepOut<double> out;
            if (take == 1) {
                const Vec<double>& a = data.inputs[order[at]];
                const Vec<double>& bt = data.targets[order[at]];
                if (classify) {
                    Vec<double> pbar = step.system().optimizer.lens.get(concat(s, p));
                    Vec<double> bp = step.system().model.body.get(concat(pbar, a));
                    if (SupervisedStep<double>::argmax(bp) ==
                        SupervisedStep<double>::argmax(bt))
                        ++correct;
                }
                out = step(a, s, p, bt);
            } else {
                std::vector<Vec<double>> as, bts;
                as.reserve(take);
                bts.reserve(take);
                for (std::size_t k = 0; k < take; ++k) {
                    as.push_back(data.inputs[order[at + k]]);
                    bts.push_back(data.targets[order[at + k]]);
                }
                out = step.batch(as, bts, s, p, classify ? &correct : nullptr);
            }
            s = std::move(out.state);
            p = std::move(out.value);
            for (double l : out.loss) loss_acc += l;
            seen += take;
            ++global_step;
            ++logged_batches;
            if (logged_batches % c.log_every == 0) {
                metrics.row(global_step, epoch, loss_acc / double(logged_batches),
                            classify ? double(correct) / double(seen) : 0.0,
                            detail::elapsed_ms(t0));
                loss_acc = 0.0;
                correct = 0;
                seen = 0;
                logged_batches = 0;
            }
        }
        if (logged_batches > 0)
            metrics.row(global_step, epoch, loss_acc / double(logged_batches),
                        classify && seen ? double(correct) / double(seen) : 0.0,
                        detail::elapsed_ms(t0));
    }

    save_layered_params(c.out_dir + "/params.txt", c.layers, p);
    log << "trained " << global_step << " steps; parameters written to " << c.out_dir
        << "/params.txt\n";

    if (c.data_kind == "mnist-idx") {
        Dataset test = load_mnist_idx(c.test_images, c.test_labels);
        EvalResult r = evaluate_model(step.system().model, step.system().loss, p, test);
        log << "test loss " << std::setprecision(17) << r.mean_loss << " accuracy "
            << r.accuracy << " on " << r.samples << " samples\n";
    }
    return 0;
}

// One iteration = one corrective update on the first currently-misclassified
// sample (scanned in fixed order).  Terminates as soon as the whole table is
// reproduced exactly.
inline int run_train_z2(const ExperimentConfig& c, std::ostream& log) {
    std::filesystem::create_directories(c.out_dir);
    Z2Tuple circuit = load_circuit_file(c.circuit_path);
    std::size_t arity = circuit.empty() ? 0 : circuit[0].arity();
    require(c.circuit_params < arity, "circuit must keep at least one free input");
    std::size_t n = arity - c.circuit_params;
    std::size_t m = circuit.size();

    Z2Tuple target = load_circuit_file(c.target_circuit, n);
    require(target.size() == m, "target circuit output count must match model");
    auto [xs, ys] = exhaustive_z2_data(target, n);

    SupervisedSystem<Z2> sys{make_circuit_para(circuit, c.circuit_params),
                             loss_boolean_xor(m), rate_identity(m),
                             opt_gradient<Z2>(c.circuit_params)};
    SupervisedStep<Z2> step = build_supervised(std::move(sys));

    std::mt19937_64 rng(c.seed);
    std::bernoulli_distribution coin(0.5);
    Vec<Z2> p(c.circuit_params);
    for (auto& b : p) b = Z2(coin(rng) ? 1 : 0);
    Vec<Z2> s;  // gradient optimizer is stateless

    std::size_t cap = c.max_steps ? c.max_steps : 64;
    MetricsWriter metrics(c.out_dir + "/metrics.csv");
    auto t0 = std::chrono::steady_clock::now();
    std::size_t iter = 0;
    for (; iter <= cap; ++iter) {
        std::size_t wrong = 0;
        std::size_t first_wrong = xs.size();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            Vec<Z2> bp = step.system().model.body.get(concat(p, xs[i]));
            if (!z2_eq(bp, ys[i])) {
                if (first_wrong == xs.size()) first_wrong = i;
                ++wrong;
            }
        }
        metrics.row(iter, 0, double(wrong),
                    double(xs.size() - wrong) / double(xs.size()), detail::elapsed_ms(t0));
        if (wrong == 0) break;
        if (iter == cap) {
            log << "no exact fit within " << cap << " iterations\n";
            save_bits(c.out_dir + "/params.txt", p);
            return 1;
        }
        StepOut<Z2> out = step(xs[first_wrong], s, p, ys[first_wrong]);
        s = std::move(out.state);
        p = std::move(out.value);
    }
    save_bits(c.out_dir + "/params.txt", p);
    log << "exact fit after " << iter << " iterations; parameters written to " << c.out_dir
        << "/params.txt\n";
    return 0;
}

inline int run_train(const ExperimentConfig& c, std::ostream& log) {
    return c.carrier == "real" ? run_train_real(c, log) : run_train_z2(c, log);
}

inline int run_dream(const ExperimentConfig& c, std::ostream& log) {
    std::filesystem::create_directories(c.out_dir);
    SmoothExpr expr = build_dense_stack(c.layers, c.activations);
    std::size_t in_dim = expr.dom_len(), out_dim = expr.cod_len();
    ParamFile pf = load_params(c.params_path);
    Vec<double> p = pf.flat();
    if (p.size() != expr.param_len())
        throw config_error("parameter file length " + std::to_string(p.size()) +
                           " does not match model parameter length " +
                           std::to_string(expr.param_len()));
    if (c.dream_target >= out_dim)
        throw config_error("dream target class out of range");

    SupervisedSystem<double> sys{reverse(expr), build_loss_real(c.loss, out_dim),
                                 build_rate_real(c.rate_kind, c.rate_eps),
                                 build_opt_real(c, in_dim)};
    DreamStep<double> dream = build_dreamer(std::move(sys));

    std::mt19937_64 rng(c.seed);
    Vec<double> a(in_dim, 0.0);
    if (c.dream_init == "random") {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (double& x : a) x = u(rng);
    }
    Vec<double> bt(out_dim, 0.0);
    bt[c.dream_target] = 1.0;
    Vec<double> s = build_opt_real(c, in_dim).init_state();

    std::ofstream csv(c.out_dir + "/dream.csv");
    if (!csv) throw io_error("cannot write dream trajectory");
    csv << std::setprecision(17);
    auto emit = [&](std::size_t stepno) {
        csv << stepno;
        for (double x : a) csv << ',' << x;
        csv << '\n';
        if (c.pgm && in_dim == 784) {
            char name[32];
            std::snprintf(name, sizeof name, "/dream_%04zu.pgm", stepno);
            write_pgm(c.out_dir + name, a, 28, 28);
        }
    };
    emit(0);
    for (std::size_t i = 0; i < c.max_steps; ++i) {
        StepOut<double> out = dream(s, a, p, bt);
        s = std::move(out.state);
        a = std::move(out.value);
        emit(i + 1);
    }
    log << "dreamed " << c.max_steps << " steps; trajectory written to " << c.out_dir
        << "/dream.csv\n";
    return 0;
}

inline int run_gradcheck(const ExperimentConfig& c, std::ostream& log) {
    SmoothExpr expr = build_dense_stack(c.layers, c.activations);
    std::mt19937_64 rng(c.seed);
    std::size_t points = c.max_steps ? c.max_steps : 100;
    GradCheckReport rep = gradcheck(expr, rng, points, 1e-4);
    log << "gradcheck: max relative error " << std::setprecision(17) << rep.max_rel_err
        << " over " << rep.points << " points (" << rep.excluded
        << " excluded near relu kinks)\n";
    return rep.max_rel_err > 1e-4 ? 1 : 0;
}

inline int run_axioms(const ExperimentConfig& c, std::ostream& log) {
    std::mt19937_64 rng(c.seed);
    bool ok = true;
    for (const AxiomReport& r : smooth_axioms(rng, 1000, 1e-9)) {
        log << r.name << ": " << (r.pass ? "pass" : "FAIL") << " (max err " << r.max_err
            << ", " << r.cases << " cases)\n";
        ok = ok && r.pass;
    }
    for (const AxiomReport& r : boolean_axioms(rng, 200, 4)) {
        log << r.name << ": " << (r.pass ? "pass" : "FAIL") << " (" << r.cases
            << " cases, exhaustive)\n";
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

inline int run_eval(const ExperimentConfig& c, std::ostream& log) {
    if (c.carrier == "z2") {
        Z2Tuple circuit = load_circuit_file(c.circuit_path);
        std::size_t arity = circuit.empty() ? 0 : circuit[0].arity();
        std::size_t n = arity - c.circuit_params;
        Vec<Z2> p = load_bits(c.params_path);
        if (p.size() != c.circuit_params)
            throw config_error("bit file length does not match circuit parameter count");
        Z2Tuple target = load_circuit_file(c.target_circuit, n);
        auto [xs, ys] = exhaustive_z2_data(target, n);
        Para<Z2> model = make_circuit_para(circuit, c.circuit_params);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (z2_eq(model.body.get(concat(p, xs[i])), ys[i])) ++correct;
        log << "eval: " << correct << "/" << xs.size() << " rows exact\n";
        return correct == xs.size() ? 0 : 1;
    }
    SmoothExpr expr = build_dense_stack(c.layers, c.activations);
    ParamFile pf = load_params(c.params_path);
    Vec<double> p = pf.flat();
    if (p.size() != expr.param_len())
        throw config_error("parameter file does not match model");
    std::mt19937_64 rng(c.seed);
    Dataset data;
    if (c.data_kind == "mnist-idx")
        data = load_mnist_idx(c.test_images, c.test_labels);
    else
        data = load_train_data(c, expr.dom_len(), expr.cod_len(), rng);
    EvalResult r = evaluate_model(reverse(expr), build_loss_real(c.loss, expr.cod_len()), p,
                                  data);
    log << "eval: loss " << std::setprecision(17) << r.mean_loss << " accuracy " << r.accuracy
        << " on " << r.samples << " samples\n";
    return 0;
}

inline int run_experiment(const ExperimentConfig& c, std::ostream& log) {
    validate_config(c);
    if (c.task == "train") return run_train(c, log);
    if (c.task == "dream") return run_dream(c, log);
    if (c.task == "gradcheck") return run_gradcheck(c, log);
    if (c.task == "axioms") return run_axioms(c, log);
    return run_eval(c, log);
}

}  // namespace paralens
