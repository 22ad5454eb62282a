#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "paralens/harness.hpp"

using namespace paralens;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / fs::path("paralens-test-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void put_be32(std::ofstream& os, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) os.put(static_cast<char>((v >> s) & 0xff));
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                      std::uint32_t magic = 0x803) {
    std::ofstream os(path, std::ios::binary);
    put_be32(os, magic);
    put_be32(os, n);
    put_be32(os, rows);
    put_be32(os, cols);
    os.write(reinterpret_cast<const char*>(pixels.data()),
             static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels,
                      std::uint32_t magic = 0x801) {
    std::ofstream os(path, std::ios::binary);
    put_be32(os, magic);
    put_be32(os, static_cast<std::uint32_t>(labels.size()));
    os.write(reinterpret_cast<const char*>(labels.data()),
             static_cast<std::streamsize>(labels.size()));
}

}  // namespace

TEST_CASE("idx parsing: scaling, one-hot targets, and the three failure modes") {
    TempDir tmp;
    std::vector<std::uint8_t> pixels(2 * 2 * 2, 0);
    pixels[0] = 255;
    pixels[5] = 128;
    write_idx_images(tmp.file("img"), pixels, 2, 2, 2);
    write_idx_labels(tmp.file("lab"), {3, 0});

    Dataset d = load_mnist_idx(tmp.file("img"), tmp.file("lab"));
    REQUIRE(d.inputs.size() == 2);
    REQUIRE(d.inputs[0].size() == 4);
    CHECK(d.inputs[0][0] == 1.0);
    CHECK(d.inputs[1][1] == doctest::Approx(128.0 / 255.0));
    CHECK(d.targets[0] == Vec<double>{0, 0, 0, 1, 0, 0, 0, 0, 0, 0});

    write_idx_images(tmp.file("badmagic"), pixels, 2, 2, 2, 0x802);
    CHECK_THROWS_WITH_AS(load_mnist_idx(tmp.file("badmagic"), tmp.file("lab")),
                         doctest::Contains("magic"), mnist_error);

    std::vector<std::uint8_t> short_pixels(pixels.begin(), pixels.begin() + 5);
    write_idx_images(tmp.file("trunc"), short_pixels, 2, 2, 2);
    CHECK_THROWS_WITH_AS(load_mnist_idx(tmp.file("trunc"), tmp.file("lab")),
                         doctest::Contains("truncated"), mnist_error);

    write_idx_labels(tmp.file("lab3"), {3, 0, 1});
    CHECK_THROWS_WITH_AS(load_mnist_idx(tmp.file("img"), tmp.file("lab3")),
                         doctest::Contains("count"), mnist_error);
}

TEST_CASE("parameter files round-trip bit-identically") {
    TempDir tmp;
    std::vector<std::size_t> layers{3, 2, 1};
    // output layer first: 2->1 needs 1*2+1 values, 3->2 needs 2*3+2
    std::vector<Vec<double>> per_layer{{0.1, -1.0 / 3.0, 2e-17},
                                       {1.5, -2.25, 0.125, 1e300, -7, 0.3, 0.25, 1e-7}};
    save_params(tmp.file("p.txt"), layers, per_layer);
    ParamFile pf = load_params(tmp.file("p.txt"));
    CHECK(pf.layers == layers);
    REQUIRE(pf.per_layer.size() == 2);
    CHECK(pf.per_layer[0] == per_layer[0]);
    CHECK(pf.per_layer[1] == per_layer[1]);

    std::ofstream(tmp.file("bad.txt")) << "not-a-param-file\n";
    CHECK_THROWS_AS(load_params(tmp.file("bad.txt")), io_error);
}

TEST_CASE("pgm output is clamped and rounded") {
    TempDir tmp;
    write_pgm(tmp.file("x.pgm"), {0.0, 1.0, -0.5, 0.5}, 2, 2);
    std::ifstream is(tmp.file("x.pgm"), std::ios::binary);
    std::string header;
    std::getline(is, header);
    CHECK(header == "P5");
    std::string dims, maxval;
    std::getline(is, dims);
    std::getline(is, maxval);
    CHECK(dims == "2 2");
    CHECK(maxval == "255");
    char b[4];
    is.read(b, 4);
    CHECK(static_cast<unsigned char>(b[0]) == 0);
    CHECK(static_cast<unsigned char>(b[1]) == 255);
    CHECK(static_cast<unsigned char>(b[2]) == 0);
    CHECK(static_cast<unsigned char>(b[3]) == 128);
}

TEST_CASE("csv datasets check their row widths") {
    TempDir tmp;
    std::ofstream(tmp.file("d.csv")) << "1,2,3\n4,5,6\n";
    Dataset d = load_csv_dataset(tmp.file("d.csv"), 2, 1);
    REQUIRE(d.inputs.size() == 2);
    CHECK(d.inputs[1] == Vec<double>{4, 5});
    CHECK(d.targets[1] == Vec<double>{6});
    CHECK_THROWS_AS(load_csv_dataset(tmp.file("d.csv"), 3, 1), io_error);
}

TEST_CASE("bit files round-trip") {
    TempDir tmp;
    Vec<Z2> bits{Z2(1), Z2(0), Z2(1), Z2(1)};
    save_bits(tmp.file("b.txt"), bits);
    Vec<Z2> back = load_bits(tmp.file("b.txt"));
    CHECK(z2_eq(back, bits));
}

TEST_CASE("config parsing and validation") {
    TempDir tmp;
    std::ofstream(tmp.file("c.json")) << R"({
        "task": "train", "carrier": "real",
        "model": {"layers": [2, 1], "activations": ["none"]},
        "loss": "quadratic",
        "rate": {"kind": "constant", "eps": 0.1},
        "optimizer": {"kind": "gradient"},
        "data": {"kind": "synthetic", "generator": "linreg", "samples": 16},
        "seed": 7, "epochs": 2, "batch_size": 1, "out": ")" << tmp.file("out") << R"("
    })";
    ExperimentConfig cfg = load_config(tmp.file("c.json"));
    CHECK(cfg.layers == std::vector<std::size_t>{2, 1});
    CHECK(cfg.rate_eps == 0.1);
    CHECK(cfg.seed == 7);
    CHECK_NOTHROW(validate_config(cfg));

    ExperimentConfig bad = cfg;
    bad.activations = {"sigmoid", "relu"};
    CHECK_THROWS_AS(validate_config(bad), config_error);

    bad = cfg;
    bad.data_kind = "csv";
    bad.csv_path = tmp.file("missing.csv");
    CHECK_THROWS_AS(validate_config(bad), config_error);

    std::ofstream(tmp.file("unknown.json")) << R"({"task": "train", "bogus": 1})";
    CHECK_THROWS_AS(load_config(tmp.file("unknown.json")), config_error);

    std::ofstream(tmp.file("syntax.json")) << "{ not json";
    CHECK_THROWS_AS(load_config(tmp.file("syntax.json")), config_error);
}

TEST_CASE("a tiny synthetic training run converges and is reproducible") {
    TempDir tmp;
    ExperimentConfig cfg;
    cfg.task = "train";
    cfg.carrier = "real";
    cfg.layers = {1, 1};
    cfg.activations = {"none"};
    cfg.loss = "quadratic";
    cfg.rate_kind = "constant";
    cfg.rate_eps = 0.1;
    cfg.opt_kind = "gradient";
    cfg.data_kind = "synthetic";
    cfg.generator = "linreg";
    cfg.samples = 256;
    cfg.seed = 7;
    cfg.epochs = 5;
    cfg.batch_size = 1;
    cfg.log_every = 64;
    cfg.out_dir = tmp.file("a");
    std::ostringstream log;
    REQUIRE(run_experiment(cfg, log) == 0);

    ParamFile pf = load_params(tmp.file("a") + "/params.txt");
    Vec<double> p = pf.flat();  // [bias | weight]
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(2.0).epsilon(1e-4));

    // final mean loss below 1e-4
    SmoothExpr e = build_dense_stack(cfg.layers, cfg.activations);
    std::mt19937_64 rng(cfg.seed);
    init_params(e, rng);  // consume the init draw the run made
    Dataset data = synthetic_linreg(cfg.samples, rng);
    EvalResult r = evaluate_model(reverse(e), loss_quadratic(1), p, data);
    CHECK(r.mean_loss < 1e-4);

    cfg.out_dir = tmp.file("b");
    REQUIRE(run_experiment(cfg, log) == 0);
    std::ifstream f1(tmp.file("a") + "/params.txt"), f2(tmp.file("b") + "/params.txt");
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
}
