#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "paralens/core.hpp"

namespace paralens {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned parameter file: header with layer sizes, then one parameter
// vector per layer as decimal floats.  Layer order follows the parameter
// block layout (output layer first); each layer line is [bias | matrix].
//
//   paralens-params 1
//   layers 784 64 10
//   <layer line> ...
inline void save_params(const std::string& path, const std::vector<std::size_t>& layers,
                        const std::vector<Vec<double>>& per_layer) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot write parameter file: " + path);
    os << "paralens-params 1\n";
    os << "layers";
    for (auto l : layers) os << ' ' << l;
    os << '\n';
    os << std::setprecision(17);
    for (const auto& v : per_layer) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ' ';
            os << v[i];
        }
        os << '\n';
    }
    if (!os) throw io_error("write failed: " + path);
}

struct ParamFile {
    std::vector<std::size_t> layers;
    std::vector<Vec<double>> per_layer;

    // Concatenation in parameter-block order (output layer first).
    Vec<double> flat() const {
        Vec<double> out;
        for (const auto& v : per_layer) out.insert(out.end(), v.begin(), v.end());
        return out;
    }
};

inline ParamFile load_params(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open parameter file: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "paralens-params 1")
        throw io_error("bad parameter file header: " + path);
    if (!std::getline(is, line)) throw io_error("missing layer sizes: " + path);
    std::istringstream hs(line);
    std::string tag;
    hs >> tag;
    if (tag != "layers") throw io_error("bad layer header: " + path);
    ParamFile pf;
    std::size_t n;
    while (hs >> n) pf.layers.push_back(n);
    if (pf.layers.size() < 2) throw io_error("need at least two layer sizes: " + path);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Vec<double> v;
        double x;
        while (ls >> x) v.push_back(x);
        pf.per_layer.push_back(std::move(v));
    }
    if (pf.per_layer.size() != pf.layers.size() - 1)
        throw io_error("layer count mismatch in " + path);
    for (std::size_t k = 0; k < pf.per_layer.size(); ++k) {
        // output layer first: layer k maps layers[m-1-k] -> layers[m-k]
        std::size_t m = pf.layers.size() - 1;
        std::size_t in = pf.layers[m - 1 - k], out = pf.layers[m - k];
        if (pf.per_layer[k].size() != out * in + out)
            throw io_error("layer " + std::to_string(k) + " has wrong length in " + path);
    }
    return pf;
}

// CSV metrics writer: header step,epoch,loss,accuracy,ms.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path) : os_(path) {
        if (!os_) throw io_error("cannot write metrics file: " + path);
        os_ << "step,epoch,loss,accuracy,ms\n";
    }

    void row(std::size_t step, std::size_t epoch, double loss, double accuracy,
             double ms) {
        os_ << step << ',' << epoch << ',' << std::setprecision(17) << loss << ','
            << accuracy << ',' << std::setprecision(6) << ms << '\n';
    }

private:
    std::ofstream os_;
};

// P5 PGM, maxval 255, values clamped from [0, 1].
inline void write_pgm(const std::string& path, const Vec<double>& pixels,
                      std::size_t width, std::size_t height) {
    require(pixels.size() == width * height, "write_pgm: size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write image: " + path);
    os << "P5\n" << width << ' ' << height << "\n255\n";
    for (double v : pixels) {
        double scaled = v * 255.0;
        int b = scaled < 0 ? 0 : scaled > 255 ? 255 : static_cast<int>(scaled + 0.5);
        os.put(static_cast<char>(b));
    }
    if (!os) throw io_error("write failed: " + path);
}

}  // namespace paralens
