#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "paralens/core.hpp"

namespace paralens {

struct mnist_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Dataset {
    std::vector<Vec<double>> inputs;
    std::vector<Vec<double>> targets;

    std::size_t size() const { return inputs.size(); }
};

namespace detail {

inline std::uint32_t read_be32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw mnist_error("truncated file: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

// IDX format: big-endian magic 0x00000803 (images, 3 dims) or 0x00000801
// (labels, 1 dim).  Pixels scaled to [0, 1] by /255, labels one-hot over 10.
inline Dataset load_mnist_idx(const std::string& images_path,
                              const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw mnist_error("cannot open images file: " + images_path);
    std::uint32_t magic = detail::read_be32(img, images_path);
    if (magic != 0x00000803)
        throw mnist_error("bad magic in images file " + images_path + ": got " +
                          std::to_string(magic) + ", expected 2051");
    std::uint32_t n = detail::read_be32(img, images_path);
    std::uint32_t rows = detail::read_be32(img, images_path);
    std::uint32_t cols = detail::read_be32(img, images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw mnist_error("cannot open labels file: " + labels_path);
    std::uint32_t lmagic = detail::read_be32(lab, labels_path);
    if (lmagic != 0x00000801)
        throw mnist_error("bad magic in labels file " + labels_path + ": got " +
                          std::to_string(lmagic) + ", expected 2049");
    std::uint32_t ln = detail::read_be32(lab, labels_path);
    if (n != ln)
        throw mnist_error("count mismatch: " + std::to_string(n) + " images vs " +
                          std::to_string(ln) + " labels");

    std::size_t pix = std::size_t(rows) * cols;
    Dataset ds;
    ds.inputs.reserve(n);
    ds.targets.reserve(n);
    std::vector<unsigned char> buf(pix);
    for (std::uint32_t i = 0; i < n; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pix));
        if (!img) throw mnist_error("truncated file: " + images_path);
        Vec<double> x(pix);
        for (std::size_t k = 0; k < pix; ++k) x[k] = buf[k] / 255.0;
        ds.inputs.push_back(std::move(x));
        int label = lab.get();
        if (label == std::char_traits<char>::eof())
            throw mnist_error("truncated file: " + labels_path);
        if (label < 0 || label > 9)
            throw mnist_error("label out of range in " + labels_path);
        Vec<double> y(10, 0.0);
        y[static_cast<std::size_t>(label)] = 1.0;
        ds.targets.push_back(std::move(y));
    }
    return ds;
}

}  // namespace paralens
