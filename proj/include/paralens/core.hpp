#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace paralens {

template <class S>
using Vec = std::vector<S>;

struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw shape_error(msg);
}

// A typed port: a forward wire length and a backward wire length.
// The unit interface is {0, 0}.
struct Interface {
    std::size_t fwd = 0;
    std::size_t bwd = 0;

    friend bool operator==(const Interface&, const Interface&) = default;

    // Monoidal product: lengths add.
    friend Interface operator*(const Interface& a, const Interface& b) {
        return {a.fwd + b.fwd, a.bwd + b.bwd};
    }
};

inline Interface unit_interface() { return {0, 0}; }

// Symmetric interface (A, A), the common case for reverse-derivative lenses.
inline Interface iface(std::size_t n) { return {n, n}; }

inline std::string describe(const Interface& i) {
    return "(" + std::to_string(i.fwd) + "," + std::to_string(i.bwd) + ")";
}

template <class S>
Vec<S> concat(std::span<const S> a, std::span<const S> b) {
    Vec<S> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

template <class S>
Vec<S> concat(const Vec<S>& a, const Vec<S>& b) {
    return concat(std::span<const S>(a), std::span<const S>(b));
}

template <class S>
std::pair<Vec<S>, Vec<S>> split(const Vec<S>& v, std::size_t n) {
    require(n <= v.size(), "split point past end of vector");
    return {Vec<S>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)),
            Vec<S>(v.begin() + static_cast<std::ptrdiff_t>(n), v.end())};
}

template <class S>
void check_len(const Vec<S>& v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw shape_error(std::string(what) + ": expected length " + std::to_string(n) +
                          ", got " + std::to_string(v.size()));
}

}  // namespace paralens
