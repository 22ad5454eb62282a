#pragma once

#include <cstdint>
#include <ostream>

namespace paralens {

// The two-element field. Addition is XOR, multiplication is AND, so the
// generic optimizer/learner code written against + and * works unchanged.
struct Z2 {
    std::uint8_t v = 0;

    constexpr Z2() = default;
    constexpr Z2(int x) : v(static_cast<std::uint8_t>(x & 1)) {}

    constexpr int to_int() const { return v; }
    explicit constexpr operator bool() const { return v != 0; }

    friend constexpr Z2 operator+(Z2 a, Z2 b) { return Z2(a.v ^ b.v); }
    friend constexpr Z2 operator-(Z2 a, Z2 b) { return Z2(a.v ^ b.v); }
    friend constexpr Z2 operator*(Z2 a, Z2 b) { return Z2(a.v & b.v); }
    constexpr Z2 operator-() const { return *this; }
    Z2& operator+=(Z2 o) { v ^= o.v; return *this; }
    Z2& operator*=(Z2 o) { v &= o.v; return *this; }

    friend constexpr bool operator==(Z2 a, Z2 b) { return a.v == b.v; }

    friend std::ostream& operator<<(std::ostream& os, Z2 a) { return os << int(a.v); }
};

}  // namespace paralens
