#pragma once

#include <ostream>

#include "flatlab/quadnum.hpp"

namespace flatlab {

struct Vec2 {
    QuadNum x;
    QuadNum y;

    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(const Vec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend Vec2 operator*(const QuadNum& s, const Vec2& v) { return {s * v.x, s * v.y}; }
    friend bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }
    friend std::ostream& operator<<(std::ostream& os, const Vec2& v) {
        return os << "(" << render(v.x) << ", " << render(v.y) << ")";
    }
};

inline QuadNum cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline QuadNum dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline QuadNum norm2(const Vec2& a) { return dot(a, a); }

/// Sign of the turn a -> b -> c.
inline int orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a).sign(); }

inline bool parallel(const Vec2& a, const Vec2& b) { return cross(a, b).sign() == 0; }

/// Lexicographic order on points, used for deterministic tie-breaks.
inline bool lex_less(const Vec2& a, const Vec2& b) {
    int c = compare(a.x, b.x);
    return c != 0 ? c < 0 : a.y < b.y;
}

/// Half-translation chart change z -> sign*z + shift.
struct Isometry {
    int sign{1};
    Vec2 shift{};

    Vec2 operator()(const Vec2& z) const { return sign > 0 ? z + shift : shift - z; }
    Vec2 linear(const Vec2& v) const { return sign > 0 ? v : -v; }
    /// (this o other)(z) = this(other(z))
    Isometry after(const Isometry& other) const { return {sign * other.sign, (*this)(other.shift)}; }
    Isometry inverse() const {
        // w = s z + c  =>  z = s w - s c
        return {sign, sign > 0 ? -shift : shift};
    }
    friend bool operator==(const Isometry& a, const Isometry& b) { return a.sign == b.sign && a.shift == b.shift; }
};

// ---- angular sectors

/// 0 for directions in the upper half-plane (angle in [0, pi)), 1 otherwise.
inline int half_of(const Vec2& v) {
    int sy = v.y.sign();
    if (sy > 0) return 0;
    if (sy < 0) return 1;
    return v.x.sign() > 0 ? 0 : 1;
}

/// Strict order of directions by angle in [0, 2pi) measured ccw from the +x axis.
inline bool angle_less(const Vec2& a, const Vec2& b) {
    int ha = half_of(a), hb = half_of(b);
    if (ha != hb) return ha < hb;
    return cross(a, b).sign() > 0;
}

inline bool same_direction(const Vec2& a, const Vec2& b) {
    return cross(a, b).sign() == 0 && dot(a, b).sign() > 0;
}

/// True iff direction w lies in the ccw sweep from u to v, half-open [u, v).
/// A sweep with u == v (as directions) is empty; sweeps are < 2pi.
inline bool in_sweep(const Vec2& u, const Vec2& v, const Vec2& w) {
    if (same_direction(w, u)) return !same_direction(u, v);
    if (same_direction(u, v)) return false;
    // rotate so that u is the reference: compare angle(u->w) with angle(u->v)
    auto rel = [&](const Vec2& z) {
        // angle of z relative to u, encoded by (half, z) in u's frame: (dot, cross)
        return Vec2{dot(u, z), cross(u, z)};
    };
    return angle_less(rel(w), rel(v));
}

}  // namespace flatlab
