#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "flatlab/graphdist.hpp"

namespace flatlab {

class DynamicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Matrix2 = std::array<QuadNum, 4>;  // row-major

inline Vec2 apply_linear(const Matrix2& m, const Vec2& v) { return {m[0] * v.x + m[1] * v.y, m[2] * v.x + m[3] * v.y}; }

inline Matrix2 mat_mul(const Matrix2& a, const Matrix2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

inline Matrix2 mat_inverse(const Matrix2& a) {
    QuadNum det = a[0] * a[3] - a[1] * a[2];
    if (det.sign() == 0) throw DynamicsError("singular matrix");
    return {a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
}

/// Affine automorphism of a flat torus: an integer action on the lattice basis
/// together with its linear part in chart coordinates.
struct AffineAuto {
    std::string name;
    std::array<long, 4> lattice{1, 0, 0, 1};  // acts on lattice coordinates (columns)
    Matrix2 chart;                             // W * lattice * W^-1
    std::optional<QuadNum> lambda;             // expansion factor when it lies in the field
    long trace() const { return lattice[0] + lattice[3]; }
};

inline AffineAuto make_torus_auto(const HalfTranslationSurface& s, const std::string& name, std::array<long, 4> A) {
    auto L = torus_lattice(s);
    if (!L) throw DynamicsError("lattice automorphisms need a one-parallelogram torus");
    long det = A[0] * A[3] - A[1] * A[2];
    if (det != 1 && det != -1) throw DynamicsError("automorphism '" + name + "' is not unimodular");
    AffineAuto f;
    f.name = name;
    f.lattice = A;
    Matrix2 W{L->w1.x, L->w2.x, L->w1.y, L->w2.y};
    Matrix2 Aq{QuadNum(A[0]), QuadNum(A[1]), QuadNum(A[2]), QuadNum(A[3])};
    f.chart = mat_mul(mat_mul(W, Aq), mat_inverse(W));
    long t = std::labs(f.trace());
    if (t > 2 && det == 1) {
        // lambda = (t + sqrt(t^2 - 4)) / 2 when t^2 - 4 = d m^2
        Rational m2 = Rational(t * t - 4) / Rational(s.field());
        auto b = sqrt_bounds(QuadNum(m2));
        if (b.lo == b.hi)
            f.lambda = s.field() == 1 ? QuadNum(Rational(t, 2) + b.lo / 2) : QuadNum(Rational(t, 2), b.lo / 2, s.field());
    }
    return f;
}

inline AffineAuto identity_auto(const HalfTranslationSurface& s) { return make_torus_auto(s, "identity", {1, 0, 0, 1}); }

/// Automorphisms declared in the surface file, verified against the lattice.
inline std::vector<AffineAuto> declared_autos(const HalfTranslationSurface& s) {
    std::vector<AffineAuto> out;
    for (const auto& d : s.automorphisms()) {
        if (!d.lattice) throw DynamicsError("automorphism '" + d.name + "' has no lattice action; only torus automorphisms are supported");
        auto f = make_torus_auto(s, d.name, *d.lattice);
        if (d.matrix && *d.matrix != f.chart) throw DynamicsError("automorphism '" + d.name + "': declared chart matrix disagrees with the lattice action");
        out.push_back(f);
    }
    return out;
}

inline const AffineAuto* find_auto(const std::vector<AffineAuto>& autos, const std::string& name) {
    for (const auto& f : autos)
        if (f.name == name) return &f;
    return nullptr;
}

/// Image of a curve: the lift is mapped by the chart matrix about the lattice
/// origin and retraced. Checks the homology action and simplicity; pass what is
/// already known about the source to skip recomputing it.
inline PLCurve apply(const HalfTranslationSurface& s, const AffineAuto& f, const PLCurve& c,
                     std::optional<std::vector<long>> source_class = std::nullopt, std::optional<bool> source_simple = std::nullopt) {
    auto L = *torus_lattice(s);
    std::size_t start = bend_start(c);
    auto steps = bend_steps(c, start);
    Vec2 p0 = c.segments[start].from;
    Vec2 q0 = L.origin + apply_linear(f.chart, p0 - L.origin);
    std::vector<Vec2> img;
    for (const auto& st : steps) img.push_back(apply_linear(f.chart, st));
    auto out = curve_from_polyline(s, torus_point(L, q0), img);
    auto before = source_class ? *source_class : homology_class(s, c).coords;
    auto after = homology_class(s, out).coords;
    std::vector<long> want{f.lattice[0] * before[0] + f.lattice[1] * before[1], f.lattice[2] * before[0] + f.lattice[3] * before[1]};
    if (after != want) throw DynamicsError("image class does not match the lattice action");
    bool simple = source_simple ? *source_simple : is_simple(c).simple;
    if (simple && !is_simple(out).simple) throw DynamicsError("image of a simple curve is not simple");
    return out;
}

struct AxisRecord {
    std::vector<long> homology;
    DistanceBound distance;  // from C_0
    SizeWidthReport size;
};

struct AxisOrbit {
    std::string map;
    std::vector<AxisRecord> records;  // i = 0..n
    double slope{0};
    double intercept{0};
    bool monotone{true};                     // no decreasing lower bound
    std::optional<bool> width_scales_exactly;  // width(C_{i+1}) = lambda width(C_i)
};

inline std::pair<double, double> least_squares(const std::vector<double>& y) {
    double n = static_cast<double>(y.size());
    if (y.size() < 2) return {0, y.empty() ? 0 : y[0]};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double x = static_cast<double>(i);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

/// Orbit C_i = f^i(C_0), i = 0..n, with distance lower bounds from C_0,
/// size and width, and a least-squares line through the distance bounds.
inline AxisOrbit axis_experiment(const HalfTranslationSurface& s, const AffineAuto& f, const PLCurve& c0, int n) {
    AxisOrbit orb;
    orb.map = f.name;
    PLCurve cur = c0;
    std::vector<double> lows;
    bool simple = is_simple(c0).simple;
    for (int i = 0; i <= n; ++i) {
        if (i > 0) cur = apply(s, f, cur, orb.records.back().homology, simple);
        AxisRecord r;
        r.homology = homology_class(s, cur).coords;
        r.distance = fine_distance_bounds(s, c0, cur);
        r.size = plane_size_width(cur);
        lows.push_back(r.distance.lower);
        orb.records.push_back(std::move(r));
    }
    for (std::size_t i = 1; i < lows.size(); ++i)
        if (lows[i] < lows[i - 1]) orb.monotone = false;
    std::tie(orb.slope, orb.intercept) = least_squares(lows);
    if (f.lambda) {
        bool ok = true;
        for (std::size_t i = 1; i < orb.records.size(); ++i)
            if (orb.records[i].size.width != *f.lambda * orb.records[i - 1].size.width) ok = false;
        orb.width_scales_exactly = ok;
    }
    return orb;
}

}  // namespace flatlab
