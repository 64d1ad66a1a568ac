#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flatlab/intersect.hpp"

namespace flatlab {

struct Bicorn {
    std::size_t a_from{0};  // crossing indices, in order along alpha
    std::size_t a_to{0};
    bool b_forward{true};  // beta arc runs forward along beta from a_to back to a_from
    int interior{0};       // crossings with beta inside the alpha arc
    PLCurve curve;
    std::vector<long> homology;
    bool nonseparating{false};
};

struct BicornSet {
    std::vector<Bicorn> bicorns;
    std::vector<Crossing> crossings;
    PLCurve beta;  // beta as used (after any perturbation)
    std::optional<Vec2> perturbation;
};

namespace detail {

class ArcBuilder {
public:
    void piece(int poly, const Vec2& a, const Vec2& b) {
        if (a == b) return;
        if (any_) c_.to_next.push_back(pend_);
        else prefix_ = pend_;
        c_.segments.push_back({poly, a, b});
        pend_ = Isometry{};
        any_ = true;
    }
    void move(const Isometry& t) { pend_ = t.after(pend_); }
    PLCurve close() {
        if (!any_) throw CurveError("empty arc");
        c_.to_next.push_back(prefix_.after(pend_));
        return simplify_curve(std::move(c_));
    }

private:
    PLCurve c_;
    Isometry pend_{};
    Isometry prefix_{};
    bool any_{false};
};

struct ArcEnd {
    std::size_t seg;
    QuadNum t;
    Vec2 point;
};

inline void forward_arc(ArcBuilder& b, const PLCurve& c, const ArcEnd& from, const ArcEnd& to) {
    std::size_t n = c.size();
    const auto& s1 = c.segments[from.seg];
    if (from.seg == to.seg && from.t < to.t) {
        b.piece(s1.poly, from.point, to.point);
        return;
    }
    b.piece(s1.poly, from.point, s1.to);
    b.move(c.to_next[from.seg]);
    for (std::size_t k = (from.seg + 1) % n; k != to.seg; k = (k + 1) % n) {
        b.piece(c.segments[k].poly, c.segments[k].from, c.segments[k].to);
        b.move(c.to_next[k]);
    }
    const auto& s2 = c.segments[to.seg];
    b.piece(s2.poly, s2.from, to.point);
}

inline void backward_arc(ArcBuilder& b, const PLCurve& c, const ArcEnd& from, const ArcEnd& to) {
    std::size_t n = c.size();
    auto prev = [n](std::size_t k) { return (k + n - 1) % n; };
    const auto& s1 = c.segments[from.seg];
    if (from.seg == to.seg && to.t < from.t) {
        b.piece(s1.poly, from.point, to.point);
        return;
    }
    b.piece(s1.poly, from.point, s1.from);
    b.move(c.to_next[prev(from.seg)].inverse());
    for (std::size_t k = prev(from.seg); k != to.seg; k = prev(k)) {
        b.piece(c.segments[k].poly, c.segments[k].to, c.segments[k].from);
        b.move(c.to_next[prev(k)].inverse());
    }
    const auto& s2 = c.segments[to.seg];
    b.piece(s2.poly, s2.to, to.point);
}

// 0 < (x - a) mod n < (b - a) mod n
inline bool strictly_between(std::size_t a, std::size_t b, std::size_t x, std::size_t n) {
    std::size_t dx = (x + n - a) % n, db = (b + n - a) % n;
    return dx > 0 && dx < db;
}

struct CornerPair {
    std::size_t i, j;
    bool fwd;
    int interior;       // crossings inside the alpha arc
    int beta_interior;  // crossings inside the beta arc
};

// Arc pairs whose interiors share no crossing, i.e. whose union is embedded.
inline std::vector<CornerPair> simple_corner_pairs(const std::vector<Crossing>& xs) {
    std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (xs[x].seg_b != xs[y].seg_b) return xs[x].seg_b < xs[y].seg_b;
        return xs[x].t_b < xs[y].t_b;
    });
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
    std::vector<CornerPair> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            for (bool fwd : {true, false}) {
                // beta interior: ranks strictly between rank[j] -> rank[i] (forward) or rank[i] -> rank[j]
                std::size_t ba = fwd ? rank[j] : rank[i], bb = fwd ? rank[i] : rank[j];
                bool ok = true;
                for (std::size_t k = (i + 1) % n; k != j; k = (k + 1) % n)
                    if (strictly_between(ba, bb, rank[k], n)) {
                        ok = false;
                        break;
                    }
                if (ok)
                    out.push_back({i, j, fwd, static_cast<int>((j + n - i) % n) - 1, static_cast<int>((bb + n - ba) % n) - 1});
            }
        }
    return out;
}

inline PLCurve bicorn_curve(const PLCurve& a, const PLCurve& b, const std::vector<Crossing>& xs, std::size_t i,
                            std::size_t j, bool fwd) {
    ArcBuilder bld;
    forward_arc(bld, a, {xs[i].seg_a, xs[i].t_a, xs[i].point}, {xs[j].seg_a, xs[j].t_a, xs[j].point});
    ArcEnd bj{xs[j].seg_b, xs[j].t_b, xs[j].point}, bi{xs[i].seg_b, xs[i].t_b, xs[i].point};
    if (fwd) forward_arc(bld, b, bj, bi);
    else backward_arc(bld, b, bj, bi);
    return bld.close();
}

// Homology classes, with one basis per surface.
class ClassOracle {
public:
    explicit ClassOracle(const HalfTranslationSurface& s) : s_(&s) {
        if (!torus_lattice(s)) basis_.emplace(s);
    }
    std::vector<long> operator()(const PLCurve& c) const {
        if (basis_) return basis_->homology_class(c);
        return homology_class(*s_, c).coords;
    }

private:
    const HalfTranslationSurface* s_;
    std::optional<HomologyBasis> basis_;
};

inline bool nonzero(const std::vector<long>& v) {
    return std::any_of(v.begin(), v.end(), [](long x) { return x != 0; });
}

}  // namespace detail

/// Bicorns of alpha and beta: one arc of each between two shared crossings,
/// kept when the union is simple and essential. Only nonseparating curves
/// and curves with nontrivial holonomy are certified essential.
inline BicornSet bicorns(const HalfTranslationSurface& s, const PLCurve& alpha, const PLCurve& beta,
                         bool nonseparating_only = false, Rational first_scale = Rational(1, 997)) {
    BicornSet out;
    if (same_point_set(alpha, beta)) {
        out.beta = beta;
        return out;
    }
    auto res = intersections(s, alpha, beta, first_scale);
    out.crossings = res.crossings;
    out.beta = res.beta;
    out.perturbation = res.perturbation;
    detail::ClassOracle cls(s);
    for (const auto& cp : detail::simple_corner_pairs(out.crossings)) {
        Bicorn b;
        b.a_from = cp.i;
        b.a_to = cp.j;
        b.b_forward = cp.fwd;
        b.interior = cp.interior;
        b.curve = detail::bicorn_curve(alpha, out.beta, out.crossings, cp.i, cp.j, cp.fwd);
        b.homology = cls(b.curve);
        b.nonseparating = detail::nonzero(b.homology);
        if (!b.nonseparating) {
            if (nonseparating_only) continue;
            if (period_holonomy(b.curve) == Isometry{}) continue;
        }
        out.bicorns.push_back(std::move(b));
    }
    return out;
}

class BicornStuck : public std::runtime_error {
public:
    BicornStuck(const std::string& what, std::string config) : std::runtime_error(what), configuration(std::move(config)) {}
    std::string configuration;
};

struct BicornPath {
    std::vector<PLCurve> curves;  // alpha, ..., beta
    std::vector<int> crossings;   // crossings with beta of every curve but the last
    PLCurve beta;                 // beta as used for the surgery
    std::optional<Vec2> perturbation;
};

/// Small translation of a bicorn off beta keeping only its alpha-arc crossings
/// (plus at most one near a corner). Translation surfaces only.
inline std::optional<std::pair<PLCurve, int>> push_off(const HalfTranslationSurface& s, const PLCurve& c,
                                                       const PLCurve& beta, int interior) {
    const Vec2 dirs[] = {{QuadNum(1), QuadNum(Rational(1, 3))}, {QuadNum(Rational(2, 7)), QuadNum(1)}};
    Rational scale(1, 4093);
    for (int k = 0; k < 40; ++k, scale /= 2) {
        std::optional<std::pair<PLCurve, int>> best;
        for (const auto& d : dirs) {
            for (int sg : {1, -1}) {
                Vec2 v = QuadNum(scale * sg) * d;
                PLCurve m;
                try {
                    m = translate_curve(s, c, v);
                } catch (const std::exception&) {
                    continue;
                }
                auto raw = raw_intersections(m, beta);
                if (raw.degeneracy) continue;
                int n = static_cast<int>(raw.crossings.size());
                if (n < interior || n > interior + 1) continue;
                if (!best || n < best->second) best = std::make_pair(std::move(m), n);
            }
            if (best) return best;
        }
    }
    return std::nullopt;
}

/// Greedy bicorn surgery path from alpha to beta. Each step replaces an arc of
/// the current curve by an arc of beta whose interior misses the current curve,
/// choosing the nonseparating result with the fewest remaining crossings, then
/// the shortest. On the torus curves meeting once are adjacent.
inline BicornPath bicorn_path(const HalfTranslationSurface& s, const PLCurve& alpha, const PLCurve& beta) {
    BicornPath path;
    path.beta = beta;
    if (same_point_set(alpha, beta)) {
        path.curves = {alpha};
        return path;
    }
    bool torus = torus_lattice(s).has_value();
    auto first = intersections(s, alpha, beta);
    path.beta = first.beta;
    path.perturbation = first.perturbation;
    detail::ClassOracle cls(s);
    PLCurve cur = alpha;
    std::vector<Crossing> xs = first.crossings;
    while (true) {
        int n = static_cast<int>(xs.size());
        path.curves.push_back(cur);
        path.crossings.push_back(n);
        if (n == 0 || (torus && n == 1)) break;
        // surgery arcs: pieces of beta between consecutive crossings with the current curve
        auto cands = detail::simple_corner_pairs(xs);
        std::erase_if(cands, [](const detail::CornerPair& cp) { return cp.beta_interior != 0; });
        std::stable_sort(cands.begin(), cands.end(),
                         [](const detail::CornerPair& a, const detail::CornerPair& b) { return a.interior < b.interior; });
        std::optional<PLCurve> best;
        int best_n = n;
        Rational best_len;
        for (const auto& cp : cands) {
            if (best && cp.interior > best_n) break;
            auto b = detail::bicorn_curve(cur, path.beta, xs, cp.i, cp.j, cp.fwd);
            if (!detail::nonzero(cls(b))) continue;
            auto pushed = push_off(s, b, path.beta, cp.interior);
            if (!pushed || pushed->second >= n) continue;
            auto lb = curve_length(b);
            Rational len = (lb.lo + lb.hi) / 2;
            if (!best || pushed->second < best_n || (pushed->second == best_n && len < best_len)) {
                best = std::move(pushed->first);
                best_n = pushed->second;
                best_len = len;
            }
        }
        if (!best) {
            throw BicornStuck("no nonseparating bicorn reduces crossings",
                              "current:\n" + render_curve(cur) + "beta:\n" + render_curve(path.beta));
        }
        cur = std::move(*best);
        xs = raw_intersections(cur, path.beta).crossings;
    }
    path.curves.push_back(beta);
    return path;
}

}  // namespace flatlab
