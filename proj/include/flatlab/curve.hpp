#pragma once

// Closed piecewise-straight curves on a half-translation surface.

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flatlab/surface.hpp"
#include "flatlab/trace.hpp"

namespace flatlab {

class CurveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cyclic sequence of chart segments. `to_next[i]` maps the chart of segment i
/// to the chart of segment i+1 (cyclically) and carries segments[i].to onto
/// segments[i+1].from.
struct PLCurve {
    std::vector<ChartSegment> segments;
    std::vector<Isometry> to_next;

    std::size_t size() const { return segments.size(); }
    const ChartSegment& segment(std::size_t i) const { return segments[i % segments.size()]; }
};

/// Exact-as-possible flat length: rational bounds around the Euclidean length.
struct LengthBounds {
    Rational lo{0};
    Rational hi{0};
};

inline LengthBounds segment_length(const Vec2& a, const Vec2& b, unsigned bits = 40) {
    Vec2 d = b - a;
    if (d.x.sign() == 0 && d.y.is_rational()) {
        Rational v = abs(d.y).rational_part();
        return {v, v};
    }
    if (d.y.sign() == 0 && d.x.is_rational()) {
        Rational v = abs(d.x).rational_part();
        return {v, v};
    }
    auto sb = sqrt_bounds(norm2(d), bits);
    return {sb.lo, sb.hi};
}

inline LengthBounds curve_length(const PLCurve& c) {
    LengthBounds t;
    for (const auto& s : c.segments) {
        auto l = segment_length(s.from, s.to);
        t.lo += l.lo;
        t.hi += l.hi;
    }
    return t;
}

/// Exact L1 length (sum of |dx| + |dy|), used as a deterministic tie-breaker.
inline QuadNum l1_length(const PLCurve& c) {
    QuadNum t{0};
    for (const auto& s : c.segments) t += abs(s.to.x - s.from.x) + abs(s.to.y - s.from.y);
    return t;
}

/// Checks the chart-transition data against the surface gluings.
/// Returns an error message or an empty string.
inline std::string check_curve(const HalfTranslationSurface& s, const PLCurve& c) {
    if (c.segments.empty()) return "empty curve";
    if (c.to_next.size() != c.segments.size()) return "transition table size mismatch";
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& a = c.segments[i];
        const auto& b = c.segment(i + 1);
        if (a.from == a.to) return "degenerate segment " + std::to_string(i);
        const Isometry& m = c.to_next[i];
        if (!(m(a.to) == b.from)) return "segments " + std::to_string(i) + " and " + std::to_string(i + 1) + " do not connect";
        if (a.poly == b.poly && m == Isometry{}) continue;
        // must be an edge gluing (or a passage through a vertex)
        const auto& p = s.polygon(a.poly);
        bool ok = false;
        for (int k = 0; k < p.size() && !ok; ++k) {
            if (!detail::on_segment(a.to, p.vertex(k), p.vertex(k + 1))) continue;
            const auto& part = s.partner({a.poly, k});
            if (part.other.poly == b.poly && part.to_other == m) ok = true;
        }
        if (!ok) {
            for (int k = 0; k < p.size() && !ok; ++k)
                if (a.to == p.vertex(k)) ok = true;  // vertex passage; chart change checked by connection
        }
        if (!ok) return "transition after segment " + std::to_string(i) + " is not a gluing";
    }
    return {};
}

// ---- development

/// Lift of a path to the universal cover, drawn in the plane.
struct Development {
    std::vector<int> polygons;
    std::vector<Isometry> placements;  // chart -> plane
    std::vector<Vec2> points;          // developed breakpoints, size = segments + 1
    Isometry holonomy;                 // deck transformation: plane image of the next period's chart 0
};

/// Develop `periods` consecutive periods of a closed curve starting at segment `start`.
inline Development develop(const PLCurve& c, std::size_t start = 0, int periods = 1,
                           Isometry initial = Isometry{}) {
    Development d;
    Isometry place = initial;
    std::size_t n = c.size();
    for (std::size_t step = 0; step < n * static_cast<std::size_t>(periods); ++step) {
        std::size_t i = (start + step) % n;
        const auto& seg = c.segments[i];
        d.polygons.push_back(seg.poly);
        d.placements.push_back(place);
        if (step == 0) d.points.push_back(place(seg.from));
        d.points.push_back(place(seg.to));
        place = place.after(c.to_next[i].inverse());
        if (step + 1 == n) d.holonomy = place;
    }
    return d;
}

/// Holonomy of one period: chart of segment 0 -> chart of segment 0 after going around once.
inline Isometry period_holonomy(const PLCurve& c) { return develop(c).holonomy; }

// ---- construction

/// `closing` maps the chart of the last piece to the chart of the first.
inline PLCurve curve_from_trace(const TraceResult& t, const Isometry& closing) {
    PLCurve c;
    c.segments = t.segments;
    for (std::size_t i = 0; i + 1 < t.segments.size(); ++i)
        c.to_next.push_back(t.placements[i + 1].inverse().after(t.placements[i]));
    c.to_next.push_back(closing);
    return c;
}

/// Merge consecutive collinear pieces in the same chart (zero-angle bends).
inline PLCurve simplify_curve(PLCurve c) {
    std::size_t n = c.size();
    if (n < 2) return c;
    auto joinable = [&](const ChartSegment& a, const Isometry& t, const ChartSegment& b) {
        return a.poly == b.poly && t == Isometry{} && same_direction(a.to - a.from, b.to - b.from);
    };
    // start the scan right after a real joint so no run wraps around
    std::size_t s0 = n;
    for (std::size_t i = 0; i < n; ++i)
        if (!joinable(c.segments[(i + n - 1) % n], c.to_next[(i + n - 1) % n], c.segments[i])) {
            s0 = i;
            break;
        }
    if (s0 == n) {
        // a single straight run inside one chart: cannot close up, leave untouched
        return c;
    }
    PLCurve out;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t i = (s0 + k) % n;
        if (!out.segments.empty() && joinable(out.segments.back(), out.to_next.back(), c.segments[i])) {
            out.segments.back().to = c.segments[i].to;
            out.to_next.back() = c.to_next[i];
            continue;
        }
        out.segments.push_back(c.segments[i]);
        out.to_next.push_back(c.to_next[i]);
    }
    return out;
}

namespace detail {

// General chart-walking construction behind curve_from_polyline.
inline PLCurve traced_polyline(const HalfTranslationSurface& s, SurfacePoint start, const std::vector<Vec2>& steps) {
    if (steps.empty()) throw CurveError("polyline needs at least one step");
    PLCurve c;
    SurfacePoint at = start;
    Isometry place{};  // current chart -> start frame
    std::vector<Isometry> seg_place;
    for (const auto& v : steps) {
        Vec2 dir = place.inverse().linear(v);
        auto t = trace_straight(s, at, dir, QuadNum(1));
        if (t.stop != TraceStop::budget) throw CurveError("polyline runs into a cone point");
        for (std::size_t i = 0; i < t.segments.size(); ++i) {
            c.segments.push_back(t.segments[i]);
            seg_place.push_back(place.after(t.placements[i]));
        }
        place = place.after(t.end_placement);
        at = t.end;
    }
    auto closing = chart_transition(s, at, {c.segments.front().poly, c.segments.front().from});
    if (!closing) throw CurveError("polyline does not close up on the surface");
    for (std::size_t i = 0; i + 1 < c.segments.size(); ++i)
        c.to_next.push_back(seg_place[i + 1].inverse().after(seg_place[i]));
    c.to_next.push_back(*closing);
    return simplify_curve(c);
}

}  // namespace detail

// ---- tori

/// Lattice basis of a one-parallelogram translation torus: w1 = v1 - v0, w2 = v3 - v0.
struct TorusLattice {
    Vec2 w1;
    Vec2 w2;
    Vec2 origin;
};

inline std::optional<TorusLattice> torus_lattice(const HalfTranslationSurface& s) {
    if (s.genus() != 1 || !s.is_translation_surface() || s.polygon_count() != 1) return std::nullopt;
    const auto& p = s.polygon(0);
    if (p.size() != 4) return std::nullopt;
    Vec2 w1 = p.vertex(1) - p.vertex(0), w2 = p.vertex(3) - p.vertex(0);
    if (!(p.vertex(2) - p.vertex(1) == w2)) return std::nullopt;
    return TorusLattice{w1, w2, p.vertex(0)};
}

/// Coordinates (a, b) with v = a w1 + b w2.
inline std::pair<QuadNum, QuadNum> lattice_coords(const TorusLattice& L, const Vec2& v) {
    QuadNum det = cross(L.w1, L.w2);
    return {cross(v, L.w2) / det, cross(L.w1, v) / det};
}

/// The point of the fundamental parallelogram representing v (mod the lattice).
inline SurfacePoint torus_point(const TorusLattice& L, const Vec2& v) {
    auto [a, b] = lattice_coords(L, v - L.origin);
    QuadNum fa = a - QuadNum(Rational(a.floor())), fb = b - QuadNum(Rational(b.floor()));
    return {0, L.origin + fa * L.w1 + fb * L.w2};
}

namespace detail {

// The same construction on a one-parallelogram torus, walked in lattice
// coordinates where the edges are a = 0, 1 and b = 0, 1. Returns nothing when
// the path meets a corner or runs along an edge; those go through the general walk.
inline std::optional<PLCurve> lattice_polyline(const TorusLattice& L, const SurfacePoint& start, const std::vector<Vec2>& steps) {
    if (start.poly != 0) return std::nullopt;
    const QuadNum zero(0), one(1);
    auto [a, b] = lattice_coords(L, start.pos - L.origin);
    auto chart = [&](const QuadNum& x, const QuadNum& y) { return L.origin + x * L.w1 + y * L.w2; };
    auto on_edge = [&](const QuadNum& x) { return x.sign() == 0 || x == one; };
    PLCurve c;
    Isometry pending{};  // chart change before the next segment
    bool first = true;
    // shift applied when leaving through an edge, in chart coordinates
    auto leave = [&](QuadNum& x, int dir, const Vec2& w) {
        x = dir > 0 ? zero : one;
        pending = Isometry{1, dir > 0 ? -w : w}.after(pending);
    };
    auto emit = [&](const Vec2& from, const Vec2& to) {
        if (!first) c.to_next.push_back(pending);
        first = false;
        pending = Isometry{};
        c.segments.push_back({0, from, to});
    };
    for (const auto& step : steps) {
        auto [u, v] = lattice_coords(L, step);
        int su = u.sign(), sv = v.sign();
        if (su == 0 && sv == 0) return std::nullopt;
        // a start on the boundary facing out belongs to the next chart
        if (on_edge(a) && on_edge(b)) return std::nullopt;
        if (on_edge(a) && su == 0) return std::nullopt;
        if (on_edge(b) && sv == 0) return std::nullopt;
        if ((a == one && su > 0) || (a.sign() == 0 && su < 0)) leave(a, su, L.w1);
        if ((b == one && sv > 0) || (b.sign() == 0 && sv < 0)) leave(b, sv, L.w2);
        QuadNum used(0);
        while (true) {
            QuadNum rest = one - used;
            std::optional<QuadNum> ta, tb;
            if (su != 0) ta = ((su > 0 ? one : zero) - a) / u;
            if (sv != 0) tb = ((sv > 0 ? one : zero) - b) / v;
            int exit = 0;  // 1: through a, 2: through b
            QuadNum t = rest;
            if (ta && *ta < t) {
                t = *ta;
                exit = 1;
            }
            if (tb) {
                if (exit == 1 && *tb == t) return std::nullopt;  // corner
                if (*tb < t) {
                    t = *tb;
                    exit = 2;
                }
            }
            Vec2 from = chart(a, b);
            if (exit == 0) {
                QuadNum na = a + t * u, nb = b + t * v;
                if (on_edge(na) && on_edge(nb)) return std::nullopt;
                emit(from, chart(na, nb));
                a = na;
                b = nb;
                break;
            }
            QuadNum na = exit == 1 ? (su > 0 ? one : zero) : a + t * u;
            QuadNum nb = exit == 2 ? (sv > 0 ? one : zero) : b + t * v;
            emit(from, chart(na, nb));
            used += t;
            a = na;
            b = nb;
            if (exit == 1) leave(a, su, L.w1);
            else leave(b, sv, L.w2);
            if (used == one) break;
        }
    }
    if (c.segments.empty()) return std::nullopt;
    // close: the end and the start differ by a lattice vector
    Vec2 end = c.segments.back().to;
    Vec2 begin = c.segments.front().from;
    auto [da, db] = lattice_coords(L, begin - end);
    if (!(da == QuadNum(Rational(da.floor()))) || !(db == QuadNum(Rational(db.floor())))) return std::nullopt;
    c.to_next.push_back(Isometry{1, begin - end});
    return c;
}

}  // namespace detail

/// Closed curve following the developed displacements from `start` (not a vertex).
/// The displacements are in the start chart's frame and must close up on the surface.
inline PLCurve curve_from_polyline(const HalfTranslationSurface& s, SurfacePoint start, const std::vector<Vec2>& steps) {
    if (steps.empty()) throw CurveError("polyline needs at least one step");
    if (auto L = torus_lattice(s))
        if (auto c = detail::lattice_polyline(*L, start, steps)) return simplify_curve(std::move(*c));
    return detail::traced_polyline(s, start, steps);
}

/// Straight closed geodesic in lattice class (p, q), through `start` (chart 0).
inline PLCurve straight_loop(const HalfTranslationSurface& s, long p, long q, const Vec2& start) {
    auto L = torus_lattice(s);
    if (!L) throw CurveError("straight loops need a one-parallelogram translation torus");
    if (std::gcd(p, q) != 1) throw CurveError("straight loop class must be primitive");
    Vec2 h = QuadNum(p) * L->w1 + QuadNum(q) * L->w2;
    SurfacePoint st{0, start};
    auto t = trace_straight(s, st, h, QuadNum(1));
    if (t.stop != TraceStop::budget) throw CurveError("straight loop hits a cone point");
    if (!(t.end == st)) throw CurveError("straight loop does not close; start must be interior");
    return simplify_curve(curve_from_trace(t, Isometry{}));
}

/// Straight loop traversing a possibly non-primitive class (used to exhibit non-simple data).
inline PLCurve straight_multiloop(const HalfTranslationSurface& s, long p, long q, const Vec2& start) {
    auto L = torus_lattice(s);
    if (!L) throw CurveError("straight loops need a one-parallelogram translation torus");
    Vec2 h = QuadNum(p) * L->w1 + QuadNum(q) * L->w2;
    auto t = trace_straight(s, {0, start}, h, QuadNum(1));
    PLCurve c;
    c.segments = t.segments;
    for (std::size_t i = 0; i + 1 < t.segments.size(); ++i)
        c.to_next.push_back(t.placements[i + 1].inverse().after(t.placements[i]));
    if (!(t.end == SurfacePoint{0, start})) throw CurveError("multiloop does not close");
    c.to_next.push_back(Isometry{});
    return c;
}

// ---- homology

namespace detail {

// Unimodular column transform V with rowspace(R) * V = span(e_1..e_r).
struct ColumnReduction {
    std::vector<std::vector<long>> V;  // k x k
    int rank{0};
    bool torsion_free{true};
};

inline ColumnReduction reduce_relations(std::vector<std::vector<long>> R, int k) {
    ColumnReduction cr;
    cr.V.assign(static_cast<std::size_t>(k), std::vector<long>(static_cast<std::size_t>(k), 0));
    for (int i = 0; i < k; ++i) cr.V[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    auto col_op = [&](int dst, int src, long f) {  // col dst -= f * col src
        for (auto& row : R) row[static_cast<std::size_t>(dst)] -= f * row[static_cast<std::size_t>(src)];
        for (auto& row : cr.V) row[static_cast<std::size_t>(dst)] -= f * row[static_cast<std::size_t>(src)];
    };
    auto col_swap = [&](int a, int b) {
        for (auto& row : R) std::swap(row[static_cast<std::size_t>(a)], row[static_cast<std::size_t>(b)]);
        for (auto& row : cr.V) std::swap(row[static_cast<std::size_t>(a)], row[static_cast<std::size_t>(b)]);
    };
    int pivot_col = 0;
    // Smith-style elimination; row operations are free since only the row space matters
    std::size_t row_at = 0;
    while (pivot_col < k && row_at < R.size()) {
        // find the nonzero entry of minimal magnitude in rows >= row_at, cols >= pivot_col
        long best = 0;
        std::size_t br = 0;
        int bc = -1;
        for (std::size_t r = row_at; r < R.size(); ++r)
            for (int c = pivot_col; c < k; ++c) {
                long v = R[r][static_cast<std::size_t>(c)];
                if (v != 0 && (bc < 0 || std::labs(v) < std::labs(best))) {
                    best = v;
                    br = r;
                    bc = c;
                }
            }
        if (bc < 0) break;
        std::swap(R[row_at], R[br]);
        col_swap(pivot_col, bc);
        bool clean = true;
        long pv = R[row_at][static_cast<std::size_t>(pivot_col)];
        for (int c = pivot_col + 1; c < k; ++c) {
            long v = R[row_at][static_cast<std::size_t>(c)];
            if (v == 0) continue;
            col_op(c, pivot_col, v / pv);
            if (R[row_at][static_cast<std::size_t>(c)] != 0) clean = false;
        }
        for (std::size_t r = 0; r < R.size(); ++r) {
            if (r == row_at) continue;
            long v = R[r][static_cast<std::size_t>(pivot_col)];
            if (v == 0) continue;
            long f = v / pv;
            for (int c = 0; c < k; ++c) R[r][static_cast<std::size_t>(c)] -= f * R[row_at][static_cast<std::size_t>(c)];
            if (R[r][static_cast<std::size_t>(pivot_col)] != 0) clean = false;
        }
        if (!clean) continue;  // repeat with a smaller pivot
        if (std::labs(pv) != 1) cr.torsion_free = false;
        ++pivot_col;
        ++row_at;
    }
    cr.rank = pivot_col;
    return cr;
}

}  // namespace detail

/// First homology via the dual cell structure: cycles in the polygon adjacency
/// graph modulo vertex links.
class HomologyBasis {
public:
    explicit HomologyBasis(const HalfTranslationSurface& s) : surface_(&s) {
        int F = s.polygon_count();
        int E = static_cast<int>(s.gluings().size());
        std::vector<bool> in_tree(static_cast<std::size_t>(E), false);
        std::vector<bool> seen(static_cast<std::size_t>(F), false);
        std::vector<int> queue{0};
        seen[0] = true;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int p = queue[qi];
            for (int k = 0; k < s.polygon(p).size(); ++k) {
                const auto& part = s.partner({p, k});
                if (seen[static_cast<std::size_t>(part.other.poly)]) continue;
                seen[static_cast<std::size_t>(part.other.poly)] = true;
                in_tree[static_cast<std::size_t>(part.gluing)] = true;
                queue.push_back(part.other.poly);
            }
        }
        coord_.assign(static_cast<std::size_t>(E), -1);
        for (int g = 0; g < E; ++g)
            if (!in_tree[static_cast<std::size_t>(g)]) coord_[static_cast<std::size_t>(g)] = k_++;
        std::vector<std::vector<long>> rel;
        for (const auto& v : s.all_vertices()) {
            std::vector<long> row(static_cast<std::size_t>(k_), 0);
            for (const auto& c : v.orbit) add_crossing(row, {c.poly, s.wrap(c.poly, c.vertex - 1)});
            rel.push_back(row);
        }
        red_ = detail::reduce_relations(rel, k_);
        if (!red_.torsion_free) throw std::logic_error("homology has torsion; surface is not orientable");
    }

    int rank() const { return k_ - red_.rank; }

    /// Signed non-tree crossing counts of a closed curve.
    std::vector<long> crossing_vector(const PLCurve& c) const {
        std::vector<long> x(static_cast<std::size_t>(k_), 0);
        const auto& s = *surface_;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto& a = c.segments[i];
            const auto& b = c.segment(i + 1);
            const Isometry& m = c.to_next[i];
            if (a.poly == b.poly && m == Isometry{}) continue;
            const auto& p = s.polygon(a.poly);
            bool found = false;
            for (int k = 0; k < p.size() && !found; ++k) {
                if (a.to == p.vertex(k) || a.to == p.vertex(k + 1)) continue;
                if (!detail::on_segment(a.to, p.vertex(k), p.vertex(k + 1))) continue;
                const auto& part = s.partner({a.poly, k});
                if (part.other.poly == b.poly && part.to_other == m) {
                    add_crossing(x, {a.poly, k});
                    found = true;
                }
            }
            if (found) continue;
            // vertex passage: walk ccw around the vertex until the target chart is reached
            for (int k = 0; k < p.size() && !found; ++k) {
                if (!(a.to == p.vertex(k))) continue;
                CornerRef cur{a.poly, k};
                Isometry acc{};
                std::vector<EdgeRef> crossed;
                for (int guard = 0; guard < 4096; ++guard) {
                    if (cur.poly == b.poly && acc == m) {
                        found = true;
                        break;
                    }
                    EdgeRef e{cur.poly, s.wrap(cur.poly, cur.vertex - 1)};
                    acc = s.partner(e).to_other.after(acc);
                    crossed.push_back(e);
                    cur = s.next_ccw(cur);
                    if (cur == CornerRef{a.poly, k} && acc == Isometry{}) break;
                }
                if (found)
                    for (const auto& e : crossed) add_crossing(x, e);
            }
            if (!found) throw CurveError("cannot resolve chart transition for homology");
        }
        return x;
    }

    /// Class as an integer vector of length rank().
    std::vector<long> homology_class(const PLCurve& c) const {
        auto x = crossing_vector(c);
        std::vector<long> y(static_cast<std::size_t>(k_), 0);
        for (int j = 0; j < k_; ++j)
            for (int i = 0; i < k_; ++i) y[static_cast<std::size_t>(j)] += x[static_cast<std::size_t>(i)] * red_.V[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return {y.begin() + red_.rank, y.end()};
    }

private:
    void add_crossing(std::vector<long>& x, EdgeRef exit) const {
        const auto& part = surface_->partner(exit);
        int c = coord_[static_cast<std::size_t>(part.gluing)];
        if (c < 0) return;
        x[static_cast<std::size_t>(c)] += part.first ? 1 : -1;
    }

    const HalfTranslationSurface* surface_;
    std::vector<int> coord_;
    int k_{0};
    detail::ColumnReduction red_;
};

struct HomologyResult {
    std::vector<long> coords;
    bool nonseparating{false};
    bool lattice_coords{false};  // coords are (p, q) in the torus lattice basis
};

/// Homology class. On a one-parallelogram torus the coordinates are lattice
/// coordinates of the developed period; otherwise the dual-cell basis is used.
inline HomologyResult homology_class(const HalfTranslationSurface& s, const PLCurve& c) {
    HomologyResult r;
    if (auto L = torus_lattice(s)) {
        Isometry h = period_holonomy(c);
        if (h.sign != 1) throw CurveError("torus curve with non-translation holonomy");
        // holonomy maps the chart after one period back into the start frame: point + period
        auto [a, b] = lattice_coords(*L, h.shift);
        if (!a.is_rational() || !b.is_rational() || a.rational_part().get_den() != 1 || b.rational_part().get_den() != 1)
            throw CurveError("curve period is not a lattice vector");
        r.coords = {a.rational_part().get_num().get_si(), b.rational_part().get_num().get_si()};
        r.lattice_coords = true;
    } else {
        r.coords = HomologyBasis(s).homology_class(c);
    }
    r.nonseparating = std::any_of(r.coords.begin(), r.coords.end(), [](long v) { return v != 0; });
    return r;
}

// ---- text serialization

inline std::string render_curve(const PLCurve& c) {
    std::ostringstream os;
    os << "curve " << c.size() << "\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& s = c.segments[i];
        const auto& m = c.to_next[i];
        os << "  seg " << s.poly << " " << render(s.from.x) << " " << render(s.from.y) << " " << render(s.to.x) << " "
           << render(s.to.y) << " next " << (m.sign > 0 ? "+" : "-") << " " << render(m.shift.x) << " "
           << render(m.shift.y) << "\n";
    }
    os << "end\n";
    return os.str();
}

inline PLCurve parse_curve(const std::string& text, std::int64_t field = 0) {
    std::istringstream in(text);
    std::string tok;
    std::size_t n = 0;
    if (!(in >> tok) || tok != "curve" || !(in >> n)) throw CurveError("expected 'curve <n>'");
    PLCurve c;
    for (std::size_t i = 0; i < n; ++i) {
        std::string kw, fx, fy, tx, ty, nx, sg, sx, sy;
        int poly = 0;
        if (!(in >> kw >> poly >> fx >> fy >> tx >> ty >> nx >> sg >> sx >> sy) || kw != "seg" || nx != "next")
            throw CurveError("malformed segment record " + std::to_string(i));
        c.segments.push_back({poly, {parse_quadnum(fx, field), parse_quadnum(fy, field)},
                              {parse_quadnum(tx, field), parse_quadnum(ty, field)}});
        c.to_next.push_back({sg == "-" ? -1 : 1, {parse_quadnum(sx, field), parse_quadnum(sy, field)}});
    }
    if (!(in >> tok) || tok != "end") throw CurveError("missing 'end' in curve block");
    return c;
}

}  // namespace flatlab
