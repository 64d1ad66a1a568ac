#pragma once

// Vertical flow, first-return maps, leaf closing, return constants.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "flatlab/intersect.hpp"

namespace flatlab {

class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cap exhaustion: a flow line did not reach its target within the length cap.
class CapExhausted : public FlowError {
public:
    CapExhausted(const std::string& what, QuadNum cap) : FlowError(what), cap_(std::move(cap)) {}
    const QuadNum& cap() const { return cap_; }

private:
    QuadNum cap_;
};

using Trajectory = TraceResult;

inline const Vec2 kUp{QuadNum(0), QuadNum(1)};

/// Unit-speed vertical flow from `p` for at most `budget`.
inline Trajectory flow_vertical(const HalfTranslationSurface& s, const SurfacePoint& p, const QuadNum& budget,
                                const std::vector<ChartSegment>* stop_at = nullptr) {
    if (budget.sign() <= 0) throw FlowError("flow budget must be positive");
    return trace_straight(s, p, kUp, budget, stop_at);
}

// ---- transversals

/// Horizontal transversal made of chart pieces laid end to end; `closed` for a circle.
struct Transversal {
    std::vector<ChartSegment> pieces;
    std::vector<QuadNum> offsets;  // arclength at each piece start
    QuadNum length{0};
    bool closed{false};

    /// Arclength coordinate of a point on piece i.
    QuadNum coordinate(int piece, const Vec2& pos) const {
        const auto& p = pieces[static_cast<std::size_t>(piece)];
        return offsets[static_cast<std::size_t>(piece)] + abs(pos.x - p.from.x);
    }

    /// Surface point at arclength c (c in [0, length)).
    SurfacePoint point_at(const QuadNum& c) const {
        for (std::size_t i = pieces.size(); i-- > 0;) {
            if (offsets[i] <= c) {
                const auto& p = pieces[i];
                QuadNum dir = (p.to.x - p.from.x).sign() > 0 ? QuadNum(1) : QuadNum(-1);
                return {p.poly, {p.from.x + dir * (c - offsets[i]), p.from.y}};
            }
        }
        throw FlowError("coordinate outside the transversal");
    }

    /// Unit horizontal direction of increasing coordinate on piece i.
    Vec2 forward(int piece) const {
        const auto& p = pieces[static_cast<std::size_t>(piece)];
        return {(p.to.x - p.from.x).sign() > 0 ? QuadNum(1) : QuadNum(-1), QuadNum(0)};
    }

    /// Signed shortest displacement from coordinate a to b (wrapping on circles).
    QuadNum displacement(const QuadNum& a, const QuadNum& b) const {
        QuadNum d = b - a;
        if (!closed) return d;
        QuadNum half = length / QuadNum(2);
        while (d > half) d -= length;
        while (d <= -half) d += length;
        return d;
    }

    QuadNum wrap(QuadNum c) const {
        if (!closed) return c;
        while (c.sign() < 0) c += length;
        while (c >= length) c -= length;
        return c;
    }
};

inline Transversal make_transversal(const HalfTranslationSurface& s, std::vector<ChartSegment> pieces, bool closed) {
    Transversal t;
    if (pieces.empty()) throw FlowError("empty transversal");
    for (const auto& p : pieces) {
        if (!(p.from.y == p.to.y) || p.from == p.to) throw FlowError("transversal pieces must be horizontal");
        if (p.poly < 0 || p.poly >= s.polygon_count()) throw FlowError("transversal piece outside the surface");
        t.offsets.push_back(t.length);
        t.length += abs(p.to.x - p.from.x);
    }
    t.pieces = std::move(pieces);
    t.closed = closed;
    return t;
}

/// Horizontal transversal traced from `start` for `length`; closed if it returns to start.
inline Transversal horizontal_transversal(const HalfTranslationSurface& s, const SurfacePoint& start,
                                          const QuadNum& length) {
    auto tr = trace_straight(s, start, {QuadNum(1), QuadNum(0)}, length);
    if (tr.stop != TraceStop::budget) throw FlowError("horizontal transversal runs into a cone point");
    bool closed = chart_transition(s, tr.end, {tr.segments.front().poly, tr.segments.front().from}).has_value();
    return make_transversal(s, tr.segments, closed);
}

struct TransversalHit {
    QuadNum coordinate;
    QuadNum length;    // flow length to the hit
    bool flipped{false};  // arrives moving downward in the piece's chart
    Trajectory trajectory;
};

/// Flow up from a point of the transversal until the next hit.
inline TransversalHit next_hit(const HalfTranslationSurface& s, const Transversal& t, const SurfacePoint& from,
                               const QuadNum& cap, const Vec2& dir = kUp) {
    if (cap.sign() <= 0) throw CapExhausted("length cap used up", cap);
    auto tr = trace_straight(s, from, dir, cap, &t.pieces);
    if (tr.stop == TraceStop::budget) throw CapExhausted("no return to the transversal within the cap", cap);
    if (tr.stop == TraceStop::cone_point) throw FlowError("flow line runs into a cone point");
    TransversalHit h;
    h.coordinate = t.wrap(t.coordinate(tr.transversal_piece, tr.end.pos));
    if (t.closed && h.coordinate == t.length) h.coordinate = QuadNum(0);
    h.length = tr.param;
    h.flipped = tr.end_dir.y.sign() < 0;
    h.trajectory = std::move(tr);
    return h;
}

inline TransversalHit next_hit(const HalfTranslationSurface& s, const Transversal& t, const QuadNum& c,
                               const QuadNum& cap) {
    return next_hit(s, t, t.point_at(c), cap);
}

// ---- interval exchanges

enum class BoundaryReason { domain_end, coordinate_cut, cone_point, endpoint_preimage };

struct IETBoundary {
    QuadNum at;
    BoundaryReason reason;
};

struct IETInterval {
    QuadNum lo, hi;
    QuadNum translation;    // image = x + translation (or reflected when flipped)
    QuadNum return_length;
    bool flipped{false};
};

struct IntervalExchange {
    Transversal transversal;
    std::vector<IETInterval> intervals;
    std::vector<int> permutation;  // rank of each interval's image from the left
    std::vector<IETBoundary> boundaries;

    std::size_t locate(const QuadNum& x) const {
        std::size_t lo = 0, hi = intervals.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (intervals[mid].lo <= x) lo = mid;
            else hi = mid;
        }
        return lo;
    }

    QuadNum apply(const QuadNum& x) const {
        const auto& I = intervals[locate(x)];
        if (!I.flipped) return x + I.translation;
        return I.translation - x;
    }

    QuadNum total_length() const {
        QuadNum t{0};
        for (const auto& I : intervals) t += I.hi - I.lo;
        return t;
    }
};

/// First-return map of the vertical flow to a horizontal transversal.
inline IntervalExchange first_return_map(const HalfTranslationSurface& s, const Transversal& t, const QuadNum& cap) {
    IntervalExchange iet;
    iet.transversal = t;
    std::vector<IETBoundary> cuts{{QuadNum(0), t.closed ? BoundaryReason::coordinate_cut : BoundaryReason::domain_end}};
    bool orientable = s.is_translation_surface();
    auto preimage = [&](const SurfacePoint& p, std::optional<CornerRef> corner, const Vec2& down, BoundaryReason why) {
        auto tr = trace_straight(s, p, down, cap, &t.pieces, 1 << 22, corner);
        if (tr.stop == TraceStop::budget) throw CapExhausted("backward flow does not reach the transversal", cap);
        if (tr.stop == TraceStop::cone_point) return;  // a saddle connection; no new boundary
        QuadNum c = t.wrap(t.coordinate(tr.transversal_piece, tr.end.pos));
        if (t.closed && c == t.length) c = QuadNum(0);
        cuts.push_back({c, why});
    };
    // points flowing into transversal endpoints (or the coordinate cut) and into cone points
    std::vector<std::pair<SurfacePoint, Vec2>> ends;
    const auto& first = t.pieces.front();
    ends.push_back({{first.poly, first.from}, Vec2{QuadNum(0), QuadNum(-1)}});
    if (!t.closed) {
        const auto& last = t.pieces.back();
        ends.push_back({{last.poly, last.to}, Vec2{QuadNum(0), QuadNum(-1)}});
    }
    for (const auto& [p, d] : ends) {
        const auto& poly = s.polygon(p.poly);
        std::optional<CornerRef> corner;
        for (int k = 0; k < poly.size(); ++k)
            if (poly.vertex(k) == p.pos) corner = CornerRef{p.poly, k};
        if (corner && s.all_vertices()[static_cast<std::size_t>(s.vertex_of(*corner))].singular()) continue;
        preimage(p, std::nullopt, d, t.closed ? BoundaryReason::coordinate_cut : BoundaryReason::endpoint_preimage);
    }
    for (const auto& v : s.cone_points()) {
        for (const auto& c : v.orbit) {
            auto [out, in] = s.corner_sector(c);
            for (int sg : {-1, 1}) {
                if (sg > 0 && orientable) continue;
                Vec2 d{QuadNum(0), QuadNum(sg)};
                if (!in_sweep(out, in, d)) continue;
                preimage({c.poly, s.polygon(c.poly).vertex(c.vertex)}, c, d, BoundaryReason::cone_point);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end(), [](const IETBoundary& a, const IETBoundary& b) { return a.at < b.at; });
    std::vector<IETBoundary> uniq;
    for (auto& c : cuts) {
        if (c.at >= t.length) continue;
        if (!uniq.empty() && uniq.back().at == c.at) {
            if (c.reason == BoundaryReason::cone_point) uniq.back().reason = c.reason;
            continue;
        }
        uniq.push_back(c);
    }
    iet.boundaries = uniq;
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        IETInterval I;
        I.lo = uniq[i].at;
        I.hi = i + 1 < uniq.size() ? uniq[i + 1].at : t.length;
        QuadNum mid = (I.lo + I.hi) / QuadNum(2);
        auto h = next_hit(s, t, mid, cap);
        I.return_length = h.length;
        I.flipped = h.flipped;
        I.translation = h.flipped ? h.coordinate + mid : h.coordinate - mid;
        iet.intervals.push_back(I);
    }
    // image order
    std::vector<std::pair<QuadNum, int>> images;
    for (std::size_t i = 0; i < iet.intervals.size(); ++i) {
        const auto& I = iet.intervals[i];
        QuadNum a = I.flipped ? I.translation - I.hi : I.lo + I.translation;
        images.push_back({a, static_cast<int>(i)});
    }
    std::sort(images.begin(), images.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    iet.permutation.assign(iet.intervals.size(), 0);
    for (std::size_t r = 0; r < images.size(); ++r) iet.permutation[static_cast<std::size_t>(images[r].second)] = static_cast<int>(r);
    return iet;
}

// ---- leaf closing

struct ClosedLeaf {
    PLCurve curve;
    int returns{0};           // transversal hits before closing
    QuadNum leaf_length{0};
    QuadNum closing_length{0};  // signed displacement along the transversal
    QuadNum epsilon_used{0};
    int halvings{0};
    std::vector<QuadNum> hits;  // coordinates of successive hits
};

namespace detail {

// Assemble leaf pieces plus the closing arc into a closed curve.
inline PLCurve assemble_closed(const HalfTranslationSurface& s, const std::vector<Trajectory>& legs) {
    PLCurve c;
    std::vector<Isometry> place;
    Isometry frame{};
    for (const auto& tr : legs) {
        for (std::size_t i = 0; i < tr.segments.size(); ++i) {
            c.segments.push_back(tr.segments[i]);
            place.push_back(frame.after(tr.placements[i]));
        }
        frame = frame.after(tr.end_placement);
    }
    for (std::size_t i = 0; i + 1 < c.segments.size(); ++i) c.to_next.push_back(place[i + 1].inverse().after(place[i]));
    const auto& last = legs.back();
    auto closing = chart_transition(s, last.end, {c.segments.front().poly, c.segments.front().from});
    if (!closing) throw FlowError("closed leaf does not return to its start");
    c.to_next.push_back(*closing);
    return simplify_curve(c);
}

// True if some earlier hit lies strictly inside the closing arc from `from` by `disp`.
inline bool closing_arc_blocked(const Transversal& t, const std::vector<QuadNum>& hits, const QuadNum& from,
                                const QuadNum& disp) {
    if (disp.sign() == 0) return false;
    for (std::size_t i = 0; i + 1 < hits.size(); ++i) {
        QuadNum d = t.closed ? t.wrap(hits[i] - from) : hits[i] - from;
        if (disp.sign() > 0) {
            if (d.sign() > 0 && d < disp) return true;
        } else {
            QuadNum back = t.closed ? (d.sign() == 0 ? QuadNum(0) : t.length - d) : -d;
            if (back.sign() > 0 && back < -disp) return true;
        }
    }
    return false;
}

}  // namespace detail

/// Close the vertical leaf from transversal coordinate c0 after its first return
/// within distance < eps, using a horizontal arc along the transversal. If the
/// arc would cross the leaf, eps is halved and the flow continued.
inline ClosedLeaf close_to_curve(const HalfTranslationSurface& s, const Transversal& t, const QuadNum& c0,
                                 QuadNum eps, const QuadNum& cap, int max_returns = 1 << 20) {
    if (eps.sign() <= 0) throw FlowError("closing window must be positive");
    ClosedLeaf out;
    std::vector<Trajectory> legs;
    QuadNum c = c0;
    SurfacePoint at = t.point_at(c0);
    QuadNum used{0};
    for (int n = 1; n <= max_returns; ++n) {
        auto h = next_hit(s, t, at, cap - used);
        at = h.trajectory.end;
        used += h.length;
        out.hits.push_back(h.coordinate);
        legs.push_back(h.trajectory);
        c = h.coordinate;
        QuadNum disp = t.displacement(c, c0);
        if (!(abs(disp) < eps)) continue;
        if (detail::closing_arc_blocked(t, out.hits, c, disp)) {
            eps /= QuadNum(2);
            ++out.halvings;
            continue;
        }
        if (disp.sign() != 0) {
            const auto& end = legs.back();
            Vec2 dir = t.forward(end.transversal_piece);
            if (disp.sign() < 0) dir = -dir;
            auto arc = trace_straight(s, end.end, dir, abs(disp));
            if (arc.stop != TraceStop::budget) throw FlowError("closing arc runs into a cone point");
            // the arc's frame continues the leaf's end chart
            legs.push_back(arc);
        }
        out.curve = detail::assemble_closed(s, legs);
        out.returns = n;
        out.leaf_length = used;
        out.closing_length = disp;
        out.epsilon_used = eps;
        auto simple = is_simple(out.curve);
        if (!simple.simple) throw FlowError("closed leaf is not simple");
        auto hc = homology_class(s, out.curve);
        if (!hc.nonseparating) throw FlowError("closed leaf is null-homologous");
        return out;
    }
    throw CapExhausted("no return into the closing window", cap);
}

/// Close the leaf after exactly `n` returns with the shorter arc back to c0.
inline ClosedLeaf close_at_return(const HalfTranslationSurface& s, const Transversal& t, const QuadNum& c0, int n,
                                  const QuadNum& cap) {
    ClosedLeaf out;
    std::vector<Trajectory> legs;
    QuadNum c = c0;
    SurfacePoint at = t.point_at(c0);
    QuadNum used{0};
    for (int i = 0; i < n; ++i) {
        auto h = next_hit(s, t, at, cap - used);
        at = h.trajectory.end;
        used += h.length;
        out.hits.push_back(h.coordinate);
        legs.push_back(std::move(h.trajectory));
        c = h.coordinate;
    }
    QuadNum disp = t.displacement(c, c0);
    if (detail::closing_arc_blocked(t, out.hits, c, disp)) throw FlowError("closing arc crosses the leaf");
    if (disp.sign() != 0) {
        Vec2 dir = t.forward(legs.back().transversal_piece);
        if (disp.sign() < 0) dir = -dir;
        legs.push_back(trace_straight(s, legs.back().end, dir, abs(disp)));
    }
    out.curve = detail::assemble_closed(s, legs);
    out.returns = n;
    out.leaf_length = used;
    out.closing_length = disp;
    return out;
}

// ---- return constants

/// Uniform rational sample of a point of the surface (torus: lattice coordinates;
/// otherwise a fan triangle of a random polygon).
template <class Rng>
SurfacePoint random_point(const HalfTranslationSurface& s, Rng& rng, long denominator = 1 << 20) {
    std::uniform_int_distribution<long> u(1, denominator - 1);
    if (auto L = torus_lattice(s)) {
        Rational a(u(rng), denominator), b(u(rng), denominator);
        return {0, L->origin + QuadNum(a) * L->w1 + QuadNum(b) * L->w2};
    }
    // polygon chosen proportional to area via rejection on approximate areas
    std::vector<double> area;
    for (const auto& p : s.polygons()) area.push_back(p.twice_area().to_double());
    std::discrete_distribution<int> pick(area.begin(), area.end());
    int pi = pick(rng);
    const auto& p = s.polygon(pi);
    std::vector<double> tri;
    for (int k = 1; k + 1 < p.size(); ++k) tri.push_back(cross(p.vertex(k) - p.vertex(0), p.vertex(k + 1) - p.vertex(0)).to_double());
    std::discrete_distribution<int> pick_t(tri.begin(), tri.end());
    int k = 1 + pick_t(rng);
    Rational a(u(rng), denominator), b(u(rng), denominator);
    if (a + b >= 1) {
        a = 1 - a;
        b = 1 - b;
    }
    Vec2 o = p.vertex(0);
    return {pi, o + QuadNum(a) * (p.vertex(k) - o) + QuadNum(b) * (p.vertex(k + 1) - o)};
}

struct PathWidth {
    QuadNum width;
    QuadNum length;
};

/// Width (x-spread of the development) and length bound of a chart path.
inline PathWidth path_width(const std::vector<ChartSegment>& g, const std::vector<Isometry>& placements) {
    QuadNum lo, hi, len{0};
    bool first = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (const Vec2& p : {placements[i](g[i].from), placements[i](g[i].to)}) {
            if (first) {
                lo = hi = p.x;
                first = false;
            }
            lo = min(lo, p.x);
            hi = max(hi, p.x);
        }
        len += QuadNum(segment_length(g[i].from, g[i].to).hi);
    }
    return {hi - lo, len};
}

struct FastReturnReport {
    QuadNum L{0};                  // empirical maximum first-hit length
    SurfacePoint argmax;
    int trials{0};
    std::optional<QuadNum> exact;  // exact maximal return length when the target is a transversal
    std::optional<int> distinct_return_lengths;
    bool confirmed{false};         // empirical == exact
};

/// Empirical Fast Return constant: starts are sampled on g itself and the first
/// positive-length return of the vertical flow to g is measured.
template <class Rng>
FastReturnReport fast_return_constant(const HalfTranslationSurface& s, const Transversal& g, int trials,
                                      const QuadNum& cap, Rng& rng) {
    if (g.length.sign() <= 0) throw FlowError("target must have positive width");
    FastReturnReport rep;
    rep.trials = trials;
    std::uniform_int_distribution<long> u(0, (1L << 30) - 1);
    for (int i = 0; i < trials; ++i) {
        QuadNum c = g.length * QuadNum(Rational(u(rng), 1L << 30));
        auto h = next_hit(s, g, c, cap);
        if (i == 0 || h.length > rep.L) {
            rep.L = h.length;
            rep.argmax = g.point_at(c);
        }
    }
    auto iet = first_return_map(s, g, cap);
    QuadNum mx{0};
    std::set<std::string> distinct;
    for (const auto& I : iet.intervals) {
        mx = max(mx, I.return_length);
        distinct.insert(render(I.return_length));
    }
    rep.exact = mx;
    rep.distinct_return_lengths = static_cast<int>(distinct.size());
    rep.confirmed = rep.L == mx;
    return rep;
}

struct TargetReport {
    int trials{0};
    int hits{0};
    double fraction{0};
    std::vector<SurfacePoint> misses;  // witnesses, capped
};

/// Fraction of random vertical segments of length L that meet the path g.
template <class Rng>
TargetReport target_check(const HalfTranslationSurface& s, const std::vector<ChartSegment>& g, const QuadNum& L,
                          int trials, Rng& rng, std::size_t max_witnesses = 16) {
    TargetReport rep;
    rep.trials = trials;
    for (int i = 0; i < trials; ++i) {
        SurfacePoint p = random_point(s, rng);
        if (L.sign() <= 0) {
            if (rep.misses.size() < max_witnesses) rep.misses.push_back(p);
            continue;
        }
        auto tr = trace_straight(s, p, kUp, L, &g);
        if (tr.stop == TraceStop::transversal) ++rep.hits;
        else if (rep.misses.size() < max_witnesses) rep.misses.push_back(p);
    }
    rep.fraction = trials > 0 ? static_cast<double>(rep.hits) / trials : 0.0;
    return rep;
}

}  // namespace flatlab
