#pragma once

// Exact intersections of PL curves, simplicity, general position.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flatlab/curve.hpp"

namespace flatlab {

struct Crossing {
    std::size_t seg_a{0};
    QuadNum t_a;  // parameter on segment seg_a of the first curve
    std::size_t seg_b{0};
    QuadNum t_b;
    int sign{0};  // sign of cross(direction a, direction b) in the shared chart
    int poly{0};
    Vec2 point;
};

enum class ContactKind { crossing, touch, overlap };

struct Contact {
    ContactKind kind{ContactKind::crossing};
    std::size_t seg_a{0};
    std::size_t seg_b{0};
    int poly{0};
    Vec2 point;
};

namespace detail {

struct SegBox {
    std::size_t index;
    QuadNum xmin, xmax, ymin, ymax;
};

inline SegBox seg_box(std::size_t i, const ChartSegment& s) {
    return {i, min(s.from.x, s.to.x), max(s.from.x, s.to.x), min(s.from.y, s.to.y), max(s.from.y, s.to.y)};
}

struct PairHit {
    ContactKind kind;
    QuadNum t, u;
    Vec2 point;
    int sign;
};

// Exact relation between segments [p1,p2] and [q1,q2].
inline std::optional<PairHit> segment_pair(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    Vec2 d1 = p2 - p1, d2 = q2 - q1;
    QuadNum den = cross(d1, d2);
    QuadNum one(1);
    if (den.sign() != 0) {
        QuadNum t = cross(q1 - p1, d2) / den;
        QuadNum u = cross(q1 - p1, d1) / den;
        if (t.sign() < 0 || t > one || u.sign() < 0 || u > one) return std::nullopt;
        bool interior = t.sign() > 0 && t < one && u.sign() > 0 && u < one;
        return PairHit{interior ? ContactKind::crossing : ContactKind::touch, t, u, p1 + t * d1, den.sign()};
    }
    if (cross(q1 - p1, d1).sign() != 0) return std::nullopt;
    // collinear: overlap of the parameter ranges of q1, q2 on [p1, p2]
    QuadNum len2 = dot(d1, d1);
    QuadNum a = dot(q1 - p1, d1) / len2, b = dot(q2 - p1, d1) / len2;
    QuadNum lo = min(a, b), hi = max(a, b);
    if (hi.sign() < 0 || lo > one) return std::nullopt;
    QuadNum t = max(lo, QuadNum(0));
    Vec2 at = p1 + t * d1;
    bool single = (hi.sign() == 0) || (lo == one);
    QuadNum u = dot(at - q1, d2) / dot(d2, d2);
    return PairHit{single ? ContactKind::touch : ContactKind::overlap, t, u, at, 0};
}

// Most common segment direction (up to sign) among the given segments.
inline Vec2 dominant_direction(const std::vector<const ChartSegment*>& segs) {
    std::map<std::pair<int, QuadNum>, std::size_t> count;  // (vertical, slope)
    Vec2 best{QuadNum(1), QuadNum(0)};
    std::size_t most = 0;
    for (const ChartSegment* g : segs) {
        Vec2 d = g->to - g->from;
        if (d.x.sign() == 0 && d.y.sign() == 0) continue;
        auto key = d.x.sign() == 0 ? std::make_pair(1, QuadNum(0)) : std::make_pair(0, d.y / d.x);
        std::size_t k = ++count[key];
        if (k > most) {
            most = k;
            best = d;
        }
    }
    return best;
}

// Calls f(i, j) for segment pairs in the same chart whose boxes meet, in a
// frame aligned with the chart's dominant direction so parallel families separate.
template <class F>
void for_each_candidate_pair(const PLCurve& a, const PLCurve& b, bool same_curve, F&& f) {
    int maxpoly = 0;
    for (const auto& s : a.segments) maxpoly = std::max(maxpoly, s.poly);
    for (const auto& s : b.segments) maxpoly = std::max(maxpoly, s.poly);
    std::size_t np = static_cast<std::size_t>(maxpoly + 1);
    std::vector<std::vector<std::size_t>> ia(np), ib(np);
    for (std::size_t i = 0; i < a.size(); ++i) ia[static_cast<std::size_t>(a.segments[i].poly)].push_back(i);
    if (!same_curve)
        for (std::size_t j = 0; j < b.size(); ++j) ib[static_cast<std::size_t>(b.segments[j].poly)].push_back(j);
    auto by_xmin = [](const SegBox& x, const SegBox& y) { return x.xmin < y.xmin; };
    for (std::size_t p = 0; p < np; ++p) {
        if (ia[p].empty() || (!same_curve && ib[p].empty())) continue;
        std::vector<const ChartSegment*> all;
        for (auto i : ia[p]) all.push_back(&a.segments[i]);
        for (auto j : ib[p]) all.push_back(&b.segments[j]);
        Vec2 dir = dominant_direction(all);
        Vec2 nrm{-dir.y, dir.x};
        auto box = [&](std::size_t i, const ChartSegment& g) {
            QuadNum x0 = dot(nrm, g.from), x1 = dot(nrm, g.to), y0 = dot(dir, g.from), y1 = dot(dir, g.to);
            return SegBox{i, min(x0, x1), max(x0, x1), min(y0, y1), max(y0, y1)};
        };
        std::vector<SegBox> A, B;
        for (auto i : ia[p]) A.push_back(box(i, a.segments[i]));
        for (auto j : ib[p]) B.push_back(box(j, b.segments[j]));
        std::sort(A.begin(), A.end(), by_xmin);
        if (same_curve) {
            std::vector<const SegBox*> active;
            for (const auto& s : A) {
                std::erase_if(active, [&](const SegBox* o) { return o->xmax < s.xmin; });
                for (const SegBox* o : active)
                    if (!(o->ymax < s.ymin) && !(s.ymax < o->ymin)) f(std::min(o->index, s.index), std::max(o->index, s.index));
                active.push_back(&s);
            }
            continue;
        }
        std::sort(B.begin(), B.end(), by_xmin);
        std::vector<const SegBox*> act_a, act_b;
        std::size_t ka = 0, kb = 0;
        while (ka < A.size() || kb < B.size()) {
            bool take_a = kb >= B.size() || (ka < A.size() && !(B[kb].xmin < A[ka].xmin));
            const SegBox& s = take_a ? A[ka++] : B[kb++];
            auto& mine = take_a ? act_a : act_b;
            auto& other = take_a ? act_b : act_a;
            std::erase_if(other, [&](const SegBox* o) { return o->xmax < s.xmin; });
            for (const SegBox* o : other) {
                if (o->ymax < s.ymin || s.ymax < o->ymin) continue;
                if (take_a) f(s.index, o->index);
                else f(o->index, s.index);
            }
            mine.push_back(&s);
        }
    }
}

}  // namespace detail

struct RawIntersections {
    std::vector<Crossing> crossings;
    std::optional<Contact> degeneracy;  // first non-transverse contact found
};

/// Transverse crossings of two curves without perturbation; any touching or
/// overlapping contact is reported as a degeneracy.
inline RawIntersections raw_intersections(const PLCurve& a, const PLCurve& b) {
    RawIntersections r;
    detail::for_each_candidate_pair(a, b, false, [&](std::size_t i, std::size_t j) {
        const auto& sa = a.segments[i];
        const auto& sb = b.segments[j];
        auto h = detail::segment_pair(sa.from, sa.to, sb.from, sb.to);
        if (!h) return;
        if (h->kind == ContactKind::crossing) {
            r.crossings.push_back({i, h->t, j, h->u, h->sign, sa.poly, h->point});
        } else if (!r.degeneracy) {
            r.degeneracy = Contact{h->kind, i, j, sa.poly, h->point};
        }
    });
    std::sort(r.crossings.begin(), r.crossings.end(), [](const Crossing& x, const Crossing& y) {
        if (x.seg_a != y.seg_a) return x.seg_a < y.seg_a;
        return x.t_a < y.t_a;
    });
    return r;
}

struct SimplicityResult {
    bool simple{true};
    std::optional<Contact> witness;
};

/// Self-intersection test with a witness contact when not simple.
inline SimplicityResult is_simple(const PLCurve& c) {
    SimplicityResult r;
    std::size_t n = c.size();
    auto consecutive = [&](std::size_t i, std::size_t j) { return j == i + 1 || (i == 0 && j == n - 1); };
    // a joint is shared in-chart only for identity transitions
    auto joint_ok = [&](std::size_t i, std::size_t j, const detail::PairHit& h) {
        const auto& si = c.segments[i];
        const auto& sj = c.segments[j];
        if (h.kind == ContactKind::overlap) return false;
        if (j == i + 1 && c.to_next[i] == Isometry{} && h.point == si.to && h.point == sj.from) return true;
        if (i == 0 && j == n - 1 && c.to_next[j] == Isometry{} && h.point == sj.to && h.point == si.from) return true;
        return false;
    };
    detail::for_each_candidate_pair(c, c, true, [&](std::size_t i, std::size_t j) {
        if (!r.simple || i == j) return;
        const auto& si = c.segments[i];
        const auto& sj = c.segments[j];
        auto h = detail::segment_pair(si.from, si.to, sj.from, sj.to);
        if (!h) return;
        if (consecutive(i, j) && joint_ok(i, j, *h)) return;
        r.simple = false;
        r.witness = Contact{h->kind, i, j, si.poly, h->point};
    });
    if (r.simple) {
        // zero-length pieces are not embedded arcs
        for (std::size_t i = 0; i < n; ++i)
            if (c.segments[i].from == c.segments[i].to) {
                r.simple = false;
                r.witness = Contact{ContactKind::touch, i, i, c.segments[i].poly, c.segments[i].from};
                break;
            }
    }
    return r;
}

/// Same point set (up to orientation): one curve's segments are all segments of the other.
inline bool same_point_set(const PLCurve& a, const PLCurve& b) {
    if (a.size() != b.size()) return false;
    for (const auto& sa : a.segments) {
        bool found = false;
        for (const auto& sb : b.segments) {
            if (sa.poly != sb.poly) continue;
            if ((sa.from == sb.from && sa.to == sb.to) || (sa.from == sb.to && sa.to == sb.from)) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

/// Index of a segment whose start is a bend of the developed curve (0 if straight).
inline std::size_t bend_start(const PLCurve& c) {
    auto d = develop(c);
    std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 u = d.points[i + 1] - d.points[i];
        // the piece before segment 0 belongs to the previous period
        Vec2 prev = i == 0 ? d.holonomy.inverse().linear(d.points[n] - d.points[n - 1]) : d.points[i] - d.points[i - 1];
        if (!same_direction(prev, u)) return i;
    }
    return 0;
}

/// Maximal straight runs of the developed curve from segment `start`, as displacements.
inline std::vector<Vec2> bend_steps(const PLCurve& c, std::size_t start) {
    auto dd = develop(c, start);
    std::size_t n = c.size();
    std::vector<Vec2> steps;
    Vec2 run_start = dd.points[0];
    for (std::size_t k = 0; k < n; ++k) {
        Vec2 u = dd.points[k + 1] - dd.points[k];
        Vec2 next = k + 1 < n ? dd.points[k + 2] - dd.points[k + 1] : dd.holonomy.linear(dd.points[1] - dd.points[0]);
        if (!same_direction(u, next)) {
            steps.push_back(dd.points[k + 1] - run_start);
            run_start = dd.points[k + 1];
        }
    }
    if (steps.empty()) steps.push_back(dd.points[n] - dd.points[0]);
    return steps;
}

/// Rigid translation of a curve on a translation surface, by retracing.
inline PLCurve translate_curve(const HalfTranslationSurface& s, const PLCurve& c, const Vec2& v) {
    if (!s.is_translation_surface()) throw CurveError("translation of curves needs a translation surface");
    std::size_t start = bend_start(c);
    auto steps = bend_steps(c, start);
    const auto& s0 = c.segments[start];
    auto moved = trace_straight(s, {s0.poly, s0.from}, v, QuadNum(1));
    if (moved.stop != TraceStop::budget) throw CurveError("translation runs into a cone point");
    // steps are in the chart of segment `start`; carry them into the chart of the new start
    Isometry to_new = moved.end_placement.inverse();
    std::vector<Vec2> local;
    for (const auto& st : steps) local.push_back(to_new.linear(st));
    return curve_from_polyline(s, moved.end, local);
}

struct IntersectionResult {
    std::vector<Crossing> crossings;
    PLCurve beta;                    // the (possibly perturbed) second curve actually used
    std::optional<Vec2> perturbation;  // translation applied to the second curve
    int attempts{0};
    std::optional<Contact> raw_degeneracy;
};

class IntersectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Transverse intersections. Degenerate contacts trigger the perturbation rule:
/// translate the second curve by scale * (1, 1/3) with the scale halved until
/// the pair is in general position.
inline IntersectionResult intersections(const HalfTranslationSurface& s, const PLCurve& a, const PLCurve& b,
                                        Rational first_scale = Rational(1, 997), int max_attempts = 48) {
    if (&a == &b || same_point_set(a, b)) throw IntersectionError("intersections of a curve with itself; use is_simple");
    IntersectionResult r;
    auto raw = raw_intersections(a, b);
    r.beta = b;
    if (!raw.degeneracy) {
        r.crossings = std::move(raw.crossings);
        return r;
    }
    r.raw_degeneracy = raw.degeneracy;
    Rational scale = first_scale;
    for (int k = 0; k < max_attempts; ++k, scale /= 2) {
        ++r.attempts;
        Vec2 v{QuadNum(scale), QuadNum(scale / 3)};
        PLCurve moved;
        try {
            moved = translate_curve(s, b, v);
        } catch (const std::exception&) {
            continue;
        }
        auto again = raw_intersections(a, moved);
        if (again.degeneracy) continue;
        r.crossings = std::move(again.crossings);
        r.beta = std::move(moved);
        r.perturbation = v;
        return r;
    }
    throw IntersectionError("no general-position perturbation found");
}

}  // namespace flatlab
