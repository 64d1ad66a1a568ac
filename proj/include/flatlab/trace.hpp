#pragma once

// Straight-line motion across polygon charts.

#include <optional>
#include <vector>

#include "flatlab/surface.hpp"

namespace flatlab {

struct SurfacePoint {
    int poly{0};
    Vec2 pos;
    friend bool operator==(const SurfacePoint&, const SurfacePoint&) = default;
};

struct ChartSegment {
    int poly{0};
    Vec2 from;
    Vec2 to;
};

enum class TraceStop { budget, cone_point, transversal };

struct TraceResult {
    std::vector<ChartSegment> segments;
    std::vector<Isometry> placements;  // chart of each segment -> development frame
    QuadNum param{0};                  // parameter reached; point = start + param * dir in the development
    TraceStop stop{TraceStop::budget};
    int vertex{-1};                    // cone point id when stop == cone_point
    int transversal_piece{-1};         // index of the hit transversal segment
    SurfacePoint end;
    Vec2 end_dir;                      // direction in the end chart
    Isometry end_placement;
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Parameter of z + t d on segment [a, b] if they cross there with t >= tmin.
inline std::optional<std::pair<QuadNum, QuadNum>> ray_hits_segment(const Vec2& z, const Vec2& d, const Vec2& a,
                                                                   const Vec2& b) {
    Vec2 e = b - a;
    QuadNum den = cross(d, e);
    if (den.sign() == 0) return std::nullopt;
    QuadNum t = cross(a - z, e) / den;
    QuadNum s = cross(a - z, d) / den;
    if (s.sign() < 0 || (s - QuadNum(1)).sign() > 0) return std::nullopt;
    return std::make_pair(t, s);
}

inline bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    return orient(a, b, p) == 0 && dot(p - a, p - b).sign() <= 0;
}

}  // namespace detail

/// Continue a straight line through a regular (angle 2pi) vertex. Given the
/// corner `c` through which the line arrives with chart direction `d`, find the
/// corner and chart direction of the continuation, plus the chart change.
struct VertexPassage {
    CornerRef corner;
    Vec2 dir;
    Isometry chart_change;  // arrival chart -> departure chart
};

inline VertexPassage pass_through_vertex(const HalfTranslationSurface& s, CornerRef c, const Vec2& d) {
    // sweep ccw from -d: the continuation is the next direction parallel to d
    Vec2 target = d;
    Isometry change{};
    auto [out0, in0] = s.corner_sector(c);
    Vec2 back = -d;
    if (in_sweep(back, in0, target) && !same_direction(target, back)) return {c, target, change};
    CornerRef cur = c;
    for (int guard = 0; guard < 4096; ++guard) {
        const auto& part = s.partner({cur.poly, s.wrap(cur.poly, cur.vertex - 1)});
        change = part.to_other.after(change);
        target = part.to_other.linear(target);
        cur = s.next_ccw(cur);
        auto [out, in] = s.corner_sector(cur);
        if (in_sweep(out, in, target)) return {cur, target, change};
    }
    throw TraceError("vertex passage does not terminate");
}

/// Trace z(t) = start + t * dir for t in [0, t_max]. Crossing a regular vertex
/// continues straight; reaching a singular vertex stops with `cone_point`.
/// If `stop_at` is given, the first positive-parameter point on it stops the trace.
/// `from_corner` starts at that polygon corner (possibly a cone point) instead.
inline TraceResult trace_straight(const HalfTranslationSurface& s, SurfacePoint start, Vec2 dir, const QuadNum& t_max,
                                  const std::vector<ChartSegment>* stop_at = nullptr, int max_steps = 1 << 22,
                                  std::optional<CornerRef> from_corner = std::nullopt) {
    if (dir == Vec2{0, 0}) throw TraceError("zero direction");
    TraceResult r;
    Isometry dev{};
    int poly = start.poly;
    Vec2 z = start.pos;
    Vec2 d = dir;
    QuadNum used{0};

    // a start on the boundary pointing outward belongs to the neighbor chart
    auto hop_if_outward = [&]() {
        const auto& p = s.polygon(poly);
        for (int k = 0; k < p.size(); ++k) {
            if (!detail::on_segment(z, p.vertex(k), p.vertex(k + 1))) continue;
            if (z == p.vertex(k + 1)) continue;  // handled as vertex k + 1
            if (z == p.vertex(k)) {
                CornerRef c{poly, k};
                if (s.all_vertices()[static_cast<std::size_t>(s.vertex_of(c))].singular())
                    throw TraceError("trace starts at a cone point");
                // rotate to the corner whose sector contains the direction
                Isometry change{};
                for (int guard = 0; guard < 4096; ++guard) {
                    auto [out, in] = s.corner_sector(c);
                    if (in_sweep(out, in, d)) break;
                    const auto& part = s.partner({c.poly, s.wrap(c.poly, c.vertex - 1)});
                    change = part.to_other.after(change);
                    d = part.to_other.linear(d);
                    c = s.next_ccw(c);
                }
                dev = dev.after(change.inverse());
                poly = c.poly;
                z = s.polygon(poly).vertex(c.vertex);
                return;
            }
            if (cross(p.edge_vector(k), d).sign() < 0) {
                const auto& part = s.partner({poly, k});
                dev = dev.after(part.to_other.inverse());
                z = part.to_other(z);
                d = part.to_other.linear(d);
                poly = part.other.poly;
                return;
            }
        }
    };
    if (!from_corner) {
        hop_if_outward();
    } else {
        auto [out, in] = s.corner_sector(*from_corner);
        if (from_corner->poly != start.poly || !(s.polygon(poly).vertex(from_corner->vertex) == z) || !in_sweep(out, in, d))
            throw TraceError("direction does not leave through the given corner");
    }

    auto check_transversal = [&](const Vec2& a, const Vec2& b, bool include_start)
        -> std::optional<std::pair<QuadNum, int>> {
        if (stop_at == nullptr) return std::nullopt;
        std::optional<std::pair<QuadNum, int>> best;
        for (std::size_t i = 0; i < stop_at->size(); ++i) {
            const auto& ts = (*stop_at)[i];
            if (ts.poly != poly) continue;
            // parameter along [a, b] (relative to t0) where it meets the transversal piece
            Vec2 ab = b - a;
            std::optional<QuadNum> hit;
            QuadNum den = cross(ab, ts.to - ts.from);
            if (den.sign() != 0) {
                QuadNum u = cross(ts.from - a, ts.to - ts.from) / den;
                QuadNum v = cross(ts.from - a, ab) / den;
                if (u.sign() >= 0 && (u - QuadNum(1)).sign() <= 0 && v.sign() >= 0 && (v - QuadNum(1)).sign() <= 0) hit = u;
            } else if (orient(ts.from, ts.to, a) == 0) {
                // running along the target: the first shared point is the hit
                QuadNum len2 = dot(ab, ab);
                std::optional<QuadNum> first;
                auto consider = [&](const QuadNum& u) {
                    if (u.sign() < 0 || (u - QuadNum(1)).sign() > 0) return;
                    if (!first || u < *first) first = u;
                };
                if (detail::on_segment(a, ts.from, ts.to)) consider(QuadNum(0));
                consider(dot(ts.from - a, ab) / len2);
                consider(dot(ts.to - a, ab) / len2);
                hit = first;
            }
            if (!hit) continue;
            if (hit->sign() == 0 && !include_start) continue;
            if (!best || *hit < best->first) best = std::make_pair(*hit, static_cast<int>(i));
        }
        return best;
    };

    for (int step = 0; step < max_steps; ++step) {
        const auto& p = s.polygon(poly);
        // nearest exit
        std::optional<QuadNum> best_t;
        int best_edge = -1;
        QuadNum best_s;
        for (int k = 0; k < p.size(); ++k) {
            Vec2 e = p.edge_vector(k);
            if (cross(e, d).sign() >= 0) continue;  // not leaving through this edge
            auto h = detail::ray_hits_segment(z, d, p.vertex(k), p.vertex(k + 1));
            if (!h || h->first.sign() <= 0) continue;
            if (!best_t || h->first < *best_t) {
                best_t = h->first;
                best_edge = k;
                best_s = h->second;
            }
        }
        if (!best_t) throw TraceError("no exit from polygon " + std::to_string(poly));
        // running along the boundary: stop at the first vertex on the ray
        for (int k = 0; k < p.size(); ++k) {
            Vec2 w = p.vertex(k) - z;
            if (cross(w, d).sign() != 0) continue;
            QuadNum tv = dot(w, d) / dot(d, d);
            if (tv.sign() > 0 && tv < *best_t) {
                best_t = tv;
                best_edge = k;
                best_s = QuadNum(0);
            }
        }
        QuadNum remaining = t_max - used;
        bool ends_inside = !(*best_t < remaining);
        QuadNum t_here = ends_inside ? remaining : *best_t;
        Vec2 z_end = z + t_here * d;

        // transversal hit inside this piece?
        auto hit = check_transversal(z, z_end, used.sign() > 0);
        if (hit) {
            Vec2 at = z + (hit->first * t_here) * d;
            r.segments.push_back({poly, z, at});
            r.placements.push_back(dev);
            r.param = used + hit->first * t_here;
            r.stop = TraceStop::transversal;
            r.transversal_piece = hit->second;
            r.end = {poly, at};
            r.end_dir = d;
            r.end_placement = dev;
            return r;
        }
        r.segments.push_back({poly, z, z_end});
        r.placements.push_back(dev);
        used += t_here;
        if (ends_inside) {
            r.param = used;
            r.stop = TraceStop::budget;
            r.end = {poly, z_end};
            r.end_dir = d;
            r.end_placement = dev;
            return r;
        }
        // leave through best_edge
        if (best_s.sign() == 0 || best_s == QuadNum(1)) {
            int vk = best_s.sign() == 0 ? best_edge : s.wrap(poly, best_edge + 1);
            CornerRef c{poly, vk};
            int vid = s.vertex_of(c);
            if (s.all_vertices()[static_cast<std::size_t>(vid)].singular()) {
                r.param = used;
                r.stop = TraceStop::cone_point;
                r.vertex = vid;
                r.end = {poly, z_end};
                r.end_dir = d;
                r.end_placement = dev;
                return r;
            }
            auto pass = pass_through_vertex(s, c, d);
            dev = dev.after(pass.chart_change.inverse());
            poly = pass.corner.poly;
            z = s.polygon(poly).vertex(pass.corner.vertex);
            d = pass.dir;
            if (stop_at != nullptr) {
                // a transversal through the vertex itself
                for (std::size_t i = 0; i < stop_at->size(); ++i) {
                    const auto& ts = (*stop_at)[i];
                    if (ts.poly == poly && detail::on_segment(z, ts.from, ts.to)) {
                        r.param = used;
                        r.stop = TraceStop::transversal;
                        r.transversal_piece = static_cast<int>(i);
                        r.end = {poly, z};
                        r.end_dir = d;
                        r.end_placement = dev;
                        return r;
                    }
                }
            }
            continue;
        }
        const auto& part = s.partner({poly, best_edge});
        dev = dev.after(part.to_other.inverse());
        z = part.to_other(z_end);
        d = part.to_other.linear(d);
        poly = part.other.poly;
    }
    throw TraceError("trace step limit exceeded");
}

/// Chart change carrying surface point `a` onto `b` when they are the same point
/// of the surface (equal, across one edge, or around a regular vertex).
inline std::optional<Isometry> chart_transition(const HalfTranslationSurface& s, const SurfacePoint& a,
                                                const SurfacePoint& b) {
    if (a.poly == b.poly && a.pos == b.pos) return Isometry{};
    const auto& p = s.polygon(a.poly);
    for (int k = 0; k < p.size(); ++k) {
        if (a.pos == p.vertex(k)) {
            CornerRef c{a.poly, k};
            Isometry acc{};
            for (int guard = 0; guard < 4096; ++guard) {
                const auto& part = s.partner({c.poly, s.wrap(c.poly, c.vertex - 1)});
                acc = part.to_other.after(acc);
                c = s.next_ccw(c);
                if (c.poly == b.poly && s.polygon(c.poly).vertex(c.vertex) == b.pos) {
                    if (acc(a.pos) == b.pos) return acc;
                }
                if (c == CornerRef{a.poly, k}) break;
            }
            return std::nullopt;
        }
    }
    for (int k = 0; k < p.size(); ++k) {
        if (!detail::on_segment(a.pos, p.vertex(k), p.vertex(k + 1))) continue;
        const auto& part = s.partner({a.poly, k});
        if (part.other.poly == b.poly && part.to_other(a.pos) == b.pos) return part.to_other;
    }
    return std::nullopt;
}

}  // namespace flatlab
