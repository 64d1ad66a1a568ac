#pragma once

// Finite pieces of the universal cover of a flat surface, and flat geodesics in them.

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "flatlab/geom.hpp"

namespace flatlab {

class GeomError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The geodesic leaves the unfolded ball; retry with a larger radius.
class CorridorTooSmall : public GeomError {
public:
    CorridorTooSmall(const std::string& what, int suggested) : GeomError(what), suggested_radius(suggested) {}
    int suggested_radius;
};

struct CoverTile {
    int poly{0};
    Isometry placement;        // chart of `poly` -> development frame of the root tile
    std::vector<int> gallery;  // edges crossed from the root tile
    int depth{0};
    std::vector<int> nbr;  // tile across each edge, -1 outside the ball
};

/// A point of the cover: a tile of the ball and a position in its polygon chart.
struct CoverPoint {
    int tile{0};
    Vec2 pos;
};

namespace detail {

struct GalleryStep {
    int poly;
    int entry;  // edge of `poly` crossed to enter it, -1 at the root
};

inline std::vector<GalleryStep> walk_gallery(const HalfTranslationSurface& s, int root, const std::vector<int>& edges) {
    std::vector<GalleryStep> out{{root, -1}};
    for (int e : edges) {
        const auto& p = s.partner({out.back().poly, e});
        out.push_back({p.other.poly, p.other.edge});
    }
    return out;
}

inline std::vector<int> reverse_gallery(const std::vector<GalleryStep>& steps) {
    std::vector<int> out;
    for (std::size_t i = steps.size(); i-- > 1;) out.push_back(steps[i].entry);
    return out;
}

inline int corner_count(const HalfTranslationSurface& s, CornerRef c) {
    return static_cast<int>(s.all_vertices()[static_cast<std::size_t>(s.vertex_of(c))].orbit.size());
}

// Exits of `steps` rotations around corner c, ccw (+1) or cw (-1).
inline std::vector<int> rotate_exits(const HalfTranslationSurface& s, CornerRef c, int dir, int steps) {
    std::vector<int> out;
    for (int i = 0; i < steps; ++i) {
        out.push_back(dir > 0 ? s.wrap(c.poly, c.vertex - 1) : c.vertex);
        c = dir > 0 ? s.next_ccw(c) : s.next_cw(c);
    }
    return out;
}

// One reduction of a gallery: a backtrack, or more than half of the tiles
// around a vertex replaced by the way round the other side.
inline bool dehn_step(const HalfTranslationSurface& s, int root, std::vector<int>& edges) {
    auto st = walk_gallery(s, root, edges);
    std::size_t n = edges.size();
    for (std::size_t j = 1; j < n; ++j)
        if (edges[j] == st[j].entry) {
            edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(j - 1), edges.begin() + static_cast<std::ptrdiff_t>(j + 1));
            return true;
        }
    auto turn = [&](std::size_t j) {
        int p = st[j].poly;
        if (edges[j] == s.wrap(p, st[j].entry - 1)) return 1;
        if (edges[j] == s.wrap(p, st[j].entry + 1)) return -1;
        return 0;
    };
    std::size_t j = 1;
    while (j < n) {
        int t = turn(j);
        if (t == 0) {
            ++j;
            continue;
        }
        std::size_t j1 = j;
        while (j1 + 1 < n && turn(j1 + 1) == t) ++j1;
        int m = static_cast<int>(j1 - j + 2);  // crossings j-1 .. j1
        int p = st[j - 1].poly, e = edges[j - 1];
        CornerRef c{p, t > 0 ? s.wrap(p, e + 1) : e};
        int N = corner_count(s, c);
        if (2 * m > N) {
            auto first = edges.begin() + static_cast<std::ptrdiff_t>(j - 1);
            if (m >= N) {
                edges.erase(first, first + N);
            } else {
                auto alt = rotate_exits(s, c, -t, N - m);
                edges.erase(first, first + m);
                edges.insert(edges.begin() + static_cast<std::ptrdiff_t>(j - 1), alt.begin(), alt.end());
            }
            return true;
        }
        j = j1 + 1;
    }
    return false;
}

/// Dehn's algorithm on a closed gallery, with cyclic rotations.
inline bool gallery_is_trivial(const HalfTranslationSurface& s, int root, std::vector<int> edges) {
    for (int guard = 0; guard < 100000; ++guard) {
        while (dehn_step(s, root, edges)) {
        }
        if (edges.empty()) return true;
        auto st = walk_gallery(s, root, edges);
        bool changed = false;
        for (std::size_t r = 1; r < edges.size() && !changed; ++r) {
            std::vector<int> rot(edges.begin() + static_cast<std::ptrdiff_t>(r), edges.end());
            rot.insert(rot.end(), edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(r));
            if (dehn_step(s, st[r].poly, rot)) {
                root = st[r].poly;
                edges = std::move(rot);
                changed = true;
            }
        }
        if (!changed) return false;
    }
    throw std::logic_error("gallery reduction did not terminate");
}

struct PlaceLess {
    bool operator()(const std::tuple<int, int, Vec2>& a, const std::tuple<int, int, Vec2>& b) const {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return lex_less(std::get<2>(a), std::get<2>(b));
    }
};

}  // namespace detail

/// Tiles of the universal cover within `radius` polygon crossings of a root
/// tile, grown breadth first. Tiles are told apart by Dehn's algorithm on
/// galleries, which needs at least 7 corners at every vertex; on a flat torus
/// the development alone identifies tiles.
class UnfoldedBall {
public:
    UnfoldedBall(HalfTranslationSurface s, int root_poly, int radius) : s_(std::move(s)), radius_(radius) {
        bool regular = true;
        for (const auto& v : s_.all_vertices()) {
            if (v.angle_multiple == 1) throw GeomError("unfolded balls need a cover without angle-pi points");
            if (v.angle_multiple != 2) regular = false;
        }
        flat_ = regular;
        if (!flat_)
            for (const auto& v : s_.all_vertices())
                if (v.orbit.size() < 7)
                    throw GeomError("unfolded balls need at least 7 corners at every vertex (or a flat torus)");
        add_tile(root_poly, Isometry{}, {}, 0);
        std::queue<int> todo;
        todo.push(0);
        while (!todo.empty()) {
            int t = todo.front();
            todo.pop();
            int sides = s_.polygon(tiles_[static_cast<std::size_t>(t)].poly).size();
            for (int e = 0; e < sides; ++e) {
                const CoverTile cur = tiles_[static_cast<std::size_t>(t)];
                if (cur.nbr[static_cast<std::size_t>(e)] >= 0) continue;
                const auto& p = s_.partner({cur.poly, e});
                Isometry g = cur.placement.after(p.to_other.inverse());
                auto gal = cur.gallery;
                gal.push_back(e);
                int u = find(p.other.poly, g, gal);
                if (u < 0) {
                    if (cur.depth >= radius_) continue;
                    u = add_tile(p.other.poly, g, gal, cur.depth + 1);
                    todo.push(u);
                }
                tiles_[static_cast<std::size_t>(t)].nbr[static_cast<std::size_t>(e)] = u;
                tiles_[static_cast<std::size_t>(u)].nbr[static_cast<std::size_t>(p.other.edge)] = t;
            }
        }
    }

    const HalfTranslationSurface& surface() const { return s_; }
    int radius() const { return radius_; }
    std::size_t size() const { return tiles_.size(); }
    const CoverTile& tile(int i) const { return tiles_.at(static_cast<std::size_t>(i)); }
    int neighbor(int t, int e) const { return tile(t).nbr.at(static_cast<std::size_t>(e)); }

    /// Edge of tile a shared with tile b, or -1.
    int shared_edge(int a, int b) const {
        const auto& n = tile(a).nbr;
        for (std::size_t e = 0; e < n.size(); ++e)
            if (n[e] == b) return static_cast<int>(e);
        return -1;
    }

    Vec2 developed(const CoverPoint& p) const { return tile(p.tile).placement(p.pos); }
    Vec2 developed_vertex(int t, int k) const { return tile(t).placement(s_.polygon(tile(t).poly).vertex(k)); }

    /// Canonical id of the cover vertex at corner k of tile t: the smallest
    /// (tile, corner) reachable by rotating around it inside the ball.
    std::pair<int, int> vertex_id(int t, int k) const {
        std::pair<int, int> best{t, s_.wrap(tile(t).poly, k)};
        for (int dir : {1, -1}) {
            int cur = t;
            CornerRef c{tile(t).poly, s_.wrap(tile(t).poly, k)};
            for (int guard = 0; guard < 4096; ++guard) {
                int exit = dir > 0 ? s_.wrap(c.poly, c.vertex - 1) : c.vertex;
                int nxt = neighbor(cur, exit);
                if (nxt < 0) break;
                c = dir > 0 ? s_.next_ccw(c) : s_.next_cw(c);
                cur = nxt;
                if (cur == t) break;
                best = std::min(best, std::pair<int, int>{cur, c.vertex});
            }
        }
        return best;
    }

private:
    int add_tile(int poly, Isometry g, std::vector<int> gal, int depth) {
        CoverTile t{poly, g, std::move(gal), depth, std::vector<int>(static_cast<std::size_t>(s_.polygon(poly).size()), -1)};
        int id = static_cast<int>(tiles_.size());
        index_[{poly, g.sign, g.shift}].push_back(id);
        tiles_.push_back(std::move(t));
        return id;
    }

    int find(int poly, const Isometry& g, const std::vector<int>& gal) const {
        auto it = index_.find({poly, g.sign, g.shift});
        if (it == index_.end()) return -1;
        for (int u : it->second) {
            if (flat_) return u;
            auto loop = gal;
            auto back = detail::reverse_gallery(detail::walk_gallery(s_, tiles_[0].poly, tile(u).gallery));
            loop.insert(loop.end(), back.begin(), back.end());
            if (detail::gallery_is_trivial(s_, tiles_[0].poly, loop)) return u;
        }
        return -1;
    }

    HalfTranslationSurface s_;
    int radius_;
    bool flat_{false};
    std::vector<CoverTile> tiles_;
    std::map<std::tuple<int, int, Vec2>, std::vector<int>, detail::PlaceLess> index_;
};

struct GeodesicBend {
    Vec2 point;
    int side{0};        // +1: vertex is the left end of its portals (corridor on the right), -1: the reverse
    int half_turns{0};  // angle on the corridor side lies in [half_turns pi, (half_turns + 1) pi)
    bool exact{false};  // the angle equals half_turns pi
    int cone_multiple{2};
    /// The same data for the angle on the left of the path, which does not
    /// depend on the corridor.
    std::pair<int, bool> left_angle() const {
        if (side < 0) return {half_turns, exact};
        if (exact) return {cone_multiple - half_turns, true};
        return {cone_multiple - half_turns - 1, false};
    }
};

/// Flat geodesic in the cover, developed into the frame of the ball's root tile.
struct GeodesicPath {
    std::vector<Vec2> points;          // endpoints and bends, straight vertices dropped
    std::vector<GeodesicBend> bends;   // one per interior point
    std::vector<int> corridor;         // tiles crossed, after rerouting
    std::vector<int> exits;            // edge leaving each corridor tile
    Rational length_lower{0};
    Rational length_upper{0};
    int reroutes{0};
    // internal structure kept for intersection queries
    struct Piece {
        int tile;
        std::size_t segment;  // index into points
        Vec2 from, to;        // developed
    };
    std::vector<Piece> pieces;
    struct Contact {
        std::pair<int, int> vertex;  // cover vertex id
        std::size_t segment;
        Vec2 point;  // developed
    };
    std::vector<Contact> vertices;  // polygon vertices the path passes through
};

namespace detail {

struct Portal {
    Vec2 left;
    Vec2 right;
};

struct FunnelVertex {
    Vec2 point;
    int portal;  // index into the portal list (0 = start)
    int side;    // +1 left endpoint, -1 right endpoint, 0 path endpoint
};

inline bool nearer(const Vec2& apex, const Vec2& a, const Vec2& b) { return norm2(a - apex) < norm2(b - apex); }

// Shortest path through a sequence of portals; portals[0] and the last are the endpoints.
inline std::vector<FunnelVertex> funnel(const std::vector<Portal>& portals) {
    std::vector<FunnelVertex> path{{portals.front().left, 0, 0}};
    Vec2 apex = portals.front().left, left = apex, right = apex;
    int apex_i = 0, left_i = 0, right_i = 0;
    for (int i = 1; i < static_cast<int>(portals.size()); ++i) {
        const Vec2& l = portals[static_cast<std::size_t>(i)].left;
        const Vec2& r = portals[static_cast<std::size_t>(i)].right;
        if (orient(apex, right, r) >= 0) {
            int o = orient(apex, left, r);
            if (right == apex || left == apex || o < 0 || (o == 0 && nearer(apex, r, left))) {
                right = r;
                right_i = i;
            } else {
                path.push_back({left, left_i, 1});
                apex = left;
                apex_i = left_i;
                right = left = apex;
                right_i = left_i = apex_i;
                i = apex_i;
                continue;
            }
        }
        if (orient(apex, left, l) <= 0) {
            int o = orient(apex, right, l);
            if (left == apex || right == apex || o > 0 || (o == 0 && nearer(apex, l, right))) {
                left = l;
                left_i = i;
            } else {
                path.push_back({right, right_i, -1});
                apex = right;
                apex_i = right_i;
                right = left = apex;
                right_i = left_i = apex_i;
                i = apex_i;
                continue;
            }
        }
    }
    const Vec2& end = portals.back().left;
    if (!(path.back().point == end) || path.size() == 1) path.push_back({end, static_cast<int>(portals.size()) - 1, 0});
    return path;
}

// Accumulated angle of a sweep of rays, each step less than pi.
struct Sweep {
    Vec2 base;
    int sigma;
    int half{0};
    Vec2 cur;
    Sweep(const Vec2& b, int s) : base(b), sigma(s), cur(b) {}
    Vec2 boundary() const { return half % 2 == 0 ? base : -base; }
    void add(const Vec2& r) {
        Vec2 b = boundary();
        if (!(sigma * cross(b, r).sign() > 0 || same_direction(b, r))) ++half;
        cur = r;
    }
    bool exact() const { return same_direction(boundary(), cur); }
};

}  // namespace detail

/// A gallery of tiles: tiles[i] is left through edge exits[i] into tiles[i + 1].
struct Corridor {
    std::vector<int> tiles;
    std::vector<int> exits;
};

/// Corridor from a tile along a sequence of exit edges; throws if it leaves the ball.
inline Corridor corridor_from_exits(const UnfoldedBall& ball, int start, const std::vector<int>& exits) {
    Corridor c{{start}, exits};
    for (int e : exits) {
        int u = ball.neighbor(c.tiles.back(), e);
        if (u < 0) throw CorridorTooSmall("corridor leaves the unfolded ball of radius " + std::to_string(ball.radius()), ball.radius() + 2);
        c.tiles.push_back(u);
    }
    return c;
}

namespace detail {

// Remove immediate backtracks.
inline void free_reduce(const UnfoldedBall& ball, Corridor& c) {
    std::size_t i = 1;  // tile i is entered through exits[i - 1] and left through exits[i]
    while (i < c.exits.size()) {
        const auto& p = ball.surface().partner({ball.tile(c.tiles[i - 1]).poly, c.exits[i - 1]});
        if (c.exits[i] == p.other.edge) {
            c.exits.erase(c.exits.begin() + static_cast<std::ptrdiff_t>(i - 1), c.exits.begin() + static_cast<std::ptrdiff_t>(i + 1));
            c.tiles.erase(c.tiles.begin() + static_cast<std::ptrdiff_t>(i), c.tiles.begin() + static_cast<std::ptrdiff_t>(i + 2));
            i = i > 1 ? i - 1 : 1;
        } else {
            ++i;
        }
    }
}

// Parameter range of segment a->b inside a convex polygon (Cyrus-Beck, exact).
inline std::optional<std::pair<QuadNum, QuadNum>> clip_segment(const Vec2& a, const Vec2& b, const std::vector<Vec2>& poly) {
    QuadNum t0{0}, t1{1};
    Vec2 d = b - a;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        // inside: cross(q - p, z - p) >= 0
        QuadNum num = cross(q - p, a - p);
        QuadNum den = cross(q - p, d);
        if (den.sign() == 0) {
            if (num.sign() < 0) return std::nullopt;
            continue;
        }
        QuadNum t = -num / den;
        if (den.sign() > 0) t0 = max(t0, t);
        else t1 = min(t1, t);
        if (t1 < t0) return std::nullopt;
    }
    return std::make_pair(t0, t1);
}

}  // namespace detail

/// Shortest path between cover points x and y: funnel through the corridor's
/// portals, then reroute around any cone point where the angle away from the
/// corridor is below pi, until every bend has angle at least pi on both sides.
inline GeodesicPath flat_geodesic(const UnfoldedBall& ball, const CoverPoint& x, const CoverPoint& y, Corridor corridor) {
    const auto& s = ball.surface();
    if (corridor.tiles.size() != corridor.exits.size() + 1 || corridor.tiles.front() != x.tile || corridor.tiles.back() != y.tile)
        throw GeomError("corridor must run from the tile of x to the tile of y");
    for (std::size_t i = 0; i < corridor.exits.size(); ++i)
        if (ball.neighbor(corridor.tiles[i], corridor.exits[i]) != corridor.tiles[i + 1])
            throw GeomError("corridor tiles are not adjacent");
    Vec2 dx = ball.developed(x), dy = ball.developed(y);
    GeodesicPath g;
    for (int guard = 0; guard < 100000; ++guard) {
        detail::free_reduce(ball, corridor);
        const auto& tiles = corridor.tiles;
        std::vector<detail::Portal> portals{{dx, dx}};
        for (std::size_t i = 0; i < corridor.exits.size(); ++i) {
            int e = corridor.exits[i];
            portals.push_back({ball.developed_vertex(tiles[i], e + 1), ball.developed_vertex(tiles[i], e)});
        }
        portals.push_back({dy, dy});
        auto fv = detail::funnel(portals);
        // fan of portals around each interior funnel vertex
        struct Fan {
            int first, last;  // portal indices
            GeodesicBend bend;
        };
        std::vector<Fan> fans;
        bool rerouted = false;
        int n = static_cast<int>(portals.size()) - 2;
        for (std::size_t k = 1; k + 1 < fv.size() && !rerouted; ++k) {
            const auto& v = fv[k];
            auto end_of = [&](int p) -> const Vec2& {
                return v.side > 0 ? portals[static_cast<std::size_t>(p)].left : portals[static_cast<std::size_t>(p)].right;
            };
            int a = v.portal, b = v.portal;
            while (a - 1 >= 1 && end_of(a - 1) == v.point) --a;
            while (b + 1 <= n && end_of(b + 1) == v.point) ++b;
            detail::Sweep sw(fv[k - 1].point - v.point, v.side);
            for (int p = a; p <= b; ++p) {
                const auto& P = portals[static_cast<std::size_t>(p)];
                sw.add((v.side > 0 ? P.right : P.left) - v.point);
            }
            sw.add(fv[k + 1].point - v.point);
            int t0 = tiles[static_cast<std::size_t>(a - 1)];
            int poly = ball.tile(t0).poly;
            int corner = -1;
            for (int c = 0; c < s.polygon(poly).size(); ++c)
                if (ball.developed_vertex(t0, c) == v.point) corner = c;
            if (corner < 0) throw std::logic_error("funnel bend is not a polygon vertex");
            int K = s.all_vertices()[static_cast<std::size_t>(s.vertex_of({poly, corner}))].angle_multiple;
            if (sw.half < 1) throw std::logic_error("funnel bend with corridor angle below pi");
            GeodesicBend bend{v.point, v.side, sw.half, sw.exact(), K};
            bool other_ok = sw.half < K - 1 || (sw.half == K - 1 && sw.exact());
            if (other_ok) {
                fans.push_back({a, b, bend});
                continue;
            }
            // go round the other side of the vertex
            int m = b - a + 1;
            int N = detail::corner_count(s, {poly, corner});
            int exit = corridor.exits[static_cast<std::size_t>(a - 1)];
            int dir = exit == s.wrap(poly, corner - 1) ? 1 : -1;
            std::vector<int> ex(corridor.exits.begin(), corridor.exits.begin() + (a - 1));
            if (m >= N) {
                ex.insert(ex.end(), corridor.exits.begin() + (a - 1 + N), corridor.exits.end());
            } else {
                auto alt = detail::rotate_exits(s, {poly, corner}, -dir, N - m);
                ex.insert(ex.end(), alt.begin(), alt.end());
                ex.insert(ex.end(), corridor.exits.begin() + b, corridor.exits.end());
            }
            corridor = corridor_from_exits(ball, corridor.tiles.front(), ex);
            if (corridor.tiles.back() != y.tile) throw std::logic_error("reroute did not close up");
            ++g.reroutes;
            rerouted = true;
        }
        if (rerouted) continue;

        // assemble: pieces per funnel segment, then drop straight vertices
        g.corridor = corridor.tiles;
        g.exits = corridor.exits;
        g.points.clear();
        g.bends.clear();
        g.pieces.clear();
        g.vertices.clear();
        std::vector<std::size_t> kept;  // funnel vertex -> output point index
        for (std::size_t k = 0; k < fv.size(); ++k) {
            bool straight = k > 0 && k + 1 < fv.size() && fans[k - 1].bend.cone_multiple == 2 && fans[k - 1].bend.exact &&
                            fans[k - 1].bend.half_turns == 1;
            if (!straight) {
                g.points.push_back(fv[k].point);
                if (k > 0 && k + 1 < fv.size()) g.bends.push_back(fans[k - 1].bend);
            }
            kept.push_back(g.points.size() - 1);
        }
        Rational lo{0}, hi{0};
        for (std::size_t k = 0; k + 1 < g.points.size(); ++k) {
            auto b = sqrt_bounds(norm2(g.points[k + 1] - g.points[k]));
            lo += b.lo;
            hi += b.hi;
        }
        g.length_lower = lo;
        g.length_upper = hi;
        for (std::size_t k = 0; k + 1 < fv.size(); ++k) {
            int from = k == 0 ? 0 : fans[k - 1].last;
            int to = k + 2 == fv.size() ? n : fans[k].first - 1;
            std::size_t out = kept[k];
            Vec2 a = fv[k].point, b = fv[k + 1].point;
            for (int ti = from; ti <= to; ++ti) {
                int t = tiles[static_cast<std::size_t>(ti)];
                std::vector<Vec2> poly;
                for (int c = 0; c < s.polygon(ball.tile(t).poly).size(); ++c) poly.push_back(ball.developed_vertex(t, c));
                auto cl = detail::clip_segment(a, b, poly);
                if (!cl || !(cl->first < cl->second)) continue;
                Vec2 p0 = a + cl->first * (b - a), p1 = a + cl->second * (b - a);
                g.pieces.push_back({t, out, p0, p1});
                for (int c = 0; c < static_cast<int>(poly.size()); ++c)
                    if (poly[static_cast<std::size_t>(c)] == p0 || poly[static_cast<std::size_t>(c)] == p1)
                        g.vertices.push_back({ball.vertex_id(t, c), out, poly[static_cast<std::size_t>(c)]});
            }
        }
        return g;
    }
    throw std::logic_error("geodesic rerouting did not terminate");
}

/// Tile path in the ball from one tile to another, breadth first; `seed`
/// shuffles the neighbour order so different seeds give different corridors.
inline Corridor seed_corridor(const UnfoldedBall& ball, int from, int to, unsigned seed = 0) {
    std::vector<int> prev(ball.size(), -2), via(ball.size(), -1);
    std::queue<int> q;
    q.push(from);
    prev[static_cast<std::size_t>(from)] = -1;
    std::mt19937 rng(seed);
    while (!q.empty()) {
        int t = q.front();
        q.pop();
        if (t == to) break;
        std::vector<int> order(ball.tile(t).nbr.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        if (seed != 0) std::shuffle(order.begin(), order.end(), rng);
        for (int e : order) {
            int u = ball.neighbor(t, e);
            if (u < 0 || prev[static_cast<std::size_t>(u)] != -2) continue;
            prev[static_cast<std::size_t>(u)] = t;
            via[static_cast<std::size_t>(u)] = e;
            q.push(u);
        }
    }
    if (prev[static_cast<std::size_t>(to)] == -2) throw GeomError("target tile not reachable in the ball");
    std::vector<int> exits;
    for (int t = to; t != from; t = prev[static_cast<std::size_t>(t)]) exits.push_back(via[static_cast<std::size_t>(t)]);
    std::reverse(exits.begin(), exits.end());
    return corridor_from_exits(ball, from, exits);
}

/// The corridor with a full turn around a corner of one of its tiles spliced in.
inline Corridor corridor_with_loop(const UnfoldedBall& ball, const Corridor& corridor, std::size_t at, int corner, int dir) {
    const auto& s = ball.surface();
    CornerRef c{ball.tile(corridor.tiles.at(at)).poly, corner};
    auto loop = detail::rotate_exits(s, c, dir, detail::corner_count(s, c));
    std::vector<int> ex(corridor.exits.begin(), corridor.exits.begin() + static_cast<std::ptrdiff_t>(at));
    ex.insert(ex.end(), loop.begin(), loop.end());
    ex.insert(ex.end(), corridor.exits.begin() + static_cast<std::ptrdiff_t>(at), corridor.exits.end());
    return corridor_from_exits(ball, corridor.tiles.front(), ex);
}

/// Same path in the cover: same developed polyline and the same bends.
inline bool same_geodesic(const GeodesicPath& a, const GeodesicPath& b) {
    if (a.points != b.points || a.bends.size() != b.bends.size()) return false;
    for (std::size_t i = 0; i < a.bends.size(); ++i)
        if (a.bends[i].left_angle() != b.bends[i].left_angle()) return false;
    return true;
}

/// Intersection of two geodesics of one ball, as parameter intervals along
/// the first (segment index + fraction, merged). Connected iff at most one.
struct GeodesicIntersection {
    std::vector<std::pair<QuadNum, QuadNum>> components;  // in units of segments of the first path
    bool connected() const { return components.size() <= 1; }
};

inline GeodesicIntersection intersect_geodesics(const GeodesicPath& g1, const GeodesicPath& g2) {
    std::vector<std::pair<QuadNum, QuadNum>> iv;
    auto param = [&](std::size_t seg, const Vec2& p) {
        const Vec2& a = g1.points[seg];
        const Vec2& b = g1.points[seg + 1];
        return QuadNum(static_cast<long>(seg)) + dot(p - a, b - a) / norm2(b - a);
    };
    for (const auto& p : g1.pieces)
        for (const auto& q : g2.pieces) {
            if (p.tile != q.tile) continue;
            Vec2 d1 = p.to - p.from, d2 = q.to - q.from;
            QuadNum den = cross(d1, d2);
            if (den.sign() != 0) {
                QuadNum t = cross(q.from - p.from, d2) / den;
                QuadNum u = cross(q.from - p.from, d1) / den;
                if (t.sign() < 0 || t > QuadNum(1) || u.sign() < 0 || u > QuadNum(1)) continue;
                QuadNum x = param(p.segment, p.from + t * d1);
                iv.push_back({x, x});
            } else {
                if (cross(q.from - p.from, d1).sign() != 0) continue;
                QuadNum l = dot(d1, d1);
                QuadNum a = dot(q.from - p.from, d1) / l, b = dot(q.to - p.from, d1) / l;
                if (b < a) std::swap(a, b);
                QuadNum lo = max(a, QuadNum(0)), hi = min(b, QuadNum(1));
                if (hi < lo) continue;
                iv.push_back({param(p.segment, p.from + lo * d1), param(p.segment, p.from + hi * d1)});
            }
        }
    for (const auto& v : g1.vertices)
        for (const auto& w : g2.vertices)
            if (v.vertex == w.vertex) {
                QuadNum x = param(v.segment, v.point);
                iv.push_back({x, x});
            }
    std::sort(iv.begin(), iv.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    GeodesicIntersection out;
    for (const auto& x : iv) {
        if (!out.components.empty() && !(out.components.back().second < x.first))
            out.components.back().second = max(out.components.back().second, x.second);
        else
            out.components.push_back(x);
    }
    return out;
}

/// Lift of `periods` periods of a closed curve into the ball, starting in the root tile.
struct CurveLift {
    std::vector<CoverPoint> points;  // segment starts, then the final end point
    Corridor corridor;               // tiles visited
    std::vector<std::size_t> at;     // corridor index of the tile holding each point
};

inline CurveLift lift_curve(const UnfoldedBall& ball, const PLCurve& c, int periods = 2) {
    const auto& s = ball.surface();
    if (c.segments.empty() || ball.tile(0).poly != c.segments[0].poly) throw GeomError("ball root must hold the curve start");
    CurveLift L;
    L.corridor.tiles.push_back(0);
    std::size_t n = c.size();
    for (std::size_t k = 0; k < n * static_cast<std::size_t>(periods); ++k) {
        const auto& g = c.segments[k % n];
        L.points.push_back({L.corridor.tiles.back(), g.from});
        L.at.push_back(L.corridor.tiles.size() - 1);
        const auto& next = c.segments[(k + 1) % n];
        const Isometry& t = c.to_next[k % n];
        if (next.poly == g.poly && t == Isometry{}) continue;
        const auto& P = s.polygon(g.poly);
        int edge = -1;
        for (int e = 0; e < P.size() && edge < 0; ++e) {
            if (!detail::on_segment(g.to, P.vertex(e), P.vertex(e + 1))) continue;
            const auto& q = s.partner({g.poly, e});
            if (q.other.poly == next.poly && q.to_other == t) edge = e;
        }
        if (edge < 0) throw GeomError("curve changes chart away from a polygon edge");
        int u = ball.neighbor(L.corridor.tiles.back(), edge);
        if (u < 0) throw CorridorTooSmall("curve lift leaves the unfolded ball", ball.radius() + 2);
        L.corridor.exits.push_back(edge);
        L.corridor.tiles.push_back(u);
    }
    const auto& last = c.segments[n - 1];
    L.points.push_back({L.corridor.tiles.back(), last.to});
    L.at.push_back(L.corridor.tiles.size() - 1);
    return L;
}

/// Size and width of a closed curve measured with flat geodesics in the
/// universal cover: over breakpoint pairs within one period of the lift,
/// sizeLower is the largest geodesic length, width and height the largest
/// horizontal and vertical variation of the connecting geodesic. sizeUpper
/// is the length of one period.
inline SizeWidthReport cover_size_width(const UnfoldedBall& ball, const PLCurve& c) {
    SizeWidthReport r;
    auto L = lift_curve(ball, c, 2);
    std::size_t n = c.size();
    Rational lower{0};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j <= i + n; ++j) {
            Corridor sub;
            sub.tiles.assign(L.corridor.tiles.begin() + static_cast<std::ptrdiff_t>(L.at[i]),
                             L.corridor.tiles.begin() + static_cast<std::ptrdiff_t>(L.at[j] + 1));
            sub.exits.assign(L.corridor.exits.begin() + static_cast<std::ptrdiff_t>(L.at[i]),
                             L.corridor.exits.begin() + static_cast<std::ptrdiff_t>(L.at[j]));
            auto g = flat_geodesic(ball, L.points[i], L.points[j], sub);
            QuadNum w{0}, h{0};
            for (std::size_t k = 0; k + 1 < g.points.size(); ++k) {
                w += abs(g.points[k + 1].x - g.points[k].x);
                h += abs(g.points[k + 1].y - g.points[k].y);
            }
            r.width = max(r.width, w);
            r.height = max(r.height, h);
            lower = std::max(lower, g.length_lower);
        }
    r.size_lower = QuadNum(lower);
    r.size_upper = max(r.size_lower, QuadNum(curve_length(c).hi));
    return r;
}

}  // namespace flatlab
