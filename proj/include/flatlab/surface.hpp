#pragma once

// Bifoliated singular flat surfaces as polygon gluings with charts z -> +-z + c.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flatlab/quadnum.hpp"
#include "flatlab/vec.hpp"

namespace flatlab {

class SurfaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class GlueKind { translation, flip };

struct EdgeRef {
    int poly{0};
    int edge{0};
    friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

struct CornerRef {
    int poly{0};
    int vertex{0};
    friend auto operator<=>(const CornerRef&, const CornerRef&) = default;
};

struct Polygon {
    std::vector<Vec2> vertices;  // counterclockwise

    int size() const { return static_cast<int>(vertices.size()); }
    const Vec2& vertex(int k) const { return vertices[static_cast<std::size_t>(((k % size()) + size()) % size())]; }
    Vec2 edge_vector(int k) const { return vertex(k + 1) - vertex(k); }
    QuadNum twice_area() const {
        QuadNum s{0};
        for (int k = 0; k < size(); ++k) s += cross(vertex(k), vertex(k + 1));
        return s;
    }
};

struct Gluing {
    EdgeRef a;
    EdgeRef b;
    GlueKind kind{GlueKind::translation};
};

/// One side of a gluing as seen from a given edge.
struct EdgePartner {
    EdgeRef other;
    Isometry to_other;  // chart of this polygon -> chart of the other polygon
    int gluing{0};
    bool first{true};  // this edge is `a` of its gluing record
};

struct ConePoint {
    int id{0};
    std::vector<CornerRef> orbit;  // ccw order around the point
    int angle_multiple{2};         // cone angle = angle_multiple * pi
    bool singular() const { return angle_multiple != 2; }
};

/// Affine automorphism data as declared in a surface document.
struct AutomorphismDecl {
    std::string name;
    std::optional<std::array<long, 4>> lattice;  // integer action on the lattice basis (row-major)
    std::optional<std::array<QuadNum, 4>> matrix;  // chart linear part (row-major)
    std::vector<int> permutation;                  // polygon images, for polygon-permuting symmetries
};

class HalfTranslationSurface {
public:
    HalfTranslationSurface() = default;

    /// Builds and validates; throws SurfaceError naming the violated condition.
    HalfTranslationSurface(std::int64_t field, std::vector<Polygon> polygons, std::vector<Gluing> gluings,
                           std::string name = {})
        : field_(field), name_(std::move(name)), polygons_(std::move(polygons)), gluings_(std::move(gluings)) {
        validate_polygons();
        build_partners();
        check_connected();
        compute_cone_points();
    }

    std::int64_t field() const { return field_; }
    const std::string& name() const { return name_; }
    const std::vector<Polygon>& polygons() const { return polygons_; }
    const Polygon& polygon(int i) const { return polygons_.at(static_cast<std::size_t>(i)); }
    int polygon_count() const { return static_cast<int>(polygons_.size()); }
    const std::vector<Gluing>& gluings() const { return gluings_; }
    const EdgePartner& partner(EdgeRef e) const {
        return partners_.at(static_cast<std::size_t>(e.poly)).at(static_cast<std::size_t>(e.edge));
    }
    const std::vector<ConePoint>& all_vertices() const { return vertices_; }
    std::vector<AutomorphismDecl>& automorphisms() { return autos_; }
    const std::vector<AutomorphismDecl>& automorphisms() const { return autos_; }

    /// Vertex orbit id of a polygon corner.
    int vertex_of(CornerRef c) const {
        return corner_vertex_.at(static_cast<std::size_t>(c.poly)).at(static_cast<std::size_t>(wrap(c.poly, c.vertex)));
    }

    /// Cone points with angle != 2pi.
    std::vector<ConePoint> cone_points() const {
        std::vector<ConePoint> out;
        for (const auto& v : vertices_)
            if (v.singular()) out.push_back(v);
        return out;
    }

    /// The angle-pi points.
    std::vector<ConePoint> pi_points() const {
        std::vector<ConePoint> out;
        for (const auto& v : vertices_)
            if (v.angle_multiple == 1) out.push_back(v);
        return out;
    }

    int euler_characteristic() const {
        return static_cast<int>(vertices_.size()) - static_cast<int>(gluings_.size()) + polygon_count();
    }
    int genus() const { return (2 - euler_characteristic()) / 2; }

    /// Sum over vertices of (2 - k), i.e. curvature in units of pi.
    long curvature_in_pi() const {
        long s = 0;
        for (const auto& v : vertices_) s += 2 - v.angle_multiple;
        return s;
    }
    bool gauss_bonnet_holds() const { return curvature_in_pi() == 2L * euler_characteristic(); }

    bool is_translation_surface() const {
        return std::all_of(gluings_.begin(), gluings_.end(), [](const Gluing& g) { return g.kind == GlueKind::translation; });
    }

    QuadNum area() const {
        QuadNum s{0};
        for (const auto& p : polygons_) s += p.twice_area();
        return s / QuadNum(2);
    }

    /// Corner reached by rotating ccw around the shared vertex (exits through edge vertex-1).
    CornerRef next_ccw(CornerRef c) const {
        const auto& p = partner({c.poly, wrap(c.poly, c.vertex - 1)});
        return {p.other.poly, p.other.edge};
    }
    /// Corner reached by rotating cw (exits through edge `vertex`).
    CornerRef next_cw(CornerRef c) const {
        const auto& p = partner({c.poly, wrap(c.poly, c.vertex)});
        return {p.other.poly, wrap(p.other.poly, p.other.edge + 1)};
    }

    int wrap(int poly, int k) const {
        int n = polygon(poly).size();
        return ((k % n) + n) % n;
    }

    /// Sector directions at a corner: ccw sweep from `out` (along edge k) to `in` (back along edge k-1).
    std::pair<Vec2, Vec2> corner_sector(CornerRef c) const {
        const auto& p = polygon(c.poly);
        return {p.edge_vector(c.vertex), p.vertex(c.vertex - 1) - p.vertex(c.vertex)};
    }

private:
    void validate_polygons() {
        if (field_ < 0 || (field_ != 0 && !is_square_free(field_)))
            throw SurfaceError("field context must be a positive square-free integer");
        if (polygons_.empty()) throw SurfaceError("surface has no polygons");
        for (std::size_t i = 0; i < polygons_.size(); ++i) {
            const auto& p = polygons_[i];
            auto where = "polygon " + std::to_string(i);
            if (p.size() < 3) throw SurfaceError(where + " has fewer than 3 vertices");
            for (const auto& v : p.vertices) {
                for (const auto* q : {&v.x, &v.y})
                    if (!q->is_rational() && q->context() != field_)
                        throw SurfaceError(where + " has a coordinate outside the declared field");
            }
            if (p.twice_area().sign() <= 0) throw SurfaceError(where + " is not counterclockwise");
            for (int k = 0; k < p.size(); ++k)
                if (p.edge_vector(k) == Vec2{0, 0}) throw SurfaceError(where + " has a zero-length edge");
            // simplicity: non-adjacent edges are disjoint
            int n = p.size();
            for (int a = 0; a < n; ++a)
                for (int b = a + 2; b < n; ++b) {
                    if (a == 0 && b == n - 1) continue;
                    if (segments_touch(p.vertex(a), p.vertex(a + 1), p.vertex(b), p.vertex(b + 1)))
                        throw SurfaceError(where + " is not simple (edges " + std::to_string(a) + " and " + std::to_string(b) + ")");
                }
        }
    }

    static bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
        int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
        if (o1 * o2 < 0 && o3 * o4 < 0) return true;
        auto on = [](const Vec2& p, const Vec2& q, const Vec2& r) {
            return orient(p, q, r) == 0 && dot(r - p, r - q).sign() <= 0;
        };
        return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
    }

    void build_partners() {
        partners_.assign(polygons_.size(), {});
        std::vector<std::vector<bool>> seen(polygons_.size());
        for (std::size_t i = 0; i < polygons_.size(); ++i) {
            partners_[i].resize(static_cast<std::size_t>(polygons_[i].size()));
            seen[i].assign(static_cast<std::size_t>(polygons_[i].size()), false);
        }
        auto check_ref = [&](EdgeRef e) {
            if (e.poly < 0 || e.poly >= polygon_count() || e.edge < 0 || e.edge >= polygon(e.poly).size())
                throw SurfaceError("gluing names nonexistent edge " + std::to_string(e.poly) + "." + std::to_string(e.edge));
            auto s = seen[static_cast<std::size_t>(e.poly)][static_cast<std::size_t>(e.edge)];
            if (s) throw SurfaceError("edge " + std::to_string(e.poly) + "." + std::to_string(e.edge) + " is glued twice");
            s = true;
        };
        for (std::size_t gi = 0; gi < gluings_.size(); ++gi) {
            const auto& g = gluings_[gi];
            auto tag = "gluing (" + std::to_string(g.a.poly) + "." + std::to_string(g.a.edge) + ", " +
                       std::to_string(g.b.poly) + "." + std::to_string(g.b.edge) + ")";
            if (g.a == g.b) throw SurfaceError(tag + " glues an edge to itself");
            check_ref(g.a);
            check_ref(g.b);
            Vec2 ea = polygon(g.a.poly).edge_vector(g.a.edge);
            Vec2 eb = polygon(g.b.poly).edge_vector(g.b.edge);
            int s = g.kind == GlueKind::translation ? 1 : -1;
            if (!parallel(ea, eb)) throw SurfaceError(tag + " joins non-parallel edges");
            if (norm2(ea) != norm2(eb)) throw SurfaceError(tag + " joins edges of mismatched length");
            // orientability: translation edges are opposite vectors, flip edges equal vectors
            if (!(eb == (s > 0 ? -ea : ea)))
                throw SurfaceError(tag + " has the wrong gluing type for its edge orientations");
            // v_k(a) -> w_{m+1}(b)
            Isometry ab{s, polygon(g.b.poly).vertex(g.b.edge + 1) - (s > 0 ? polygon(g.a.poly).vertex(g.a.edge)
                                                                             : -polygon(g.a.poly).vertex(g.a.edge))};
            partners_[static_cast<std::size_t>(g.a.poly)][static_cast<std::size_t>(g.a.edge)] = {g.b, ab, static_cast<int>(gi), true};
            partners_[static_cast<std::size_t>(g.b.poly)][static_cast<std::size_t>(g.b.edge)] = {g.a, ab.inverse(), static_cast<int>(gi), false};
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            for (std::size_t k = 0; k < seen[i].size(); ++k)
                if (!seen[i][k]) throw SurfaceError("edge " + std::to_string(i) + "." + std::to_string(k) + " is not glued");
    }

    void check_connected() {
        std::vector<bool> reached(polygons_.size(), false);
        std::queue<int> q;
        q.push(0);
        reached[0] = true;
        while (!q.empty()) {
            int p = q.front();
            q.pop();
            for (const auto& e : partners_[static_cast<std::size_t>(p)]) {
                if (!reached[static_cast<std::size_t>(e.other.poly)]) {
                    reached[static_cast<std::size_t>(e.other.poly)] = true;
                    q.push(e.other.poly);
                }
            }
        }
        for (std::size_t i = 0; i < reached.size(); ++i)
            if (!reached[i]) throw SurfaceError("gluing graph is disconnected (polygon " + std::to_string(i) + " unreachable)");
    }

    void compute_cone_points() {
        corner_vertex_.assign(polygons_.size(), {});
        for (std::size_t i = 0; i < polygons_.size(); ++i)
            corner_vertex_[i].assign(static_cast<std::size_t>(polygons_[i].size()), -1);
        static const Vec2 kEast{1, 0}, kWest{-1, 0};
        for (int p = 0; p < polygon_count(); ++p) {
            for (int k = 0; k < polygon(p).size(); ++k) {
                if (corner_vertex_[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] >= 0) continue;
                ConePoint cp;
                cp.id = static_cast<int>(vertices_.size());
                CornerRef start{p, k}, c = start;
                int half_turns = 0;
                Isometry to_start{};  // chart of current corner -> chart of start corner
                Vec2 first_dir = corner_sector(start).first;
                do {
                    corner_vertex_[static_cast<std::size_t>(c.poly)][static_cast<std::size_t>(c.vertex)] = cp.id;
                    cp.orbit.push_back(c);
                    auto [u, v] = corner_sector(c);
                    half_turns += static_cast<int>(in_sweep(u, v, kEast)) + static_cast<int>(in_sweep(u, v, kWest));
                    const auto& part = partner({c.poly, wrap(c.poly, c.vertex - 1)});
                    to_start = to_start.after(part.to_other.inverse());
                    c = next_ccw(c);
                    if (cp.orbit.size() > 100000) throw SurfaceError("vertex orbit walk does not close");
                } while (c != start);
                // holonomy around the vertex must be +-1 for an angle multiple of pi
                Vec2 back = to_start.linear(corner_sector(start).first);
                if (!parallel(back, first_dir)) throw SurfaceError("cone angle is not a multiple of pi");
                if (half_turns < 1) throw SurfaceError("degenerate cone angle");
                cp.angle_multiple = half_turns;
                vertices_.push_back(std::move(cp));
            }
        }
        if (!gauss_bonnet_holds()) throw SurfaceError("Gauss-Bonnet check failed");
    }

    std::int64_t field_{0};
    std::string name_;
    std::vector<Polygon> polygons_;
    std::vector<Gluing> gluings_;
    std::vector<std::vector<EdgePartner>> partners_;
    std::vector<std::vector<int>> corner_vertex_;
    std::vector<ConePoint> vertices_;
    std::vector<AutomorphismDecl> autos_;
};

// ---- surface documents

namespace detail {

inline std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

inline EdgeRef parse_edge_ref(const std::string& t, const std::string& where) {
    auto dot = t.find('.');
    if (dot == std::string::npos) throw SurfaceError(where + ": expected <poly>.<edge>, got '" + t + "'");
    try {
        return {std::stoi(t.substr(0, dot)), std::stoi(t.substr(dot + 1))};
    } catch (const std::exception&) {
        throw SurfaceError(where + ": expected <poly>.<edge>, got '" + t + "'");
    }
}

}  // namespace detail

/// Parse the structured text surface format.
inline HalfTranslationSurface parse_surface(const std::string& text, const std::string& name = {}) {
    std::istringstream in(text);
    std::int64_t field = -1;
    std::vector<Polygon> polys;
    std::vector<Gluing> glues;
    std::vector<AutomorphismDecl> autos;
    enum class Block { none, polygon, automorphism } block = Block::none;
    int lineno = 0;
    auto loc = [&] { return (name.empty() ? std::string("line ") : name + ":") + std::to_string(lineno); };
    auto num = [&](const std::string& t) {
        try {
            return parse_quadnum(t, field > 0 ? field : 0);
        } catch (const std::exception& e) {
            throw SurfaceError(loc() + ": " + e.what());
        }
    };
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        auto hash = raw.find('#');
        std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto tok = detail::split_ws(line);
        if (block == Block::polygon) {
            if (tok[0] == "end") {
                block = Block::none;
                continue;
            }
            if (tok.size() != 2) throw SurfaceError(loc() + ": polygon vertex needs two coordinates");
            polys.back().vertices.push_back({num(tok[0]), num(tok[1])});
            continue;
        }
        if (block == Block::automorphism) {
            auto& a = autos.back();
            if (tok[0] == "end") {
                block = Block::none;
            } else if (tok[0] == "lattice" && tok.size() == 5) {
                std::array<long, 4> m{};
                for (int i = 0; i < 4; ++i) m[static_cast<std::size_t>(i)] = std::stol(tok[static_cast<std::size_t>(i) + 1]);
                a.lattice = m;
            } else if (tok[0] == "matrix" && tok.size() == 5) {
                a.matrix = std::array<QuadNum, 4>{num(tok[1]), num(tok[2]), num(tok[3]), num(tok[4])};
            } else if (tok[0] == "permutation") {
                for (std::size_t i = 1; i < tok.size(); ++i) a.permutation.push_back(std::stoi(tok[i]));
            } else {
                throw SurfaceError(loc() + ": unknown automorphism record '" + tok[0] + "'");
            }
            continue;
        }
        if (tok[0] == "field") {
            if (tok.size() != 2) throw SurfaceError(loc() + ": field needs one integer");
            field = std::stoll(tok[1]);
            if (!is_square_free(field)) throw SurfaceError(loc() + ": field context must be square-free");
        } else if (tok[0] == "polygon") {
            if (field < 0) throw SurfaceError(loc() + ": polygon before field header");
            polys.emplace_back();
            block = Block::polygon;
        } else if (tok[0] == "glue") {
            // glue (<poly>.<edge>, <poly>.<edge>, translation|flip)
            std::string rest = line.substr(4);
            for (char& ch : rest)
                if (ch == '(' || ch == ')' || ch == ',') ch = ' ';
            auto parts = detail::split_ws(rest);
            if (parts.size() != 3) throw SurfaceError(loc() + ": glue needs (<poly>.<edge>, <poly>.<edge>, kind)");
            Gluing g{detail::parse_edge_ref(parts[0], loc()), detail::parse_edge_ref(parts[1], loc()), GlueKind::translation};
            if (parts[2] == "flip") g.kind = GlueKind::flip;
            else if (parts[2] != "translation") throw SurfaceError(loc() + ": unknown gluing kind '" + parts[2] + "'");
            glues.push_back(g);
        } else if (tok[0] == "automorphism") {
            autos.push_back({tok.size() > 1 ? tok[1] : std::string("f"), {}, {}, {}});
            block = Block::automorphism;
        } else {
            throw SurfaceError(loc() + ": unknown record '" + tok[0] + "'");
        }
    }
    if (block != Block::none) throw SurfaceError((name.empty() ? std::string("document") : name) + ": unterminated block");
    if (field < 0) throw SurfaceError("missing field header");
    HalfTranslationSurface s(field, std::move(polys), std::move(glues), name);
    s.automorphisms() = std::move(autos);
    return s;
}

inline HalfTranslationSurface load_surface(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SurfaceError("cannot open surface file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    auto slash = path.find_last_of('/');
    return parse_surface(ss.str(), slash == std::string::npos ? path : path.substr(slash + 1));
}

/// Serialize back to the document format.
inline std::string render_surface(const HalfTranslationSurface& s) {
    std::ostringstream os;
    os << "field " << s.field() << "\n";
    for (const auto& p : s.polygons()) {
        os << "polygon\n";
        for (const auto& v : p.vertices) os << "  " << render(v.x) << " " << render(v.y) << "\n";
        os << "end\n";
    }
    for (const auto& g : s.gluings())
        os << "glue (" << g.a.poly << "." << g.a.edge << ", " << g.b.poly << "." << g.b.edge << ", "
           << (g.kind == GlueKind::translation ? "translation" : "flip") << ")\n";
    return os.str();
}

// ---- P-resolving covers

struct ResolvingCover {
    HalfTranslationSurface cover;
    int degree{1};
    std::vector<int> base_polygon;  // cover polygon -> base polygon
    std::vector<int> sheet;         // cover polygon -> sheet label
    std::vector<int> branch_points;  // base vertex ids with local degree 2

    /// Cover polygon index of (base polygon, sheet).
    int lift(int base_poly, int sheet_label) const { return degree == 1 ? base_poly : 2 * base_poly + sheet_label; }
    /// Chart of the base polygon -> chart of the given lifted polygon.
    Isometry chart_to_sheet(int sheet_label) const { return sheet_label == 0 ? Isometry{} : Isometry{-1, {0, 0}}; }
};

/// Canonical degree-2 resolving cover: sheets track the chart sign, so every
/// flip gluing swaps sheets and odd-angle cone points become branch points.
/// Returns the identity cover when nothing needs resolving.
inline ResolvingCover build_resolving_cover(const HalfTranslationSurface& s) {
    bool needs = std::any_of(s.all_vertices().begin(), s.all_vertices().end(),
                             [](const ConePoint& c) { return c.angle_multiple % 2 == 1; });
    ResolvingCover rc;
    if (!needs) {
        rc.cover = s;
        rc.degree = 1;
        for (int i = 0; i < s.polygon_count(); ++i) {
            rc.base_polygon.push_back(i);
            rc.sheet.push_back(0);
        }
        return rc;
    }
    std::vector<Polygon> polys;
    for (int i = 0; i < s.polygon_count(); ++i) {
        polys.push_back(s.polygon(i));
        Polygon neg;
        for (const auto& v : s.polygon(i).vertices) neg.vertices.push_back(-v);
        polys.push_back(std::move(neg));
        rc.base_polygon.insert(rc.base_polygon.end(), {i, i});
        rc.sheet.insert(rc.sheet.end(), {0, 1});
    }
    auto lift = [](int p, int sh) { return 2 * p + sh; };
    std::vector<Gluing> glues;
    for (const auto& g : s.gluings()) {
        for (int sh = 0; sh < 2; ++sh) {
            int other = g.kind == GlueKind::translation ? sh : 1 - sh;
            glues.push_back({{lift(g.a.poly, sh), g.a.edge}, {lift(g.b.poly, other), g.b.edge}, GlueKind::translation});
        }
    }
    rc.degree = 2;
    rc.cover = HalfTranslationSurface(s.field(), std::move(polys), std::move(glues), s.name() + "~");
    // base vertices covered by a single point are branch points
    for (const auto& v : s.all_vertices()) {
        const auto& c0 = v.orbit.front();
        int up0 = rc.cover.vertex_of({lift(c0.poly, 0), c0.vertex});
        int up1 = rc.cover.vertex_of({lift(c0.poly, 1), c0.vertex});
        if (up0 == up1) rc.branch_points.push_back(v.id);
    }
    int expected_chi = 2 * s.euler_characteristic() - static_cast<int>(rc.branch_points.size());
    if (rc.cover.euler_characteristic() != expected_chi)
        throw std::logic_error("inconsistent sheet assignment: Riemann-Hurwitz fails for the resolving cover");
    return rc;
}

}  // namespace flatlab
