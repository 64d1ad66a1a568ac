#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flatlab/bicorn.hpp"
#include "flatlab/geom.hpp"

namespace flatlab {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Primitive torus slope p/q, canonical with q > 0 or (p, q) = (1, 0).
struct Slope {
    long p{1};
    long q{0};
    auto operator<=>(const Slope&) const = default;
};

inline Slope make_slope(long p, long q) {
    if (std::gcd(p, q) != 1) throw GraphError("slope is not primitive");
    if (q < 0 || (q == 0 && p < 0)) {
        p = -p;
        q = -q;
    }
    return {p, q};
}

inline Slope slope_of(const std::vector<long>& cls) {
    if (cls.size() != 2) throw GraphError("slope needs a rank-2 class");
    return make_slope(cls[0], cls[1]);
}

inline long slope_det(const Slope& a, const Slope& b) { return a.p * b.q - a.q * b.p; }

namespace detail {

inline long ext_gcd(long a, long b, long& x, long& y) {
    if (b == 0) {
        x = a >= 0 ? 1 : -1;
        y = 0;
        return std::labs(a);
    }
    long x1, y1;
    long g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

inline long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace detail

/// Farey graph distance. An SL(2,Z) change of basis sends a to 1/0; the
/// distance to P/Q is then read off the ladder of Farey triangles crossed by
/// the hyperbolic geodesic from infinity to P/Q.
inline int farey_distance(const Slope& a, const Slope& b) {
    long r, s;
    // find (r, s) with a.p * s - a.q * r = 1
    long x, y;
    detail::ext_gcd(a.p, a.q, x, y);  // a.p * x + a.q * y = 1
    s = x;
    r = -y;
    // M = [[s, -r], [-q, p]] sends a to (1, 0)
    long P = s * b.p - r * b.q;
    long Q = -a.q * b.p + a.p * b.q;
    if (Q < 0) {
        P = -P;
        Q = -Q;
    }
    if (Q == 0) return 0;
    if (Q == 1) return 1;
    // rung between consecutive integers n < P/Q < n + 1
    long n = detail::floor_div(P, Q);
    long la = n, lb = 1, ra = n + 1, rb = 1;
    int dl = 1, dr = 1;
    while (true) {
        long ma = la + ra, mb = lb + rb;
        int dm = std::min(dl, dr) + 1;
        if (ma == P && mb == Q) return dm;
        // compare P/Q with the mediant
        if (P * mb < ma * Q) {
            ra = ma;
            rb = mb;
            dr = dm;
        } else {
            la = ma;
            lb = mb;
            dl = dm;
        }
    }
}

/// Breadth-first Farey distances from a among slopes of height at most
/// `max_height` (|p| and q bounded), up to depth max_depth.
inline std::map<Slope, int> farey_ball(const Slope& a, long max_height, int max_depth) {
    std::vector<Slope> verts;
    for (long q = 0; q <= max_height; ++q)
        for (long p = -max_height; p <= max_height; ++p)
            if (std::gcd(p, q) == 1 && (q > 0 || p == 1)) verts.push_back({p, q});
    std::map<Slope, int> dist{{a, 0}};
    std::deque<Slope> queue{a};
    while (!queue.empty()) {
        Slope u = queue.front();
        queue.pop_front();
        int du = dist[u];
        if (du >= max_depth) continue;
        for (const auto& v : verts) {
            if (std::labs(slope_det(u, v)) != 1 || dist.count(v)) continue;
            dist[v] = du + 1;
            queue.push_back(v);
        }
    }
    return dist;
}

inline std::optional<int> farey_distance_bfs(const Slope& a, const Slope& b, long max_height, int max_depth) {
    auto ball = farey_ball(a, max_height, max_depth);
    auto it = ball.find(b);
    if (it == ball.end()) return std::nullopt;
    return it->second;
}

// ---- distance bounds in the fine graph

struct DistanceBound {
    int lower{0};
    int upper{0};
    std::string method;
};

/// Farey distance blurred by pushoffs: the fine-graph calibration constant.
inline constexpr int kFareyCalibration = 2;

inline DistanceBound fine_distance_bounds(const HalfTranslationSurface& s, const PLCurve& a, const PLCurve& b,
                                          int calibration = kFareyCalibration) {
    if (same_point_set(a, b)) return {0, 0, "identical"};
    if (torus_lattice(s)) {
        // a nonzero algebraic intersection already rules out disjointness
        auto ha = homology_class(s, a).coords, hb = homology_class(s, b).coords;
        if (ha.size() == 2 && hb.size() == 2 && ha[0] * hb[1] != ha[1] * hb[0]) {
            int d = farey_distance(slope_of(ha), slope_of(hb));
            return {std::max(0, d - calibration), d + calibration, "farey"};
        }
    }
    auto res = intersections(s, a, b);
    bool disjoint = res.crossings.empty() && !res.raw_degeneracy;
    if (disjoint) return {0, 1, "disjoint"};
    if (torus_lattice(s)) {
        int d = farey_distance(slope_of(homology_class(s, a).coords), slope_of(homology_class(s, b).coords));
        return {std::max(0, d - calibration), d + calibration, "farey"};
    }
    auto path = bicorn_path(s, a, b);
    int up = static_cast<int>(path.curves.size()) - 1;
    int i = static_cast<int>(res.crossings.size());
    int lo = i <= 1 ? 0 : std::min(up, static_cast<int>(std::floor(std::log2(static_cast<double>(i)) / 2)));
    return {lo, up, "heuristic-log-intersection/bicorn-path"};
}

struct ProductInterval {
    Rational lower{0};
    Rational upper{0};
};

inline ProductInterval gromov_product(const DistanceBound& base_a, const DistanceBound& base_b, const DistanceBound& a_b) {
    ProductInterval r;
    r.lower = Rational(base_a.lower + base_b.lower - a_b.upper) / 2;
    r.upper = Rational(base_a.upper + base_b.upper - a_b.lower) / 2;
    if (r.lower < 0) r.lower = 0;
    if (r.upper < r.lower) r.upper = r.lower;
    return r;
}

inline ProductInterval gromov_product(const HalfTranslationSurface& s, const PLCurve& a, const PLCurve& b,
                                      const PLCurve& base) {
    return gromov_product(fine_distance_bounds(s, base, a), fine_distance_bounds(s, base, b), fine_distance_bounds(s, a, b));
}

// ---- D(L) and D(eps, B)

/// True iff the curve avoids every leaf segment in L (any contact counts).
inline bool in_D_of_L(const PLCurve& c, const std::vector<ChartSegment>& L) {
    if (L.empty()) return true;
    PLCurve l;
    l.segments = L;
    l.to_next.assign(L.size(), Isometry{});
    bool hit = false;
    detail::for_each_candidate_pair(c, l, false, [&](std::size_t i, std::size_t j) {
        if (hit) return;
        if (detail::segment_pair(c.segments[i].from, c.segments[i].to, l.segments[j].from, l.segments[j].to)) hit = true;
    });
    return !hit;
}

/// Width threshold c^(1/m), compared exactly as w^m <= c.
struct Threshold {
    QuadNum c{1};
    int m{1};

    bool admits(const QuadNum& w) const {
        QuadNum p{1};
        for (int i = 0; i < m; ++i) p *= w;
        return !(c < p);
    }
    Threshold doubled() const {
        QuadNum f{1};
        for (int i = 0; i < m; ++i) f *= QuadNum(2);
        return {c * f, m};
    }
    double approx() const { return std::pow(c.to_double(), 1.0 / m); }
};

struct WindowReport {
    bool pass{true};
    std::size_t from{0};  // breakpoint indices along the curve; to may exceed size()
    std::size_t to{0};
    QuadNum width{0};
};

/// Maximal breakpoint windows of size at most B, by two pointers over the
/// developed curve. Returns the widest; pass compares it with eps.
inline WindowReport in_D_eps_B(const HalfTranslationSurface& s, const PLCurve& c, const Threshold& eps, const QuadNum& B) {
    if (!torus_lattice(s)) throw GraphError("window sizes are implemented on flat tori");
    std::size_t n = c.size();
    auto d = develop(c, 0, 2);
    const auto& pts = d.points;
    QuadNum B2 = B * B;
    std::deque<std::size_t> xlo, xhi, ylo, yhi;
    auto push = [&](std::size_t j) {
        auto add = [&](std::deque<std::size_t>& q, auto better) {
            while (!q.empty() && !better(pts[q.back()], pts[j])) q.pop_back();
            q.push_back(j);
        };
        add(xlo, [](const Vec2& a, const Vec2& b) { return a.x < b.x; });
        add(xhi, [](const Vec2& a, const Vec2& b) { return b.x < a.x; });
        add(ylo, [](const Vec2& a, const Vec2& b) { return a.y < b.y; });
        add(yhi, [](const Vec2& a, const Vec2& b) { return b.y < a.y; });
    };
    auto pop_before = [&](std::size_t i) {
        for (auto* q : {&xlo, &xhi, &ylo, &yhi})
            while (!q->empty() && q->front() < i) q->pop_front();
    };
    WindowReport worst;
    std::size_t j = 0;  // window is [i, j]
    push(0);
    for (std::size_t i = 0; i < n; ++i) {
        if (j < i) {
            j = i;
            push(j);
        }
        pop_before(i);
        while (j + 1 <= i + n) {
            const Vec2& q = pts[j + 1];
            // farthest bounding-box corner accepts, any extreme point rejects
            QuadNum fx = max(abs(q.x - pts[xlo.front()].x), abs(pts[xhi.front()].x - q.x));
            QuadNum fy = max(abs(q.y - pts[ylo.front()].y), abs(pts[yhi.front()].y - q.y));
            bool fits;
            if (!(B2 < fx * fx + fy * fy)) {
                fits = true;
            } else {
                fits = true;
                for (auto* e : {&xlo, &xhi, &ylo, &yhi})
                    if (B2 < norm2(q - pts[e->front()])) fits = false;
                for (std::size_t k = i; fits && k <= j; ++k)
                    if (B2 < norm2(q - pts[k])) fits = false;
            }
            if (!fits) break;
            ++j;
            push(j);
        }
        QuadNum w = pts[xhi.front()].x - pts[xlo.front()].x;
        if (i == 0 || worst.width < w) worst = {true, i, j, w};
    }
    worst.pass = eps.admits(worst.width);
    return worst;
}

// ---- convergence certificate

struct ScheduleEntry {
    QuadNum B;
    Threshold eps;
    std::string label;
};

/// eps_k = 2^(-k/4), B_k = k for k = 1..kmax.
inline std::vector<ScheduleEntry> power_schedule(int kmax) {
    std::vector<ScheduleEntry> out;
    for (int k = 1; k <= kmax; ++k) {
        QuadNum c{1};
        for (int i = 0; i < k; ++i) c = c / QuadNum(2);
        out.push_back({QuadNum(k), {c, 4}, "2^(-" + std::to_string(k) + "/4)"});
    }
    return out;
}

struct IndexRecord {
    SizeWidthReport size;
    DistanceBound distance;  // from the base curve
    std::vector<long> homology;
    std::vector<WindowReport> windows;  // one per schedule entry
};

struct CertificateWitness {
    std::size_t index{0};
    std::size_t entry{0};
    WindowReport window;
};

struct ConvergenceReport {
    std::vector<IndexRecord> records;
    std::vector<std::optional<std::size_t>> stable_from;  // N(k) per entry
    bool stabilized{false};
    bool size_diverges{false};
    bool distance_diverges{false};
    bool pass{false};
    std::optional<CertificateWitness> witness;
    std::vector<std::string> failures;
};

/// Certificate that a curve sequence converges toward the boundary point of
/// the vertical foliation: every schedule entry stabilizes at least two
/// indices before the end, sizes grow, and distances from the base grow.
inline ConvergenceReport convergence_certificate(const HalfTranslationSurface& s, const std::vector<PLCurve>& seq,
                                                 const std::vector<ScheduleEntry>& schedule, const PLCurve& base,
                                                 std::size_t burn_in = 3) {
    ConvergenceReport rep;
    std::size_t n = seq.size();
    for (const auto& c : seq) {
        IndexRecord r;
        r.size = plane_size_width(c);
        r.homology = homology_class(s, c).coords;
        r.distance = fine_distance_bounds(s, base, c);
        for (const auto& e : schedule) r.windows.push_back(in_D_eps_B(s, c, e.eps, e.B));
        rep.records.push_back(std::move(r));
    }
    rep.stabilized = true;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        std::optional<std::size_t> last_fail;
        for (std::size_t i = 0; i < n; ++i)
            if (!rep.records[i].windows[k].pass) last_fail = i;
        std::size_t N = last_fail ? *last_fail + 1 : 0;
        if (N + 2 <= n) {
            rep.stable_from.push_back(N);
        } else {
            rep.stable_from.push_back(std::nullopt);
            if (rep.stabilized) {
                std::size_t wi = last_fail.value_or(n - 1);
                rep.witness = CertificateWitness{wi, k, rep.records[wi].windows[k]};
                rep.failures.push_back("schedule entry " + schedule[k].label + " does not stabilize");
            }
            rep.stabilized = false;
        }
    }
    std::size_t start = std::min(burn_in, n == 0 ? 0 : n - 1);
    rep.size_diverges = n >= 2;
    rep.distance_diverges = n >= 2;
    for (std::size_t i = start; i + 1 < n; ++i) {
        if (rep.records[i + 1].size.size_lower < rep.records[i].size.size_lower) rep.size_diverges = false;
        if (rep.records[i + 1].distance.lower < rep.records[i].distance.lower) rep.distance_diverges = false;
    }
    if (n >= 2) {
        if (!(rep.records[start].size.size_upper < rep.records[n - 1].size.size_lower)) rep.size_diverges = false;
        if (!(rep.records[start].distance.lower < rep.records[n - 1].distance.lower)) rep.distance_diverges = false;
    }
    if (!rep.size_diverges) rep.failures.push_back("size does not diverge");
    if (!rep.distance_diverges) rep.failures.push_back("distance lower bounds do not grow");
    rep.pass = rep.stabilized && rep.size_diverges && rep.distance_diverges;
    return rep;
}

}  // namespace flatlab
