#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <thread>
#include <tuple>

#include "flatlab/bicorn.hpp"
#include "flatlab/flow.hpp"
#include "flatlab/graphdist.hpp"

namespace flatlab {

class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- scheduling

/// Runs fn(chunk) for chunk = 0..chunks-1 on up to `jobs` threads. Results are
/// stored by chunk index, so merging in index order does not depend on jobs.
template <class Fn>
void for_each_chunk(std::size_t chunks, int jobs, Fn fn) {
    std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(chunks, static_cast<std::size_t>(std::max(1, jobs))));
    if (workers == 1) {
        for (std::size_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t c = next++; c < chunks; c = next++) fn(c);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Per-chunk generator: depends only on the run seed and the chunk index.
inline std::mt19937_64 chunk_rng(std::uint64_t seed, std::size_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(chunk),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
}

inline constexpr std::size_t kChunk = 50;  // trials per chunk

inline std::size_t chunk_count(int trials) { return (static_cast<std::size_t>(std::max(0, trials)) + kChunk - 1) / kChunk; }
inline int chunk_trials(int trials, std::size_t c) {
    return static_cast<int>(std::min<std::size_t>(kChunk, static_cast<std::size_t>(trials) - c * kChunk));
}

// ---- transversals

/// Closed horizontal circle through the middle of a torus whose first lattice
/// vector is horizontal.
inline Transversal horizontal_circle(const HalfTranslationSurface& s) {
    auto L = torus_lattice(s);
    if (!L || L->w1.y.sign() != 0 || L->w1.x.sign() <= 0)
        throw ExperimentError("no default horizontal circle on this surface; pass --transversal");
    Vec2 mid = L->origin + QuadNum(Rational(1, 2)) * L->w2;
    return horizontal_transversal(s, {0, mid}, L->w1.x);
}

/// "poly:x,y:length" is a horizontal transversal starting at (x, y) in polygon poly.
inline Transversal parse_transversal(const HalfTranslationSurface& s, const std::string& text) {
    auto fail = [&](const std::string& why) { throw ExperimentError("--transversal '" + text + "': " + why); };
    auto c1 = text.find(':');
    auto c2 = text.rfind(':');
    if (c1 == std::string::npos || c2 == c1) fail("expected poly:x,y:length");
    auto comma = text.find(',', c1);
    if (comma == std::string::npos || comma > c2) fail("expected poly:x,y:length");
    int poly = 0;
    try {
        poly = std::stoi(text.substr(0, c1));
    } catch (const std::exception&) {
        fail("bad polygon index");
    }
    if (poly < 0 || poly >= s.polygon_count()) fail("polygon index out of range");
    try {
        QuadNum x = parse_quadnum(text.substr(c1 + 1, comma - c1 - 1), s.field());
        QuadNum y = parse_quadnum(text.substr(comma + 1, c2 - comma - 1), s.field());
        QuadNum len = parse_quadnum(text.substr(c2 + 1), s.field());
        if (len.sign() <= 0) fail("length must be positive");
        return horizontal_transversal(s, {poly, {x, y}}, len);
    } catch (const ParseError& e) {
        fail(e.what());
    }
    return {};
}

// ---- rotation orbits

/// Continued-fraction denominators q_0 = 1 < q_1 < ... <= limit of x in (0, 1/2].
inline std::vector<long> convergent_denominators(QuadNum x, long limit) {
    std::vector<long> q{1};
    long qm = 0;
    while (x.sign() > 0) {
        QuadNum inv = QuadNum(1) / x;
        long a = inv.floor().get_si();
        long next = a * q.back() + qm;
        if (next > limit) break;
        qm = q.back();
        q.push_back(next);
        x = inv - QuadNum(a);
    }
    return q;
}

struct OrbitReport {
    bool rotation{false};          // two-interval exchange of a closed circle
    QuadNum rotation_number{0};    // distance moved per step, as a fraction of the circle, in (0, 1/2]
    long orbit_length{0};
    int max_gap_values{0};         // over all prefixes
    long first_violation{0};       // prefix with more than three gaps, or 0
    std::vector<long> near_returns;   // n where the circle distance to x0 is a new minimum
    std::vector<long> denominators;   // convergent denominators up to the orbit length
    bool three_gap{false};
    bool returns_match{false};
};

/// Orbit of x0 under the exchange with the gap structure tracked at every prefix.
inline OrbitReport rotation_orbit(const IntervalExchange& iet, const QuadNum& x0, long n) {
    OrbitReport rep;
    const QuadNum len = iet.total_length();
    rep.orbit_length = n;
    rep.rotation = iet.transversal.closed && iet.intervals.size() == 2 && !iet.intervals[0].flipped && !iet.intervals[1].flipped;
    std::set<QuadNum> pts{x0};
    std::map<QuadNum, long> gaps{{len, 1}};
    auto add_gap = [&](const QuadNum& g) { ++gaps[g]; };
    auto drop_gap = [&](const QuadNum& g) {
        auto it = gaps.find(g);
        if (--it->second == 0) gaps.erase(it);
    };
    auto circ = [&](const QuadNum& d) {
        QuadNum m = d.sign() < 0 ? d + len : d;
        return min(m, len - m);
    };
    QuadNum best = len;
    QuadNum x = x0;
    for (long i = 1; i <= n; ++i) {
        x = iet.apply(x);
        if (i == 1) rep.rotation_number = circ(x - x0) / len;
        if (!pts.insert(x).second) break;  // periodic
        auto it = pts.find(x);
        auto next = std::next(it) == pts.end() ? pts.begin() : std::next(it);
        auto prev = it == pts.begin() ? std::prev(pts.end()) : std::prev(it);
        QuadNum old = *next - *prev;
        if (old.sign() <= 0) old += len;
        QuadNum left = x - *prev, right = *next - x;
        if (left.sign() < 0) left += len;
        if (right.sign() < 0) right += len;
        drop_gap(old);
        add_gap(left);
        add_gap(right);
        int distinct = static_cast<int>(gaps.size());
        rep.max_gap_values = std::max(rep.max_gap_values, distinct);
        if (distinct > 3 && rep.first_violation == 0) rep.first_violation = i;
        QuadNum d = circ(x - x0);
        if (d < best) {
            best = d;
            rep.near_returns.push_back(i);
        }
    }
    rep.three_gap = rep.first_violation == 0;
    if (rep.rotation) rep.denominators = convergent_denominators(rep.rotation_number, n);
    rep.returns_match = rep.rotation && rep.near_returns == rep.denominators;
    return rep;
}

// ---- curve sequences

/// C_k: the vertical leaf from c0 closed after F_k returns, k = first..last.
inline std::vector<PLCurve> fibonacci_closings(const HalfTranslationSurface& s, const Transversal& t, const QuadNum& c0,
                                               int first, int last, const QuadNum& cap) {
    std::vector<PLCurve> out;
    long f0 = 0, f1 = 1;  // F_{k-1}, F_k with F_1 = 1
    for (int k = 1; k <= last; ++k) {
        if (k >= first) out.push_back(close_at_return(s, t, c0, static_cast<int>(f1), cap).curve);
        long f2 = f0 + f1;
        f0 = f1;
        f1 = f2;
    }
    return out;
}

inline long fibonacci(int k) {
    long a = 0, b = 1;
    for (int i = 0; i < k; ++i) {
        long c = a + b;
        a = b;
        b = c;
    }
    return a;
}

/// Straight loop of lattice class (p, q) through lattice point (a, b) of a torus.
inline PLCurve lattice_loop(const HalfTranslationSurface& s, long p, long q, const Rational& a, const Rational& b) {
    auto L = torus_lattice(s);
    if (!L) throw ExperimentError("straight loops need a one-parallelogram torus");
    return straight_loop(s, p, q, L->origin + QuadNum(a) * L->w1 + QuadNum(b) * L->w2);
}

// ---- bicorn checks

using BicornKey = std::tuple<std::size_t, std::size_t, bool>;

/// Every ordered crossing pair and direction, assembled and tested geometrically.
inline std::set<BicornKey> brute_force_bicorns(const HalfTranslationSurface& s, const PLCurve& a, const PLCurve& b,
                                               const std::vector<Crossing>& xs) {
    std::set<BicornKey> out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (i == j) continue;
            for (bool fwd : {true, false}) {
                auto c = detail::bicorn_curve(a, b, xs, i, j, fwd);
                if (!is_simple(c).simple) continue;
                if (!homology_class(s, c).nonseparating) continue;
                out.insert({i, j, fwd});
            }
        }
    return out;
}

namespace detail {

inline bool on_curve(const PLCurve& c, const ChartSegment& g) {
    for (const auto& h : c.segments)
        if (h.poly == g.poly && orient(h.from, h.to, g.from) == 0 && orient(h.from, h.to, g.to) == 0 &&
            on_segment(g.from, h.from, h.to) && on_segment(g.to, h.from, h.to))
            return true;
    return false;
}

}  // namespace detail

/// Number of maximal runs of segments lying on alpha and on beta, cyclically.
inline std::pair<int, int> parent_runs(const PLCurve& c, const PLCurve& a, const PLCurve& b) {
    std::vector<int> side;
    for (const auto& g : c.segments) {
        bool in_a = detail::on_curve(a, g), in_b = detail::on_curve(b, g);
        if (in_a == in_b) return {-1, -1};
        side.push_back(in_a ? 0 : 1);
    }
    int ra = 0, rb = 0;
    for (std::size_t i = 0; i < side.size(); ++i)
        if (side[i] != side[(i + side.size() - 1) % side.size()]) (side[i] == 0 ? ra : rb)++;
    if (ra == 0 && rb == 0) (side.empty() || side[0] == 0 ? ra : rb) = 1;
    return {ra, rb};
}

struct SlopePair {
    long p1, q1, p2, q2;
    long intersection() const { return std::labs(p1 * q2 - q1 * p2); }
};

template <class Rng>
std::pair<long, long> random_primitive(Rng& rng, long range) {
    std::uniform_int_distribution<long> d(-range, range);
    while (true) {
        long p = d(rng), q = d(rng);
        if (std::gcd(p, q) == 1) return {p, q};
    }
}

/// Random slope pair with 1 <= |det| <= max_intersections.
template <class Rng>
SlopePair random_slope_pair(Rng& rng, long range, long max_intersections) {
    while (true) {
        auto [p1, q1] = random_primitive(rng, range);
        auto [p2, q2] = random_primitive(rng, range);
        SlopePair sp{p1, q1, p2, q2};
        long d = sp.intersection();
        if (d >= 1 && d <= max_intersections) return sp;
    }
}

template <class Rng>
Rational random_coordinate(Rng& rng) {
    std::uniform_int_distribution<long> u(1, 996);
    return Rational(u(rng), 997);
}

struct FuzzTrial {
    SlopePair slopes;
    std::size_t crossings{0};
    std::size_t bicorns{0};
    bool simple{true};
    bool essential{true};
    bool one_arc_each{true};
    std::optional<bool> matches_brute_force;
    bool ok() const { return simple && essential && one_arc_each && matches_brute_force.value_or(true); }
};

template <class Rng>
FuzzTrial bicorn_fuzz_trial(const HalfTranslationSurface& s, Rng& rng, long max_intersections, long brute_limit) {
    FuzzTrial t;
    t.slopes = random_slope_pair(rng, std::max<long>(2, max_intersections), max_intersections);
    auto a = lattice_loop(s, t.slopes.p1, t.slopes.q1, random_coordinate(rng), random_coordinate(rng));
    auto b = lattice_loop(s, t.slopes.p2, t.slopes.q2, random_coordinate(rng), random_coordinate(rng));
    auto set = bicorns(s, a, b);
    t.crossings = set.crossings.size();
    t.bicorns = set.bicorns.size();
    std::set<BicornKey> fast;
    for (const auto& bc : set.bicorns) {
        fast.insert({bc.a_from, bc.a_to, bc.b_forward});
        if (!is_simple(bc.curve).simple || !check_curve(s, bc.curve).empty()) t.simple = false;
        if (!bc.nonseparating || !homology_class(s, bc.curve).nonseparating) t.essential = false;
        auto [ra, rb] = parent_runs(bc.curve, a, set.beta);
        if (ra != 1 || rb != 1) t.one_arc_each = false;
    }
    if (t.slopes.intersection() <= brute_limit) t.matches_brute_force = fast == brute_force_bicorns(s, a, set.beta, set.crossings);
    return t;
}

struct PathTrial {
    SlopePair slopes;
    int farey{0};
    int length{0};  // edges in the bicorn path
    std::vector<int> crossings;
    bool decreasing{true};
    bool within{false};  // d_F <= length <= 4 d_F + 4
    bool ok() const { return decreasing && within; }
};

template <class Rng>
PathTrial bicorn_path_trial(const HalfTranslationSurface& s, Rng& rng, long max_intersections) {
    PathTrial t;
    std::uniform_int_distribution<long> rng_range(2, 12);
    t.slopes = random_slope_pair(rng, rng_range(rng), max_intersections);
    auto a = lattice_loop(s, t.slopes.p1, t.slopes.q1, random_coordinate(rng), random_coordinate(rng));
    auto b = lattice_loop(s, t.slopes.p2, t.slopes.q2, random_coordinate(rng), random_coordinate(rng));
    auto path = bicorn_path(s, a, b);
    t.farey = farey_distance(make_slope(t.slopes.p1, t.slopes.q1), make_slope(t.slopes.p2, t.slopes.q2));
    t.length = static_cast<int>(path.curves.size()) - 1;
    t.crossings = path.crossings;
    for (std::size_t i = 1; i < t.crossings.size(); ++i)
        if (t.crossings[i] >= t.crossings[i - 1]) t.decreasing = false;
    t.within = t.farey <= t.length && t.length <= 4 * t.farey + 4;
    return t;
}

struct ClosureTrial {
    std::vector<long> alpha_class, beta_class;
    QuadNum alpha_width{0}, beta_width{0};
    std::size_t bicorns{0};
    QuadNum worst_bicorn_width{0};
    bool ok{true};
};

/// A pair of closed vertical leaves in D(eps, B) and their bicorns measured
/// against D(2 eps, B). Leaves whose windows exceed eps are resampled.
template <class Rng>
ClosureTrial bicorn_closure_trial(const HalfTranslationSurface& s, const Transversal& t, const Threshold& eps, const QuadNum& B,
                                  const QuadNum& cap, Rng& rng, int max_tries = 200) {
    std::uniform_int_distribution<long> u(1, (1L << 20) - 1);
    auto sample = [&](QuadNum& width) {
        for (int k = 0; k < max_tries; ++k) {
            QuadNum c0 = t.length * QuadNum(Rational(u(rng), 1L << 20));
            // closing windows log-uniform between eps/64 and eps
            std::uniform_int_distribution<int> halvings(0, 5);
            QuadNum win = QuadNum(Rational(u(rng) + (1L << 20), 1L << (21 + halvings(rng)))) * QuadNum(Rational(eps.approx()));
            auto leaf = close_to_curve(s, t, c0, win, cap);
            auto w = in_D_eps_B(s, leaf.curve, eps, B);
            if (w.pass) {
                width = w.width;
                return leaf.curve;
            }
        }
        throw ExperimentError("could not sample a curve in D(eps, B)");
    };
    ClosureTrial tr;
    PLCurve a, b;
    for (int k = 0; k < max_tries; ++k) {
        a = sample(tr.alpha_width);
        b = sample(tr.beta_width);
        tr.alpha_class = homology_class(s, a).coords;
        tr.beta_class = homology_class(s, b).coords;
        if (tr.alpha_class[0] * tr.beta_class[1] - tr.alpha_class[1] * tr.beta_class[0] != 0) break;
    }
    auto set = bicorns(s, a, b);
    tr.bicorns = set.bicorns.size();
    Threshold twice = eps.doubled();
    for (const auto& bc : set.bicorns) {
        auto w = in_D_eps_B(s, bc.curve, twice, B);
        tr.worst_bicorn_width = max(tr.worst_bicorn_width, w.width);
        if (!w.pass) tr.ok = false;
    }
    return tr;
}

}  // namespace flatlab
