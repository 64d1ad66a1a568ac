// Acceptance gate: one line per criterion, nonzero exit if any fails or runs
// over its time limit.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "flatlab/cover.hpp"
#include "flatlab/dynamics.hpp"
#include "flatlab/experiments.hpp"

using namespace flatlab;

namespace {

std::string data(const std::string& f) { return std::string(FLATLAB_DATA_DIR) + "/surfaces/" + f; }
QuadNum r(long p, long q = 1) { return QuadNum(Rational(p, q)); }

const int kJobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

// pinned tolerances and limits
constexpr double kLimit1 = 1, kLimit2 = 1, kLimit3 = 30, kLimit4 = 60, kLimit5 = 300, kLimit6 = 300, kLimit7 = 300,
                 kLimit8 = 120, kLimit9 = 60, kLimit10 = 120;
constexpr int kOrbitLength = 10000;
constexpr int kReturnTrials = 1000;
constexpr int kFuzzTrials = 1000;
constexpr long kFuzzMaxIntersections = 12;
constexpr long kFuzzBruteLimit = 8;
constexpr int kPathTrials = 100;
constexpr long kPathMaxIntersections = 144;
constexpr int kGoldenLast = 20;
constexpr int kClosureTrials = 200;
constexpr int kAxisIterates = 12;
constexpr double kAxisMinSlope = 0.5;
constexpr int kControlMaxDistance = kFareyCalibration;
constexpr int kGeodesicPairs = 100;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass{true};
    std::ostringstream note;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) note << "; ";
            else note.str("");
            note << what;
        }
        pass = pass && ok;
    }
};

int failures = 0;

void criterion(int id, const std::string& title, double limit, const std::function<void(Outcome&)>& body) {
    Outcome out;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.note.str("");
        out.note << "exception: " << e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs < limit;
    bool ok = out.pass && in_time;
    if (!ok) ++failures;
    std::cout << "criterion " << std::setw(2) << id << ": " << (ok ? "PASS" : "FAIL") << "  " << title << "  [" << std::fixed
              << std::setprecision(1) << secs << " s, limit " << limit << " s]";
    if (!in_time) std::cout << "  over time";
    std::string note = out.note.str();
    if (!note.empty()) std::cout << "  " << note;
    std::cout << std::endl;
}

template <class Trial, class Make>
std::vector<Trial> parallel_trials(int trials, Make make) {
    std::vector<std::vector<Trial>> chunks(chunk_count(trials));
    for_each_chunk(chunks.size(), kJobs, [&](std::size_t c) {
        auto rng = chunk_rng(kSeed, c);
        for (int i = 0; i < chunk_trials(trials, c); ++i) chunks[c].push_back(make(rng));
    });
    std::vector<Trial> out;
    for (auto& ch : chunks)
        for (auto& t : ch) out.push_back(std::move(t));
    return out;
}

CoverPoint ball_point(const UnfoldedBall& ball, std::mt19937_64& rng, int tile) {
    std::uniform_int_distribution<long> d(1, 996);
    Vec2 corner = ball.surface().polygon(ball.tile(tile).poly).vertex(0);
    return {tile, corner + Vec2{r(d(rng), 997), r(d(rng), 997)}};
}

}  // namespace

int main() {
    criterion(1, "Gauss-Bonnet on the shipped surfaces", kLimit1, [](Outcome& o) {
        for (auto f : {"square-torus.surf", "golden-sheared-torus.surf", "pillowcase.surf", "l-origami.surf"}) {
            auto s = load_surface(data(f));
            // total angle from the corners, in units of pi
            long angle = 0;
            for (const auto& v : s.all_vertices()) angle += v.angle_multiple;
            long chi = s.euler_characteristic();
            o.require(2 * static_cast<long>(s.all_vertices().size()) - angle == 2 * chi, std::string(f) + ": sum(2pi - angle) != 2pi chi");
            o.require(s.gauss_bonnet_holds(), std::string(f) + ": gauss_bonnet_holds is false");
            long corners = 0;
            for (const auto& p : s.polygons()) corners += p.size();
            o.require(angle == corners - 2 * s.polygon_count(), std::string(f) + ": vertex angles do not account for every corner");
        }
        o.note << "4 surfaces";
    });

    criterion(2, "resolving cover of the pillowcase", kLimit2, [](Outcome& o) {
        auto s = load_surface(data("pillowcase.surf"));
        auto rc = build_resolving_cover(s);
        int chi = rc.cover.euler_characteristic();
        o.require(rc.degree == 2, "degree " + std::to_string(rc.degree));
        o.require(rc.branch_points.size() == 4 && s.pi_points().size() == 4, "expected 4 branch points at the 4 angle-pi points");
        o.require(chi == 0, "cover chi = " + std::to_string(chi));
        o.require(chi == 2 * s.euler_characteristic() - 4, "Riemann-Hurwitz fails");
        o.require(rc.cover.pi_points().empty(), "cover has angle-pi points");
        o.require(rc.cover.gauss_bonnet_holds(), "cover fails Gauss-Bonnet");
        if (o.pass) o.note << "degree 2, chi 0, no angle-pi points";
    });

    criterion(3, "golden first-return map: three gaps and convergent returns", kLimit3, [](Outcome& o) {
        auto s = load_surface(data("golden-sheared-torus.surf"));
        auto iet = first_return_map(s, horizontal_circle(s), r(100));
        o.require(iet.intervals.size() == 2, "exchange has " + std::to_string(iet.intervals.size()) + " intervals");
        auto orb = rotation_orbit(iet, r(0), kOrbitLength);
        o.require(orb.orbit_length == kOrbitLength, "orbit closed early");
        o.require(orb.max_gap_values <= 3 && orb.first_violation == 0,
                  "prefix " + std::to_string(orb.first_violation) + " has more than three gaps");
        // rotation by 1/phi^2: convergent denominators are the Fibonacci numbers
        std::vector<long> fib{1};
        for (long a = 1, b = 2; b < kOrbitLength; std::tie(a, b) = std::pair{b, a + b}) fib.push_back(b);
        o.require(orb.rotation_number == QuadNum(Rational(3, 2), Rational(-1, 2), 5), "rotation number " + render(orb.rotation_number));
        o.require(orb.near_returns == fib, "near-return times are not the Fibonacci denominators");
        if (o.pass) o.note << orb.near_returns.size() << " near returns, max " << orb.max_gap_values << " gaps";
    });

    criterion(4, "fast return constant and target lemma on the golden torus", kLimit4, [](Outcome& o) {
        auto s = load_surface(data("golden-sheared-torus.surf"));
        auto g = horizontal_circle(s);
        o.require(g.length == r(1), "circle width " + render(g.length));
        QuadNum L{0};
        std::optional<QuadNum> exact;
        std::vector<FastReturnReport> chunks(chunk_count(kReturnTrials));
        for_each_chunk(chunks.size(), kJobs, [&](std::size_t c) {
            auto rng = chunk_rng(kSeed, c);
            chunks[c] = fast_return_constant(s, g, chunk_trials(kReturnTrials, c), r(100), rng);
        });
        for (const auto& c : chunks) {
            L = max(L, c.L);
            exact = c.exact;
        }
        // exact maximum from the exchange, independently of sampling
        auto iet = first_return_map(s, g, r(100));
        QuadNum top{0};
        for (const auto& I : iet.intervals) top = max(top, I.return_length);
        // every vertical return to a horizontal circle of the torus takes the lattice height
        o.require(top == torus_lattice(s)->w2.y, "exchange maximum " + render(top) + " is not the lattice height");
        o.require(exact && *exact == top, "reported exact maximum disagrees with the exchange");
        o.require(L == top, "empirical L = " + render(L) + ", exact " + render(top));
        std::vector<TargetReport> hits(chunk_count(kReturnTrials));
        for_each_chunk(hits.size(), kJobs, [&](std::size_t c) {
            auto rng = chunk_rng(kSeed + 1, c);
            hits[c] = target_check(s, g.pieces, L, chunk_trials(kReturnTrials, c), rng);
        });
        int n = 0;
        for (const auto& h : hits) n += h.hits;
        o.require(n == kReturnTrials, "target hit fraction " + std::to_string(static_cast<double>(n) / kReturnTrials));
        if (o.pass) o.note << "L = " << render(L) << ", hit fraction 1.0";
    });

    criterion(5, "bicorn soundness fuzz", kLimit5, [](Outcome& o) {
        auto s = load_surface(data("square-torus.surf"));
        auto trials = parallel_trials<FuzzTrial>(kFuzzTrials, [&](auto& rng) {
            return bicorn_fuzz_trial(s, rng, kFuzzMaxIntersections, kFuzzBruteLimit);
        });
        int bad = 0, brute = 0;
        std::size_t total = 0;
        for (const auto& t : trials) {
            if (!t.ok()) ++bad;
            if (t.matches_brute_force) ++brute;
            total += t.bicorns;
        }
        o.require(bad == 0, std::to_string(bad) + " unsound trials");
        o.require(brute > 0, "no trial was checked by enumeration");
        if (o.pass) o.note << kFuzzTrials << " pairs, " << total << " bicorns, " << brute << " matched by enumeration";
    });

    criterion(6, "bicorn paths against Farey distance", kLimit6, [](Outcome& o) {
        auto s = load_surface(data("square-torus.surf"));
        auto trials = parallel_trials<PathTrial>(kPathTrials, [&](auto& rng) { return bicorn_path_trial(s, rng, kPathMaxIntersections); });
        int bad = 0, longest = 0;
        for (const auto& t : trials) {
            o.require(t.slopes.intersection() <= kPathMaxIntersections, "sampled pair exceeds the intersection bound");
            bool inside = t.farey <= t.length && t.length <= 4 * t.farey + 4;
            if (!inside || !t.decreasing) ++bad;
            longest = std::max(longest, t.length);
        }
        o.require(bad == 0, std::to_string(bad) + " paths fail the Farey window or decreasing crossings");
        if (o.pass) o.note << kPathTrials << " paths, longest " << longest;
    });

    criterion(7, "convergence certificate for golden closings", kLimit7, [](Outcome& o) {
        auto s = load_surface(data("golden-sheared-torus.surf"));
        auto t = horizontal_circle(s);
        auto base = lattice_loop(s, 1, 0, Rational(3, 5), Rational(1, 3));
        auto schedule = power_schedule(kGoldenLast);
        const int first = 3;
        auto seq = fibonacci_closings(s, t, r(1, 3), first, kGoldenLast, r(100000000));
        auto cert = convergence_certificate(s, seq, schedule, base);
        o.require(cert.pass, "certificate fails");
        o.require(cert.size_diverges, "size does not diverge");
        o.require(cert.distance_diverges, "distance bounds do not grow");
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            if (!cert.stable_from[k]) continue;
            for (std::size_t i = *cert.stable_from[k]; i < seq.size(); ++i)
                o.require(schedule[k].eps.admits(cert.records[i].windows[k].width), "window wider than eps after stabilizing");
        }
        for (std::size_t i = 0; i < seq.size(); ++i) {
            // golden-slope convergents: consecutive Fibonacci numbers
            long k = static_cast<long>(i) + first;
            std::vector<long> want{-fibonacci(static_cast<int>(k) - 1), fibonacci(static_cast<int>(k))};
            std::vector<long> neg{-want[0], -want[1]};
            const auto& h = cert.records[i].homology;
            o.require(h == want || h == neg, "class at k = " + std::to_string(k) + " is not a convergent");
            if (i > 3) o.require(cert.records[i].distance.lower >= cert.records[i - 1].distance.lower, "distance bound decreases");
        }
        int last_lower = cert.records.back().distance.lower;
        o.require(last_lower > cert.records[3].distance.lower, "distance bounds stay bounded");

        auto horizontal = lattice_loop(s, 1, 0, Rational(1, 3), Rational(1, 7));
        std::vector<PLCurve> constant(seq.size(), horizontal), alternating = seq;
        for (std::size_t i = 1; i < alternating.size(); i += 2) alternating[i] = horizontal;
        for (auto* adv : {&constant, &alternating}) {
            std::string name = adv == &constant ? "constant" : "alternating";
            auto bad = convergence_certificate(s, *adv, schedule, base);
            o.require(!bad.pass, name + " sequence passes");
            o.require(bad.witness.has_value(), name + " sequence has no witness");
            if (!bad.witness) continue;
            const auto& w = *bad.witness;
            auto again = in_D_eps_B(s, (*adv)[w.index], schedule[w.entry].eps, schedule[w.entry].B);
            o.require(!again.pass && again.width == w.window.width && !schedule[w.entry].eps.admits(w.window.width),
                      name + " witness window does not exceed eps");
            o.require(homology_class(s, (*adv)[w.index]).coords == homology_class(s, horizontal).coords,
                      name + " witness is not the horizontal loop");
        }
        if (o.pass) o.note << "k = " << first << ".." << kGoldenLast << ", distance bound reaches " << last_lower << "; adversarial sequences fail";
    });

    criterion(8, "bicorns of D(eps, B) curves lie in D(2 eps, B)", kLimit8, [](Outcome& o) {
        auto s = load_surface(data("golden-sheared-torus.surf"));
        auto t = horizontal_circle(s);
        Threshold eps{r(1, 4), 1};
        auto trials = parallel_trials<ClosureTrial>(kClosureTrials, [&](auto& rng) {
            return bicorn_closure_trial(s, t, eps, r(2), r(100000), rng);
        });
        int bad = 0;
        std::size_t total = 0;
        QuadNum worst{0};
        for (const auto& tr : trials) {
            if (!tr.ok) ++bad;
            total += tr.bicorns;
            worst = max(worst, tr.worst_bicorn_width);
        }
        o.require(bad == 0, std::to_string(bad) + " pairs have a bicorn outside D(2 eps, B)");
        o.require(total > 0, "no bicorns sampled");
        if (o.pass) o.note << kClosureTrials << " pairs, " << total << " bicorns, widest " << worst.to_double();
    });

    criterion(9, "axis of the cat map with identity and parabolic controls", kLimit9, [](Outcome& o) {
        auto s = load_surface(data("anosov-torus.surf"));
        auto autos = declared_autos(s);
        const auto* cat = find_auto(autos, "cat");
        const auto* para = find_auto(autos, "parabolic");
        o.require(cat && para, "surface does not declare cat and parabolic");
        if (!cat || !para) return;
        o.require(cat->lattice == std::array<long, 4>{2, 1, 1, 1} && para->lattice == std::array<long, 4>{1, 1, 0, 1},
                  "declared lattice actions differ");
        QuadNum lambda(Rational(3, 2), Rational(1, 2), 5);
        o.require(cat->lambda && *cat->lambda == lambda, "expansion factor is not (3+sqrt5)/2");
        AxisOrbit hyp, id, par;
        std::vector<std::thread> runs;
        runs.emplace_back([&] { hyp = axis_experiment(s, *cat, lattice_loop(s, 1, 0, Rational(1, 3), Rational(1, 7)), kAxisIterates); });
        runs.emplace_back([&] {
            id = axis_experiment(s, identity_auto(s), lattice_loop(s, 1, 0, Rational(1, 3), Rational(1, 7)), kAxisIterates);
            // (1,0) is fixed by the parabolic map, so start from (0,1)
            par = axis_experiment(s, *para, lattice_loop(s, 0, 1, Rational(1, 3), Rational(1, 7)), kAxisIterates);
        });
        for (auto& th : runs) th.join();
        o.require(hyp.slope >= kAxisMinSlope, "slope " + std::to_string(hyp.slope));
        o.require(hyp.monotone, "a distance bound decreases");
        bool widths = true;
        for (std::size_t i = 1; i < hyp.records.size(); ++i)
            widths = widths && hyp.records[i].size.width == lambda * hyp.records[i - 1].size.width;
        o.require(widths, "width does not scale by lambda");
        for (const auto* c : {&id, &par}) {
            int top = 0;
            for (const auto& rec : c->records) top = std::max(top, rec.distance.lower);
            o.require(top <= kControlMaxDistance && c->slope < kAxisMinSlope, c->map + " control is not bounded");
        }
        if (o.pass) o.note << "slope " << std::setprecision(3) << hyp.slope << ", width ratio exactly (3+sqrt5)/2";
    });

    criterion(10, "geodesics in the L-origami cover: unique and connected intersections", kLimit10, [](Outcome& o) {
        auto s = load_surface(data("l-origami.surf"));
        UnfoldedBall ball(s, 0, 8);
        std::mt19937_64 rng(kSeed);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(ball.size()) - 1);
        auto near_tile = [&] {
            while (true) {
                int t = pick(rng);
                if (ball.tile(t).depth <= 3) return t;
            }
        };
        int differ = 0, disconnected = 0, bent = 0, overlaps = 0;
        for (int pair = 0; pair < kGeodesicPairs; ++pair) {
            int t = near_tile();
            auto x = ball_point(ball, rng, 0), y = ball_point(ball, rng, t);
            auto base = flat_geodesic(ball, x, y, seed_corridor(ball, 0, t));
            for (unsigned seed = 1; seed <= 3; ++seed) {
                auto c = seed_corridor(ball, 0, t, seed);
                if (!same_geodesic(base, flat_geodesic(ball, x, y, c))) ++differ;
                std::uniform_int_distribution<int> corner(0, 3);
                auto looped = corridor_with_loop(ball, c, std::min<std::size_t>(1, c.exits.size()), corner(rng), seed % 2 ? 1 : -1);
                if (!same_geodesic(base, flat_geodesic(ball, x, y, looped))) ++differ;
            }
            bent += base.bends.empty() ? 0 : 1;
            int t2 = near_tile();
            auto y2 = ball_point(ball, rng, t2);
            auto other = ball_point(ball, rng, near_tile());
            auto g2 = flat_geodesic(ball, x, y2, seed_corridor(ball, 0, t2));
            auto g3 = flat_geodesic(ball, other, y, seed_corridor(ball, other.tile, t));
            for (const auto* h : {&g2, &g3}) {
                auto in = intersect_geodesics(base, *h);
                if (!in.connected()) ++disconnected;
                for (const auto& c : in.components)
                    if (c.first < c.second) ++overlaps;
            }
        }
        o.require(differ == 0, std::to_string(differ) + " corridor reruns gave a different path");
        o.require(disconnected == 0, std::to_string(disconnected) + " disconnected intersections");
        o.require(bent > 0, "no sampled geodesic bends at a cone point");
        if (o.pass) o.note << kGeodesicPairs << " pairs, " << bent << " bent, " << overlaps << " shared segments";
    });

    std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}
