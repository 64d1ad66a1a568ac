#include <gtest/gtest.h>

#include <random>

#include "flatlab/flow.hpp"
#include "flatlab/graphdist.hpp"

using namespace flatlab;

namespace {

std::string data(const std::string& f) { return std::string(FLATLAB_DATA_DIR) + "/surfaces/" + f; }
QuadNum r(long a, long b = 1) { return QuadNum(Rational(a, b)); }
const QuadNum alpha(Rational(-1, 2), Rational(1, 2), 5);

Transversal golden_circle(const HalfTranslationSurface& s) {
    return horizontal_transversal(s, {0, {alpha / r(2), r(1, 2)}}, r(1));
}

std::vector<Slope> slopes_up_to(long h) {
    std::vector<Slope> out;
    for (long q = 0; q <= h; ++q)
        for (long p = -h; p <= h; ++p)
            if (std::gcd(p, q) == 1 && (q > 0 || p == 1)) out.push_back({p, q});
    return out;
}

// Fibonacci closings C_k, k = first..last
std::vector<PLCurve> golden_sequence(const HalfTranslationSurface& s, int first, int last) {
    auto t = golden_circle(s);
    std::vector<PLCurve> out;
    long f0 = 0, f1 = 1;
    for (int k = 1; k <= last; ++k) {
        if (k >= first) out.push_back(close_at_return(s, t, r(1, 3), static_cast<int>(f1), r(1000000)).curve);
        long f2 = f0 + f1;
        f0 = f1;
        f1 = f2;
    }
    return out;
}

}  // namespace

TEST(Farey, Examples) {
    EXPECT_EQ(farey_distance(make_slope(0, 1), make_slope(1, 0)), 1);
    EXPECT_EQ(farey_distance(make_slope(0, 1), make_slope(1, 2)), 1);
    EXPECT_EQ(farey_distance(make_slope(0, 1), make_slope(2, 5)), 2);
    EXPECT_EQ(farey_distance(make_slope(3, 7), make_slope(3, 7)), 0);
    EXPECT_EQ(farey_distance(make_slope(-3, -7), make_slope(3, 7)), 0);
}

TEST(Farey, MatchesBreadthFirstSearch) {
    for (const auto& a : slopes_up_to(6)) {
        auto ball = farey_ball(a, 30, 4);
        for (const auto& b : slopes_up_to(10)) {
            int d = farey_distance(a, b);
            auto it = ball.find(b);
            if (it != ball.end()) EXPECT_EQ(d, it->second) << a.p << "/" << a.q << " " << b.p << "/" << b.q;
            else EXPECT_GT(d, 4);
        }
    }
}

TEST(Farey, IsAMetric) {
    auto all = slopes_up_to(50);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    for (int t = 0; t < 20000; ++t) {
        const auto& a = all[pick(rng)];
        const auto& b = all[pick(rng)];
        const auto& c = all[pick(rng)];
        int ab = farey_distance(a, b);
        EXPECT_EQ(ab, farey_distance(b, a));
        EXPECT_EQ(ab == 0, a == b);
        EXPECT_LE(farey_distance(a, c), ab + farey_distance(b, c));
    }
}

TEST(Farey, GoldenConvergentsMoveAway) {
    Slope inf = make_slope(1, 0);
    long f0 = 1, f1 = 2;
    int prev = 0, at10 = 0;
    auto ball = farey_ball(inf, 60, 10);
    for (int k = 3; k <= 60; ++k) {
        int d = farey_distance(inf, make_slope(-f0, f1));
        EXPECT_GE(d, prev);
        if (f1 <= 55) {
            EXPECT_EQ(d, ball.at(make_slope(-f0, f1))) << k;
        }
        if (k == 10) at10 = d;
        prev = d;
        long f2 = f0 + f1;
        f0 = f1;
        f1 = f2;
    }
    EXPECT_GT(prev, at10 + 10);
}

TEST(FineDistance, Bounds) {
    auto s = load_surface(data("square-torus.surf"));
    auto h = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    auto h2 = straight_loop(s, 1, 0, {r(1, 5), r(2, 3)});
    auto w = straight_loop(s, 1, 2, {r(3, 7), r(1, 9)});
    auto same = fine_distance_bounds(s, h, h);
    EXPECT_EQ(same.lower, 0);
    EXPECT_EQ(same.upper, 0);
    auto dis = fine_distance_bounds(s, h, h2);
    EXPECT_EQ(dis.lower, 0);
    EXPECT_EQ(dis.upper, 1);
    auto far = fine_distance_bounds(s, h, w);
    EXPECT_LE(far.lower, far.upper);
    EXPECT_EQ(far.upper, 2 + kFareyCalibration);
}

TEST(Gromov, Collapses) {
    auto s = load_surface(data("square-torus.surf"));
    auto h = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    auto w = straight_loop(s, 2, 5, {r(3, 7), r(1, 9)});
    auto z = gromov_product(s, h, h, h);
    EXPECT_EQ(z.lower, Rational(0));
    EXPECT_EQ(z.upper, Rational(0));
    auto z2 = gromov_product(s, h, w, h);
    EXPECT_EQ(z2.lower, Rational(0));
    EXPECT_LE(z2.upper, Rational(fine_distance_bounds(s, h, w).upper));
}

TEST(Gromov, GoldenConvergentProductsGrow) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto seq = golden_sequence(s, 4, 14);
    auto base = straight_loop(s, 1, 0, {r(3, 5), r(1, 3)});
    std::vector<Rational> lows;
    for (std::size_t i = 0; i + 2 < seq.size(); i += 2) lows.push_back(gromov_product(s, seq[i], seq[i + 2], base).lower);
    for (std::size_t i = 1; i < lows.size(); ++i) EXPECT_GE(lows[i], lows[i - 1]);
    EXPECT_GT(lows.back(), lows.front());
}

TEST(DofL, Disjointness) {
    auto s = load_surface(data("square-torus.surf"));
    auto v = straight_loop(s, 0, 1, {r(1, 4), r(1, 2)});
    std::vector<ChartSegment> leaf{{0, {r(1, 2), r(1, 8)}, {r(1, 2), r(7, 8)}}};
    EXPECT_TRUE(in_D_of_L(v, leaf));
    std::vector<ChartSegment> through{{0, {r(1, 8), r(1, 3)}, {r(1, 2), r(1, 3)}}};
    EXPECT_FALSE(in_D_of_L(v, through));
}

TEST(SizeWidth, StraightLoops) {
    auto s = load_surface(data("square-torus.surf"));
    auto v = plane_size_width(straight_loop(s, 0, 1, {r(1, 4), r(1, 2)}));
    EXPECT_EQ(v.width, r(0));
    EXPECT_EQ(v.height, r(1));
    auto h = plane_size_width(straight_loop(s, 1, 0, {r(1, 4), r(1, 2)}));
    EXPECT_EQ(h.width, r(1));
    EXPECT_EQ(h.size_lower, r(1));
    EXPECT_EQ(h.size_upper, r(1));
    EXPECT_TRUE(h.size_exact);
}

TEST(SizeWidth, StartInvariantAndBracketed) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto c = golden_sequence(s, 9, 9).front();
    auto a = plane_size_width(c);
    PLCurve rot = c;
    std::rotate(rot.segments.begin(), rot.segments.begin() + 3, rot.segments.end());
    std::rotate(rot.to_next.begin(), rot.to_next.begin() + 3, rot.to_next.end());
    auto b = plane_size_width(rot);
    EXPECT_EQ(a.width, b.width);
    EXPECT_EQ(a.height, b.height);
    auto coarse = plane_size_width(c, 0, 4);
    EXPECT_LE(coarse.size_lower, a.size_lower);
    EXPECT_GE(coarse.size_upper, a.size_upper);
}

TEST(Windows, HorizontalLoopFails) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto h = straight_loop(s, 1, 0, {r(3, 5), r(1, 3)});
    auto w = in_D_eps_B(s, h, {r(1, 2), 1}, r(2));
    EXPECT_FALSE(w.pass);
    EXPECT_EQ(w.width, r(1));
    EXPECT_EQ(w.to - w.from, h.size());
}

TEST(Windows, ClosedLeafIsThin) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto leaf = close_to_curve(s, golden_circle(s), r(1, 3), r(1, 8), r(1000));
    QuadNum gap = abs(leaf.closing_length);
    auto w = in_D_eps_B(s, leaf.curve, {gap, 1}, r(2));
    EXPECT_TRUE(w.pass);
    EXPECT_LE(w.width, gap);
    EXPECT_FALSE(in_D_eps_B(s, leaf.curve, {gap / r(2), 1}, r(2)).pass);
}

TEST(Windows, Monotone) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto seq = golden_sequence(s, 5, 10);
    for (const auto& c : seq)
        for (int kb = 1; kb <= 6; ++kb) {
            auto w = in_D_eps_B(s, c, {r(1, 10), 1}, r(kb));
            auto smaller = in_D_eps_B(s, c, {r(1, 10), 1}, r(kb - 1) + r(1, 2));
            EXPECT_LE(smaller.width, w.width);
            if (w.pass) {
                EXPECT_TRUE(in_D_eps_B(s, c, {r(1, 5), 1}, r(kb)).pass);
            }
        }
}

TEST(Windows, ThresholdRoots) {
    Threshold t{r(1, 4), 2};  // 1/2
    EXPECT_TRUE(t.admits(r(1, 2)));
    EXPECT_FALSE(t.admits(r(51, 100)));
    EXPECT_TRUE(t.doubled().admits(r(1)));
    EXPECT_FALSE(t.doubled().admits(r(101, 100)));
}

TEST(Certificate, GoldenSequencePasses) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto seq = golden_sequence(s, 3, 14);
    auto base = straight_loop(s, 1, 0, {r(3, 5), r(1, 3)});
    auto rep = convergence_certificate(s, seq, power_schedule(8), base);
    EXPECT_TRUE(rep.pass) << (rep.failures.empty() ? "" : rep.failures.front());
    for (const auto& n : rep.stable_from) EXPECT_TRUE(n.has_value());
}

TEST(Certificate, AdversarialSequencesFail) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto seq = golden_sequence(s, 3, 12);
    auto base = straight_loop(s, 1, 0, {r(3, 5), r(1, 3)});
    std::vector<PLCurve> constant(8, seq[4]);
    auto c = convergence_certificate(s, constant, power_schedule(6), base);
    EXPECT_FALSE(c.pass);
    EXPECT_FALSE(c.size_diverges);
    auto horiz = straight_loop(s, 1, 0, {r(2, 5), r(1, 4)});
    std::vector<PLCurve> alt;
    for (std::size_t i = 0; i < seq.size(); ++i) alt.push_back(i % 2 ? horiz : seq[i]);
    auto a = convergence_certificate(s, alt, power_schedule(6), base);
    EXPECT_FALSE(a.pass);
    ASSERT_TRUE(a.witness.has_value());
    EXPECT_TRUE(same_point_set(alt[a.witness->index], horiz));
    EXPECT_EQ(a.witness->window.width, r(1));
}
