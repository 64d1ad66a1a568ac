#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "flatlab/bicorn.hpp"

using namespace flatlab;

namespace {

std::string data(const std::string& f) { return std::string(FLATLAB_DATA_DIR) + "/surfaces/" + f; }
QuadNum r(long a, long b = 1) { return QuadNum(Rational(a, b)); }

long det(const std::vector<long>& a, long p, long q) { return a[0] * q - a[1] * p; }

// Some segment of c contains the chart segment g.
bool on_curve(const PLCurve& c, const ChartSegment& g) {
    for (const auto& h : c.segments)
        if (h.poly == g.poly && orient(h.from, h.to, g.from) == 0 && orient(h.from, h.to, g.to) == 0 &&
            detail::on_segment(g.from, h.from, h.to) && detail::on_segment(g.to, h.from, h.to))
            return true;
    return false;
}

// Brute force: every arc pair is assembled and tested geometrically.
std::set<std::tuple<std::size_t, std::size_t, bool>> brute_bicorns(const HalfTranslationSurface& s, const PLCurve& a,
                                                                   const PLCurve& b, const std::vector<Crossing>& xs) {
    std::set<std::tuple<std::size_t, std::size_t, bool>> out;
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

struct Loop {
    long p, q;
};

Loop random_slope(std::mt19937_64& rng, long range) {
    std::uniform_int_distribution<long> d(-range, range);
    while (true) {
        long p = d(rng), q = d(rng);
        if (std::gcd(p, q) == 1) return {p, q};
    }
}

// Point with lattice coordinates (a, b) on a one-parallelogram torus.
Vec2 at(const HalfTranslationSurface& s, const QuadNum& a, const QuadNum& b) {
    auto L = *torus_lattice(s);
    return L.origin + a * L.w1 + b * L.w2;
}

}  // namespace

TEST(Bicorns, EmptyCases) {
    auto s = load_surface(data("square-torus.surf"));
    auto h1 = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    auto h2 = straight_loop(s, 1, 0, {r(1, 5), r(2, 3)});
    auto v = straight_loop(s, 0, 1, {r(2, 7), r(3, 5)});
    EXPECT_TRUE(bicorns(s, h1, h2).bicorns.empty());
    EXPECT_TRUE(bicorns(s, h1, v).bicorns.empty());
}

TEST(Bicorns, TwoCrossingPair) {
    auto s = load_surface(data("square-torus.surf"));
    auto a = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    auto b = straight_loop(s, 1, 2, {r(3, 7), r(1, 9)});
    auto set = bicorns(s, a, b);
    ASSERT_EQ(set.crossings.size(), 2u);
    ASSERT_FALSE(set.bicorns.empty());
    for (const auto& bc : set.bicorns) {
        EXPECT_EQ(check_curve(s, bc.curve), "");
        EXPECT_TRUE(is_simple(bc.curve).simple);
        EXPECT_TRUE(bc.nonseparating);
        // pushed off, a bicorn meets each parent at most once
        EXPECT_LE(std::labs(det(bc.homology, 1, 0)), 1);
        EXPECT_LE(std::labs(det(bc.homology, 1, 2)), 1);
        EXPECT_EQ(std::gcd(bc.homology[0], bc.homology[1]), 1);
    }
}

TEST(Bicorns, OneArcPerParent) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto a = straight_loop(s, 2, 1, at(s, r(1, 5), r(1, 3)));
    auto b = straight_loop(s, -1, 3, at(s, r(3, 7), r(1, 9)));
    auto set = bicorns(s, a, b);
    ASSERT_FALSE(set.bicorns.empty());
    for (const auto& bc : set.bicorns) {
        // segments form one run along alpha followed by one run along beta
        int switches = 0;
        int prev = -1;
        for (const auto& g : bc.curve.segments) {
            bool in_a = on_curve(a, g), in_b = on_curve(set.beta, g);
            ASSERT_NE(in_a, in_b);
            int side = in_a ? 0 : 1;
            if (prev >= 0 && side != prev) ++switches;
            prev = side;
        }
        int wrap = (bc.curve.segments.empty() ? 0 : 1);
        if ((on_curve(a, bc.curve.segments[0]) ? 0 : 1) != prev) switches += wrap;
        EXPECT_EQ(switches, 2);
    }
}

TEST(Bicorns, MatchBruteForceEnumeration) {
    auto s = load_surface(data("square-torus.surf"));
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<long> num(1, 60);
    int checked = 0;
    while (checked < 40) {
        auto x = random_slope(rng, 4), y = random_slope(rng, 4);
        long d = std::labs(x.p * y.q - x.q * y.p);
        if (d == 0 || d > 8) continue;
        auto a = straight_loop(s, x.p, x.q, {r(num(rng), 61), r(num(rng), 67)});
        auto b = straight_loop(s, y.p, y.q, {r(num(rng), 71), r(num(rng), 73)});
        auto set = bicorns(s, a, b);
        std::set<std::tuple<std::size_t, std::size_t, bool>> fast;
        for (const auto& bc : set.bicorns) fast.insert({bc.a_from, bc.a_to, bc.b_forward});
        EXPECT_EQ(fast, brute_bicorns(s, a, set.beta, set.crossings)) << x.p << "," << x.q << " " << y.p << "," << y.q;
        ++checked;
    }
}

TEST(Bicorns, ClassesStableUnderPerturbationScale) {
    auto s = load_surface(data("square-torus.surf"));
    auto h = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    auto w = curve_from_polyline(s, {0, {r(0), r(1, 3)}}, {{r(1), r(3)}});
    std::multiset<std::vector<long>> ref;
    for (long scale : {997L, 9970L, 99700L}) {
        auto set = bicorns(s, h, w, false, Rational(1, scale));
        ASSERT_TRUE(set.perturbation.has_value());
        std::multiset<std::vector<long>> got;
        for (const auto& bc : set.bicorns) got.insert(bc.homology);
        if (ref.empty()) ref = got;
        EXPECT_EQ(got, ref) << scale;
    }
    EXPECT_FALSE(ref.empty());
}

TEST(BicornPath, TrivialCases) {
    auto s = load_surface(data("square-torus.surf"));
    auto a = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    EXPECT_EQ(bicorn_path(s, a, a).curves.size(), 1u);
    auto b = straight_loop(s, 1, 0, {r(1, 5), r(2, 3)});
    auto p = bicorn_path(s, a, b);
    ASSERT_EQ(p.curves.size(), 2u);
    EXPECT_EQ(p.crossings, (std::vector<int>{0}));
}

TEST(BicornPath, OneBicornToSlopeTwo) {
    auto s = load_surface(data("square-torus.surf"));
    auto a = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    auto b = straight_loop(s, 1, 2, {r(3, 7), r(1, 9)});
    auto p = bicorn_path(s, a, b);
    ASSERT_EQ(p.curves.size(), 3u);
    auto mid = homology_class(s, p.curves[1]).coords;
    EXPECT_EQ(std::labs(det(mid, 1, 0)), 1);
    EXPECT_EQ(std::labs(det(mid, 1, 2)), 1);
    EXPECT_TRUE(is_simple(p.curves[1]).simple);
}

TEST(BicornPath, CrossingsDecreaseToBeta) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<long> num(1, 60);
    for (int trial = 0; trial < 12; ++trial) {
        auto x = random_slope(rng, 6), y = random_slope(rng, 6);
        if (x.p * y.q - x.q * y.p == 0) continue;
        auto a = straight_loop(s, x.p, x.q, at(s, r(num(rng), 61), r(num(rng), 67)));
        auto b = straight_loop(s, y.p, y.q, at(s, r(num(rng), 71), r(num(rng), 73)));
        auto p = bicorn_path(s, a, b);
        ASSERT_EQ(p.crossings.size() + 1, p.curves.size());
        for (std::size_t i = 1; i < p.crossings.size(); ++i) EXPECT_LT(p.crossings[i], p.crossings[i - 1]);
        EXPECT_LE(p.crossings.back(), 1);
        for (std::size_t i = 1; i + 1 < p.curves.size(); ++i) {
            EXPECT_EQ(check_curve(s, p.curves[i]), "");
            EXPECT_TRUE(is_simple(p.curves[i]).simple);
            EXPECT_TRUE(homology_class(s, p.curves[i]).nonseparating);
        }
        EXPECT_TRUE(same_point_set(p.curves.back(), b));
    }
}
