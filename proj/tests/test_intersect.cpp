#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "flatlab/intersect.hpp"

using namespace flatlab;

namespace {

std::string data(const std::string& f) { return std::string(FLATLAB_DATA_DIR) + "/surfaces/" + f; }
QuadNum r(long a, long b = 1) { return QuadNum(Rational(a, b)); }

// O(n m) crossing count by orientation tests only, independent of the sweep.
int brute_crossings(const PLCurve& a, const PLCurve& b) {
    int n = 0;
    for (const auto& x : a.segments)
        for (const auto& y : b.segments) {
            if (x.poly != y.poly) continue;
            int o1 = orient(x.from, x.to, y.from), o2 = orient(x.from, x.to, y.to);
            int o3 = orient(y.from, y.to, x.from), o4 = orient(y.from, y.to, x.to);
            if (o1 * o2 < 0 && o3 * o4 < 0) ++n;
        }
    return n;
}

PLCurve chart_loop(int poly, const std::vector<Vec2>& pts) {
    PLCurve c;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        c.segments.push_back({poly, pts[i], pts[(i + 1) % pts.size()]});
        c.to_next.push_back(Isometry{});
    }
    return c;
}

}  // namespace

TEST(Intersections, BasicTorusCounts) {
    auto s = load_surface(data("square-torus.surf"));
    auto h = straight_loop(s, 1, 0, {r(1, 5), r(1, 3)});
    auto v = straight_loop(s, 0, 1, {r(2, 7), r(3, 5)});
    auto w = straight_loop(s, 1, 2, {r(3, 7), r(1, 9)});
    EXPECT_EQ(intersections(s, h, v).crossings.size(), 1u);
    EXPECT_EQ(intersections(s, h, w).crossings.size(), 2u);
    EXPECT_THROW(intersections(s, h, h), IntersectionError);
}

TEST(Intersections, StraightLoopsRealizeDeterminant) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<long> coef(-6, 6), num(1, 40);
    int checked = 0;
    while (checked < 60) {
        long p = coef(rng), q = coef(rng), a = coef(rng), b = coef(rng);
        if (std::gcd(p, q) != 1 || std::gcd(a, b) != 1 || p * b - q * a == 0) continue;
        auto L = *torus_lattice(s);
        Vec2 st1 = L.origin + r(num(rng), 41) * L.w1 + r(num(rng), 43) * L.w2;
        Vec2 st2 = L.origin + r(num(rng), 47) * L.w1 + r(num(rng), 53) * L.w2;
        auto c1 = straight_loop(s, p, q, st1), c2 = straight_loop(s, a, b, st2);
        auto res = intersections(s, c1, c2);
        EXPECT_EQ(static_cast<long>(res.crossings.size()), std::labs(p * b - q * a));
        if (!res.perturbation) {
            EXPECT_EQ(brute_crossings(c1, c2), static_cast<int>(res.crossings.size()));
        }
        // algebraic intersection: signs sum to the determinant up to orientation convention
        long sum = 0;
        for (const auto& x : res.crossings) sum += x.sign;
        EXPECT_EQ(std::labs(sum), std::labs(p * b - q * a));
        ++checked;
    }
}

TEST(Intersections, DegenerateContactIsPerturbed) {
    auto s = load_surface(data("square-torus.surf"));
    Vec2 st{r(1, 5), r(1, 3)};
    auto h = straight_loop(s, 1, 0, st);
    // w starts on the glued edge exactly where h crosses it: a contact at breakpoints
    auto w = curve_from_polyline(s, {0, {r(0), r(1, 3)}}, {{r(1), r(2)}});
    EXPECT_TRUE(raw_intersections(h, w).degeneracy.has_value());
    auto res = intersections(s, h, w);
    ASSERT_TRUE(res.perturbation.has_value());
    EXPECT_EQ(res.crossings.size(), 2u);
    EXPECT_EQ(check_curve(s, res.beta), "");
    EXPECT_EQ(homology_class(s, res.beta).coords, (std::vector<long>{1, 2}));
}

TEST(Simplicity, StraightAndMultiLoops) {
    auto s = load_surface(data("square-torus.surf"));
    for (auto [p, q] : {std::pair{1L, 0L}, {3L, 5L}, {-2L, 7L}}) EXPECT_TRUE(is_simple(straight_loop(s, p, q, {r(1, 7), r(2, 9)})).simple);
    auto twice = straight_multiloop(s, 2, 2, {r(1, 7), r(2, 9)});
    auto res = is_simple(twice);
    EXPECT_FALSE(res.simple);
    ASSERT_TRUE(res.witness.has_value());
    EXPECT_EQ(res.witness->kind, ContactKind::overlap);
}

TEST(Simplicity, FigureEightInOneChart) {
    auto s = load_surface(data("square-torus.surf"));
    auto c = chart_loop(0, {{r(1, 5), r(1, 5)}, {r(4, 5), r(4, 5)}, {r(4, 5), r(1, 5)}, {r(1, 5), r(4, 5)}});
    EXPECT_EQ(check_curve(s, c), "");
    auto res = is_simple(c);
    EXPECT_FALSE(res.simple);
    ASSERT_TRUE(res.witness.has_value());
    EXPECT_EQ(res.witness->kind, ContactKind::crossing);
    EXPECT_EQ(res.witness->point, (Vec2{r(1, 2), r(1, 2)}));
    // the oracle sees the same single crossing between the two diagonals
    int diag = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 2; j < c.size(); ++j) {
            if (i == 0 && j + 1 == c.size()) continue;
            const auto& x = c.segments[i];
            const auto& y = c.segments[j];
            if (orient(x.from, x.to, y.from) * orient(x.from, x.to, y.to) < 0 &&
                orient(y.from, y.to, x.from) * orient(y.from, y.to, x.to) < 0)
                ++diag;
        }
    EXPECT_EQ(diag, 1);
}

TEST(Simplicity, SmallDiskBoundaryIsSeparating) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto c = chart_loop(0, {{r(1, 2), r(1, 4)}, {r(3, 4), r(1, 4)}, {r(3, 4), r(1, 2)}, {r(1, 2), r(1, 2)}});
    EXPECT_TRUE(is_simple(c).simple);
    auto h = homology_class(s, c);
    EXPECT_EQ(h.coords, (std::vector<long>{0, 0}));
    EXPECT_FALSE(h.nonseparating);
    auto l = load_surface(data("l-origami.surf"));
    auto cl = chart_loop(1, {{r(5, 4), r(1, 4)}, {r(7, 4), r(1, 4)}, {r(7, 4), r(3, 4)}, {r(5, 4), r(3, 4)}});
    EXPECT_FALSE(homology_class(l, cl).nonseparating);
}

TEST(Translate, PreservesClassAndShape) {
    auto s = load_surface(data("golden-sheared-torus.surf"));
    auto c = straight_loop(s, 2, -3, {r(1, 2), r(1, 3)});
    auto m = translate_curve(s, c, {r(1, 10), r(1, 30)});
    EXPECT_EQ(check_curve(s, m), "");
    EXPECT_EQ(homology_class(s, m).coords, homology_class(s, c).coords);
    EXPECT_EQ(period_holonomy(m).shift, period_holonomy(c).shift);
}
