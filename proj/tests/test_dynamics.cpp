#include <gtest/gtest.h>

#include "flatlab/dynamics.hpp"

using namespace flatlab;

namespace {

std::string data(const std::string& f) { return std::string(FLATLAB_DATA_DIR) + "/surfaces/" + f; }
QuadNum r(long a, long b = 1) { return QuadNum(Rational(a, b)); }
const QuadNum lambda(Rational(3, 2), Rational(1, 2), 5);

Vec2 at(const HalfTranslationSurface& s, const QuadNum& a, const QuadNum& b) {
    auto L = *torus_lattice(s);
    return L.origin + a * L.w1 + b * L.w2;
}

std::array<long, 4> power(std::array<long, 4> a, int n) {
    std::array<long, 4> p{1, 0, 0, 1};
    for (int i = 0; i < n; ++i)
        p = {p[0] * a[0] + p[1] * a[2], p[0] * a[1] + p[1] * a[3], p[2] * a[0] + p[3] * a[2], p[2] * a[1] + p[3] * a[3]};
    return p;
}

}  // namespace

TEST(Automorphisms, DeclaredOnAnosovTorus) {
    auto s = load_surface(data("anosov-torus.surf"));
    auto autos = declared_autos(s);
    ASSERT_EQ(autos.size(), 2u);
    const auto* cat = find_auto(autos, "cat");
    ASSERT_NE(cat, nullptr);
    EXPECT_EQ(cat->chart, (Matrix2{lambda, r(0), r(0), r(1) / lambda}));
    ASSERT_TRUE(cat->lambda.has_value());
    EXPECT_EQ(*cat->lambda, lambda);
    EXPECT_FALSE(find_auto(autos, "parabolic")->lambda.has_value());
    EXPECT_TRUE(declared_autos(load_surface(data("l-origami.surf"))).empty());
    EXPECT_THROW(identity_auto(load_surface(data("l-origami.surf"))), DynamicsError);
}

TEST(Automorphisms, IdentityFixesCurves) {
    auto s = load_surface(data("anosov-torus.surf"));
    auto c = curve_from_polyline(s, {0, at(s, r(1, 5), r(1, 3))}, {QuadNum(1) * torus_lattice(s)->w1, torus_lattice(s)->w2});
    auto img = apply(s, identity_auto(s), c);
    EXPECT_TRUE(same_point_set(img, c));
}

TEST(Automorphisms, CatMapOnClasses) {
    auto s = load_surface(data("anosov-torus.surf"));
    auto autos = declared_autos(s);
    const auto& cat = *find_auto(autos, "cat");
    auto c = straight_loop(s, 1, 0, at(s, r(1, 5), r(1, 3)));
    auto img = apply(s, cat, c);
    EXPECT_EQ(homology_class(s, img).coords, (std::vector<long>{2, 1}));
    // lattice coordinates (1/5, 1/3) map to (11/15, 8/15)
    EXPECT_TRUE(same_point_set(img, straight_loop(s, 2, 1, at(s, r(11, 15), r(8, 15)))));
    PLCurve cur = c;
    for (int n = 1; n <= 6; ++n) {
        cur = apply(s, cat, cur);
        auto p = power(cat.lattice, n);
        EXPECT_EQ(homology_class(s, cur).coords, (std::vector<long>{p[0], p[2]})) << n;
        EXPECT_TRUE(is_simple(cur).simple);
    }
}

TEST(Automorphisms, BentCurvesAndComposition) {
    auto s = load_surface(data("anosov-torus.surf"));
    auto autos = declared_autos(s);
    const auto& cat = *find_auto(autos, "cat");
    const auto& par = *find_auto(autos, "parabolic");
    auto L = *torus_lattice(s);
    // class (1, 1) drawn as two legs, a monotone graph over the diagonal
    auto c = curve_from_polyline(s, {0, at(s, r(1, 7), r(2, 9))}, {r(3, 5) * L.w1 + r(2, 5) * L.w2, r(2, 5) * L.w1 + r(3, 5) * L.w2});
    ASSERT_TRUE(is_simple(c).simple);
    auto both = apply(s, cat, apply(s, par, c));
    EXPECT_EQ(check_curve(s, both), "");
    EXPECT_TRUE(is_simple(both).simple);
    // cat * parabolic = [[2,3],[1,2]]
    EXPECT_EQ(homology_class(s, both).coords, (std::vector<long>{5, 3}));
}

TEST(Automorphisms, WidthScalesByLambda) {
    auto s = load_surface(data("anosov-torus.surf"));
    auto autos = declared_autos(s);
    const auto& cat = *find_auto(autos, "cat");
    PLCurve cur = straight_loop(s, 1, 0, at(s, r(1, 5), r(1, 3)));
    auto prev = plane_size_width(cur);
    for (int n = 1; n <= 5; ++n) {
        cur = apply(s, cat, cur);
        auto now = plane_size_width(cur);
        EXPECT_EQ(now.width, lambda * prev.width) << n;
        EXPECT_EQ(now.height * lambda, prev.height) << n;
        prev = now;
    }
}

TEST(Axis, CatOrbitMovesAway) {
    auto s = load_surface(data("anosov-torus.surf"));
    auto autos = declared_autos(s);
    auto c0 = straight_loop(s, 1, 0, at(s, r(1, 5), r(1, 3)));
    auto orb = axis_experiment(s, *find_auto(autos, "cat"), c0, 6);
    ASSERT_EQ(orb.records.size(), 7u);
    EXPECT_TRUE(orb.monotone);
    EXPECT_GE(orb.slope, 0.5);
    ASSERT_TRUE(orb.width_scales_exactly.has_value());
    EXPECT_TRUE(*orb.width_scales_exactly);
    for (std::size_t i = 1; i < orb.records.size(); ++i) {
        EXPECT_GT(orb.records[i].size.size_lower, orb.records[i - 1].size.size_upper);
    }
}

TEST(Axis, ParabolicOrbitStaysBounded) {
    auto s = load_surface(data("anosov-torus.surf"));
    auto autos = declared_autos(s);
    const auto& par = *find_auto(autos, "parabolic");
    auto fixed = axis_experiment(s, par, straight_loop(s, 1, 0, at(s, r(1, 5), r(1, 3))), 6);
    for (const auto& rec : fixed.records) {
        EXPECT_EQ(rec.homology, (std::vector<long>{1, 0}));
        EXPECT_LE(rec.distance.upper, 1);
    }
    auto moving = axis_experiment(s, par, straight_loop(s, 0, 1, at(s, r(1, 5), r(1, 3))), 6);
    for (std::size_t i = 0; i < moving.records.size(); ++i) {
        EXPECT_EQ(moving.records[i].homology, (std::vector<long>{static_cast<long>(i), 1}));
        EXPECT_LE(moving.records[i].distance.lower, 2);
    }
    EXPECT_LT(moving.slope, 0.5);
}
