#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "taylorlaw/geoproj.hpp"

namespace {

using namespace taylorlaw;
using geo::GeoCoordinate;

const geo::CityCenter beijing{{116.413648, 39.913561}, "Beijing"};

TEST(GreatCircle, IdentityIsZero)
{
    EXPECT_EQ(geo::great_circle_distance(beijing.center, beijing.center), 0.0);
}

TEST(GreatCircle, AntipodalHalfCircumference)
{
    // pi * 6371004
    EXPECT_NEAR(geo::great_circle_distance({0, 0}, {180, 0}), 20015099.362391187, 1e-6);
}

TEST(GreatCircle, BeijingHundredthDegreeEast)
{
    // mpmath law of cosines at 40 digits: 852.88042177199...
    const double d = geo::great_circle_distance(beijing.center, {116.423648, 39.913561});
    EXPECT_NEAR(d, 852.8804217719910, 1e-6);
}

TEST(GreatCircle, MatchesLawOfCosinesOracle)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lng(-170, 170), lat(-80, 80), off(-1.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const GeoCoordinate p{lng(rng), lat(rng)};
        const GeoCoordinate q{p.lng + off(rng), p.lat + off(rng)};
        const double expect = oracle::law_of_cosines(p.lng, p.lat, q.lng, q.lat);
        EXPECT_NEAR(geo::great_circle_distance(p, q), expect, 1e-6 * std::max(1.0, expect) + 1e-3);
    }
}

TEST(GreatCircle, SymmetricAndTriangleInequalityWithin100km)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> off(-0.4, 0.4);
    for (int k = 0; k < 1000; ++k) {
        const GeoCoordinate a{116.4 + off(rng), 39.9 + off(rng)};
        const GeoCoordinate b{116.4 + off(rng), 39.9 + off(rng)};
        const GeoCoordinate c{116.4 + off(rng), 39.9 + off(rng)};
        const double ab = geo::great_circle_distance(a, b);
        EXPECT_EQ(ab, geo::great_circle_distance(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, geo::great_circle_distance(a, c) + geo::great_circle_distance(c, b) + 1e-6);
    }
}

TEST(GreatCircle, FlatEarthAgreementBelow100km)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    const double R = geo::default_earth.radius;
    for (int k = 0; k < 500; ++k) {
        const GeoCoordinate a{116.4, 39.9};
        const GeoCoordinate b{116.4 + off(rng), 39.9 + off(rng)};
        const double d = geo::great_circle_distance(a, b);
        if (d > 100000.0 || d < 1.0) continue;
        const double mid = geo::deg_to_rad((a.lat + b.lat) / 2.0);
        const double dx = R * geo::deg_to_rad(b.lng - a.lng) * std::cos(mid);
        const double dy = R * geo::deg_to_rad(b.lat - a.lat);
        EXPECT_NEAR(std::hypot(dx, dy) / d, 1.0, 1e-3);
    }
}

TEST(GreatCircle, RejectsOutOfBounds)
{
    EXPECT_THROW(geo::great_circle_distance({0, 95}, {0, 0}), Error);
    EXPECT_THROW(geo::great_circle_distance({0, 0}, {181, 0}), Error);
    EXPECT_THROW(geo::great_circle_distance({NAN, 0}, {0, 0}), Error);
}

TEST(Project, CenterMapsToOrigin)
{
    const auto p = geo::project(beijing, beijing.center);
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
}

TEST(Project, DueNorthIsMeridianArc)
{
    const auto p = geo::project(beijing, {beijing.center.lng, beijing.center.lat + 0.01});
    EXPECT_EQ(p.x, 0.0);
    // R * 0.01 deg in radians
    EXPECT_NEAR(p.y, 1111.9499645772882, 1e-6);
}

TEST(Project, DueEastUsesParallelArc)
{
    const auto p = geo::project(beijing, {beijing.center.lng + 0.01, beijing.center.lat});
    EXPECT_NEAR(p.x, 852.8804217719910, 1e-6);
    EXPECT_EQ(p.y, 0.0);
}

TEST(Project, SignSymmetryUnderReflection)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> off(-0.3, 0.3);
    for (int k = 0; k < 200; ++k) {
        const double dl = off(rng), dp = off(rng);
        const auto p = geo::project(beijing, {beijing.center.lng + dl, beijing.center.lat + dp});
        const auto mirrored_x = geo::project(beijing, {beijing.center.lng - dl, beijing.center.lat + dp});
        const auto mirrored_y = geo::project(beijing, {beijing.center.lng + dl, beijing.center.lat - dp});
        EXPECT_DOUBLE_EQ(mirrored_x.x, -p.x);
        EXPECT_EQ(mirrored_x.y, p.y);
        EXPECT_NEAR(mirrored_y.y, -p.y, 1e-8);
        EXPECT_EQ(mirrored_y.x, p.x);
        EXPECT_EQ(std::signbit(p.x), dl < 0);
        EXPECT_EQ(std::signbit(p.y), dp < 0);
    }
}

TEST(Project, UnprojectInvertsProject)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> off(-0.25, 0.25);
    for (int k = 0; k < 200; ++k) {
        const GeoCoordinate g{beijing.center.lng + off(rng), beijing.center.lat + off(rng)};
        const auto back = geo::unproject(beijing, geo::project(beijing, g));
        EXPECT_NEAR(back.lng, g.lng, 1e-10);
        EXPECT_NEAR(back.lat, g.lat, 1e-10);
    }
}

TEST(Project, RejectsOutOfBoundsSample)
{
    EXPECT_THROW(geo::project(beijing, {116.0, 91.0}), Error);
}

} // namespace
