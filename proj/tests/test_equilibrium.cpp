#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "taylorlaw/equilibrium.hpp"

namespace {

using namespace taylorlaw;
using namespace taylorlaw::equilibrium;

const BenefitCurve sqrt_benefit{1.0, 0.5};
const CostCurve square_cost{1.0, 2.0};

TEST(Crossing, UnitScales)
{
    const auto r = crossing(sqrt_benefit, square_cost);
    EXPECT_NEAR(r.n_star, 1.0, 1e-12);
    EXPECT_GT(r.n_star, 0.0);
    EXPECT_LE(r.bracket_low, r.n_star);
    EXPECT_GE(r.bracket_high, r.n_star);
}

TEST(Crossing, BenefitScaleFour)
{
    const auto r = crossing(sqrt_benefit, square_cost, 4.0, 1.0);
    EXPECT_NEAR(r.n_star, std::pow(4.0, 2.0 / 3.0), 1e-11);
    EXPECT_NEAR(r.n_star, 2.5198, 1e-4);
    EXPECT_EQ(r.n_integer(), 2.0);
}

TEST(Crossing, CostScaleFour)
{
    const auto r = crossing(sqrt_benefit, square_cost, 1.0, 4.0);
    EXPECT_NEAR(r.n_star, std::pow(4.0, -2.0 / 3.0), 1e-12);
    EXPECT_NEAR(r.n_star, 0.3969, 1e-4);
}

TEST(Crossing, ResidualIsSmall)
{
    const auto r = crossing({2.5, 0.3}, {0.7, 3.1}, 1.7, 0.4);
    EXPECT_LT(r.residual, 1e-10);
}

TEST(Crossing, FamilyErrors)
{
    EXPECT_THROW(crossing({1.0, 1.0}, square_cost), Error);
    EXPECT_THROW(crossing({1.0, 0.0}, square_cost), Error);
    EXPECT_THROW(crossing(sqrt_benefit, {1.0, 1.0}), Error);
    EXPECT_THROW(crossing({-1.0, 0.5}, square_cost), Error);
    EXPECT_THROW(crossing(sqrt_benefit, square_cost, 0.0, 1.0), Error);
}

TEST(Crossing, AgreesWithClosedFormAcrossSweep)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(0.1, 10.0), p(1e-3, 1.0 - 1e-3), q(1.0 + 1e-3, 5.0);
    for (int k = 0; k < 2000; ++k) {
        const BenefitCurve f{coef(rng), p(rng)};
        const CostCurve g{coef(rng), q(rng)};
        const double exact = closed_form_crossing(f, g);
        EXPECT_NEAR(crossing(f, g).n_star / exact, 1.0, 1e-9);
    }
}

TEST(Crossing, Homogeneity)
{
    const BenefitCurve f{1.3, 0.4};
    const CostCurve g{0.8, 2.5};
    const double base = crossing(f, g, 2.0, 3.0).n_star;
    for (double k : {0.01, 0.5, 7.0, 300.0}) {
        EXPECT_NEAR(crossing(f, g, 2.0 * k, 3.0 * k).n_star / base, 1.0, 1e-10);
    }
}

TEST(Crossing, MonotoneInScales)
{
    double prev = 0.0;
    for (double s = 0.1; s < 20.0; s *= 1.3) {
        const double n = crossing(sqrt_benefit, square_cost, s, 1.0).n_star;
        EXPECT_GT(n, prev);
        prev = n;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double s = 0.1; s < 20.0; s *= 1.3) {
        const double n = crossing(sqrt_benefit, square_cost, 1.0, s).n_star;
        EXPECT_LT(n, prev);
        prev = n;
    }
}

TEST(Crossing, EntryRuleSigns)
{
    const BenefitCurve f{2.0, 0.7};
    const CostCurve g{0.3, 1.8};
    const auto r = crossing(f, g, 1.5, 2.0);
    const auto h = [&](double n) { return 1.5 * f(n) - 2.0 * g(n); };
    EXPECT_GT(h(r.n_star * (1 - 1e-3)), 0.0);
    EXPECT_LT(h(r.n_star * (1 + 1e-3)), 0.0);
}

TEST(Crossing, GenericCurves)
{
    // 1 - exp(-n) against n^2 / 4; root checked by its residual.
    const auto r = crossing_of([](double n) { return 1.0 - std::exp(-n); }, [](double n) { return n * n / 4.0; });
    EXPECT_NEAR(1.0 - std::exp(-r.n_star), r.n_star * r.n_star / 4.0, 1e-11);
}

TEST(CompareFacilities, StrongerBenefitClustersMore)
{
    const auto cmp = compare_facilities({2.0, 1.0}, {1.0, 1.0}, sqrt_benefit, square_cost);
    EXPECT_NEAR(cmp.first.n_star, std::pow(2.0, 2.0 / 3.0), 1e-11);
    EXPECT_NEAR(cmp.second.n_star, 1.0, 1e-12);
    EXPECT_EQ(cmp.ordering, 1);
}

TEST(CompareFacilities, IdenticalScalesTie)
{
    EXPECT_EQ(compare_facilities({1.7, 0.3}, {1.7, 0.3}, sqrt_benefit, square_cost).ordering, 0);
}

TEST(CompareFacilities, HigherCostClustersLess)
{
    EXPECT_EQ(compare_facilities({1.0, 3.0}, {1.0, 2.0}, sqrt_benefit, square_cost).ordering, -1);
}

TEST(Range, DegenerateIntervals)
{
    const auto r = equilibrium_range({1.5, 0.5}, {{1, 1}, {1, 1}}, sqrt_benefit, square_cost);
    const double n = crossing({1.5, 0.5}, sqrt_benefit, square_cost).n_star;
    EXPECT_DOUBLE_EQ(r.n_min(), n);
    EXPECT_DOUBLE_EQ(r.n_max(), n);
}

TEST(Range, BenefitInterval)
{
    const auto r = equilibrium_range({1, 1}, {{1, 4}, {1, 1}}, sqrt_benefit, square_cost);
    EXPECT_NEAR(r.n_min(), 1.0, 1e-12);
    EXPECT_NEAR(r.n_max(), std::pow(4.0, 2.0 / 3.0), 1e-11);
}

TEST(Range, CostInterval)
{
    const auto r = equilibrium_range({1, 1}, {{1, 1}, {1, 4}}, sqrt_benefit, square_cost);
    EXPECT_NEAR(r.n_min(), std::pow(4.0, -2.0 / 3.0), 1e-12);
    EXPECT_NEAR(r.n_max(), 1.0, 1e-12);
    EXPECT_LE(r.n_min(), r.n_max());
}

TEST(Range, InvalidInterval)
{
    EXPECT_THROW(equilibrium_range({1, 1}, {{2, 1}, {1, 1}}, sqrt_benefit, square_cost), Error);
    EXPECT_THROW(equilibrium_range({1, 1}, {{1, 1}, {0, 1}}, sqrt_benefit, square_cost), Error);
}

} // namespace
