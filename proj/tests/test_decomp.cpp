#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "reference_tables.hpp"
#include "taylorlaw/decomp.hpp"

namespace {

using namespace taylorlaw;
using decomp::ExponentTable;

TEST(Decompose, SingleCellSplitsEvenly)
{
    ExponentTable t;
    t.add("A", "x", 2.0);
    const auto r = decomp::decompose(t);
    EXPECT_NEAR(r.c[0], 0.25, 1e-15);
    EXPECT_NEAR(r.f[0], 0.25, 1e-15);
    EXPECT_NEAR(r.objective, 0.0, 1e-30);
}

TEST(Decompose, MinNormMatchesPseudoInverse)
{
    // numpy.linalg.pinv on the 6x5 design for c* = (0.1, 0.2), f* = (0.5, 0.6, 0.7).
    const std::vector<double> c{0.1, 0.2}, f{0.5, 0.6, 0.7};
    const auto t = decomp::synthesize(c, f, [](auto, auto) { return true; });
    const auto r = decomp::decompose(t);
    const double expect[] = {0.4, 0.5, 0.2, 0.3, 0.4};
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(r.c[k], expect[k], 1e-14);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.f[k], expect[2 + k], 1e-14);
    EXPECT_LE(r.objective, 1e-28);
    const double shift = r.c[0] - c[0];
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(r.c[k] - c[k], shift, 1e-14);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(f[k] - r.f[k], shift, 1e-14);
}

TEST(Decompose, FixedFacilityMeanGauge)
{
    const std::vector<double> c{0.1, 0.2}, f{0.5, 0.6, 0.7};
    const auto t = decomp::synthesize(c, f, [](auto, auto) { return true; });
    const auto r = decomp::decompose(t, decomp::FixedFacilityMean{0.6});
    EXPECT_NEAR(r.c[0], 0.1, 1e-14);
    EXPECT_NEAR(r.c[1], 0.2, 1e-14);
    EXPECT_NEAR(r.f[2], 0.7, 1e-14);
}

TEST(Decompose, GaugeInvarianceOnSparseTable)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.5);
    std::vector<double> c(12), f(6);
    for (auto& x : c) x = u(rng);
    for (auto& x : f) x = u(rng);
    std::bernoulli_distribution keep(0.7);
    ExponentTable t;
    std::normal_distribution<double> noise(0.0, 0.02);
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < f.size(); ++j) {
            if (j == i % f.size() || keep(rng)) {
                t.add("c" + std::to_string(i), "f" + std::to_string(j), 1.0 / (c[i] + f[j] + noise(rng)));
            }
        }
    }
    const auto a = decomp::decompose(t);
    const auto b = decomp::decompose(t, decomp::FixedFacilityMean{-3.0});
    EXPECT_NEAR(a.objective, b.objective, 1e-14);
    EXPECT_NEAR(a.mean_relative_residual, b.mean_relative_residual, 1e-13);
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        EXPECT_NEAR(a.residuals[k], b.residuals[k], 1e-13);
        EXPECT_NEAR(a.fitted(a.cells[k]), b.fitted(b.cells[k]), 1e-13);
    }
    double fmean = 0.0;
    for (double x : b.f) fmean += x;
    EXPECT_NEAR(fmean / b.f.size(), -3.0, 1e-13);
}

TEST(Decompose, NormalEquationOptimality)
{
    const auto table = reference::exponent_table();
    const auto r = decomp::decompose(table);
    auto objective = [&](const std::vector<double>& c, const std::vector<double>& f) {
        double acc = 0.0;
        for (const auto& cell : table.cells()) {
            const double e = cell.y() - c[cell.city] - f[cell.facility];
            acc += e * e;
        }
        return acc;
    };
    const double j0 = objective(r.c, r.f);
    EXPECT_NEAR(j0, r.objective, 1e-14);
    for (double d : {1e-4, -1e-4}) {
        for (std::size_t i = 0; i < r.c.size(); ++i) {
            auto c = r.c;
            c[i] += d;
            EXPECT_GE(objective(c, r.f), j0);
        }
        for (std::size_t j = 0; j < r.f.size(); ++j) {
            auto f = r.f;
            f[j] += d;
            EXPECT_GE(objective(r.c, f), j0);
        }
    }
}

TEST(Decompose, DisconnectedTableNamesComponents)
{
    ExponentTable t;
    t.add("A", "x", 1.5);
    t.add("B", "y", 1.6);
    try {
        decomp::decompose(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Identifiability);
        const std::string msg = e.what();
        EXPECT_NE(msg.find("{city:A, facility:x}"), std::string::npos) << msg;
        EXPECT_NE(msg.find("{city:B, facility:y}"), std::string::npos) << msg;
    }
}

TEST(ExponentTable, RejectsNonPositiveAndDuplicate)
{
    ExponentTable t;
    EXPECT_THROW(t.add("A", "x", 0.0), Error);
    EXPECT_THROW(t.add("A", "x", -1.2), Error);
    t.add("A", "x", 1.2);
    EXPECT_THROW(t.add("A", "x", 1.3), Error);
    EXPECT_EQ(t.find("A", "x"), 1.2);
    EXPECT_FALSE(t.find("A", "y"));
    EXPECT_THROW(decomp::decompose(ExponentTable{}), Error);
}

TEST(RelativeResidual, ExactTableIsZero)
{
    const std::vector<double> c{0.2, 0.1, 0.3}, f{0.4, 0.5};
    const auto t = decomp::synthesize(c, f, [](auto i, auto j) { return i + j != 3; });
    EXPECT_NEAR(decomp::decompose(t).mean_relative_residual, 0.0, 1e-14);
}

TEST(RelativeResidual, BoundedByMultiplicativeNoise)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 0.4);
    std::bernoulli_distribution sign(0.5);
    for (int trial = 0; trial < 50; ++trial) {
        ExponentTable t;
        std::vector<double> c(8), f(5);
        for (auto& x : c) x = u(rng);
        for (auto& x : f) x = u(rng);
        for (std::size_t i = 0; i < c.size(); ++i) {
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double y = (c[i] + f[j]) * (sign(rng) ? 1.01 : 0.99);
                t.add("c" + std::to_string(i), "f" + std::to_string(j), 1.0 / y);
            }
        }
        const auto r = decomp::decompose(t);
        EXPECT_LE(decomp::relative_residual(r, t), 0.01 * (1 + 1e-6));
    }
}

TEST(RelativeResidual, PublishedFactorsAgainstPublishedExponents)
{
    auto res = reference::published_cell_residuals();
    ASSERT_EQ(res.size(), 35u);
    EXPECT_NEAR(res[2], 0.006, 0.001);   // Beijing beauty
    EXPECT_NEAR(res[6], 0.099, 0.0005);  // Beijing banks
    EXPECT_NEAR(res[9], 0.1926, 0.0005); // Shanghai beauty
    std::nth_element(res.begin(), res.begin() + 17, res.end());
    EXPECT_LE(res[17], 0.15);
    EXPECT_NEAR(res[17], 0.0586, 0.0005);
}

TEST(RelativeResidual, PublishedCityOrderingSurvivesRefit)
{
    const auto r = decomp::decompose(reference::exponent_table());
    const auto top = std::max_element(r.c.begin(), r.c.end()) - r.c.begin();
    EXPECT_EQ(r.cities[static_cast<std::size_t>(top)], "Beijing");
}

TEST(Shares, Examples)
{
    std::vector<decomp::Cell> cells{{0, 0, 1}, {0, 1, 1}, {1, 0, 1}};
    const std::vector<double> same_c{0.3, 0.3}, same_f{0.3, 0.3};
    auto s = decomp::contribution_shares(same_c, same_f, cells);
    EXPECT_DOUBLE_EQ(s.csf, 0.5);
    EXPECT_DOUBLE_EQ(s.fsf, 0.5);
    const std::vector<double> c{0.2, 0.2}, f{0.6, 0.6};
    s = decomp::contribution_shares(c, f, cells);
    EXPECT_NEAR(s.csf, 0.25, 1e-15);
    EXPECT_NEAR(s.fsf, 0.75, 1e-15);
    const std::vector<double> bad_c{-0.7, 0.2};
    EXPECT_THROW(decomp::contribution_shares(bad_c, f, cells), Error);
}

TEST(Shares, PublishedFactorsGiveAboutAQuarter)
{
    std::vector<double> c, f(reference::facility_factors.begin(), reference::facility_factors.end());
    for (const auto& [name, v] : reference::city_factors) c.push_back(v);
    std::vector<decomp::Cell> cells;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < f.size(); ++j) cells.push_back({i, j, 1.0});
    }
    const auto s = decomp::contribution_shares(c, f, cells);
    EXPECT_NEAR(s.csf, 0.24675, 5e-5);
    EXPECT_NEAR(s.csf, 0.24, 0.01);
}

TEST(FactorMeans, UnitVariance)
{
    const auto m = decomp::factor_means(1.0, 0.3, 0.4, 2.0, 1.5);
    EXPECT_NEAR(m.m_y, std::pow(2.0, -1.0 / 3.0), 1e-15);
    EXPECT_NEAR(m.m_z, std::pow(2.0, -1.0 / 3.0), 1e-15);
    EXPECT_NEAR(m.m, std::pow(2.0, -2.0 / 3.0), 1e-15);
}

TEST(FactorMeans, BeijingBeautySalons)
{
    // mpmath at 40 digits.
    const auto m = decomp::factor_means(5000.0, 0.26, 0.44, std::exp(2.23), 1.42);
    EXPECT_NEAR(m.m_y, 4.175603764766842, 1e-12);
    EXPECT_NEAR(m.m_z, 19.34344759634831, 1e-11);
    EXPECT_NEAR(m.m, 83.73029329072621, 1e-10);
    EXPECT_NEAR(m.m_z / m.m_y, std::pow(5000.0, 0.18), 1e-12);
    EXPECT_GT(m.m_z, 4.0 * m.m_y);
}

TEST(FactorMeans, ProductIdentityWhenFactorsSumToInverseExponent)
{
    for (double b : {1.1, 1.42, 1.9}) {
        for (double c : {0.1, 0.26, 0.4}) {
            const auto m = decomp::factor_means(5000.0, c, 1.0 / b - c, std::exp(2.23), b);
            EXPECT_LT(std::abs(m.m_y * m.m_z - m.m) / m.m, 1e-12);
        }
    }
    EXPECT_THROW(decomp::factor_means(0.0, 0.1, 0.1, 1.0, 1.0), Error);
    EXPECT_THROW(decomp::factor_means(1.0, 0.1, 0.1, -1.0, 1.0), Error);
}

TEST(Synthesize, RoundTripUpToGauge)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.05, 0.6);
    std::vector<double> c(40), f(10);
    for (auto& x : c) x = u(rng);
    for (auto& x : f) x = u(rng);
    std::bernoulli_distribution keep(0.8);
    std::vector<std::vector<bool>> mask(40, std::vector<bool>(10));
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = 0; j < 10; ++j) mask[i][j] = j == i % 10 || j == (i + 1) % 10 || keep(rng);
    }
    const auto t = decomp::synthesize(c, f, [&](auto i, auto j) { return mask[i][j]; });
    const auto r = decomp::decompose(t);
    EXPECT_LE(r.objective, 1e-20);
    const double shift = r.c[0] - c[0];
    for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(r.c[i] - c[i], shift, 1e-10);
    for (std::size_t k = 0; k < 10; ++k) {
        const auto j = std::stoul(r.facilities[k].substr(std::string("facility").size()));
        EXPECT_NEAR(f[j] - r.f[k], shift, 1e-10);
    }
}

} // namespace
