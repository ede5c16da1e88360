#pragma once

// Entry equilibrium between a concave external-economy benefit f(n) and a convex
// external-diseconomy cost g(n): n* solves scale_benefit * f(n) = scale_cost * g(n).

#include <cmath>
#include <algorithm>
#include <concepts>
#include <limits>
#include <string>

#include "taylorlaw/error.hpp"

namespace taylorlaw::equilibrium {

/// f(n) = coefficient * n^exponent with 0 < exponent < 1.
struct BenefitCurve {
    double coefficient = 1.0;
    double exponent = 0.5;

    double operator()(double n) const { return coefficient * std::pow(n, exponent); }

    void validate() const
    {
        if (!(coefficient > 0.0)) {
            throw Error(ErrorKind::Domain, "benefit coefficient must be positive");
        }
        if (!(exponent > 0.0 && exponent < 1.0)) {
            throw Error(ErrorKind::Domain, "benefit exponent must lie in (0, 1) for a unique crossing");
        }
    }
};

/// g(n) = coefficient * n^exponent with exponent > 1.
struct CostCurve {
    double coefficient = 1.0;
    double exponent = 2.0;

    double operator()(double n) const { return coefficient * std::pow(n, exponent); }

    void validate() const
    {
        if (!(coefficient > 0.0)) {
            throw Error(ErrorKind::Domain, "cost coefficient must be positive");
        }
        if (!(exponent > 1.0) || !std::isfinite(exponent)) {
            throw Error(ErrorKind::Domain, "cost exponent must exceed 1 for a unique crossing");
        }
    }
};

struct FacilityScale {
    double alpha = 1.0; ///< benefit multiplier
    double beta = 1.0;  ///< cost multiplier
};

struct Interval {
    double lower = 1.0;
    double upper = 1.0;
};

/// Area-specific multipliers: theta scales the benefit, eta the cost.
struct AreaScale {
    Interval theta;
    Interval eta;
};

struct EquilibriumResult {
    double n_star = 0.0;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
    double residual = 0.0; ///< |scale_benefit f(n*) - scale_cost g(n*)|
    int iterations = 0;

    double n_integer() const { return std::floor(n_star); }
};

inline constexpr double default_relative_tolerance = 1e-12;

/// Bisection on h(n) = benefit(n) - cost(n), which must be positive just above 0 and change sign
/// exactly once on (0, inf). The bracket grows by doubling (upward) or halving (downward) from 1.
/// Uniqueness of the root is the caller's obligation for non-power curves.
template <typename Benefit, typename Cost>
    requires std::invocable<const Benefit&, double> && std::invocable<const Cost&, double>
EquilibriumResult crossing_of(const Benefit& benefit, const Cost& cost,
                              double relative_tolerance = default_relative_tolerance)
{
    auto h = [&](double n) { return benefit(n) - cost(n); };
    constexpr int max_expansions = 2000;

    double lo = 1.0, hi = 1.0;
    int steps = 0;
    if (h(1.0) > 0.0) {
        while (h(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++steps > max_expansions || !std::isfinite(hi)) {
                throw Error(ErrorKind::Numeric, "no sign change found while expanding the bracket upward");
            }
        }
    } else {
        while (!(h(lo) > 0.0)) {
            hi = lo;
            lo /= 2.0;
            if (++steps > max_expansions || lo == 0.0) {
                throw Error(ErrorKind::Numeric, "no sign change found while shrinking the bracket toward 0");
            }
        }
    }

    EquilibriumResult out;
    out.bracket_low = lo;
    out.bracket_high = hi;
    int iterations = 0;
    while (hi - lo > relative_tolerance * hi) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (h(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (++iterations > 10000) {
            throw Error(ErrorKind::Numeric, "bisection did not converge");
        }
    }
    out.n_star = lo + (hi - lo) / 2.0;
    out.residual = std::abs(h(out.n_star));
    out.iterations = iterations;
    return out;
}

/// n* for scaled power curves, found by bracketing and bisection.
inline EquilibriumResult crossing(const BenefitCurve& f, const CostCurve& g, double scale_benefit = 1.0,
                                  double scale_cost = 1.0)
{
    f.validate();
    g.validate();
    if (!(scale_benefit > 0.0) || !(scale_cost > 0.0)) {
        throw Error(ErrorKind::Domain, "benefit and cost scales must be positive");
    }
    return crossing_of([&](double n) { return scale_benefit * f(n); },
                       [&](double n) { return scale_cost * g(n); });
}

/// (scale_benefit * A / (scale_cost * B))^(1 / (q - p)).
inline double closed_form_crossing(const BenefitCurve& f, const CostCurve& g, double scale_benefit = 1.0,
                                   double scale_cost = 1.0)
{
    f.validate();
    g.validate();
    return std::pow(scale_benefit * f.coefficient / (scale_cost * g.coefficient), 1.0 / (g.exponent - f.exponent));
}

inline EquilibriumResult crossing(const FacilityScale& facility, const BenefitCurve& f, const CostCurve& g)
{
    return crossing(f, g, facility.alpha, facility.beta);
}

struct FacilityComparison {
    EquilibriumResult first;
    EquilibriumResult second;
    /// -1 when n*_first < n*_second, +1 when greater, 0 when equal within relative tolerance.
    int ordering = 0;
};

inline FacilityComparison compare_facilities(const FacilityScale& first, const FacilityScale& second,
                                             const BenefitCurve& f, const CostCurve& g,
                                             double relative_tolerance = 1e-9)
{
    FacilityComparison out{crossing(first, f, g), crossing(second, f, g), 0};
    const double a = out.first.n_star;
    const double b = out.second.n_star;
    if (std::abs(a - b) > relative_tolerance * std::max(a, b)) {
        out.ordering = a > b ? 1 : -1;
    }
    return out;
}

struct EquilibriumRange {
    EquilibriumResult lowest;  ///< weakest benefit, strongest cost
    EquilibriumResult highest; ///< strongest benefit, weakest cost

    double n_min() const { return lowest.n_star; }
    double n_max() const { return highest.n_star; }
};

inline EquilibriumRange equilibrium_range(const FacilityScale& facility, const AreaScale& area,
                                          const BenefitCurve& f, const CostCurve& g)
{
    const auto check = [](const Interval& iv, const char* name) {
        if (!(iv.lower > 0.0) || !(iv.upper >= iv.lower)) {
            throw Error(ErrorKind::Domain, std::string(name) + " interval must satisfy 0 < lower <= upper");
        }
    };
    check(area.theta, "theta");
    check(area.eta, "eta");
    return {crossing(f, g, area.theta.lower * facility.alpha, area.eta.upper * facility.beta),
            crossing(f, g, area.theta.upper * facility.alpha, area.eta.lower * facility.beta)};
}

} // namespace taylorlaw::equilibrium
