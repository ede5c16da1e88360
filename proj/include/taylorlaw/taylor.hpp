#pragma once

// Taylor's power law S^2 = a * m^b fitted by OLS of log S^2 on log m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "taylorlaw/error.hpp"
#include "taylorlaw/grid.hpp"

namespace taylorlaw::taylor {

using grid::MeanVariancePair;

struct LogLogPoint {
    double log_m = 0.0;
    double log_s2 = 0.0;
    std::string city;
    std::string facility;
    int subarea = 0;
};

struct TaylorFit {
    double log_a = 0.0;
    double b = 0.0;
    double se_log_a = 0.0;
    double se_b = 0.0;
    double t_log_a = 0.0;
    double t_b = 0.0;
    double p_log_a = 1.0;
    double p_b = 1.0;
    double r_squared = 0.0;
    int n_points = 0;

    double a() const { return std::exp(log_a); }
};

enum class Regime { Random, Poisson, Clumped };

inline const char* to_string(Regime r) noexcept
{
    switch (r) {
    case Regime::Random: return "random";
    case Regime::Poisson: return "poisson";
    case Regime::Clumped: return "clumped";
    }
    return "unknown";
}

struct ExponentRegime {
    Regime regime = Regime::Poisson;
    double band = 0.1;
};

inline constexpr double default_poisson_band = 0.1;

/// Two-sided p-value of a Student-t statistic.
inline double student_t_two_sided(double t, double df)
{
    if (!(df > 0.0)) {
        throw Error(ErrorKind::Domain, "Student-t df must be positive");
    }
    if (std::isnan(t)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

/// True when the pair can be placed on log-log axes.
inline bool usable(const MeanVariancePair& p) noexcept
{
    return p.mean > 0.0 && p.variance > 0.0 && std::isfinite(p.mean) && std::isfinite(p.variance);
}

/// OLS on (log_m, log_s2) points. Requires at least 3 points with spread in log_m.
inline TaylorFit fit_log_log(std::span<const double> log_m, std::span<const double> log_s2)
{
    const std::size_t n = log_m.size();
    if (n != log_s2.size()) {
        throw Error(ErrorKind::Domain, "log-log inputs differ in length");
    }
    if (n < 3) {
        throw Error(ErrorKind::InsufficientData,
                    "Taylor fit needs at least 3 usable (mean, variance) pairs, got " + std::to_string(n));
    }
    const auto [lo, hi] = std::minmax_element(log_m.begin(), log_m.end());
    if (*lo == *hi) {
        throw Error(ErrorKind::Degenerate, "all sub-area means are equal; slope is undefined");
    }

    const double dn = static_cast<double>(n);
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += log_m[k];
        my += log_s2[k];
    }
    mx /= dn;
    my /= dn;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = log_m[k] - mx;
        const double dy = log_s2[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }

    TaylorFit fit;
    fit.n_points = static_cast<int>(n);
    fit.b = sxy / sxx;
    fit.log_a = my - fit.b * mx;

    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = log_s2[k] - (fit.log_a + fit.b * log_m[k]);
        sse += r * r;
    }
    const double df = dn - 2.0;
    const double s2 = sse / df;
    fit.se_b = std::sqrt(s2 / sxx);
    fit.se_log_a = std::sqrt(s2 * (1.0 / dn + mx * mx / sxx));
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;

    auto t_stat = [](double est, double se) {
        if (se > 0.0) return est / se;
        if (est == 0.0) return 0.0;
        return std::copysign(std::numeric_limits<double>::infinity(), est);
    };
    fit.t_b = t_stat(fit.b, fit.se_b);
    fit.t_log_a = t_stat(fit.log_a, fit.se_log_a);
    fit.p_b = student_t_two_sided(fit.t_b, df);
    fit.p_log_a = student_t_two_sided(fit.t_log_a, df);
    return fit;
}

/// Fits the usable pairs; pairs with m <= 0 or S^2 <= 0 are dropped first.
inline TaylorFit fit_taylor(std::span<const MeanVariancePair> pairs)
{
    std::vector<double> xs, ys;
    for (const auto& p : pairs) {
        if (usable(p)) {
            xs.push_back(std::log(p.mean));
            ys.push_back(std::log(p.variance));
        }
    }
    return fit_log_log(xs, ys);
}

struct CityTotal {
    std::string city;
    std::int64_t count = 0;
};

/// Cities ranked by facility count (descending, ties by name), first rank_cutoff kept.
inline std::vector<std::string> select_top_cities(std::span<const CityTotal> totals, int rank_cutoff)
{
    if (rank_cutoff < 1) {
        throw Error(ErrorKind::Domain, "rank_cutoff must be >= 1");
    }
    std::vector<CityTotal> sorted(totals.begin(), totals.end());
    std::sort(sorted.begin(), sorted.end(), [](const CityTotal& l, const CityTotal& r) {
        return std::tie(r.count, l.city) < std::tie(l.count, r.city);
    });
    std::vector<std::string> out;
    for (std::size_t k = 0; k < sorted.size() && k < static_cast<std::size_t>(rank_cutoff); ++k) {
        out.push_back(sorted[k].city);
    }
    return out;
}

/// Sub-area pairs of one facility in one city, with the city's facility count for ranking.
struct CityPairs {
    std::string city;
    std::int64_t total_count = 0;
    std::vector<MeanVariancePair> pairs;
};

/// Pools the pairs of the top-ranked cities into one regression. The pooled set is ordered by
/// (city, sub-area) before fitting, so input order never changes the result.
inline TaylorFit aggregate_fit(std::span<const CityPairs> cities, int rank_cutoff)
{
    std::vector<CityTotal> totals;
    totals.reserve(cities.size());
    for (const auto& c : cities) {
        totals.push_back({c.city, c.total_count});
    }
    auto selected = select_top_cities(totals, rank_cutoff);
    std::sort(selected.begin(), selected.end());

    std::vector<const CityPairs*> ordered;
    for (const auto& c : cities) {
        if (std::binary_search(selected.begin(), selected.end(), c.city)) {
            ordered.push_back(&c);
        }
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const CityPairs* l, const CityPairs* r) { return l->city < r->city; });

    std::vector<MeanVariancePair> pooled;
    for (const auto* c : ordered) {
        auto pairs = c->pairs;
        std::stable_sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) {
            return l.subarea_index < r.subarea_index;
        });
        pooled.insert(pooled.end(), pairs.begin(), pairs.end());
    }
    return fit_taylor(pooled);
}

/// Poisson when |b - 1| <= band, clumped above the band, random at or below b = band;
/// anything left (band < b < 1 - band) goes to the nearer of 0 and 1.
inline ExponentRegime classify_exponent(double b, double poisson_band = default_poisson_band)
{
    if (!(poisson_band >= 0.0)) {
        throw Error(ErrorKind::Domain, "Poisson band must be >= 0");
    }
    Regime r;
    if (std::abs(b - 1.0) <= poisson_band) {
        r = Regime::Poisson;
    } else if (b - 1.0 > poisson_band) {
        r = Regime::Clumped;
    } else if (b <= poisson_band) {
        r = Regime::Random;
    } else {
        r = b < 0.5 ? Regime::Random : Regime::Poisson;
    }
    return {r, poisson_band};
}

inline ExponentRegime classify_exponent(const TaylorFit& fit, double poisson_band = default_poisson_band)
{
    return classify_exponent(fit.b, poisson_band);
}

inline std::vector<LogLogPoint> to_log_log(std::span<const MeanVariancePair> pairs, const std::string& city,
                                           const std::string& facility)
{
    std::vector<LogLogPoint> out;
    for (const auto& p : pairs) {
        if (usable(p)) {
            out.push_back({std::log(p.mean), std::log(p.variance), city, facility, p.subarea_index});
        }
    }
    return out;
}

} // namespace taylorlaw::taylor
