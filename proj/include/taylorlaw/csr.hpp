#pragma once

// Complete spatial randomness tests: index-of-dispersion chi-square, nearest-neighbour
// G-function, and Monte Carlo envelopes of G under the binomial null.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "taylorlaw/error.hpp"
#include "taylorlaw/grid.hpp"
#include "taylorlaw/pointgen.hpp"

namespace taylorlaw::csr {

using geo::PlanarPoint;
using pointgen::RandomSeed;
using pointgen::WindowRegion;

struct DispersionTestResult {
    double t_cc = 0.0;
    int df = 0;
    double p_value = 1.0;
    int quadrats_used = 0;
};

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double x, double df)
{
    if (!(df > 0.0)) {
        throw Error(ErrorKind::Domain, "chi-square df must be positive");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

/// T = sum_k (X_k - mean)^2 / mean, chi-square with Q-1 df under the Poisson null.
inline DispersionTestResult dispersion_test(std::span<const std::int64_t> counts)
{
    if (counts.size() < 2) {
        throw Error(ErrorKind::InsufficientData, "dispersion test needs at least 2 quadrats");
    }
    double sum = 0.0;
    for (auto x : counts) {
        sum += static_cast<double>(x);
    }
    const double mean = sum / static_cast<double>(counts.size());
    if (!(mean > 0.0)) {
        throw Error(ErrorKind::Degenerate, "dispersion test on an empty window");
    }
    double ss = 0.0;
    for (auto x : counts) {
        const double d = static_cast<double>(x) - mean;
        ss += d * d;
    }
    DispersionTestResult out;
    out.quadrats_used = static_cast<int>(counts.size());
    out.df = out.quadrats_used - 1;
    out.t_cc = ss / mean;
    out.p_value = chi_square_sf(out.t_cc, out.df);
    return out;
}

inline DispersionTestResult dispersion_test(const grid::QuadratCounts& counts)
{
    const auto flat = counts.flatten();
    return dispersion_test(std::span<const std::int64_t>(flat));
}

/// Distances 0, step, ..., max inclusive. Default 0..2000 m by 10 m.
inline std::vector<double> make_r_grid(double max_r = 2000.0, double step = 10.0)
{
    if (!(step > 0.0) || !(max_r >= 0.0)) {
        throw Error(ErrorKind::Domain, "r grid needs step > 0 and max >= 0");
    }
    std::vector<double> r;
    const auto n = static_cast<std::size_t>(std::floor(max_r / step + 1e-9));
    r.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        r.push_back(static_cast<double>(k) * step);
    }
    return r;
}

namespace detail {

inline double dist(const PlanarPoint& a, const PlanarPoint& b) noexcept
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace detail

/// Exact nearest-neighbour distance of every point, via a uniform bucket grid with ring search.
inline std::vector<double> nearest_neighbour_distances(std::span<const PlanarPoint> points)
{
    const std::size_t n = points.size();
    if (n < 2) {
        throw Error(ErrorKind::InsufficientData, "nearest-neighbour distances need at least 2 points");
    }
    double x_min = points[0].x, x_max = points[0].x, y_min = points[0].y, y_max = points[0].y;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw Error(ErrorKind::Domain, "non-finite point coordinate");
        }
        x_min = std::min(x_min, p.x);
        x_max = std::max(x_max, p.x);
        y_min = std::min(y_min, p.y);
        y_max = std::max(y_max, p.y);
    }
    const double span_x = x_max - x_min;
    const double span_y = y_max - y_min;
    const double area = std::max(span_x * span_y, 1e-12);
    double cell = std::sqrt(area / static_cast<double>(n)) * 1.5;
    if (!(cell > 0.0)) {
        cell = std::max({span_x, span_y, 1.0});
    }
    const auto nx = static_cast<long>(std::min(4096.0, std::floor(span_x / cell) + 1.0));
    const auto ny = static_cast<long>(std::min(4096.0, std::floor(span_y / cell) + 1.0));
    const double cell_x = nx > 1 ? span_x / static_cast<double>(nx) * (1.0 + 1e-12) : std::max(span_x, cell) + 1.0;
    const double cell_y = ny > 1 ? span_y / static_cast<double>(ny) * (1.0 + 1e-12) : std::max(span_y, cell) + 1.0;
    auto cx_of = [&](double x) { return std::clamp(static_cast<long>((x - x_min) / cell_x), 0L, nx - 1); };
    auto cy_of = [&](double y) { return std::clamp(static_cast<long>((y - y_min) / cell_y), 0L, ny - 1); };

    // Counting-sort points into buckets.
    std::vector<std::size_t> start(static_cast<std::size_t>(nx * ny + 1), 0);
    std::vector<std::size_t> bucket_of(n);
    for (std::size_t k = 0; k < n; ++k) {
        bucket_of[k] = static_cast<std::size_t>(cy_of(points[k].y) * nx + cx_of(points[k].x));
        ++start[bucket_of[k] + 1];
    }
    for (std::size_t b = 1; b < start.size(); ++b) {
        start[b] += start[b - 1];
    }
    std::vector<std::size_t> order(n);
    {
        auto fill = start;
        for (std::size_t k = 0; k < n; ++k) {
            order[fill[bucket_of[k]]++] = k;
        }
    }

    const double ring_step = std::min(cell_x, cell_y);
    std::vector<double> nn(n, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < n; ++k) {
        const long cx = cx_of(points[k].x);
        const long cy = cy_of(points[k].y);
        double best = std::numeric_limits<double>::infinity();
        for (long ring = 0;; ++ring) {
            // Points outside rings 0..ring-1 are at least (ring - 1) * ring_step away.
            if (ring > 0 && best <= static_cast<double>(ring - 1) * ring_step) {
                break;
            }
            if (cx - ring < 0 && cy - ring < 0 && cx + ring >= nx && cy + ring >= ny) {
                break;
            }
            for (long gy = cy - ring; gy <= cy + ring; ++gy) {
                if (gy < 0 || gy >= ny) continue;
                const bool edge_row = gy == cy - ring || gy == cy + ring;
                for (long gx = cx - ring; gx <= cx + ring; gx += (edge_row ? 1 : 2 * ring)) {
                    if (gx >= 0 && gx < nx) {
                        const auto b = static_cast<std::size_t>(gy * nx + gx);
                        for (std::size_t s = start[b]; s < start[b + 1]; ++s) {
                            const std::size_t other = order[s];
                            if (other != k) {
                                best = std::min(best, detail::dist(points[k], points[other]));
                            }
                        }
                    }
                }
            }
        }
        nn[k] = best;
    }
    return nn;
}

struct GFunctionCurve {
    std::vector<double> r_grid;
    std::vector<double> values;
    std::size_t n_points = 0;
};

/// Optional reduced-sample border correction; off by default.
struct GFunctionOptions {
    std::optional<WindowRegion> border_window;
};

inline void require_ascending(std::span<const double> r_grid)
{
    for (std::size_t k = 1; k < r_grid.size(); ++k) {
        if (!(r_grid[k] > r_grid[k - 1])) {
            throw Error(ErrorKind::Domain, "r grid must be strictly ascending");
        }
    }
}

/// Empirical distribution function of nearest-neighbour distances.
inline GFunctionCurve g_function(std::span<const PlanarPoint> points, std::span<const double> r_grid,
                                 const GFunctionOptions& options = {})
{
    require_ascending(r_grid);
    auto nn = nearest_neighbour_distances(points);
    GFunctionCurve out;
    out.r_grid.assign(r_grid.begin(), r_grid.end());
    out.n_points = points.size();
    out.values.reserve(r_grid.size());

    if (!options.border_window) {
        std::sort(nn.begin(), nn.end());
        const double n = static_cast<double>(nn.size());
        for (double r : r_grid) {
            const auto hits = std::upper_bound(nn.begin(), nn.end(), r) - nn.begin();
            out.values.push_back(static_cast<double>(hits) / n);
        }
        return out;
    }

    const WindowRegion& w = *options.border_window;
    std::vector<double> border(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        border[k] = std::min({p.x - w.x_min, w.x_max - p.x, p.y - w.y_min, w.y_max - p.y});
    }
    double running = 0.0;
    for (double r : r_grid) {
        std::size_t eligible = 0, hits = 0;
        for (std::size_t k = 0; k < nn.size(); ++k) {
            if (border[k] >= r) {
                ++eligible;
                hits += nn[k] <= r ? 1 : 0;
            }
        }
        // Reduced-sample estimates are not monotone in general; keep the curve a CDF.
        const double g = eligible ? static_cast<double>(hits) / static_cast<double>(eligible) : running;
        running = std::max(running, g);
        out.values.push_back(running);
    }
    return out;
}

struct EnvelopeResult {
    std::vector<double> r_grid;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> empirical;
    int n_sims = 0;
    double above_fraction = 0.0;  ///< grid points where empirical > upper
    double below_fraction = 0.0;  ///< grid points where empirical < lower
    double inside_fraction = 0.0; ///< grid points where lower <= empirical <= upper
};

/// Pointwise min/max of G over n_sims binomial patterns with the observed count.
/// Simulation k uses stream k of fold_seed(seed), so results do not depend on how work is split
/// across threads and distinct (master, stream) seeds give independent envelopes.
inline EnvelopeResult mc_envelope(std::span<const PlanarPoint> points, const WindowRegion& window,
                                  int n_sims, const RandomSeed& seed, std::span<const double> r_grid,
                                  unsigned threads = 1)
{
    if (n_sims < 1) {
        throw Error(ErrorKind::Domain, "envelope needs at least one simulation");
    }
    const auto empirical = g_function(points, r_grid);
    const auto n = static_cast<std::int64_t>(points.size());

    const RandomSeed base{pointgen::fold_seed(seed), 0};
    std::vector<std::vector<double>> sims(static_cast<std::size_t>(n_sims));
    auto run = [&](std::size_t first, std::size_t stride) {
        for (std::size_t k = first; k < sims.size(); k += stride) {
            const auto pts = pointgen::gen_binomial(n, window, base.with_stream(k));
            sims[k] = g_function(pts, r_grid).values;
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_sims)));
    if (threads == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(run, t, threads);
        }
    }

    EnvelopeResult out;
    out.r_grid = empirical.r_grid;
    out.empirical = empirical.values;
    out.n_sims = n_sims;
    out.lower = sims[0];
    out.upper = sims[0];
    for (std::size_t k = 1; k < sims.size(); ++k) {
        for (std::size_t g = 0; g < r_grid.size(); ++g) {
            out.lower[g] = std::min(out.lower[g], sims[k][g]);
            out.upper[g] = std::max(out.upper[g], sims[k][g]);
        }
    }
    std::size_t above = 0, below = 0;
    for (std::size_t g = 0; g < r_grid.size(); ++g) {
        above += out.empirical[g] > out.upper[g] ? 1 : 0;
        below += out.empirical[g] < out.lower[g] ? 1 : 0;
    }
    const double m = r_grid.empty() ? 1.0 : static_cast<double>(r_grid.size());
    out.above_fraction = static_cast<double>(above) / m;
    out.below_fraction = static_cast<double>(below) / m;
    out.inside_fraction = r_grid.empty() ? 1.0 : 1.0 - out.above_fraction - out.below_fraction;
    return out;
}

} // namespace taylorlaw::csr
