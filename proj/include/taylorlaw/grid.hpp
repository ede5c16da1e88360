#pragma once

// Nested quadrat grid: a square window split into sub-areas, each split into quadrats.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "taylorlaw/error.hpp"
#include "taylorlaw/geoproj.hpp"

namespace taylorlaw::grid {

using geo::PlanarPoint;

/// Defaults: 40 km window, 4x4 sub-areas of 5x5 quadrats (2 km quadrats).
struct GridSpec {
    double window_extent = 40000.0;
    int subarea_divisions = 4;
    int quadrat_divisions = 5;

    int subarea_count() const noexcept { return subarea_divisions * subarea_divisions; }
    int quadrats_per_subarea() const noexcept { return quadrat_divisions * quadrat_divisions; }
    int quadrats_per_axis() const noexcept { return subarea_divisions * quadrat_divisions; }
    double quadrat_side() const noexcept { return window_extent / quadrats_per_axis(); }
    double half_extent() const noexcept { return window_extent / 2.0; }

    void validate() const
    {
        if (!(window_extent > 0.0) || !std::isfinite(window_extent)) {
            throw Error(ErrorKind::Config, "grid window_extent must be positive");
        }
        if (subarea_divisions < 1 || quadrat_divisions < 1) {
            throw Error(ErrorKind::Config, "grid divisions must be >= 1");
        }
    }
};

/// Sub-area j and quadrat i, both row-major (y outer, x inner) with index 0 at the south-west.
struct CellAddress {
    int subarea = 0;
    int quadrat = 0;

    friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

namespace detail {

// Column index along one axis in [0, n), or -1 outside [-half, half).
inline int axis_index(double v, double half, double side, int n) noexcept
{
    if (!(v >= -half) || !(v < half)) {
        return -1;
    }
    auto k = static_cast<int>(std::floor((v + half) / side));
    if (k >= n) { // rounding just below the open upper edge
        k = n - 1;
    }
    if (k < 0) {
        k = 0;
    }
    return k;
}

} // namespace detail

/// Returns std::nullopt for points outside the window. Cells are lower-closed, upper-open.
inline std::optional<CellAddress> assign(const PlanarPoint& p, const GridSpec& spec)
{
    const int n = spec.quadrats_per_axis();
    const int gx = detail::axis_index(p.x, spec.half_extent(), spec.quadrat_side(), n);
    const int gy = detail::axis_index(p.y, spec.half_extent(), spec.quadrat_side(), n);
    if (gx < 0 || gy < 0) {
        return std::nullopt;
    }
    const int q = spec.quadrat_divisions;
    return CellAddress{(gy / q) * spec.subarea_divisions + gx / q, (gy % q) * q + gx % q};
}

/// Lower-left corner of a quadrat in planar meters.
inline PlanarPoint quadrat_origin(const CellAddress& cell, const GridSpec& spec)
{
    const int q = spec.quadrat_divisions;
    const int gx = (cell.subarea % spec.subarea_divisions) * q + cell.quadrat % q;
    const int gy = (cell.subarea / spec.subarea_divisions) * q + cell.quadrat / q;
    return {-spec.half_extent() + gx * spec.quadrat_side(),
            -spec.half_extent() + gy * spec.quadrat_side()};
}

/// Event counts X_ji indexed [sub-area j][quadrat i].
struct QuadratCounts {
    GridSpec spec;
    std::vector<std::vector<std::int64_t>> counts;
    std::int64_t total_in_window = 0;
    std::int64_t total_outside = 0;

    explicit QuadratCounts(const GridSpec& s = {})
        : spec(s),
          counts(static_cast<std::size_t>(s.subarea_count()),
                 std::vector<std::int64_t>(static_cast<std::size_t>(s.quadrats_per_subarea()), 0))
    {
    }

    /// All in-window quadrat counts, sub-area major.
    std::vector<std::int64_t> flatten() const
    {
        std::vector<std::int64_t> out;
        out.reserve(static_cast<std::size_t>(spec.subarea_count() * spec.quadrats_per_subarea()));
        for (const auto& sub : counts) {
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
};

inline QuadratCounts count_points(std::span<const PlanarPoint> points, const GridSpec& spec)
{
    spec.validate();
    QuadratCounts out(spec);
    for (const auto& p : points) {
        if (auto cell = assign(p, spec)) {
            ++out.counts[static_cast<std::size_t>(cell->subarea)][static_cast<std::size_t>(cell->quadrat)];
            ++out.total_in_window;
        } else {
            ++out.total_outside;
        }
    }
    return out;
}

struct MeanVariancePair {
    int subarea_index = 0;
    double mean = 0.0;
    double variance = 0.0;
    int nonzero_quadrats = 0;
};

enum class VarianceKind { Sample, Population };

/// One (mean, variance) pair per sub-area with at least min_nonzero occupied quadrats.
inline std::vector<MeanVariancePair> subarea_stats(const QuadratCounts& counts, int min_nonzero,
                                                   VarianceKind kind = VarianceKind::Sample)
{
    if (min_nonzero < 0) {
        throw Error(ErrorKind::Domain, "min_nonzero must be >= 0");
    }
    const int quadrats = counts.spec.quadrats_per_subarea();
    if (quadrats < 2) {
        throw Error(ErrorKind::Degenerate, "sub-areas need at least 2 quadrats for a variance");
    }
    const double denom = kind == VarianceKind::Sample ? quadrats - 1.0 : static_cast<double>(quadrats);

    std::vector<MeanVariancePair> out;
    for (std::size_t j = 0; j < counts.counts.size(); ++j) {
        const auto& sub = counts.counts[j];
        int nonzero = 0;
        double sum = 0.0;
        for (auto x : sub) {
            sum += static_cast<double>(x);
            nonzero += x > 0 ? 1 : 0;
        }
        if (nonzero < min_nonzero) {
            continue;
        }
        const double mean = sum / quadrats;
        double ss = 0.0;
        for (auto x : sub) {
            const double d = static_cast<double>(x) - mean;
            ss += d * d;
        }
        out.push_back({static_cast<int>(j), mean, ss / denom, nonzero});
    }
    return out;
}

} // namespace taylorlaw::grid
