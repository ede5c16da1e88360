#pragma once

// Seeded point-process generators: binomial, homogeneous Poisson, and Thomas cluster.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "taylorlaw/error.hpp"
#include "taylorlaw/geoproj.hpp"

namespace taylorlaw::pointgen {

using geo::PlanarPoint;

/// (master, stream) fully determines a generator's output. Stream index = simulation index.
struct RandomSeed {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;

    RandomSeed with_stream(std::uint64_t s) const noexcept { return {master, s}; }
};

/// Half-open rectangle [x_min, x_max) x [y_min, y_max).
struct WindowRegion {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return y_max - y_min; }
    double area() const noexcept { return width() * height(); }
    bool contains(const PlanarPoint& p) const noexcept
    {
        return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max;
    }

    void validate() const
    {
        if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(area())) {
            throw Error(ErrorKind::Domain, "window region must have x_max > x_min and y_max > y_min");
        }
    }

    /// Square window of the given side centered on the origin.
    static WindowRegion centered_square(double extent) noexcept
    {
        return {-extent / 2.0, extent / 2.0, -extent / 2.0, extent / 2.0};
    }
};

struct ThomasParams {
    double parent_intensity = 0.0; ///< parents per m^2
    double mean_offspring = 0.0;   ///< expected children per parent
    double dispersion = 0.0;       ///< Gaussian offspring scatter, meters

    void validate() const
    {
        if (!(parent_intensity > 0.0) || !(mean_offspring > 0.0) || !(dispersion > 0.0)) {
            throw Error(ErrorKind::Domain, "Thomas parameters must all be positive");
        }
    }
};

inline constexpr double max_expected_events = 1e9;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Engine for one (master, stream) pair. Streams are decorrelated by hashing both words.
inline std::mt19937_64 make_engine(const RandomSeed& seed)
{
    std::uint64_t state = seed.master;
    std::uint64_t mixed = detail::splitmix64(state) ^ (seed.stream * 0xd1b54a32d192ed03ULL);
    std::array<std::uint32_t, 8> words{};
    for (std::size_t k = 0; k < words.size(); k += 2) {
        const std::uint64_t v = detail::splitmix64(mixed);
        words[k] = static_cast<std::uint32_t>(v);
        words[k + 1] = static_cast<std::uint32_t>(v >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

/// Collapses (master, stream) into a fresh master, for callers that spend streams on sub-tasks.
inline std::uint64_t fold_seed(const RandomSeed& seed) noexcept
{
    std::uint64_t state = seed.master ^ (seed.stream * 0xd1b54a32d192ed03ULL);
    return detail::splitmix64(state);
}

/// Uniform in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline PlanarPoint uniform_in(const WindowRegion& w, std::mt19937_64& rng) noexcept
{
    // Clamp guards the open upper edge against rounding.
    double x = w.x_min + uniform01(rng) * w.width();
    double y = w.y_min + uniform01(rng) * w.height();
    if (x >= w.x_max) x = std::nextafter(w.x_max, w.x_min);
    if (y >= w.y_max) y = std::nextafter(w.y_max, w.y_min);
    return {x, y};
}

/// Exactly n independent uniform points.
inline std::vector<PlanarPoint> gen_binomial(std::int64_t n, const WindowRegion& window,
                                             const RandomSeed& seed)
{
    if (n < 0) {
        throw Error(ErrorKind::Domain, "binomial point count must be >= 0");
    }
    window.validate();
    auto rng = make_engine(seed);
    std::vector<PlanarPoint> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        out.push_back(uniform_in(window, rng));
    }
    return out;
}

inline std::int64_t poisson_count(double mean, std::mt19937_64& rng)
{
    if (mean <= 0.0) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

/// Homogeneous Poisson process with the given intensity (events per m^2).
inline std::vector<PlanarPoint> gen_poisson(double intensity, const WindowRegion& window,
                                            const RandomSeed& seed)
{
    if (!(intensity >= 0.0)) {
        throw Error(ErrorKind::Domain, "Poisson intensity must be >= 0");
    }
    window.validate();
    const double expected = intensity * window.area();
    if (!(expected <= max_expected_events)) {
        throw Error(ErrorKind::Domain, "expected event count exceeds 1e9");
    }
    auto rng = make_engine(seed);
    const std::int64_t n = poisson_count(expected, rng);
    std::vector<PlanarPoint> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        out.push_back(uniform_in(window, rng));
    }
    return out;
}

/// Thomas cluster process. Parents are drawn on the window grown by 4 sigma per side so that
/// clusters centered just outside still contribute; children outside the window are dropped.
inline std::vector<PlanarPoint> gen_thomas(const ThomasParams& params, const WindowRegion& window,
                                           const RandomSeed& seed)
{
    params.validate();
    window.validate();
    const double buffer = 4.0 * params.dispersion;
    const WindowRegion parents_window{window.x_min - buffer, window.x_max + buffer,
                                      window.y_min - buffer, window.y_max + buffer};
    const double expected_parents = params.parent_intensity * parents_window.area();
    if (!(expected_parents * params.mean_offspring <= max_expected_events) ||
        !(expected_parents <= max_expected_events)) {
        throw Error(ErrorKind::Domain, "expected event count exceeds 1e9");
    }

    auto rng = make_engine(seed);
    std::normal_distribution<double> scatter(0.0, params.dispersion);
    const std::int64_t n_parents = poisson_count(expected_parents, rng);
    std::vector<PlanarPoint> out;
    for (std::int64_t k = 0; k < n_parents; ++k) {
        const PlanarPoint parent = uniform_in(parents_window, rng);
        const std::int64_t children = poisson_count(params.mean_offspring, rng);
        for (std::int64_t c = 0; c < children; ++c) {
            const PlanarPoint child{parent.x + scatter(rng), parent.y + scatter(rng)};
            if (window.contains(child)) {
                out.push_back(child);
            }
        }
    }
    return out;
}

} // namespace taylorlaw::pointgen
