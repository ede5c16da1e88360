#pragma once

// Longitude/latitude to signed planar meters around a city center.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "taylorlaw/error.hpp"

namespace taylorlaw::geo {

struct GeoCoordinate {
    double lng = 0.0; ///< degrees east, [-180, 180]
    double lat = 0.0; ///< degrees north, [-90, 90]
};

struct CityCenter {
    GeoCoordinate center;
    std::string name;
};

/// Meters east (x) and north (y) of a city center.
struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

struct EarthModel {
    double radius = 6371004.0;
};

inline constexpr EarthModel default_earth{};

inline bool in_bounds(const GeoCoordinate& c) noexcept
{
    return std::isfinite(c.lng) && std::isfinite(c.lat) && c.lng >= -180.0 && c.lng <= 180.0 &&
           c.lat >= -90.0 && c.lat <= 90.0;
}

inline void require_in_bounds(const GeoCoordinate& c)
{
    if (!in_bounds(c)) {
        throw Error(ErrorKind::Domain, "coordinate out of bounds: lng=" + std::to_string(c.lng) +
                                           " lat=" + std::to_string(c.lat));
    }
}

inline double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

/// sign(0) == 0.
inline double signum(double v) noexcept { return static_cast<double>((v > 0.0) - (v < 0.0)); }

/// Great-circle distance in meters (haversine form).
inline double great_circle_distance(const GeoCoordinate& p, const GeoCoordinate& q,
                                    const EarthModel& earth = default_earth)
{
    require_in_bounds(p);
    require_in_bounds(q);
    if (!(earth.radius > 0.0)) {
        throw Error(ErrorKind::Domain, "earth radius must be positive");
    }
    const double phi1 = deg_to_rad(p.lat);
    const double phi2 = deg_to_rad(q.lat);
    const double sin_dphi = std::sin((phi2 - phi1) / 2.0);
    const double sin_dlambda = std::sin(deg_to_rad(q.lng - p.lng) / 2.0);
    double h = sin_dphi * sin_dphi + std::cos(phi1) * std::cos(phi2) * sin_dlambda * sin_dlambda;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * earth.radius * std::asin(std::sqrt(h));
}

/// x is the arc along the center's parallel, y the arc along its meridian, each signed by the
/// direction of the sample relative to the center.
inline PlanarPoint project(const CityCenter& center, const GeoCoordinate& sample,
                           const EarthModel& earth = default_earth)
{
    const GeoCoordinate& c = center.center;
    const double dx = great_circle_distance({sample.lng, c.lat}, c, earth);
    const double dy = great_circle_distance({c.lng, sample.lat}, c, earth);
    return {dx * signum(sample.lng - c.lng), dy * signum(sample.lat - c.lat)};
}

/// Inverse of project(). Throws Domain when x is not reachable along the center's parallel.
inline GeoCoordinate unproject(const CityCenter& center, const PlanarPoint& p,
                               const EarthModel& earth = default_earth)
{
    const GeoCoordinate& c = center.center;
    require_in_bounds(c);
    const double lat = c.lat + rad_to_deg(p.y / earth.radius);
    const double cos_lat0 = std::cos(deg_to_rad(c.lat));
    const double s = std::sin(std::abs(p.x) / (2.0 * earth.radius));
    if (!(cos_lat0 > 0.0) || s > cos_lat0 || std::abs(p.x) > std::numbers::pi * earth.radius) {
        throw Error(ErrorKind::Domain, "planar x offset not representable at this latitude");
    }
    const double dlng = rad_to_deg(2.0 * std::asin(s / cos_lat0));
    GeoCoordinate out{c.lng + signum(p.x) * dlng, lat};
    require_in_bounds(out);
    return out;
}

} // namespace taylorlaw::geo
