#pragma once

// End-to-end analysis: ingest facility records, run the per-cell statistics, pool fits per
// facility, and decompose the resulting exponent table.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "taylorlaw/csr.hpp"
#include "taylorlaw/decomp.hpp"
#include "taylorlaw/error.hpp"
#include "taylorlaw/geoproj.hpp"
#include "taylorlaw/grid.hpp"
#include "taylorlaw/io.hpp"
#include "taylorlaw/pointgen.hpp"
#include "taylorlaw/taylor.hpp"

namespace taylorlaw::pipeline {

struct FacilityRecord {
    std::string city;
    std::string facility;
    double lng = 0.0;
    double lat = 0.0;
    std::size_t line = 0; ///< 1-based source line, 0 when synthetic
};

inline constexpr std::string_view csv_header = "city,facility,lng,lat";

/// The seven facility categories of the reference study; labels are otherwise free-form.
inline const std::vector<std::string>& study_facilities()
{
    static const std::vector<std::string> names{"beauty_salon", "bank",     "stadium",   "school",
                                                "pharmacy",     "convenience_store", "restaurant"};
    return names;
}

/// Parses `city,facility,lng,lat` records. Errors cite the source line.
inline std::vector<FacilityRecord> parse_csv(std::string_view text, const std::string& source = "<input>")
{
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
        text.remove_prefix(3);
    }
    std::vector<FacilityRecord> out;
    std::size_t line_no = 0;
    bool have_header = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (io::trim(line).empty()) {
            continue;
        }
        const auto fields = io::split_csv(line);
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (!have_header) {
            if (fields != std::vector<std::string>{"city", "facility", "lng", "lat"}) {
                throw Error(ErrorKind::Data, where + "expected header '" + std::string(csv_header) + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != 4) {
            throw Error(ErrorKind::Data, where + "expected 4 fields, found " + std::to_string(fields.size()));
        }
        if (fields[0].empty() || fields[1].empty()) {
            throw Error(ErrorKind::Data, where + "empty city or facility label");
        }
        const auto lng = io::parse_double(fields[2]);
        const auto lat = io::parse_double(fields[3]);
        if (!lng || !lat) {
            throw Error(ErrorKind::Data, where + "malformed coordinate");
        }
        if (!geo::in_bounds({*lng, *lat})) {
            throw Error(ErrorKind::Data, where + "coordinate out of range (lng " + fields[2] + ", lat " + fields[3] + ")");
        }
        out.push_back({fields[0], fields[1], *lng, *lat, line_no});
    }
    if (!have_header) {
        throw Error(ErrorKind::Data, source + ": missing header '" + std::string(csv_header) + "'");
    }
    return out;
}

inline std::vector<FacilityRecord> ingest_csv(const std::string& path)
{
    return parse_csv(io::read_file(path), path);
}

inline std::string to_csv(const std::vector<FacilityRecord>& records)
{
    std::string out(csv_header);
    out += '\n';
    for (const auto& r : records) {
        out += r.city + ',' + r.facility + ',' + io::format_double(r.lng) + ',' + io::format_double(r.lat) + '\n';
    }
    return out;
}

struct AnalysisConfig {
    std::map<std::string, geo::GeoCoordinate> centers{{"Beijing", {116.413648, 39.913561}}};
    double earth_radius = geo::default_earth.radius;
    grid::GridSpec grid;
    int min_nonzero = 5;
    grid::VarianceKind variance = grid::VarianceKind::Sample;
    int rank_cutoff = 30;
    int envelope_sims = 99; ///< 0 disables G-function envelopes
    double r_max = 2000.0;
    double r_step = 10.0;
    decomp::Gauge gauge = decomp::MinNorm{};
    std::uint64_t seed = 20150101;
    double poisson_band = taylor::default_poisson_band;

    void validate() const
    {
        grid.validate();
        if (min_nonzero < 0) throw Error(ErrorKind::Config, "min_nonzero must be >= 0");
        if (rank_cutoff < 1) throw Error(ErrorKind::Config, "rank_cutoff must be >= 1");
        if (envelope_sims < 0) throw Error(ErrorKind::Config, "envelope_sims must be >= 0");
        if (!(r_step > 0.0) || !(r_max >= 0.0)) throw Error(ErrorKind::Config, "r grid needs r_step > 0, r_max >= 0");
        if (!(earth_radius > 0.0)) throw Error(ErrorKind::Config, "earth_radius must be positive");
        if (!(poisson_band >= 0.0)) throw Error(ErrorKind::Config, "poisson_band must be >= 0");
        for (const auto& [name, c] : centers) {
            if (!geo::in_bounds(c)) throw Error(ErrorKind::Config, "center of " + name + " out of bounds");
        }
    }
};

using Json = nlohmann::ordered_json;

inline Json to_json(const AnalysisConfig& c)
{
    Json centers = Json::object();
    for (const auto& [name, coord] : c.centers) {
        centers[name] = Json::array({coord.lng, coord.lat});
    }
    Json gauge = {{"rule", decomp::gauge_name(c.gauge)}};
    if (const auto* fixed = std::get_if<decomp::FixedFacilityMean>(&c.gauge)) {
        gauge["value"] = fixed->value;
    }
    return Json{{"centers", centers},
                {"earth_radius", c.earth_radius},
                {"window_extent", c.grid.window_extent},
                {"subarea_divisions", c.grid.subarea_divisions},
                {"quadrat_divisions", c.grid.quadrat_divisions},
                {"min_nonzero", c.min_nonzero},
                {"variance", c.variance == grid::VarianceKind::Sample ? "sample" : "population"},
                {"rank_cutoff", c.rank_cutoff},
                {"envelope_sims", c.envelope_sims},
                {"r_max", c.r_max},
                {"r_step", c.r_step},
                {"gauge", gauge},
                {"seed", c.seed},
                {"poisson_band", c.poisson_band}};
}

/// Reads a JSON config; absent keys keep their defaults, unknown keys are rejected.
inline AnalysisConfig config_from_json(const Json& j)
{
    AnalysisConfig c;
    if (!j.is_object()) {
        throw Error(ErrorKind::Config, "config must be a JSON object");
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "centers") {
                for (const auto& [name, coord] : value.items()) {
                    if (!coord.is_array() || coord.size() != 2) {
                        throw Error(ErrorKind::Config, "center of " + name + " must be [lng, lat]");
                    }
                    c.centers[name] = {coord[0].get<double>(), coord[1].get<double>()};
                }
            } else if (key == "earth_radius") c.earth_radius = value.get<double>();
            else if (key == "window_extent") c.grid.window_extent = value.get<double>();
            else if (key == "subarea_divisions") c.grid.subarea_divisions = value.get<int>();
            else if (key == "quadrat_divisions") c.grid.quadrat_divisions = value.get<int>();
            else if (key == "min_nonzero") c.min_nonzero = value.get<int>();
            else if (key == "variance") {
                const auto v = value.get<std::string>();
                if (v == "sample") c.variance = grid::VarianceKind::Sample;
                else if (v == "population") c.variance = grid::VarianceKind::Population;
                else throw Error(ErrorKind::Config, "variance must be 'sample' or 'population'");
            } else if (key == "rank_cutoff") c.rank_cutoff = value.get<int>();
            else if (key == "envelope_sims") c.envelope_sims = value.get<int>();
            else if (key == "r_max") c.r_max = value.get<double>();
            else if (key == "r_step") c.r_step = value.get<double>();
            else if (key == "gauge") {
                const auto rule = value.at("rule").get<std::string>();
                if (rule == "min_norm") c.gauge = decomp::MinNorm{};
                else if (rule == "fixed_facility_mean") c.gauge = decomp::FixedFacilityMean{value.at("value").get<double>()};
                else throw Error(ErrorKind::Config, "unknown gauge rule '" + rule + "'");
            } else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "poisson_band") c.poisson_band = value.get<double>();
            else throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("config type error: ") + e.what());
    }
    c.validate();
    return c;
}

inline AnalysisConfig load_config(const std::string& path)
{
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, std::string("config file: ") + e.what());
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, path + ": " + e.what());
    }
    return config_from_json(j);
}

struct CellError {
    ErrorKind kind = ErrorKind::Numeric;
    std::string message;
};

/// Everything computed for one (city, facility).
struct CellReport {
    std::string city;
    std::string facility;
    std::int64_t records = 0;
    std::int64_t in_window = 0;
    std::int64_t outside = 0;
    std::optional<csr::DispersionTestResult> dispersion;
    std::optional<CellError> dispersion_error;
    std::vector<grid::MeanVariancePair> pairs;
    std::optional<taylor::TaylorFit> fit;
    std::optional<taylor::ExponentRegime> regime;
    std::optional<CellError> fit_error;
    std::optional<csr::EnvelopeResult> envelope;
    std::optional<CellError> envelope_error;
};

struct AggregateReport {
    std::string facility;
    std::vector<std::string> cities;
    std::optional<taylor::TaylorFit> fit;
    std::optional<taylor::ExponentRegime> regime;
    std::optional<CellError> error;
};

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string input_digest;
    std::size_t records = 0;
};

struct Report {
    AnalysisConfig config;
    std::vector<CellReport> cells;
    std::vector<AggregateReport> aggregates;
    decomp::ExponentTable exponents;
    std::optional<decomp::DecompositionResult> decomposition;
    std::optional<decomp::ContributionShares> shares;
    std::optional<CellError> decomposition_error;
    Provenance provenance;
};

inline std::string input_digest(const std::vector<FacilityRecord>& records)
{
    std::uint64_t h = io::fnv1a("");
    for (const auto& r : records) {
        h = io::fnv1a(r.city + '\x1f' + r.facility + '\x1f' + io::format_double(r.lng) + '\x1f' +
                          io::format_double(r.lat) + '\n',
                      h);
    }
    return io::hex64(h);
}

/// Per-cell master seed: the configured seed mixed with the cell labels.
inline std::uint64_t cell_seed(std::uint64_t seed, const std::string& city, const std::string& facility)
{
    return io::fnv1a(city + '\x1f' + facility, io::fnv1a(io::hex64(seed)));
}

namespace detail {

template <typename F>
std::optional<CellError> capture(F&& body)
{
    try {
        body();
        return std::nullopt;
    } catch (const Error& e) {
        return CellError{e.kind(), e.what()};
    }
}

} // namespace detail

/// Cells are processed in (city, facility) order and each cell's failures are recorded on that
/// cell only. Missing city centers abort the run with a Config error.
inline Report run_pipeline(const std::vector<FacilityRecord>& records, const AnalysisConfig& config)
{
    config.validate();
    std::map<std::pair<std::string, std::string>, std::vector<const FacilityRecord*>> groups;
    for (const auto& r : records) {
        if (!config.centers.contains(r.city)) {
            throw Error(ErrorKind::Config, "no center configured for city '" + r.city + "'");
        }
        groups[{r.city, r.facility}].push_back(&r);
    }

    Report report;
    report.config = config;
    report.provenance = {io::hex64(io::fnv1a(to_json(config).dump())), config.seed, input_digest(records),
                         records.size()};

    const geo::EarthModel earth{config.earth_radius};
    const auto r_grid = csr::make_r_grid(config.r_max, config.r_step);
    const auto window = pointgen::WindowRegion::centered_square(config.grid.window_extent);

    for (const auto& [key, members] : groups) {
        CellReport cell;
        cell.city = key.first;
        cell.facility = key.second;
        cell.records = static_cast<std::int64_t>(members.size());
        const geo::CityCenter center{config.centers.at(cell.city), cell.city};

        std::vector<geo::PlanarPoint> points;
        points.reserve(members.size());
        for (const auto* r : members) {
            points.push_back(geo::project(center, {r->lng, r->lat}, earth));
        }
        const auto counts = grid::count_points(points, config.grid);
        cell.in_window = counts.total_in_window;
        cell.outside = counts.total_outside;

        cell.dispersion_error = detail::capture([&] { cell.dispersion = csr::dispersion_test(counts); });
        cell.fit_error = detail::capture([&] {
            cell.pairs = grid::subarea_stats(counts, config.min_nonzero, config.variance);
            cell.fit = taylor::fit_taylor(cell.pairs);
            cell.regime = taylor::classify_exponent(*cell.fit, config.poisson_band);
        });
        if (config.envelope_sims > 0) {
            cell.envelope_error = detail::capture([&] {
                std::vector<geo::PlanarPoint> inside;
                for (const auto& p : points) {
                    if (grid::assign(p, config.grid)) inside.push_back(p);
                }
                cell.envelope = csr::mc_envelope(inside, window, config.envelope_sims,
                                                 {cell_seed(config.seed, cell.city, cell.facility), 0}, r_grid);
            });
        }
        report.cells.push_back(std::move(cell));
    }

    std::map<std::string, std::vector<taylor::CityPairs>> by_facility;
    for (const auto& cell : report.cells) {
        by_facility[cell.facility].push_back({cell.city, cell.records, cell.pairs});
    }
    for (const auto& [facility, cities] : by_facility) {
        AggregateReport agg;
        agg.facility = facility;
        agg.error = detail::capture([&] {
            std::vector<taylor::CityTotal> totals;
            for (const auto& c : cities) totals.push_back({c.city, c.total_count});
            agg.cities = taylor::select_top_cities(totals, config.rank_cutoff);
            agg.fit = taylor::aggregate_fit(cities, config.rank_cutoff);
            agg.regime = taylor::classify_exponent(*agg.fit, config.poisson_band);
        });
        report.aggregates.push_back(std::move(agg));
    }

    for (const auto& cell : report.cells) {
        if (cell.fit && cell.fit->b > 0.0 && std::isfinite(cell.fit->b)) {
            report.exponents.add(cell.city, cell.facility, cell.fit->b);
        }
    }
    report.decomposition_error = detail::capture([&] {
        report.decomposition = decomp::decompose(report.exponents, config.gauge);
        try {
            report.shares = decomp::contribution_shares(*report.decomposition);
        } catch (const Error&) {
            report.shares.reset(); // shares are undefined when a fitted cell is non-positive
        }
    });
    return report;
}

} // namespace taylorlaw::pipeline
