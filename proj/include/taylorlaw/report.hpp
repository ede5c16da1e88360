#pragma once

// Report serialization: the JSON document and the CSV extracts used for plotting and re-analysis.

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taylorlaw/equilibrium.hpp"
#include "taylorlaw/io.hpp"
#include "taylorlaw/pipeline.hpp"

namespace taylorlaw::report {

using pipeline::Json;

namespace detail {

// JSON has no NaN/inf; those become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json error_json(const pipeline::CellError& e) { return {{"kind", to_string(e.kind)}, {"message", e.message}}; }

} // namespace detail

inline Json to_json(const taylor::TaylorFit& f)
{
    using detail::number;
    return {{"log_a", number(f.log_a)},       {"b", number(f.b)},
            {"se_log_a", number(f.se_log_a)}, {"se_b", number(f.se_b)},
            {"t_log_a", number(f.t_log_a)},   {"t_b", number(f.t_b)},
            {"p_log_a", number(f.p_log_a)},   {"p_b", number(f.p_b)},
            {"r_squared", number(f.r_squared)}, {"n_points", f.n_points}};
}

inline Json to_json(const csr::DispersionTestResult& d)
{
    return {{"t_cc", detail::number(d.t_cc)}, {"df", d.df}, {"p_value", detail::number(d.p_value)},
            {"quadrats_used", d.quadrats_used}};
}

inline Json to_json(const decomp::DecompositionResult& r)
{
    Json out;
    Json gauge = {{"rule", decomp::gauge_name(r.gauge)}};
    if (const auto* fixed = std::get_if<decomp::FixedFacilityMean>(&r.gauge)) {
        gauge["value"] = fixed->value;
    }
    out["gauge"] = gauge;
    Json c = Json::object(), f = Json::object();
    for (std::size_t i = 0; i < r.cities.size(); ++i) c[r.cities[i]] = r.c[i];
    for (std::size_t j = 0; j < r.facilities.size(); ++j) f[r.facilities[j]] = r.f[j];
    out["city_factors"] = c;
    out["facility_factors"] = f;
    Json cells = Json::array();
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
        const auto& cell = r.cells[k];
        cells.push_back({{"city", r.cities[cell.city]},
                         {"facility", r.facilities[cell.facility]},
                         {"b", cell.b},
                         {"inverse_b", cell.y()},
                         {"fitted", r.fitted(cell)},
                         {"residual", r.residuals[k]}});
    }
    out["cells"] = cells;
    out["objective"] = r.objective;
    out["mean_relative_residual"] = r.mean_relative_residual;
    return out;
}

inline Json to_json(const pipeline::Report& report)
{
    Json cells = Json::array();
    for (const auto& c : report.cells) {
        Json j{{"city", c.city}, {"facility", c.facility}, {"records", c.records},
               {"in_window", c.in_window}, {"outside", c.outside}};
        j["dispersion"] = c.dispersion ? to_json(*c.dispersion) : Json(nullptr);
        if (c.dispersion_error) j["dispersion_error"] = detail::error_json(*c.dispersion_error);
        Json pairs = Json::array();
        for (const auto& p : c.pairs) {
            pairs.push_back({{"subarea", p.subarea_index}, {"mean", p.mean}, {"variance", p.variance},
                             {"nonzero_quadrats", p.nonzero_quadrats}});
        }
        j["pairs"] = pairs;
        j["fit"] = c.fit ? to_json(*c.fit) : Json(nullptr);
        j["regime"] = c.regime ? Json(taylor::to_string(c.regime->regime)) : Json(nullptr);
        if (c.fit_error) j["fit_error"] = detail::error_json(*c.fit_error);
        if (c.envelope) {
            j["envelope"] = {{"n_sims", c.envelope->n_sims},
                             {"above_fraction", c.envelope->above_fraction},
                             {"below_fraction", c.envelope->below_fraction},
                             {"inside_fraction", c.envelope->inside_fraction}};
        }
        if (c.envelope_error) j["envelope_error"] = detail::error_json(*c.envelope_error);
        cells.push_back(std::move(j));
    }

    Json aggregates = Json::array();
    for (const auto& a : report.aggregates) {
        Json j{{"facility", a.facility}, {"cities", a.cities}};
        j["fit"] = a.fit ? to_json(*a.fit) : Json(nullptr);
        j["regime"] = a.regime ? Json(taylor::to_string(a.regime->regime)) : Json(nullptr);
        if (a.error) j["error"] = detail::error_json(*a.error);
        aggregates.push_back(std::move(j));
    }

    Json exponents = Json::array();
    for (const auto& cell : report.exponents.cells()) {
        exponents.push_back({{"city", report.exponents.cities()[cell.city]},
                             {"facility", report.exponents.facilities()[cell.facility]},
                             {"b", cell.b}});
    }

    Json out;
    out["provenance"] = {{"config_hash", report.provenance.config_hash},
                         {"seed", report.provenance.seed},
                         {"input_digest", report.provenance.input_digest},
                         {"records", report.provenance.records}};
    out["config"] = pipeline::to_json(report.config);
    out["cells"] = cells;
    out["aggregates"] = aggregates;
    out["exponent_table"] = exponents;
    out["decomposition"] = report.decomposition ? to_json(*report.decomposition) : Json(nullptr);
    if (report.shares) {
        out["contribution_shares"] = {{"csf", report.shares->csf}, {"fsf", report.shares->fsf}};
    }
    if (report.decomposition_error) out["decomposition_error"] = detail::error_json(*report.decomposition_error);
    return out;
}

inline constexpr std::string_view fits_header =
    "city,facility,n_points,log_a,b,se_log_a,se_b,t_log_a,t_b,p_log_a,p_b,r_squared,regime";

inline std::string fit_row(const std::string& city, const std::string& facility, const taylor::TaylorFit& f,
                           const std::optional<taylor::ExponentRegime>& regime)
{
    using io::format_double;
    return city + ',' + facility + ',' + std::to_string(f.n_points) + ',' + format_double(f.log_a) + ',' +
           format_double(f.b) + ',' + format_double(f.se_log_a) + ',' + format_double(f.se_b) + ',' +
           format_double(f.t_log_a) + ',' + format_double(f.t_b) + ',' + format_double(f.p_log_a) + ',' +
           format_double(f.p_b) + ',' + format_double(f.r_squared) + ',' +
           (regime ? taylor::to_string(regime->regime) : "") + '\n';
}

/// Per-city fits; one row per cell that produced a fit.
inline std::string fits_csv(const pipeline::Report& report)
{
    std::string out(fits_header);
    out += '\n';
    for (const auto& c : report.cells) {
        if (c.fit) out += fit_row(c.city, c.facility, *c.fit, c.regime);
    }
    return out;
}

inline std::string aggregate_fits_csv(const pipeline::Report& report)
{
    std::string out("facility,cities,n_points,log_a,b,se_log_a,se_b,t_log_a,t_b,p_log_a,p_b,r_squared,regime\n");
    for (const auto& a : report.aggregates) {
        if (!a.fit) continue;
        // Reuse the per-city row layout with the city count in the city column.
        const auto row = fit_row(a.facility, std::to_string(a.cities.size()), *a.fit, a.regime);
        out += row;
    }
    return out;
}

inline std::string taylor_points_csv(const pipeline::Report& report)
{
    std::string out("log_m,log_s2,city,facility\n");
    for (const auto& c : report.cells) {
        for (const auto& p : taylor::to_log_log(c.pairs, c.city, c.facility)) {
            out += io::format_double(p.log_m) + ',' + io::format_double(p.log_s2) + ',' + p.city + ',' + p.facility + '\n';
        }
    }
    return out;
}

/// `kind,label,value` rows: one gauge row, then city factors, then facility factors.
inline std::string decomposition_csv(const decomp::DecompositionResult& r)
{
    std::string out("kind,label,value\n");
    std::string param;
    if (const auto* fixed = std::get_if<decomp::FixedFacilityMean>(&r.gauge)) {
        param = io::format_double(fixed->value);
    }
    out += "gauge," + decomp::gauge_name(r.gauge) + ',' + param + '\n';
    for (std::size_t i = 0; i < r.cities.size(); ++i) {
        out += "city," + r.cities[i] + ',' + io::format_double(r.c[i]) + '\n';
    }
    for (std::size_t j = 0; j < r.facilities.size(); ++j) {
        out += "facility," + r.facilities[j] + ',' + io::format_double(r.f[j]) + '\n';
    }
    return out;
}

inline std::string envelope_csv(const csr::EnvelopeResult& e)
{
    std::string out("r,lower,upper,empirical\n");
    for (std::size_t k = 0; k < e.r_grid.size(); ++k) {
        out += io::format_double(e.r_grid[k]) + ',' + io::format_double(e.lower[k]) + ',' +
               io::format_double(e.upper[k]) + ',' + io::format_double(e.empirical[k]) + '\n';
    }
    return out;
}

/// Reads an exponent table from any CSV with `city`, `facility` and `b` columns (fits.csv qualifies).
inline decomp::ExponentTable parse_exponent_table(std::string_view text, const std::string& source = "<input>")
{
    decomp::ExponentTable table;
    std::size_t line_no = 0;
    std::optional<std::array<std::size_t, 3>> cols;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (io::trim(line).empty() || io::trim(line).front() == '#') continue;
        const auto fields = io::split_csv(line);
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (!cols) {
            std::array<std::size_t, 3> idx{};
            const std::array<std::string, 3> names{"city", "facility", "b"};
            for (std::size_t n = 0; n < 3; ++n) {
                const auto it = std::find(fields.begin(), fields.end(), names[n]);
                if (it == fields.end()) {
                    throw Error(ErrorKind::Data, where + "header lacks a '" + names[n] + "' column");
                }
                idx[n] = static_cast<std::size_t>(it - fields.begin());
            }
            cols = idx;
            continue;
        }
        const auto need = std::max({(*cols)[0], (*cols)[1], (*cols)[2]});
        if (fields.size() <= need) {
            throw Error(ErrorKind::Data, where + "too few fields");
        }
        const auto b = io::parse_double(fields[(*cols)[2]]);
        if (!b) {
            throw Error(ErrorKind::Data, where + "malformed b value");
        }
        try {
            table.add(fields[(*cols)[0]], fields[(*cols)[1]], *b);
        } catch (const Error& e) {
            throw Error(ErrorKind::Data, where + e.what());
        }
    }
    if (!cols) {
        throw Error(ErrorKind::Data, source + ": empty exponent table file");
    }
    return table;
}

inline std::string sanitize(std::string label)
{
    for (auto& ch : label) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                        ch == '-' || ch == '_' || ch == '.';
        if (!ok) ch = '_';
    }
    return label;
}

/// Writes report.json, fits.csv, aggregate_fits.csv, taylor_points.csv, decomposition.csv (when a
/// decomposition exists) and one envelope_<city>_<facility>.csv per cell with an envelope.
inline std::vector<std::string> emit_report(const pipeline::Report& report, const std::string& out_dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::Io, "cannot create " + out_dir + ": " + ec.message());
    }
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& content) {
        const auto path = (fs::path(out_dir) / name).string();
        io::write_file(path, content);
        written.push_back(path);
    };
    put("report.json", to_json(report).dump(2) + "\n");
    put("fits.csv", fits_csv(report));
    put("aggregate_fits.csv", aggregate_fits_csv(report));
    put("taylor_points.csv", taylor_points_csv(report));
    if (report.decomposition) {
        put("decomposition.csv", decomposition_csv(*report.decomposition));
    }
    for (const auto& c : report.cells) {
        if (c.envelope) {
            put("envelope_" + sanitize(c.city) + "_" + sanitize(c.facility) + ".csv", envelope_csv(*c.envelope));
        }
    }
    return written;
}

/// Samples of scaled benefit and cost on [0, n_max] for plotting.
inline std::string equilibrium_curves_csv(const equilibrium::BenefitCurve& f, const equilibrium::CostCurve& g,
                                          double scale_benefit, double scale_cost, double n_max, int samples)
{
    std::string out("n,benefit,cost\n");
    for (int k = 0; k <= samples; ++k) {
        const double n = n_max * static_cast<double>(k) / static_cast<double>(samples);
        out += io::format_double(n) + ',' + io::format_double(scale_benefit * f(n)) + ',' +
               io::format_double(scale_cost * g(n)) + '\n';
    }
    return out;
}

} // namespace taylorlaw::report
