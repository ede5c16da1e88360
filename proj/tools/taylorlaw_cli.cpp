// Command-line front end: ingest, simulate, test-csr, fit, decompose, equilibrium, report.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "taylorlaw/taylorlaw.hpp"

namespace {

using namespace taylorlaw;
using pipeline::Json;

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string out_dir = ".";
};

pipeline::AnalysisConfig load(const CommonOptions& common)
{
    auto config = common.config_path.empty() ? pipeline::AnalysisConfig{} : pipeline::load_config(common.config_path);
    if (common.seed) config.seed = *common.seed;
    config.validate();
    return config;
}

std::string out_path(const CommonOptions& common, const std::string& name)
{
    std::error_code ec;
    std::filesystem::create_directories(common.out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + common.out_dir + ": " + ec.message());
    return (std::filesystem::path(common.out_dir) / name).string();
}

void add_common(CLI::App* cmd, CommonOptions& common)
{
    cmd->add_option("--seed", common.seed, "Master random seed (overrides the config file)");
    cmd->add_option("--config", common.config_path, "JSON configuration file");
    cmd->add_option("--out-dir", common.out_dir, "Directory for output files")->capture_default_str();
}

equilibrium::Interval parse_interval(const std::string& text, const char* name)
{
    const auto parts = io::split_csv(text);
    std::optional<double> lo, hi;
    if (parts.size() == 1) {
        lo = hi = io::parse_double(parts[0]);
    } else if (parts.size() == 2) {
        lo = io::parse_double(parts[0]);
        hi = io::parse_double(parts[1]);
    }
    if (!lo || !hi) throw Error(ErrorKind::Config, std::string("--") + name + " expects 'lower,upper'");
    return {*lo, *hi};
}

Json equilibrium_json(const equilibrium::EquilibriumResult& r)
{
    return {{"n_star", r.n_star}, {"n_integer", r.n_integer()}, {"residual", r.residual},
            {"bracket", Json::array({r.bracket_low, r.bracket_high})}};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spatial point-pattern analysis with Taylor's power law"};
    app.require_subcommand(1);
    CommonOptions common;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a facility CSV and summarize it");
    std::string input;
    ingest->add_option("--input", input, "CSV with header city,facility,lng,lat")->required();
    add_common(ingest, common);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate synthetic facility points as CSV");
    std::string process = "poisson", sim_city = "Beijing", sim_facility = "synthetic", sim_output;
    std::int64_t sim_n = 1000;
    double intensity = 2.5e-7, kappa = 3.125e-8, mu = 20.0, sigma = 500.0, extent = 40000.0;
    simulate->add_option("--process", process, "binomial | poisson | thomas")
        ->check(CLI::IsMember({"binomial", "poisson", "thomas"}))
        ->capture_default_str();
    simulate->add_option("--n", sim_n, "Point count for the binomial process")->capture_default_str();
    simulate->add_option("--intensity", intensity, "Poisson intensity, events per m^2")->capture_default_str();
    simulate->add_option("--kappa", kappa, "Thomas parent intensity, parents per m^2")->capture_default_str();
    simulate->add_option("--mu", mu, "Thomas mean offspring per parent")->capture_default_str();
    simulate->add_option("--sigma", sigma, "Thomas offspring scatter, meters")->capture_default_str();
    simulate->add_option("--extent", extent, "Side of the square window, meters")->capture_default_str();
    simulate->add_option("--city", sim_city, "City label (its center comes from the config)")->capture_default_str();
    simulate->add_option("--facility", sim_facility, "Facility label")->capture_default_str();
    simulate->add_option("--output", sim_output, "Output file name inside --out-dir (stdout when omitted)");
    add_common(simulate, common);

    // test-csr
    auto* test_csr = app.add_subcommand("test-csr", "Dispersion test and G-function envelope for one cell");
    std::string csr_city, csr_facility;
    int sims = -1;
    test_csr->add_option("--input", input, "Facility CSV")->required();
    test_csr->add_option("--city", csr_city, "City label")->required();
    test_csr->add_option("--facility", csr_facility, "Facility label")->required();
    test_csr->add_option("--sims", sims, "Envelope simulations (default from config, 99)");
    add_common(test_csr, common);

    // fit
    auto* fit = app.add_subcommand("fit", "Per-city and aggregated Taylor fits");
    fit->add_option("--input", input, "Facility CSV")->required();
    add_common(fit, common);

    // decompose
    auto* decompose = app.add_subcommand("decompose", "Split 1/b into city and facility factors");
    std::string table_path, gauge_rule;
    std::optional<double> gauge_value;
    decompose->add_option("--table", table_path, "CSV with city, facility and b columns (fits.csv works)")->required();
    decompose->add_option("--gauge", gauge_rule, "min_norm | fixed_facility_mean (default from config)")
        ->check(CLI::IsMember({"min_norm", "fixed_facility_mean"}));
    decompose->add_option("--gauge-value", gauge_value, "Mean of f for the fixed_facility_mean gauge");
    add_common(decompose, common);

    // equilibrium
    auto* equil = app.add_subcommand("equilibrium", "Crossing of scaled benefit and cost curves");
    double A = 1.0, p = 0.5, B = 1.0, q = 2.0, alpha = 1.0, beta = 1.0;
    std::string theta_text = "1,1", eta_text = "1,1";
    int samples = 200;
    equil->add_option("--A", A, "Benefit coefficient")->capture_default_str();
    equil->add_option("--p", p, "Benefit exponent, 0 < p < 1")->capture_default_str();
    equil->add_option("--B", B, "Cost coefficient")->capture_default_str();
    equil->add_option("--q", q, "Cost exponent, q > 1")->capture_default_str();
    equil->add_option("--alpha", alpha, "Facility benefit multiplier")->capture_default_str();
    equil->add_option("--beta", beta, "Facility cost multiplier")->capture_default_str();
    equil->add_option("--theta", theta_text, "Area benefit interval lower,upper")->capture_default_str();
    equil->add_option("--eta", eta_text, "Area cost interval lower,upper")->capture_default_str();
    equil->add_option("--samples", samples, "Curve samples in the CSV")->capture_default_str();
    add_common(equil, common);

    // report
    auto* report_cmd = app.add_subcommand("report", "Full pipeline with JSON and CSV outputs");
    report_cmd->add_option("--input", input, "Facility CSV")->required();
    add_common(report_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) {
            const auto records = pipeline::ingest_csv(input);
            std::map<std::string, std::map<std::string, std::size_t>> summary;
            for (const auto& r : records) ++summary[r.city][r.facility];
            Json out{{"records", records.size()}, {"cities", summary}};
            std::cout << out.dump(2) << "\n";
        } else if (simulate->parsed()) {
            const auto config = load(common);
            const auto it = config.centers.find(sim_city);
            if (it == config.centers.end()) {
                throw Error(ErrorKind::Config, "no center configured for city '" + sim_city + "'");
            }
            const geo::CityCenter center{it->second, sim_city};
            const auto window = pointgen::WindowRegion::centered_square(extent);
            const pointgen::RandomSeed seed{config.seed, 0};
            std::vector<geo::PlanarPoint> points;
            if (process == "binomial") points = pointgen::gen_binomial(sim_n, window, seed);
            else if (process == "poisson") points = pointgen::gen_poisson(intensity, window, seed);
            else points = pointgen::gen_thomas({kappa, mu, sigma}, window, seed);
            std::vector<pipeline::FacilityRecord> records;
            records.reserve(points.size());
            const geo::EarthModel earth{config.earth_radius};
            for (const auto& pt : points) {
                const auto g = geo::unproject(center, pt, earth);
                records.push_back({sim_city, sim_facility, g.lng, g.lat, 0});
            }
            const auto csv = pipeline::to_csv(records);
            if (sim_output.empty()) std::cout << csv;
            else io::write_file(out_path(common, sim_output), csv);
        } else if (test_csr->parsed()) {
            auto config = load(common);
            if (sims >= 0) config.envelope_sims = sims;
            std::vector<pipeline::FacilityRecord> cell;
            for (auto& r : pipeline::ingest_csv(input)) {
                if (r.city == csr_city && r.facility == csr_facility) cell.push_back(std::move(r));
            }
            if (cell.empty()) throw Error(ErrorKind::Data, "no records for " + csr_city + "/" + csr_facility);
            const auto rep = pipeline::run_pipeline(cell, config);
            const auto& c = rep.cells.front();
            Json out{{"city", c.city}, {"facility", c.facility}, {"records", c.records}, {"in_window", c.in_window}};
            out["dispersion"] = c.dispersion ? report::to_json(*c.dispersion) : Json(nullptr);
            if (c.dispersion_error) out["dispersion_error"] = c.dispersion_error->message;
            if (c.envelope) {
                const auto path = out_path(common, "envelope_" + report::sanitize(c.city) + "_" +
                                                       report::sanitize(c.facility) + ".csv");
                io::write_file(path, report::envelope_csv(*c.envelope));
                out["envelope"] = {{"n_sims", c.envelope->n_sims}, {"above_fraction", c.envelope->above_fraction},
                                   {"inside_fraction", c.envelope->inside_fraction}, {"csv", path}};
            }
            if (c.envelope_error) out["envelope_error"] = c.envelope_error->message;
            std::cout << out.dump(2) << "\n";
            if (c.dispersion_error) return exit_code(c.dispersion_error->kind);
        } else if (fit->parsed()) {
            auto config = load(common);
            config.envelope_sims = 0;
            const auto rep = pipeline::run_pipeline(pipeline::ingest_csv(input), config);
            io::write_file(out_path(common, "fits.csv"), report::fits_csv(rep));
            io::write_file(out_path(common, "aggregate_fits.csv"), report::aggregate_fits_csv(rep));
            io::write_file(out_path(common, "taylor_points.csv"), report::taylor_points_csv(rep));
            std::cout << report::fits_csv(rep);
        } else if (decompose->parsed()) {
            auto config = load(common);
            if (gauge_rule == "min_norm") config.gauge = decomp::MinNorm{};
            if (gauge_rule == "fixed_facility_mean") {
                if (!gauge_value) throw Error(ErrorKind::Config, "--gauge fixed_facility_mean needs --gauge-value");
                config.gauge = decomp::FixedFacilityMean{*gauge_value};
            }
            const auto table = report::parse_exponent_table(io::read_file(table_path), table_path);
            const auto result = decomp::decompose(table, config.gauge);
            io::write_file(out_path(common, "decomposition.csv"), report::decomposition_csv(result));
            auto j = report::to_json(result);
            try {
                const auto shares = decomp::contribution_shares(result);
                j["contribution_shares"] = {{"csf", shares.csf}, {"fsf", shares.fsf}};
            } catch (const Error&) {
                j["contribution_shares"] = nullptr;
            }
            io::write_file(out_path(common, "decomposition.json"), j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
        } else if (equil->parsed()) {
            const equilibrium::BenefitCurve f{A, p};
            const equilibrium::CostCurve g{B, q};
            const equilibrium::FacilityScale facility{alpha, beta};
            const equilibrium::AreaScale area{parse_interval(theta_text, "theta"), parse_interval(eta_text, "eta")};
            const auto star = equilibrium::crossing(facility, f, g);
            const auto range = equilibrium::equilibrium_range(facility, area, f, g);
            Json out{{"n_star", equilibrium_json(star)},
                     {"n_min", equilibrium_json(range.lowest)},
                     {"n_max", equilibrium_json(range.highest)},
                     {"closed_form_n_star", equilibrium::closed_form_crossing(f, g, alpha, beta)}};
            io::write_file(out_path(common, "equilibrium.json"), out.dump(2) + "\n");
            const double n_plot = 2.0 * std::max(range.n_max(), star.n_star);
            io::write_file(out_path(common, "equilibrium_curves.csv"),
                           report::equilibrium_curves_csv(f, g, alpha, beta, n_plot, samples));
            std::cout << out.dump(2) << "\n";
        } else if (report_cmd->parsed()) {
            const auto config = load(common);
            const auto rep = pipeline::run_pipeline(pipeline::ingest_csv(input), config);
            for (const auto& path : report::emit_report(rep, common.out_dir)) std::cout << path << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
