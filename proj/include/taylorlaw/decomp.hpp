#pragma once

// Additive two-way decomposition of inverse Taylor exponents: 1/b_ij = c_i + f_j + e_ij,
// with c the city-specific factor and f the facility-specific factor.

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "taylorlaw/error.hpp"

namespace taylorlaw::decomp {

struct Cell {
    std::size_t city = 0;
    std::size_t facility = 0;
    double b = 0.0;

    double y() const noexcept { return 1.0 / b; }
};

/// Partial city x facility matrix of exponents; missing cells are simply absent.
class ExponentTable {
public:
    ExponentTable() = default;

    /// Adds b for (city, facility). Labels are indexed in first-seen order.
    void add(const std::string& city, const std::string& facility, double b)
    {
        if (!(b > 0.0) || !std::isfinite(b)) {
            throw Error(ErrorKind::Domain, "exponent b for " + city + "/" + facility + " must be positive");
        }
        const std::size_t ci = intern(cities_, city_index_, city);
        const std::size_t fi = intern(facilities_, facility_index_, facility);
        if (!seen_.emplace(std::make_pair(ci, fi), cells_.size()).second) {
            throw Error(ErrorKind::Data, "duplicate exponent for " + city + "/" + facility);
        }
        cells_.push_back({ci, fi, b});
    }

    const std::vector<std::string>& cities() const noexcept { return cities_; }
    const std::vector<std::string>& facilities() const noexcept { return facilities_; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }
    bool empty() const noexcept { return cells_.empty(); }

    std::optional<double> find(const std::string& city, const std::string& facility) const
    {
        const auto c = city_index_.find(city);
        const auto f = facility_index_.find(facility);
        if (c == city_index_.end() || f == facility_index_.end()) {
            return std::nullopt;
        }
        const auto it = seen_.find({c->second, f->second});
        if (it == seen_.end()) {
            return std::nullopt;
        }
        return cells_[it->second].b;
    }

private:
    static std::size_t intern(std::vector<std::string>& labels, std::map<std::string, std::size_t>& index,
                              const std::string& label)
    {
        if (label.empty()) {
            throw Error(ErrorKind::Domain, "empty label in exponent table");
        }
        auto [it, inserted] = index.emplace(label, labels.size());
        if (inserted) {
            labels.push_back(label);
        }
        return it->second;
    }

    std::vector<std::string> cities_;
    std::vector<std::string> facilities_;
    std::map<std::string, std::size_t> city_index_;
    std::map<std::string, std::size_t> facility_index_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen_;
    std::vector<Cell> cells_;
};

/// Minimum Euclidean norm solution of the normal equations.
struct MinNorm {};

/// Shifts the solution so that mean(f) equals value.
struct FixedFacilityMean {
    double value = 0.0;
};

using Gauge = std::variant<MinNorm, FixedFacilityMean>;

inline std::string gauge_name(const Gauge& g)
{
    return std::holds_alternative<MinNorm>(g) ? "min_norm" : "fixed_facility_mean";
}

struct DecompositionResult {
    std::vector<std::string> cities;
    std::vector<std::string> facilities;
    std::vector<double> c;
    std::vector<double> f;
    Gauge gauge = MinNorm{};
    std::vector<Cell> cells;       ///< the fitted cells, aligned with residuals
    std::vector<double> residuals; ///< y_ij - (c_i + f_j)
    double objective = 0.0;        ///< J, sum of squared residuals
    double mean_relative_residual = 0.0;

    double fitted(const Cell& cell) const { return c[cell.city] + f[cell.facility]; }
};

namespace detail {

struct DisjointSet {
    std::vector<std::size_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t k)
    {
        while (parent[k] != k) {
            parent[k] = parent[parent[k]];
            k = parent[k];
        }
        return k;
    }

    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

inline void require_connected(const ExponentTable& table)
{
    const std::size_t n = table.cities().size();
    const std::size_t m = table.facilities().size();
    DisjointSet sets(n + m);
    for (const auto& cell : table.cells()) {
        sets.unite(cell.city, n + cell.facility);
    }
    std::map<std::size_t, std::vector<std::string>> components;
    for (std::size_t k = 0; k < n + m; ++k) {
        components[sets.find(k)].push_back(k < n ? "city:" + table.cities()[k]
                                                 : "facility:" + table.facilities()[k - n]);
    }
    if (components.size() <= 1) {
        return;
    }
    std::string msg = "exponent table is not connected; components:";
    for (const auto& [root, labels] : components) {
        msg += " {";
        for (std::size_t k = 0; k < labels.size(); ++k) {
            msg += (k ? ", " : "") + labels[k];
        }
        msg += "}";
    }
    throw Error(ErrorKind::Identifiability, msg);
}

} // namespace detail

/// Mean over cells of |r_ij| / y_ij.
inline double relative_residual(const DecompositionResult& result, const ExponentTable& table)
{
    const auto& cells = table.cells();
    if (cells.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& cell : cells) {
        acc += std::abs(cell.y() - result.fitted(cell)) / cell.y();
    }
    return acc / static_cast<double>(cells.size());
}

/// Least-squares fit of 1/b_ij = c_i + f_j. The model is invariant under c + d, f - d, so the
/// normal matrix AᵀA has null vector v = (1,..,1, -1,..,-1). Solving (AᵀA + vvᵀ) x = Aᵀy gives the
/// least-squares solution orthogonal to v, which is the minimum-norm one.
inline DecompositionResult decompose(const ExponentTable& table, const Gauge& gauge = MinNorm{})
{
    if (table.empty()) {
        throw Error(ErrorKind::InsufficientData, "exponent table has no cells");
    }
    detail::require_connected(table);

    const auto n = static_cast<Eigen::Index>(table.cities().size());
    const auto m = static_cast<Eigen::Index>(table.facilities().size());
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    for (const auto& cell : table.cells()) {
        const auto i = static_cast<Eigen::Index>(cell.city);
        const auto j = n + static_cast<Eigen::Index>(cell.facility);
        normal(i, i) += 1.0;
        normal(j, j) += 1.0;
        normal(i, j) += 1.0;
        normal(j, i) += 1.0;
        rhs(i) += cell.y();
        rhs(j) += cell.y();
    }
    Eigen::VectorXd v(n + m);
    v.head(n).setOnes();
    v.tail(m).setConstant(-1.0);
    const Eigen::MatrixXd system = normal + v * v.transpose();
    const Eigen::LDLT<Eigen::MatrixXd> solver(system);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::Numeric, "normal equations factorization failed");
    }
    Eigen::VectorXd x = solver.solve(rhs);
    x += solver.solve(rhs - system * x); // one step of iterative refinement
    x -= v * (v.dot(x) / v.squaredNorm());

    DecompositionResult out;
    out.cities = table.cities();
    out.facilities = table.facilities();
    out.c.assign(x.data(), x.data() + n);
    out.f.assign(x.data() + n, x.data() + n + m);
    out.gauge = gauge;
    if (const auto* fixed = std::get_if<FixedFacilityMean>(&gauge)) {
        const double shift = fixed->value - std::accumulate(out.f.begin(), out.f.end(), 0.0) /
                                                static_cast<double>(out.f.size());
        for (auto& fj : out.f) fj += shift;
        for (auto& ci : out.c) ci -= shift;
    }

    out.cells = table.cells();
    out.residuals.reserve(out.cells.size());
    for (const auto& cell : out.cells) {
        const double r = cell.y() - out.fitted(cell);
        out.residuals.push_back(r);
        out.objective += r * r;
    }
    out.mean_relative_residual = relative_residual(out, table);
    return out;
}

struct ContributionShares {
    double csf = 0.0;
    double fsf = 0.0;
};

/// csf = mean over fitted cells of c_i / (c_i + f_j); fsf = 1 - csf.
inline ContributionShares contribution_shares(std::span<const double> c, std::span<const double> f,
                                              std::span<const Cell> cells)
{
    if (cells.empty()) {
        throw Error(ErrorKind::InsufficientData, "no cells to average contribution shares over");
    }
    double acc = 0.0;
    for (const auto& cell : cells) {
        const double total = c[cell.city] + f[cell.facility];
        if (!(total > 0.0)) {
            throw Error(ErrorKind::Degenerate, "cell with non-positive fitted value c_i + f_j");
        }
        acc += c[cell.city] / total;
    }
    const double csf = acc / static_cast<double>(cells.size());
    return {csf, 1.0 - csf};
}

inline ContributionShares contribution_shares(const DecompositionResult& result)
{
    return contribution_shares(result.c, result.f, result.cells);
}

struct FactorMeans {
    double m_y = 0.0; ///< city-specific average contribution
    double m_z = 0.0; ///< facility-specific average contribution
    double m = 0.0;   ///< total mean implied by S^2 = a m^b
};

/// m_y = S2^c / a^(1/(2b)), m_z = S2^f / a^(1/(2b)), m = (S2 / a)^(1/b).
/// m_y * m_z == m whenever c + f == 1/b.
inline FactorMeans factor_means(double s2, double c, double f, double a, double b)
{
    if (!(s2 > 0.0) || !(a > 0.0) || !(b > 0.0)) {
        throw Error(ErrorKind::Domain, "factor_means needs S^2 > 0, a > 0 and b > 0");
    }
    const double common = std::pow(a, 1.0 / (2.0 * b));
    return {std::pow(s2, c) / common, std::pow(s2, f) / common, std::pow(s2, 1.0 / b) / std::pow(a, 1.0 / b)};
}

/// Exact table with 1/b_ij = c_i + f_j on the cells where present(i, j) is true.
template <typename Present>
ExponentTable synthesize(std::span<const double> c, std::span<const double> f, Present present)
{
    ExponentTable table;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < f.size(); ++j) {
            if (present(i, j)) {
                table.add("city" + std::to_string(i), "facility" + std::to_string(j), 1.0 / (c[i] + f[j]));
            }
        }
    }
    return table;
}

} // namespace taylorlaw::decomp
