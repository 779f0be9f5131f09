#pragma once

// Optimality studies for the two-segment sequence: the (k, theta) optimum,
// the sensitivity surface over (signal frequency, duration) and the optimal
// duration per signal frequency.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "qslsense/analytic.hpp"
#include "qslsense/csv.hpp"
#include "qslsense/parallel.hpp"
#include "qslsense/policy.hpp"
#include "qslsense/roots.hpp"
#include "qslsense/sequence.hpp"

namespace qsl::optimize {

struct TimeshareOptimum {
    double timeshare = 0.0;    ///< k*
    double phase_jump = 0.0;   ///< theta*, rad
    double sensitivity = 0.0;  ///< |eta| at the optimum, s
};

/// Objective over (k, theta); must be >= 0.
using TimeshareObjective = std::function<double(double k, double theta)>;

/// Central finite difference of the propagated transition probability,
/// d p / d(delta omega) at delta omega = 0.
inline double numeric_sensitivity(double rabi, double tau, double timeshare, double phase_jump,
                                  double step = 0.0) {
    if (step == 0.0) step = 1e-5 * rabi;
    const double up = transition_probability(make_bipartite(rabi, tau, timeshare, phase_jump, step));
    const double down = transition_probability(make_bipartite(rabi, tau, timeshare, phase_jump, -step));
    return (up - down) / (2.0 * step);
}

/// Grid argmax of `objective`, then golden-section refinement along k and
/// then along theta, each within one grid cell of the incumbent.
inline TimeshareOptimum scan_timeshare_phase(const TimeshareObjective &objective, const std::vector<double> &k_grid,
                                             const std::vector<double> &theta_grid, double tol = 1e-10) {
    if (k_grid.empty() || theta_grid.empty()) throw ContractError("scan_timeshare_phase: empty grid");
    if (!std::is_sorted(k_grid.begin(), k_grid.end()) || !std::is_sorted(theta_grid.begin(), theta_grid.end()))
        throw ContractError("scan_timeshare_phase: grids must be increasing");
    if (k_grid.front() < 0.0 || k_grid.back() > 1.0)
        throw ContractError("scan_timeshare_phase: k grid must lie in [0, 1]");

    std::size_t bi = 0, bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < k_grid.size(); ++i)
        for (std::size_t j = 0; j < theta_grid.size(); ++j) {
            const double f = objective(k_grid[i], theta_grid[j]);
            if (f > best) {
                best = f;
                bi = i;
                bj = j;
            }
        }
    TimeshareOptimum opt{k_grid[bi], theta_grid[bj], best};
    if (!(best > 0.0)) return opt;  // degenerate landscape: nothing to refine

    auto cell = [](const std::vector<double> &g, std::size_t i) {
        return std::pair{g[i == 0 ? 0 : i - 1], g[std::min(i + 1, g.size() - 1)]};
    };
    if (k_grid.size() > 1) {
        const auto [lo, hi] = cell(k_grid, bi);
        const double th = opt.phase_jump;
        const auto r = numeric::golden_maximize([&](double k) { return objective(k, th); }, lo, hi, tol,
                                                std::pair{opt.timeshare, opt.sensitivity});
        opt.timeshare = r.x;
        opt.sensitivity = r.value;
    }
    if (theta_grid.size() > 1) {
        const auto [lo, hi] = cell(theta_grid, bj);
        const double k = opt.timeshare;
        const auto r = numeric::golden_maximize([&](double th) { return objective(k, th); }, lo, hi, tol,
                                                std::pair{opt.phase_jump, opt.sensitivity});
        opt.phase_jump = r.x;
        opt.sensitivity = r.value;
    }
    return opt;
}

/// Analytic |eta| on the grid.
inline TimeshareOptimum scan_timeshare_phase(double rabi, double tau, const std::vector<double> &k_grid,
                                             const std::vector<double> &theta_grid) {
    return scan_timeshare_phase(
        [=](double k, double th) { return std::abs(analytic::bipartite_sensitivity(rabi, tau, k, th)); }, k_grid,
        theta_grid);
}

struct SurfaceOptions {
    /// Overall kernel constant multiplying the transfer function.
    double calibration = 0.5;
    /// Allow durations up to 2 pi / Omega (flip angle up to pi) instead of pi / Omega.
    bool extended_range = false;
    std::size_t workers = 0;
};

inline double max_duration(double rabi, bool extended_range) {
    return (extended_range ? 2.0 : 1.0) * analytic::kPi / rabi;
}

struct RidgePoint {
    double omega = 0.0;  ///< rad/s
    double tau = 0.0;    ///< s
};

struct SensitivitySurface {
    std::vector<double> omega_grid;           ///< rad/s
    std::vector<double> tau_grid;             ///< s
    std::vector<std::vector<double>> values;  ///< values[i][j] at (omega_i, tau_j)
    std::vector<RidgePoint> ridge;
};

inline void require_increasing(const std::vector<double> &g, const char *what) {
    if (g.empty()) throw ContractError(std::string(what) + ": empty grid");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw ContractError(std::string(what) + ": grid must be strictly increasing");
}

inline SensitivitySurface sensitivity_surface(double rabi, const std::vector<double> &omega_grid,
                                              const std::vector<double> &tau_grid, const SurfaceOptions &opts = {}) {
    if (!(rabi > 0.0)) throw ContractError("sensitivity_surface: rabi must be > 0");
    require_increasing(omega_grid, "sensitivity_surface: omega");
    require_increasing(tau_grid, "sensitivity_surface: tau");
    if (omega_grid.front() < 0.0) throw ContractError("sensitivity_surface: omega must be >= 0");
    const double tmax = max_duration(rabi, opts.extended_range);
    if (!(tau_grid.front() > 0.0) || tau_grid.back() > tmax * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "sensitivity_surface: tau must lie in (0, " << tmax << "] s"
           << (opts.extended_range ? "" : "; set the extended-range flag to go beyond a 90 degree flip angle");
        throw ContractError(os.str());
    }
    SensitivitySurface s;
    s.omega_grid = omega_grid;
    s.tau_grid = tau_grid;
    s.values = parallel_map(
        omega_grid.size(),
        [&](std::size_t i) {
            std::vector<double> row(tau_grid.size());
            for (std::size_t j = 0; j < tau_grid.size(); ++j)
                row[j] = opts.calibration * analytic::transfer_value(omega_grid[i], rabi, tau_grid[j]);
            return row;
        },
        opts.workers);
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        // max_element returns the first maximum, i.e. the smallest tau on ties.
        const auto &row = s.values[i];
        const auto j = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        s.ridge.push_back({omega_grid[i], tau_grid[j]});
    }
    return s;
}

struct OptimalDuration {
    double tau = 0.0;    ///< s
    double value = 0.0;  ///< K(omega) at tau
    /// Set when the objective is numerically flat or has several near-equal maxima.
    bool low_confidence = false;
};

struct OptimalOptions {
    bool extended_range = false;
    std::size_t coarse_points = 400;
    double tie_tolerance = 1e-3;  ///< relative gap below which two local maxima count as ties
};

inline OptimalDuration optimal_duration(double omega, double rabi, const OptimalOptions &opts = {}) {
    if (omega < 0.0) throw ContractError("optimal_duration: omega must be >= 0");
    if (!(rabi > 0.0)) throw ContractError("optimal_duration: rabi must be > 0");
    if (opts.coarse_points < 3) throw ContractError("optimal_duration: need at least 3 coarse points");
    const double tmax = max_duration(rabi, opts.extended_range);
    auto f = [&](double tau) { return analytic::transfer_value(omega, rabi, tau); };

    const std::size_t n = opts.coarse_points;
    std::vector<double> grid(n), vals(n);
    for (std::size_t j = 0; j < n; ++j) {
        grid[j] = tmax * static_cast<double>(j + 1) / static_cast<double>(n);
        vals[j] = f(grid[j]);
    }
    const auto jbest = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());

    OptimalDuration out;
    const double lo = jbest == 0 ? 0.0 : grid[jbest - 1];
    const double hi = grid[std::min(jbest + 1, n - 1)];
    const auto r = numeric::golden_maximize(f, lo, hi, 1e-12 * tmax, std::pair{grid[jbest], vals[jbest]});
    out.tau = r.x;
    out.value = r.value;

    // Confidence: the winning local maximum must stand clear of every other one.
    double runner_up = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == jbest) continue;
        const bool left_ok = j == 0 || vals[j] >= vals[j - 1];
        const bool right_ok = j + 1 == n || vals[j] >= vals[j + 1];
        const bool adjacent = j + 1 == jbest || j == jbest + 1;
        if (left_ok && right_ok && !adjacent) runner_up = std::max(runner_up, vals[j]);
    }
    const double dc_scale = analytic::transfer_value(0.0, rabi, analytic::kPi / rabi);
    out.low_confidence = out.value <= 1e-9 * dc_scale || runner_up >= (1.0 - opts.tie_tolerance) * out.value;
    return out;
}

inline csv::Table surface_table(const SensitivitySurface &s) {
    csv::Table t{{"omega_rad_s", "tau_s", "eta"}, {}};
    for (std::size_t i = 0; i < s.omega_grid.size(); ++i)
        for (std::size_t j = 0; j < s.tau_grid.size(); ++j)
            t.rows.push_back({s.omega_grid[i], s.tau_grid[j], s.values[i][j]});
    return t;
}

inline csv::Table ridge_table(const SensitivitySurface &s) {
    csv::Table t{{"omega_rad_s", "tau_opt_s"}, {}};
    for (const auto &p : s.ridge) t.rows.push_back({p.omega, p.tau});
    return t;
}

}  // namespace qsl::optimize
