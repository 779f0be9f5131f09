#pragma once

// Dataset generators behind the command-line tool. Every generator is a
// pure function of its options and returns CSV tables.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qslsense/analytic.hpp"
#include "qslsense/csv.hpp"
#include "qslsense/labframe.hpp"
#include "qslsense/optimize.hpp"
#include "qslsense/parallel.hpp"
#include "qslsense/response.hpp"
#include "qslsense/roots.hpp"

namespace qsl::datasets {

inline constexpr double kDeg = std::numbers::pi / 180.0;

/// Flip angles of the kernel and Bode families.
inline const std::vector<double> &family_angles() {
    static const std::vector<double> a{22.5 * kDeg, 45.0 * kDeg, 67.0 * kDeg, 90.0 * kDeg};
    return a;
}

// ---------------------------------------------------------------- metrics

inline csv::Table metrics_table(double rabi, double tau) {
    const auto m = analytic::metrics_report(rabi, tau);
    return {{"tau_s", "rabi_rad_s", "alpha_rad", "t_fwhm_s", "t_20_80_s", "t_10_90_s", "t_square_s",
             "bw_first_root_rad_s", "bw_3db_rad_s", "epsilon", "p0"},
            {{tau, rabi, 0.5 * rabi * tau, m.t_fwhm, m.t_20_80, m.t_10_90, m.t_square, *m.bw_first_root, *m.bw_3db,
              *m.epsilon, *m.p0}}};
}

// ---------------------------------------------------------------- fig 2

struct Fig2Options {
    double rabi = 2.0 * std::numbers::pi * 10e6;  ///< rad/s; t_R = pi / (2 rabi)
    double tau_max_over_tr = 10.0;                ///< dashed branch extends to this multiple of t_R
    std::size_t points_per_branch = 200;
};

/// Ratio phi_eff / phi versus tau. Branch 0: continuous rotation over the
/// whole sequence (flip angle rabi tau / 2 <= 90 deg). Branch 1: 90 degree
/// rotations of length t_R with free evolution in between.
inline csv::Table fig2_table(const Fig2Options &o) {
    const double tr = 0.5 * std::numbers::pi / o.rabi;
    csv::Table t{{"tau_s", "phase_ratio", "branch"}, {}};
    for (double tau : numeric::linspace(2.0 * tr / static_cast<double>(o.points_per_branch), 2.0 * tr,
                                        o.points_per_branch))
        t.rows.push_back({tau, analytic::phase_scaling_magnitude(0.5 * o.rabi * tau), 0.0});
    for (double tau : numeric::linspace(2.0 * tr, o.tau_max_over_tr * tr, o.points_per_branch))
        t.rows.push_back({tau, analytic::effective_phase_extended(1.0, tau, tr) / tau, 1.0});
    return t;
}

// ---------------------------------------------------------------- kernels and Bode

/// Probe centers spanning [-0.6 tau, 0.6 tau] in steps of tau / steps_per_tau.
inline std::vector<double> kernel_grid(double tau, std::size_t steps_per_tau = 50) {
    const auto half = static_cast<std::size_t>(0.6 * static_cast<double>(steps_per_tau));
    std::vector<double> g;
    for (std::size_t i = 0; i <= 2 * half; ++i)
        g.push_back(tau * (static_cast<double>(i) - static_cast<double>(half)) / static_cast<double>(steps_per_tau));
    return g;
}

/// Uniform Bode grid on [0, max_over_rabi * rabi].
inline std::vector<double> bode_grid(double rabi, double max_over_rabi = 8.0, std::size_t points = 161) {
    return numeric::linspace(0.0, max_over_rabi * rabi, points);
}

struct FamilyOptions {
    double tau = 100e-9;  ///< s, shared by every flip angle
    std::vector<double> angles = family_angles();
    std::size_t steps_per_tau = 50;
    double bode_max_over_rabi = 8.0;
    std::size_t bode_points = 161;
    std::size_t workers = 0;
};

struct NamedTable {
    std::string name;  ///< file stem
    csv::Table table;
};

inline std::string angle_tag(double alpha) {
    return "alpha" + csv::format_number(alpha / kDeg, 6) + "deg";
}

inline std::vector<NamedTable> fig3b_tables(const FamilyOptions &o) {
    std::vector<NamedTable> out;
    for (double a : o.angles) {
        const double rabi = 2.0 * a / o.tau;
        const auto runner = response::rotating_frame_runner(rabi, o.tau);
        response::KernelOptions ko;
        ko.workers = o.workers;
        out.push_back({"kernel_" + angle_tag(a),
                       response::kernel_table(response::estimate_kernel(runner, kernel_grid(o.tau, o.steps_per_tau), ko))});
    }
    return out;
}

inline std::vector<NamedTable> fig3c_tables(const FamilyOptions &o) {
    std::vector<NamedTable> out;
    for (double a : o.angles) {
        const double rabi = 2.0 * a / o.tau;
        const auto runner = response::rotating_frame_runner(rabi, o.tau);
        response::BodeOptions bo;
        bo.workers = o.workers;
        out.push_back({"bode_" + angle_tag(a),
                       response::bode_table(response::bode_response(
                           runner, bode_grid(rabi, o.bode_max_over_rabi, o.bode_points), 0.0, bo))});
    }
    return out;
}

// ---------------------------------------------------------------- fig 3(d)

struct SurfaceDatasetOptions {
    double rabi = 2.0 * std::numbers::pi * 10e6;
    double omega_max_over_rabi = 4.0;
    std::size_t omega_points = 161;
    std::size_t tau_points = 200;
    optimize::SurfaceOptions surface;
};

inline optimize::SensitivitySurface fig3d_surface(const SurfaceDatasetOptions &o) {
    const double tmax = optimize::max_duration(o.rabi, o.surface.extended_range);
    const auto omegas = numeric::linspace(0.0, o.omega_max_over_rabi * o.rabi, o.omega_points);
    const auto taus = numeric::linspace(tmax / static_cast<double>(o.tau_points), tmax, o.tau_points);
    return optimize::sensitivity_surface(o.rabi, omegas, taus, o.surface);
}

inline csv::Table optimal_table(double rabi, const std::vector<double> &omegas, const optimize::OptimalOptions &opts) {
    csv::Table t{{"omega_rad_s", "tau_opt_s", "transfer", "low_confidence"}, {}};
    for (double w : omegas) {
        const auto r = optimize::optimal_duration(w, rabi, opts);
        t.rows.push_back({w, r.tau, r.value, r.low_confidence ? 1.0 : 0.0});
    }
    return t;
}

// ---------------------------------------------------------------- fig 4(d)

struct Fig4dOptions {
    double bias_field = lab::kScaledBiasField;  ///< T
    std::vector<double> rabi_over_d = numeric::logspace(0.01, 8.0, 12);
    lab::RunOptions run;
    std::size_t workers = 0;
};

/// p0 and the probability changes p(+B) - p0, p(-B) - p0 for a constant
/// stimulus B = B1 / (10 sqrt 2) at flip angle 90 degrees, per readout basis.
struct Fig4dPoint {
    double rabi = 0.0;
    double rabi_over_d = 0.0;
    double p0_ms0 = 0.0, dp_pos_ms0 = 0.0, dp_neg_ms0 = 0.0;
    double p0_msm1 = 0.0, dp_pos_msm1 = 0.0, dp_neg_msm1 = 0.0;
    double max_norm_drift = 0.0;

    double odd_ms0() const { return 0.5 * (dp_pos_ms0 - dp_neg_ms0); }
    double odd_msm1() const { return 0.5 * (dp_pos_msm1 - dp_neg_msm1); }
};

inline std::vector<Fig4dPoint> fig4d(const Fig4dOptions &o) {
    const std::size_t n = o.rabi_over_d.size();
    // Task layout: point i, basis b (ms0, ms-1), stimulus sign s (0, +, -).
    const auto runs = parallel_map(
        n * 6,
        [&](std::size_t idx) {
            const std::size_t i = idx / 6;
            const auto basis = (idx / 3) % 2 == 0 ? lab::Basis::ms0 : lab::Basis::ms_minus1;
            const std::size_t s = idx % 3;
            const double rabi = o.rabi_over_d[i] * lab::kZeroFieldSplitting;
            const auto model = lab::make_resonant_model(o.bias_field, rabi);
            const double tau = std::numbers::pi / rabi;
            const double b = model.drive_field / (10.0 * std::sqrt(2.0));
            const double sign = s == 0 ? 0.0 : (s == 1 ? 1.0 : -1.0);
            return lab::run_protocol(model, lab::Stimulus::constant_field(sign * b),
                                     lab::make_bipartite_protocol(model, tau, basis), o.run);
        },
        o.workers);
    std::vector<Fig4dPoint> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto &p = out[i];
        p.rabi_over_d = o.rabi_over_d[i];
        p.rabi = p.rabi_over_d * lab::kZeroFieldSplitting;
        const auto *r = &runs[i * 6];
        p.p0_ms0 = r[0].probability;
        p.dp_pos_ms0 = r[1].probability - p.p0_ms0;
        p.dp_neg_ms0 = r[2].probability - p.p0_ms0;
        p.p0_msm1 = r[3].probability;
        p.dp_pos_msm1 = r[4].probability - p.p0_msm1;
        p.dp_neg_msm1 = r[5].probability - p.p0_msm1;
        for (int k = 0; k < 6; ++k) p.max_norm_drift = std::max(p.max_norm_drift, r[k].norm_drift);
    }
    return out;
}

inline csv::Table fig4d_table(const std::vector<Fig4dPoint> &pts) {
    csv::Table t{{"rabi_rad_s", "rabi_over_d", "p0_ms0", "dp_pos_ms0", "dp_neg_ms0", "p0_msm1", "dp_pos_msm1",
                  "dp_neg_msm1"},
                 {}};
    for (const auto &p : pts)
        t.rows.push_back({p.rabi, p.rabi_over_d, p.p0_ms0, p.dp_pos_ms0, p.dp_neg_ms0, p.p0_msm1, p.dp_pos_msm1,
                          p.dp_neg_msm1});
    return t;
}

// ---------------------------------------------------------------- off-axis stimulus

struct OffAxisOptions {
    double bias_over_d = 0.5;                      ///< g B0 / D
    double rabi = 2.0 * std::numbers::pi * 100e6;  ///< rad/s, flip angle 90 degrees
    std::vector<double> chis{0.0, 20.0 * kDeg, 45.0 * kDeg};
    std::vector<double> omega_grid;  ///< empty selects offaxis_grid()
    std::size_t phase_samples = 8;
    std::size_t workers = 0;
};

inline double offaxis_bias_field(const OffAxisOptions &o) {
    return o.bias_over_d * lab::kZeroFieldSplitting / lab::kGyromagnetic;
}

/// Larmor frequency g B0 of the off-axis model, rad/s.
inline double offaxis_larmor(const OffAxisOptions &o) { return lab::kGyromagnetic * offaxis_bias_field(o); }

/// Dense uniform grid up to 3 Omega, then logarithmic up to 3 Larmor.
inline std::vector<double> offaxis_grid(const OffAxisOptions &o) {
    auto g = numeric::linspace(0.0, 3.0 * o.rabi, 31);
    for (double w : numeric::logspace(3.2 * o.rabi, 3.0 * offaxis_larmor(o), 30)) g.push_back(w);
    return g;
}

inline std::vector<response::BodeSeries> offaxis_series(const OffAxisOptions &o) {
    const auto grid = o.omega_grid.empty() ? offaxis_grid(o) : o.omega_grid;
    std::vector<response::BodeSeries> out;
    for (double chi : o.chis) {
        const auto model = lab::make_resonant_model(offaxis_bias_field(o), o.rabi, chi);
        const auto runner = response::lab_frame_runner(model, std::numbers::pi / o.rabi);
        response::BodeOptions bo;
        bo.chi = chi;
        bo.phase_samples = o.phase_samples;
        bo.workers = o.workers;
        out.push_back(response::bode_response(runner, grid, 0.0, bo));
    }
    return out;
}

}  // namespace qsl::datasets
