#pragma once

// Fast analytic cross-checks, shared by the command-line --check mode and the
// acceptance binary. Each check compares a closed form against an
// independent route (propagator products, finite differences, scans).

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qslsense/analytic.hpp"
#include "qslsense/optimize.hpp"
#include "qslsense/roots.hpp"
#include "qslsense/sequence.hpp"
#include "qslsense/spinlin.hpp"

namespace qsl::check {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;  ///< runtime budget; 0 means negligible
};

inline CheckResult timed(int id, std::string name, double budget, const std::function<bool(std::ostream &)> &body) {
    CheckResult r;
    r.id = id;
    r.name = std::move(name);
    r.budget_seconds = budget;
    std::ostringstream detail;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.passed = body(detail);
    } catch (const std::exception &e) {
        r.passed = false;
        detail << "exception: " << e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget > 0.0 && r.seconds > budget) {
        r.passed = false;
        detail << "; runtime " << r.seconds << " s exceeds " << budget << " s";
    }
    r.detail = detail.str();
    return r;
}

/// Exact probability against the propagator product on a 20^3 grid.
inline CheckResult exact_probability_grid() {
    return timed(1, "exact probability vs propagator product", 1.0, [](std::ostream &os) {
        const auto rabis = numeric::logspace(2.0 * analytic::kPi * 1e6, 2.0 * analytic::kPi * 1e8, 20);
        const auto ratios = numeric::logspace(1e-4, 1.0, 20);
        double worst = 0.0;
        for (double rabi : rabis) {
            const auto taus = numeric::logspace(0.05 / rabi, 2.0 * analytic::kPi / rabi, 20);
            for (double r : ratios)
                for (double tau : taus) {
                    analytic::BipartiteParams p{rabi, tau, r * rabi};
                    const double a = analytic::exact_transition_probability(p);
                    const double b = transition_probability(make_bipartite(rabi, tau, 0.5, analytic::kPi / 2, r * rabi));
                    worst = std::max(worst, std::abs(a - b));
                }
        }
        os << "max |difference| = " << worst << " (limit 1e-10)";
        return worst <= 1e-10;
    });
}

/// First-order expansion error at delta omega / Omega = 1e-3 for 50 flip angles.
inline CheckResult first_order_quality() {
    return timed(2, "first-order expansion quality", 0.0, [](std::ostream &os) {
        const double ratio = 1e-3;
        const double rabi = 1.0;
        double worst = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double alpha = 0.5 * analytic::kPi * i / 50.0;
            const double tau = 2.0 * alpha / rabi;
            const double exact = analytic::exact_transition_probability({rabi, tau, ratio * rabi});
            const double first = analytic::first_order_probability(alpha, ratio * rabi * tau);
            worst = std::max(worst, std::abs(first - exact));
        }
        os << "max |error| = " << worst << " (limit " << 10 * ratio * ratio << ")";
        return worst <= 10 * ratio * ratio;
    });
}

/// Closed-form metric constants at a 90 degree flip angle.
inline CheckResult metric_constants() {
    return timed(3, "metric constants at 90 degrees", 0.0, [](std::ostream &os) {
        const double tau = 1.0;
        const double rabi = analytic::kPi / tau;
        const auto m = analytic::metrics_report(rabi, tau);
        struct Item {
            const char *name;
            double value, expected, tol;
        };
        const Item items[] = {
            {"t_fwhm/tau", m.t_fwhm / tau, 2.0 / 3.0, 1e-9},
            {"t_20_80/tau", m.t_20_80 / tau, 0.564, 1e-9},
            {"t_10_90/tau", m.t_10_90 / tau, 0.704, 1e-9},
            {"t_square/tau", m.t_square / tau, 2.0 / analytic::kPi, 1e-9},
            {"bw_first_root/rabi", *m.bw_first_root / rabi, 3.0, 1e-9},
            {"bw_3db/rabi", *m.bw_3db / rabi, 1.19, 1e-2},
        };
        bool ok = true;
        for (const auto &it : items) {
            const double rel = std::abs(it.value - it.expected) / std::abs(it.expected);
            const bool pass = rel <= it.tol;
            ok = ok && pass;
            os << it.name << "=" << it.value << (pass ? " ok" : " FAIL") << "(expected " << it.expected
               << ", rel " << rel << "); ";
        }
        return ok;
    });
}

/// Argmax of |eta| over (k, theta) for five flip angles, analytic and finite-difference.
inline CheckResult timeshare_optimum() {
    return timed(9, "optimal timeshare and phase jump", 10.0, [](std::ostream &os) {
        const auto kg = numeric::linspace(0.0, 1.0, 21);
        const auto tg = numeric::linspace(0.0, analytic::kPi, 21);
        const double rabi = 1.0;
        bool ok = true;
        double worst_a = 0.0, worst_n = 0.0;
        for (int i = 1; i <= 5; ++i) {
            const double tau = analytic::kPi * i / 5.0 / rabi;
            const auto a = optimize::scan_timeshare_phase(rabi, tau, kg, tg);
            const auto n = optimize::scan_timeshare_phase(
                [&](double k, double th) { return std::abs(optimize::numeric_sensitivity(rabi, tau, k, th)); }, kg,
                tg);
            const double ea = std::max(std::abs(a.timeshare - 0.5), std::abs(a.phase_jump - analytic::kPi / 2));
            const double en = std::max(std::abs(n.timeshare - a.timeshare), std::abs(n.phase_jump - a.phase_jump));
            worst_a = std::max(worst_a, ea);
            worst_n = std::max(worst_n, en);
        }
        ok = worst_a <= 1e-6 && worst_n <= 1e-4;
        os << "max analytic argmax error = " << worst_a << " (limit 1e-6); finite-difference argmax offset = "
           << worst_n << " (limit 1e-4)";
        return ok;
    });
}

/// Mandelstam-Tamm and Margolus-Levitin times for random two-level systems.
inline CheckResult qsl_coincidence(std::uint64_t seed = 20240601) {
    return timed(10, "QSL coincidence for two-level systems", 0.0, [seed](std::ostream &os) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01(0.0, 1.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * analytic::kPi);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            SpinMatrix2 h;
            h(0, 0) = n01(rng);
            h(1, 1) = n01(rng);
            h(0, 1) = Complex(n01(rng), n01(rng));
            h(1, 0) = std::conj(h(0, 1));
            const auto eig = hermitian_eigen(h);
            // Only equal-weight superpositions of the two eigenstates reach an orthogonal state.
            const Complex w = std::polar(1.0, phase(rng));
            StateVector2 psi;
            for (std::size_t r = 0; r < 2; ++r) psi[r] = (eig.vectors(r, 0) + w * eig.vectors(r, 1)) / std::sqrt(2.0);
            const auto t = analytic::qsl_times<2>({h, psi, eig.values[0]});
            worst = std::max(worst, std::abs(t.mandelstam_tamm - t.margolus_levitin) / t.mandelstam_tamm);
        }
        const double rabi = 2.0 * analytic::kPi * 1e7;
        const auto s = spin_operators<kSpinHalf>();
        const auto pi_rot = analytic::qsl_times<2>({rabi * s.y, StateVector2::basis(0), -0.5 * rabi});
        const double pi_err = std::abs(pi_rot.mandelstam_tamm - analytic::kPi / rabi) / (analytic::kPi / rabi);
        os << "max relative |t_MT - t_ML| = " << worst << " (limit 1e-12); Omega Sy from |0>: t_MT rel error "
           << pi_err;
        return worst <= 1e-12 && pi_err <= 1e-15;
    });
}

inline std::vector<CheckResult> analytic_checks() {
    return {exact_probability_grid(), first_order_quality(), metric_constants(), timeshare_optimum(),
            qsl_coincidence()};
}

inline void print_line(std::ostream &os, const CheckResult &r) {
    os << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << "  " << r.name << "  [" << r.seconds << " s]  "
       << r.detail << '\n';
}

}  // namespace qsl::check
