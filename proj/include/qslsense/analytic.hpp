#pragma once

// Closed-form results for the bipartite (zero-delay Ramsey) control sequence:
// transition probabilities, effective phase, sensitivity, sensing kernel and
// transfer function, time-resolution and bandwidth metrics, and quantum speed
// limit times.
//
// Units: angular frequencies in rad/s, times in s, hbar = 1.
// Sign convention: the second pulse rotates about +X (phase jump +pi/2), which
// reproduces the exact two-pulse probability. With this choice the linear
// signal term is negative, p = 1/2 - phi/pi at alpha = 90 deg, and the scaling
// factor epsilon is reported signed; use phase_scaling_magnitude() for |epsilon|.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "qslsense/policy.hpp"
#include "qslsense/roots.hpp"
#include "qslsense/spinlin.hpp"

namespace qsl::analytic {

inline constexpr double kPi = std::numbers::pi;

struct BipartiteParams {
    double rabi = 0.0;        ///< Omega, rad/s
    double tau = 0.0;         ///< total sequence duration, s
    double detuning = 0.0;    ///< delta omega, rad/s
    double timeshare = 0.5;   ///< k, fraction of tau spent in the first segment
    double phase_jump = kPi / 2;  ///< theta, rad

    double flip_angle() const { return 0.5 * rabi * tau; }

    void validate() const {
        if (!(rabi > 0.0)) throw ContractError("BipartiteParams: rabi frequency must be > 0");
        if (!(tau >= 0.0)) throw ContractError("BipartiteParams: duration must be >= 0");
        if (!(timeshare >= 0.0 && timeshare <= 1.0))
            throw ContractError("BipartiteParams: timeshare k must lie in [0, 1]");
    }
};

/// Exact transition probability of the equal-timeshare, 90-deg phase-jump
/// sequence for arbitrary detuning (no delta omega << Omega assumption).
inline double exact_transition_probability(const BipartiteParams &p) {
    p.validate();
    if (std::abs(p.timeshare - 0.5) > 1e-12 || std::abs(p.phase_jump - kPi / 2) > 1e-12)
        throw ContractError("exact_transition_probability: closed form requires k = 1/2 and theta = pi/2");
    const double om = p.rabi;
    const double dw = p.detuning;
    const double om2 = om * om;
    const double dw2 = dw * dw;
    const double eff = std::sqrt(om2 + dw2);
    const double x = p.tau * eff;
    const double s4 = std::sin(0.25 * x);
    const double num = om2 * (4.0 * dw2 * std::cos(0.5 * x) + 8.0 * dw * eff * s4 * s4 * std::sin(0.5 * x) +
                              om2 * std::cos(x)) +
                       4.0 * dw2 * dw2 + 4.0 * dw2 * om2 + 3.0 * om2 * om2;
    const double stay = num / (4.0 * eff * eff * eff * eff);
    return std::clamp(1.0 - stay, 0.0, 1.0);
}

/// sin(a)(cos(a) - 1)/a, with the a -> 0 limit.
inline double scaled_phase_term(double alpha) {
    return sinc(alpha) * (std::cos(alpha) - 1.0);
}

/// First-order (in phi = delta_omega * tau) transition probability,
/// 1/4 (1 - cos 2a) + (phi / 2a) sin a (cos a - 1).
/// Valid for |phi| << pi/2; not enforced.
inline double first_order_probability(double alpha, double phi) {
    return 0.25 * (1.0 - std::cos(2.0 * alpha)) + 0.5 * phi * scaled_phase_term(alpha);
}

/// Bias point p0 = 1/4 (1 - cos 2a).
inline double bias_point(double alpha) { return 0.25 * (1.0 - std::cos(2.0 * alpha)); }

/// Signed scaling factor epsilon = sin(a)(cos(a) - 1)/a relating the effective
/// phase to the ideal Ramsey phase. Zero at a = 0 (limit).
inline double phase_scaling_factor(double alpha) {
    if (alpha < 0.0 || alpha > kPi) throw DomainError("phase_scaling_factor: alpha must lie in [0, pi]");
    return scaled_phase_term(alpha);
}

inline double phase_scaling_magnitude(double alpha) { return std::abs(phase_scaling_factor(alpha)); }

/// Effective phase of a sequence with finite 90-deg rotations of duration t_R
/// separated by free evolution tau - 2 t_R.
inline double effective_phase_extended(double detuning, double tau, double rotation_time) {
    if (rotation_time < 0.0 || 2.0 * rotation_time > tau * (1.0 + 1e-12))
        throw ContractError("effective_phase_extended: requires 0 <= 2 t_R <= tau");
    return 4.0 * detuning * rotation_time / kPi + detuning * (tau - 2.0 * rotation_time);
}

/// eta = d p / d delta_omega at delta_omega -> 0 for timeshare k and phase jump theta (units: s).
inline double bipartite_sensitivity(double rabi, double tau, double timeshare, double phase_jump) {
    if (!(timeshare >= 0.0 && timeshare <= 1.0))
        throw ContractError("bipartite_sensitivity: timeshare k must lie in [0, 1]");
    const double x = rabi * tau;
    return std::sin(phase_jump) *
           (std::sin((timeshare - 1.0) * x) - std::sin(timeshare * x) + std::sin(x)) / (2.0 * rabi);
}

/// Sensing kernel sin[Omega (tau/2 - |t|)] on |t| < tau/2, zero outside.
inline double kernel_value(double t, double rabi, double tau) {
    const double u = 0.5 * tau - std::abs(t);
    if (u <= 0.0) return 0.0;
    return std::sin(rabi * u);
}

/// Transfer function K(omega) = |FT[k]| with unitary FT normalization,
///   sqrt(2/pi) Omega |cos(Omega tau/2) - cos(omega tau/2)| / |Omega^2 - omega^2|.
///
/// Evaluated in product form
///   sqrt(2/pi) Omega * 2|sin((Omega+omega) tau/4)|/(Omega+omega) * (tau/4)|sinc((Omega-omega) tau/4)|
/// which is free of cancellation and gives the analytic limit at omega = Omega.
inline double transfer_value(double omega, double rabi, double tau) {
    if (omega < 0.0) throw ContractError("transfer_value: omega must be >= 0");
    const double sum = rabi + omega;
    const double diff = rabi - omega;
    const double sum_factor =
        sum > 0.0 ? 2.0 * std::abs(std::sin(0.25 * sum * tau)) / sum : 0.5 * tau;  // sum -> 0 limit
    const double diff_factor = 0.25 * tau * std::abs(sinc(0.25 * diff * tau));
    return std::sqrt(2.0 / kPi) * rabi * sum_factor * diff_factor;
}

/// FWHM of the kernel, tau (1 - arcsin(sin(a)/2)/a), for a in (0, pi/2].
inline double time_resolution_fwhm(double tau, double alpha) {
    if (!(alpha > 0.0 && alpha <= kPi / 2 + 1e-15))
        throw DomainError("time_resolution_fwhm: alpha must lie in (0, pi/2]");
    return tau * (1.0 - std::asin(0.5 * std::sin(alpha)) / alpha);
}

enum class RiseBand { r20_80, r10_90 };

/// Rise time of the integrated kernel (response to a step signal) between the
/// band's lower and upper fractions:
///   t_20-80 = tau - (2/Omega) arccos(2/5 cos(Omega tau/2) + 3/5)
///   t_10-90 = tau - (2/Omega) arccos(1/5 cos(Omega tau/2) + 4/5)
inline double rise_time(double tau, double rabi, RiseBand band) {
    const double alpha = 0.5 * rabi * tau;
    if (!(alpha > 0.0 && alpha <= kPi / 2 + 1e-15))
        throw DomainError("rise_time: Omega tau / 2 must lie in (0, pi/2]");
    const double lower = band == RiseBand::r20_80 ? 0.2 : 0.1;
    const double arg = 2.0 * lower * std::cos(alpha) + (1.0 - 2.0 * lower);
    return tau - 2.0 / rabi * std::acos(std::clamp(arg, -1.0, 1.0));
}

/// Width of the square kernel with the same peak and area: tau tan(a/2)/a.
inline double equivalent_duration(double tau, double alpha) {
    if (!(alpha > 0.0 && alpha < kPi)) throw DomainError("equivalent_duration: alpha must lie in (0, pi)");
    return tau * std::tan(0.5 * alpha) / alpha;
}

/// First root of K(omega): Omega (2 pi / a - 1).
inline double bandwidth_first_root(double rabi, double alpha) {
    if (!(alpha > 0.0 && alpha <= kPi / 2 + 1e-15))
        throw DomainError("bandwidth_first_root: alpha must lie in (0, pi/2]");
    return rabi * (2.0 * kPi / alpha - 1.0);
}

/// 3-dB bandwidth y * Omega where y > 1 is the smallest root of
///   (y^2 - 1)/sqrt(2) (1 - cos a) = |cos a - cos(y a)|.
inline double bandwidth_3db(double rabi, double alpha) {
    if (!(alpha > 0.0 && alpha <= kPi / 2 + 1e-15))
        throw DomainError("bandwidth_3db: alpha must lie in (0, pi/2]");
    const double one_minus_cos = 1.0 - std::cos(alpha);
    auto g = [&](double y) {
        return (y * y - 1.0) / std::sqrt(2.0) * one_minus_cos - std::abs(std::cos(alpha) - std::cos(y * alpha));
    };
    const double lo = 1.0 + 1e-9;
    const double hi = 2.0 * kPi / alpha;
    const auto bracket = numeric::first_sign_change(g, lo, hi, 4000);
    if (!bracket) {
        std::ostringstream os;
        os << "bandwidth_3db: no sign change of the 3-dB condition on [" << lo << ", " << hi
           << "] for alpha = " << alpha << " (g(lo) = " << g(lo) << ", g(hi) = " << g(hi) << ")";
        throw NumericError(os.str());
    }
    const double y = numeric::bisect(g, bracket->first, bracket->second, 1e-12);
    return y * rabi;
}

struct MetricsReport {
    double t_fwhm = 0.0;
    double t_20_80 = 0.0;
    double t_10_90 = 0.0;
    double t_square = 0.0;
    std::optional<double> bw_first_root;
    std::optional<double> bw_3db;
    std::optional<double> epsilon;
    std::optional<double> p0;
};

/// All closed-form metrics for the bipartite sequence with Rabi frequency
/// `rabi` and total duration `tau` (flip angle a = rabi tau / 2 in (0, pi/2]).
inline MetricsReport metrics_report(double rabi, double tau) {
    const double alpha = 0.5 * rabi * tau;
    MetricsReport m;
    m.t_fwhm = time_resolution_fwhm(tau, alpha);
    m.t_20_80 = rise_time(tau, rabi, RiseBand::r20_80);
    m.t_10_90 = rise_time(tau, rabi, RiseBand::r10_90);
    m.t_square = equivalent_duration(tau, alpha);
    m.bw_first_root = bandwidth_first_root(rabi, alpha);
    m.bw_3db = bandwidth_3db(rabi, alpha);
    m.epsilon = phase_scaling_factor(alpha);
    m.p0 = bias_point(alpha);
    return m;
}

template <std::size_t N>
struct QslInput {
    SpinMatrix<N> hamiltonian;  ///< rad/s
    StateVector<N> state;
    double ground_energy = 0.0;  ///< energy reference for the mean-energy bound
};

/// Mandelstam-Tamm and Margolus-Levitin times. A vanishing energy spread
/// (stationary state) or mean energy at the ground level yields +infinity.
struct QslTimes {
    double mandelstam_tamm = 0.0;
    double margolus_levitin = 0.0;
};

template <std::size_t N>
QslTimes qsl_times(const QslInput<N> &in, const NumericPolicy &policy = kDefaultPolicy) {
    require_hermitian(in.hamiltonian, policy, "qsl_times");
    const double mean = expectation(in.hamiltonian, in.state, policy);
    // Spread as || (H - <H>) psi ||, which avoids the cancellation in <H^2> - <H>^2.
    const auto shifted = in.hamiltonian - mean * SpinMatrix<N>::identity();
    const double scale = in.hamiltonian.max_abs();
    const double residual = (shifted * in.state).norm();
    const double spread = residual > 1e-10 * scale ? residual : 0.0;
    const double excess = mean - in.ground_energy;
    constexpr double inf = std::numeric_limits<double>::infinity();
    QslTimes t;
    t.mandelstam_tamm = spread > 0.0 ? 0.5 * kPi / spread : inf;
    t.margolus_levitin = excess > 1e-10 * scale ? 0.5 * kPi / excess : inf;
    return t;
}

}  // namespace qsl::analytic
