#pragma once

// Numerical extraction of sensing kernels and frequency responses from any
// protocol simulator that maps a stimulus waveform to a transition
// probability. Stimulus time is measured from the center of the sequence.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qslsense/analytic.hpp"
#include "qslsense/csv.hpp"
#include "qslsense/labframe.hpp"
#include "qslsense/parallel.hpp"
#include "qslsense/policy.hpp"
#include "qslsense/sequence.hpp"

namespace qsl::response {

/// A simulator seen as a black box: stimulus (time origin at the sequence
/// center) in, transition probability out. `transduction` converts tesla
/// into detuning (rad/s per T).
struct ProtocolRunner {
    std::function<double(const lab::Stimulus &)> probability;
    double transduction = lab::kGyromagnetic;
    double rabi = 0.0;  ///< rad/s
    double tau = 0.0;   ///< s
    std::string label;

    double flip_angle() const { return 0.5 * rabi * tau; }
};

/// Propagates a rotating-frame sequence whose detuning is modulated by the
/// stimulus. Each segment is cut into `slices` pieces evaluated at their
/// midpoints; static stimuli use one piece per segment (exact).
inline double sliced_transition_probability(const ControlSequence &seq, const lab::Stimulus &stim,
                                            double transduction, double time_origin, std::size_t slices) {
    seq.validate();
    auto psi = StateVector2::basis(0);
    double t = time_origin;
    for (const auto &seg : seq.segments) {
        const std::size_t n = stim.is_static() ? 1 : std::max<std::size_t>(slices, 1);
        const double h = seg.duration / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            PulseSegment piece = seg;
            piece.duration = h;
            piece.detuning += transduction * stim.value(t + (static_cast<double>(i) + 0.5) * h);
            psi = segment_propagator(piece) * psi;
        }
        t += seg.duration;
    }
    return 1.0 - overlap_probability(StateVector2::basis(0), psi.normalized());
}

/// Two-level rotating-frame backend for the bipartite sequence (k = 1/2, theta = pi/2).
inline ProtocolRunner rotating_frame_runner(double rabi, double tau, double transduction = lab::kGyromagnetic,
                                            std::size_t slices_per_segment = 2000) {
    if (!(rabi > 0.0 && tau > 0.0)) throw ContractError("rotating_frame_runner: rabi and tau must be > 0");
    ProtocolRunner r;
    r.rabi = rabi;
    r.tau = tau;
    r.transduction = transduction;
    r.label = "rotating-frame";
    const auto seq = make_bipartite(rabi, tau);
    r.probability = [seq, transduction, tau, slices_per_segment](const lab::Stimulus &s) {
        return sliced_transition_probability(seq, s, transduction, -0.5 * tau, slices_per_segment);
    };
    return r;
}

/// Spin-1 laboratory-frame backend. The protocol occupies [0, tau], so the
/// stimulus is shifted by tau/2 before it is handed to the integrator.
inline ProtocolRunner lab_frame_runner(const lab::NvModel &model, double tau, lab::Basis basis = lab::Basis::ms0,
                                       const lab::RunOptions &opts = {}) {
    model.validate();
    if (!(tau > 0.0)) throw ContractError("lab_frame_runner: tau must be > 0");
    ProtocolRunner r;
    r.rabi = lab::rabi_frequency(model);
    r.tau = tau;
    r.transduction = model.gyromagnetic;
    r.label = "lab-frame";
    const auto protocol = lab::make_bipartite_protocol(model, tau, basis);
    r.probability = [model, protocol, opts, tau](const lab::Stimulus &s) {
        return lab::run_protocol(model, s.delayed(0.5 * tau), protocol, opts).probability;
    };
    return r;
}

/// (p(+s) - p(-s)) / 2: the part of the response that is odd in the stimulus.
inline double antisymmetric_response(const ProtocolRunner &runner, const lab::Stimulus &s) {
    return 0.5 * (runner.probability(s) - runner.probability(s.scaled(-1.0)));
}

/// Default linear-regime amplitude: peak detuning of Omega / 1000.
inline double default_amplitude(const ProtocolRunner &runner) {
    return 1e-3 * runner.rabi / runner.transduction;
}

/// d p / d(delta omega) for a constant stimulus, in seconds.
inline double dc_sensitivity(const ProtocolRunner &runner, double amplitude = 0.0) {
    if (amplitude == 0.0) amplitude = default_amplitude(runner);
    return antisymmetric_response(runner, lab::Stimulus::constant_field(amplitude)) /
           (runner.transduction * amplitude);
}

struct KernelEstimate {
    std::vector<double> times;   ///< s, probe centers
    std::vector<double> values;  ///< kernel in units of the unit-amplitude sin-shaped kernel
    double tau = 0.0;            ///< s
    double omega = 0.0;          ///< rabi frequency, rad/s
    double normalization = 0.0;  ///< c: measured DC sensitivity / integral of the sin-shaped kernel
    double probe_fwhm = 0.0;     ///< s

    void validate() const {
        if (times.size() != values.size()) throw ContractError("KernelEstimate: times and values differ in length");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw ContractError("KernelEstimate: times must be strictly increasing");
        for (double v : values)
            if (!std::isfinite(v)) throw ContractError("KernelEstimate: non-finite value");
    }
};

struct KernelOptions {
    double probe_fwhm = 0.0;  ///< 0 selects kernel FWHM / 12
    double amplitude = 0.0;   ///< peak probe field, T; 0 selects default_amplitude()
    std::size_t workers = 0;
};

/// Integral of sin[Omega (tau/2 - |t|)] over the real line: 2 (1 - cos a) / Omega.
inline double unit_kernel_area(double rabi, double tau) {
    return 2.0 * (1.0 - std::cos(0.5 * rabi * tau)) / rabi;
}

/// Kernel constant c: DC sensitivity over the integral of the unit sin-shaped kernel.
/// Throws NumericError when |c| < 1e-3 (|sin a| below 2e-3, e.g. a = 180 deg). There the odd
/// response is dominated by third-order terms of the probe amplitude and cannot be normalized.
inline double kernel_constant(const ProtocolRunner &runner, double amplitude, const char *caller) {
    const double c = dc_sensitivity(runner, amplitude) / unit_kernel_area(runner.rabi, runner.tau);
    if (!(std::abs(c) >= 1e-3))
        throw NumericError(std::string(caller) + ": first-order DC response vanishes (kernel constant " +
                           csv::format_number(c, 3) + "); the response cannot be normalized");
    return c;
}

/// Expected FWHM used to size the probe; above 90 degrees the closed form no
/// longer applies and the 90-degree value is used as a conservative bound.
inline double expected_kernel_fwhm(double rabi, double tau) {
    const double a = 0.5 * rabi * tau;
    return analytic::time_resolution_fwhm(tau, std::min(a, analytic::kPi / 2));
}

/// Scans a Gaussian probe across `t_grid` and records the odd response,
/// scaled by the probe area and by the DC calibration constant c.
inline KernelEstimate estimate_kernel(const ProtocolRunner &runner, const std::vector<double> &t_grid,
                                      const KernelOptions &opts = {}) {
    if (t_grid.empty()) throw ContractError("estimate_kernel: empty time grid");
    const double expected = expected_kernel_fwhm(runner.rabi, runner.tau);
    const double fwhm = opts.probe_fwhm > 0.0 ? opts.probe_fwhm : expected / 12.0;
    if (fwhm > expected / 10.0 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "estimate_kernel: probe FWHM " << fwhm << " s exceeds kernel FWHM / 10 = " << expected / 10.0 << " s";
        throw ContractError(os.str());
    }
    const double amp = opts.amplitude != 0.0 ? opts.amplitude : default_amplitude(runner);

    KernelEstimate est;
    est.times = t_grid;
    est.tau = runner.tau;
    est.omega = runner.rabi;
    est.probe_fwhm = fwhm;
    est.normalization = kernel_constant(runner, amp, "estimate_kernel");

    const double area = lab::Stimulus::gaussian(amp, 0.0, fwhm).gaussian_area();
    const double scale = 1.0 / (runner.transduction * area * est.normalization);
    est.values = parallel_map(
        t_grid.size(),
        [&](std::size_t i) {
            return scale * antisymmetric_response(runner, lab::Stimulus::gaussian(amp, t_grid[i], fwhm));
        },
        opts.workers);
    est.validate();
    return est;
}

struct SineFit {
    double amplitude = 0.0;
    double phase = 0.0;     ///< y ~ amplitude sin(omega t + phase)
    double residual = 0.0;  ///< RMS of the fit residuals
};

struct SamplePoint {
    double t = 0.0;
    double y = 0.0;
};

/// Least-squares fit y ~ a sin(omega t) + b cos(omega t) via the 2x2 normal equations.
inline SineFit fit_sine_amplitude(const std::vector<SamplePoint> &samples, double omega) {
    if (samples.size() < 4) throw ContractError("fit_sine_amplitude: need at least 4 samples");
    if (!(omega > 0.0)) throw ContractError("fit_sine_amplitude: omega must be > 0");
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                        [](const SamplePoint &x, const SamplePoint &y) { return x.t < y.t; });
    // Each sample stands for one cell of width span/(n-1), so n uniform samples over [0, T) cover a period.
    const double span = hi->t - lo->t;
    const double n = static_cast<double>(samples.size());
    const double period = 2.0 * analytic::kPi / omega;
    if (span * n / (n - 1.0) < period * (1.0 - 1e-9))
        throw ContractError("fit_sine_amplitude: samples must span at least one period");

    double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
    for (const auto &p : samples) {
        const double s = std::sin(omega * p.t);
        const double c = std::cos(omega * p.t);
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += p.y * s;
        yc += p.y * c;
    }
    const double det = ss * cc - sc * sc;
    if (!(std::abs(det) > 1e-12 * (ss + cc) * (ss + cc)))
        throw NumericError("fit_sine_amplitude: rank-deficient design (samples share one phase)");
    const double a = (ys * cc - yc * sc) / det;
    const double b = (yc * ss - ys * sc) / det;

    SineFit fit;
    fit.amplitude = std::hypot(a, b);
    fit.phase = std::atan2(b, a);
    double r2 = 0.0;
    for (const auto &p : samples) {
        const double e = p.y - a * std::sin(omega * p.t) - b * std::cos(omega * p.t);
        r2 += e * e;
    }
    fit.residual = std::sqrt(r2 / n);
    return fit;
}

struct BodeSeries {
    std::vector<double> frequencies;  ///< rad/s
    std::vector<double> gains;        ///< |response| / |DC response|
    std::vector<double> residuals;    ///< fit RMS residual / |DC response|
    std::vector<bool> flagged;        ///< residual above threshold
    double chi = 0.0;                 ///< rad

    void validate() const {
        for (std::size_t i = 1; i < frequencies.size(); ++i)
            if (!(frequencies[i] > frequencies[i - 1]))
                throw ContractError("BodeSeries: frequencies must be strictly increasing");
        for (double g : gains)
            if (!(g >= 0.0)) throw ContractError("BodeSeries: gains must be >= 0");
    }
};

struct BodeOptions {
    std::size_t phase_samples = 8;
    double residual_threshold = 1e-2;  ///< relative to the DC response
    double chi = 0.0;                  ///< recorded with the series
    std::size_t workers = 0;
};

/// Sine-fit frequency response. For each omega the stimulus delay is stepped
/// over one period and the odd response is fitted by a sinusoid in the delay.
inline BodeSeries bode_response(const ProtocolRunner &runner, const std::vector<double> &omega_grid,
                                double amplitude = 0.0, const BodeOptions &opts = {}) {
    if (omega_grid.empty()) throw ContractError("bode_response: empty frequency grid");
    if (omega_grid.front() < 0.0) throw ContractError("bode_response: frequencies must be >= 0");
    if (opts.phase_samples < 4) throw ContractError("bode_response: need at least 4 phase samples");
    if (amplitude == 0.0) amplitude = default_amplitude(runner);

    const double c = kernel_constant(runner, amplitude, "bode_response");
    const double dc = c * unit_kernel_area(runner.rabi, runner.tau) * runner.transduction * amplitude;

    const std::size_t m = opts.phase_samples;
    const std::size_t n = omega_grid.size();
    // One flat task list over (frequency, delay) pairs so every run can be scheduled independently.
    const auto dp = parallel_map(
        n * m,
        [&](std::size_t idx) {
            const double w = omega_grid[idx / m];
            if (w == 0.0) return 0.0;
            const double delay = 2.0 * analytic::kPi / w * static_cast<double>(idx % m) / static_cast<double>(m);
            return antisymmetric_response(runner, lab::Stimulus::sinusoid(amplitude, w, 0.0).delayed(delay));
        },
        opts.workers);

    BodeSeries out;
    out.chi = opts.chi;
    out.frequencies = omega_grid;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = omega_grid[i];
        if (w == 0.0) {
            out.gains.push_back(1.0);
            out.residuals.push_back(0.0);
            out.flagged.push_back(false);
            continue;
        }
        std::vector<SamplePoint> pts;
        for (std::size_t j = 0; j < m; ++j)
            pts.push_back({2.0 * analytic::kPi / w * static_cast<double>(j) / static_cast<double>(m), dp[i * m + j]});
        const auto fit = fit_sine_amplitude(pts, w);
        const double rel_residual = fit.residual / std::abs(dc);
        out.gains.push_back(fit.amplitude / std::abs(dc));
        out.residuals.push_back(rel_residual);
        out.flagged.push_back(rel_residual > opts.residual_threshold);
    }
    out.validate();
    return out;
}

/// Thrown when a sampled kernel has more than one lobe above half maximum.
class AmbiguityError : public NumericError {
  public:
    using NumericError::NumericError;
};

namespace detail {

inline double crossing(double t0, double v0, double t1, double v1, double level) {
    if (v1 == v0) return 0.5 * (t0 + t1);
    return t0 + (level - v0) * (t1 - t0) / (v1 - v0);
}

}  // namespace detail

/// FWHM, step-response rise times and equivalent duration of a sampled kernel.
/// Bandwidths, epsilon and p0 are left empty.
inline analytic::MetricsReport numeric_metrics(const KernelEstimate &k) {
    k.validate();
    const auto &t = k.times;
    const auto &v = k.values;
    if (t.size() < 3) throw ContractError("numeric_metrics: need at least 3 samples");
    const auto peak_it = std::max_element(v.begin(), v.end());
    const double peak = *peak_it;
    if (!(peak > 0.0)) throw NumericError("numeric_metrics: kernel has no positive peak");
    const double half = 0.5 * peak;

    // Runs of consecutive samples at or above half maximum.
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < half) continue;
        if (!runs.empty() && runs.back().second + 1 == i)
            runs.back().second = i;
        else
            runs.push_back({i, i});
    }
    if (runs.size() > 1) {
        std::ostringstream os;
        os << "numeric_metrics: kernel is multi-modal; candidate peaks at";
        for (auto [a, b] : runs) {
            const auto it = std::max_element(v.begin() + static_cast<std::ptrdiff_t>(a),
                                             v.begin() + static_cast<std::ptrdiff_t>(b) + 1);
            os << " t=" << t[static_cast<std::size_t>(it - v.begin())] << " (" << *it << ")";
        }
        throw AmbiguityError(os.str());
    }
    const auto [first, last] = runs.front();
    if (last - first + 1 < 10) throw ContractError("numeric_metrics: fewer than 10 samples above half maximum");
    if (first == 0 || last + 1 == v.size())
        throw ContractError("numeric_metrics: half-maximum crossing lies outside the sampled window");

    analytic::MetricsReport m;
    const double left = detail::crossing(t[first - 1], v[first - 1], t[first], v[first], half);
    const double right = detail::crossing(t[last], v[last], t[last + 1], v[last + 1], half);
    m.t_fwhm = right - left;

    // Cumulative trapezoid integral = response to a unit step switched on at t.
    std::vector<double> cum(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) cum[i] = cum[i - 1] + 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    const double total = cum.back();
    if (!(total > 0.0)) throw NumericError("numeric_metrics: kernel area is not positive");
    m.t_square = total / peak;

    auto level_time = [&](double frac) {
        const double target = frac * total;
        for (std::size_t i = 1; i < cum.size(); ++i)
            if (cum[i] >= target) return detail::crossing(t[i - 1], cum[i - 1], t[i], cum[i], target);
        return t.back();
    };
    m.t_20_80 = level_time(0.8) - level_time(0.2);
    m.t_10_90 = level_time(0.9) - level_time(0.1);
    return m;
}

inline csv::Table kernel_table(const KernelEstimate &k) {
    csv::Table tab{{"t_s", "k_norm"}, {}};
    for (std::size_t i = 0; i < k.times.size(); ++i) tab.rows.push_back({k.times[i], k.values[i]});
    return tab;
}

inline csv::Table bode_table(const BodeSeries &b) {
    csv::Table tab{{"omega_rad_s", "gain_norm", "chi_rad"}, {}};
    for (std::size_t i = 0; i < b.frequencies.size(); ++i) tab.rows.push_back({b.frequencies[i], b.gains[i], b.chi});
    return tab;
}

}  // namespace qsl::response
