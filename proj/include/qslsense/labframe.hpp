#pragma once

// Laboratory-frame simulation of the NV spin-1 with an explicitly
// time-dependent Hamiltonian
//
//   H(t) = D Sz^2 + g B0 Sz + g B1 m(t) Sx [pulse on] + g Bstim(t) (cos(chi) Sz + sin(chi) Sx),
//   m(t) = cos(carrier t + carrier_phase),
//
// integrated with midpoint-sampled exponential steps
// psi <- exp(-i H(t + dt/2) dt) psi, which is exactly unitary per step.
//
// The driven qubit is the m = 0 <-> m = -1 transition at |D - g B0|.
// The Rabi frequency Omega is the angular frequency of the 0 <-> -1
// population oscillation, Omega = g B1 / sqrt(2) (the spin-1 matrix element
// of Sx is 1/sqrt(2), i.e. sqrt(2) times the spin-1/2 value, and the rotating
// wave approximation halves the drive).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qslsense/policy.hpp"
#include "qslsense/sequence.hpp"
#include "qslsense/spinlin.hpp"

namespace qsl::lab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kZeroFieldSplitting = kTwoPi * 2.87e9;      ///< rad/s
inline constexpr double kGyromagneticHzPerTesla = 28.0345e9;         ///< Hz/T (cycle frequency)
inline constexpr double kGyromagnetic = kTwoPi * kGyromagneticHzPerTesla;  ///< rad/s/T
inline constexpr double kPaperBiasField = 40.0;                      ///< T

/// Bias field giving g B0 = 40 D: well above D (so the 0 <-> +/-1 splitting is
/// saturated at 2D) but about ten times cheaper to integrate than 40 T.
inline constexpr double kScaledBiasField = 40.0 * kZeroFieldSplitting / kGyromagnetic;

struct NvModel {
    double zero_field_splitting = kZeroFieldSplitting;  ///< D, rad/s
    double gyromagnetic = kGyromagnetic;                ///< g, rad/s per T
    double bias_field = 0.0;                            ///< B0, T
    double drive_field = 0.0;                           ///< B1, T
    double carrier = 0.0;                               ///< drive frequency, rad/s
    double off_axis = 0.0;                              ///< chi, rad

    void validate() const {
        if (!(zero_field_splitting > 0.0)) throw ContractError("NvModel: D must be > 0");
        if (!(bias_field >= 0.0)) throw ContractError("NvModel: B0 must be >= 0");
        if (!(drive_field >= 0.0)) throw ContractError("NvModel: B1 must be >= 0");
        if (!(off_axis >= 0.0 && off_axis <= std::numbers::pi / 2 + 1e-15))
            throw ContractError("NvModel: chi must lie in [0, pi/2]");
    }

    friend bool operator==(const NvModel &, const NvModel &) = default;
};

/// Converts a gyromagnetic ratio quoted as a cycle frequency (Hz/T) to rad/s/T.
inline double gyromagnetic_from_hz(double hz_per_tesla) { return kTwoPi * hz_per_tesla; }

inline double rabi_frequency(const NvModel &m) { return m.gyromagnetic * m.drive_field / std::sqrt(2.0); }

inline double drive_field_for_rabi(const NvModel &m, double rabi) {
    return std::sqrt(2.0) * rabi / m.gyromagnetic;
}

/// m = 0 <-> m = -1 transition frequency |D - g B0|.
inline double transition_frequency(const NvModel &m) {
    return std::abs(m.zero_field_splitting - m.gyromagnetic * m.bias_field);
}

/// Sign of E(-1) - E(0) = D - g B0; fixes how carrier phases map onto rotating-frame axes.
inline double transition_sign(const NvModel &m) {
    const double d = m.zero_field_splitting - m.gyromagnetic * m.bias_field;
    if (d == 0.0) throw ContractError("NvModel: m = 0 and m = -1 are degenerate (g B0 = D)");
    return d > 0.0 ? 1.0 : -1.0;
}

/// Model driven resonantly on the 0 <-> -1 transition with Rabi frequency `rabi`.
inline NvModel make_resonant_model(double bias_field, double rabi, double off_axis = 0.0) {
    NvModel m;
    m.bias_field = bias_field;
    m.drive_field = drive_field_for_rabi(m, rabi);
    m.carrier = transition_frequency(m);
    m.off_axis = off_axis;
    m.validate();
    return m;
}

enum class StimulusKind { constant, gaussian, sinusoid };

/// Signal field B_stim(t) in tesla.
struct Stimulus {
    StimulusKind kind = StimulusKind::constant;
    double amplitude = 0.0;  ///< T
    double center = 0.0;     ///< gaussian center, s
    double fwhm = 0.0;       ///< gaussian FWHM, s
    double frequency = 0.0;  ///< sinusoid angular frequency, rad/s
    double phase = 0.0;      ///< sinusoid phase, rad: amplitude * sin(frequency t + phase)

    static Stimulus constant_field(double amplitude) { return {StimulusKind::constant, amplitude}; }
    static Stimulus gaussian(double amplitude, double center, double fwhm) {
        Stimulus s{StimulusKind::gaussian, amplitude};
        s.center = center;
        s.fwhm = fwhm;
        s.validate();
        return s;
    }
    static Stimulus sinusoid(double amplitude, double frequency, double phase) {
        Stimulus s{StimulusKind::sinusoid, amplitude};
        s.frequency = frequency;
        s.phase = phase;
        s.validate();
        return s;
    }

    void validate() const {
        if (kind == StimulusKind::gaussian && !(fwhm > 0.0)) throw ContractError("Stimulus: gaussian FWHM must be > 0");
        if (kind == StimulusKind::sinusoid && !(frequency >= 0.0))
            throw ContractError("Stimulus: sinusoid frequency must be >= 0");
    }

    double value(double t) const {
        switch (kind) {
            case StimulusKind::constant:
                return amplitude;
            case StimulusKind::gaussian: {
                const double x = (t - center) / fwhm;
                return amplitude * std::exp(-4.0 * std::numbers::ln2 * x * x);
            }
            case StimulusKind::sinusoid:
                return amplitude * std::sin(frequency * t + phase);
        }
        return 0.0;
    }

    /// Time integral over the real line (gaussian) in T s; zero for other kinds.
    double gaussian_area() const {
        return kind == StimulusKind::gaussian
                   ? amplitude * fwhm * std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2))
                   : 0.0;
    }

    bool is_static() const { return kind == StimulusKind::constant || amplitude == 0.0; }

    /// s'(t) = s(t - delay).
    Stimulus delayed(double delay) const {
        Stimulus s = *this;
        if (kind == StimulusKind::gaussian) s.center += delay;
        if (kind == StimulusKind::sinusoid) s.phase -= frequency * delay;
        return s;
    }

    Stimulus scaled(double factor) const {
        Stimulus s = *this;
        s.amplitude *= factor;
        return s;
    }
};

enum class Basis { ms0, ms_minus1 };

/// Index of a basis state in the (m = +1, 0, -1) ordering.
inline std::size_t basis_index(Basis b) { return b == Basis::ms0 ? 1 : 2; }

struct PulseWindow {
    double start = 0.0;          ///< s
    double stop = 0.0;           ///< s
    double carrier_phase = 0.0;  ///< rad
};

struct Protocol {
    std::vector<PulseWindow> windows;
    Basis prep = Basis::ms0;
    Basis readout = Basis::ms0;
    double duration = 0.0;  ///< s; evolution runs over [0, duration]

    void validate() const {
        if (!(duration > 0.0)) throw ContractError("Protocol: duration must be > 0");
        double last = 0.0;
        for (const auto &w : windows) {
            if (!(w.start >= last - 1e-18 && w.stop >= w.start && w.stop <= duration * (1.0 + 1e-12)))
                throw ContractError("Protocol: pulse windows must be ordered, non-overlapping and inside [0, duration]");
            last = w.stop;
        }
    }
};

/// Maps a rotating-frame sequence onto carrier windows. Segments with nonzero
/// Rabi frequency become windows whose carrier phase reproduces the
/// rotating-frame axis; all driven segments must share the model's Rabi frequency.
inline Protocol protocol_from_sequence(const NvModel &model, const ControlSequence &seq, Basis basis) {
    seq.validate();
    const double rabi = rabi_frequency(model);
    const double sign = transition_sign(model);
    Protocol p;
    p.prep = basis;
    p.readout = basis;
    double t = 0.0;
    for (const auto &seg : seq.segments) {
        if (seg.rabi > 0.0) {
            if (std::abs(seg.rabi - rabi) > 1e-9 * rabi)
                throw ContractError("protocol_from_sequence: segment Rabi frequency differs from the model drive");
            p.windows.push_back({t, t + seg.duration, sign * seg.phase});
        }
        t += seg.duration;
    }
    p.duration = t;
    return p;
}

/// Bipartite sequence of total duration tau: [0, tau/2] at carrier phase 0,
/// [tau/2, tau] shifted so the second rotation is about +X in the rotating frame.
inline Protocol make_bipartite_protocol(const NvModel &model, double tau, Basis basis = Basis::ms0) {
    return protocol_from_sequence(model, make_bipartite(rabi_frequency(model), tau), basis);
}

/// Full Hamiltonian at time t (rad/s), real symmetric in the (+1, 0, -1) basis.
inline SpinMatrix3 hamiltonian_at(const NvModel &m, const Stimulus &stim, bool pulse_on, double carrier_phase,
                                  double t) {
    const double g = m.gyromagnetic;
    const double b = stim.value(t);
    const double axial = g * (m.bias_field + b * std::cos(m.off_axis));
    double transverse = g * b * std::sin(m.off_axis);
    if (pulse_on) transverse += g * m.drive_field * std::cos(m.carrier * t + carrier_phase);
    const double x = transverse / std::sqrt(2.0);
    SpinMatrix3 h;
    h(0, 0) = m.zero_field_splitting + axial;
    h(2, 2) = m.zero_field_splitting - axial;
    h(0, 1) = x;
    h(1, 0) = x;
    h(1, 2) = x;
    h(2, 1) = x;
    return h;
}

struct FrequencyScale {
    double value = 0.0;  ///< rad/s
    std::string name;
};

/// Largest angular-frequency scale in the model: highest level splitting,
/// zero-field splitting, carrier, drive coupling, stimulus frequency and
/// stimulus coupling (and 1/fwhm for gaussian probes).
inline FrequencyScale max_frequency_scale(const NvModel &m, const Stimulus &stim) {
    const double g = m.gyromagnetic;
    FrequencyScale best{m.zero_field_splitting, "zero-field splitting D"};
    auto consider = [&](double v, const char *name) {
        if (std::abs(v) > best.value) best = {std::abs(v), name};
    };
    consider(m.zero_field_splitting + g * m.bias_field, "Larmor (D + g B0)");
    consider(m.carrier, "carrier");
    consider(g * m.drive_field, "Rabi drive (g B1)");
    if (stim.kind == StimulusKind::sinusoid) consider(stim.frequency, "stimulus frequency");
    if (stim.kind == StimulusKind::gaussian) consider(kTwoPi / stim.fwhm, "stimulus bandwidth (1/fwhm)");
    consider(g * std::abs(stim.amplitude), "stimulus coupling (g Bstim)");
    return best;
}

/// Default integrator step 1/(100 f_max).
inline double default_time_step(const NvModel &m, const Stimulus &stim) {
    return kTwoPi / (100.0 * max_frequency_scale(m, stim).value);
}

struct EvolveOptions {
    /// Use one exponential for intervals where the Hamiltonian is constant
    /// (pulse off and static stimulus).
    bool merge_static_intervals = true;
};

/// Integrates psi from t0 to t1 with step <= dt.
inline StateVector3 evolve(const NvModel &model, const Stimulus &stim, const Protocol &protocol, double t0, double t1,
                           double dt, const StateVector3 &psi, const EvolveOptions &opts = {}) {
    model.validate();
    stim.validate();
    const FrequencyScale fmax = max_frequency_scale(model, stim);
    const double dt_limit = kTwoPi / (50.0 * fmax.value);
    if (!(dt > 0.0) || dt > dt_limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "evolve: time step " << dt << " s exceeds 1/(50 f_max) = " << dt_limit << " s; binding scale is "
           << fmax.name << " (" << fmax.value / kTwoPi << " Hz)";
        throw ConfigError(os.str());
    }
    if (t1 < t0) throw ContractError("evolve: t1 < t0");

    // Interval boundaries: t0, t1 and every window edge in between.
    std::vector<double> cuts{t0};
    for (const auto &w : protocol.windows) {
        for (double e : {w.start, w.stop})
            if (e > t0 && e < t1) cuts.push_back(e);
    }
    cuts.push_back(t1);
    std::sort(cuts.begin(), cuts.end());

    StateVector3 state = psi;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double a = cuts[i - 1];
        const double b = cuts[i];
        const double len = b - a;
        if (len <= 0.0) continue;
        const double mid = 0.5 * (a + b);
        bool on = false;
        double phase = 0.0;
        for (const auto &w : protocol.windows) {
            if (mid >= w.start && mid < w.stop) {
                on = true;
                phase = w.carrier_phase;
                break;
            }
        }
        if (!on && stim.is_static() && opts.merge_static_intervals) {
            state = matexp_antihermitian(hamiltonian_at(model, stim, false, 0.0, mid), len) * state;
            continue;
        }
        const auto steps = static_cast<std::size_t>(std::ceil(len / dt - 1e-9));
        const double h = len / static_cast<double>(std::max<std::size_t>(steps, 1));
        for (std::size_t k = 0; k < std::max<std::size_t>(steps, 1); ++k) {
            const double tm = a + (static_cast<double>(k) + 0.5) * h;
            state = matexp_antihermitian(hamiltonian_at(model, stim, on, phase, tm), h) * state;
        }
    }
    return state;
}

struct RunOptions {
    double dt = 0.0;  ///< 0 selects default_time_step()
    /// Relative carrier offset from the 0 <-> -1 transition above which a warning is issued.
    double resonance_tolerance = 1e-6;
};

struct ProtocolOutcome {
    double probability = 0.0;  ///< 1 - |<readout|psi(T)>|^2
    double norm_drift = 0.0;   ///< | ||psi(T)|| - 1 |
    std::vector<std::string> warnings;
};

inline ProtocolOutcome run_protocol(const NvModel &model, const Stimulus &stim, const Protocol &protocol,
                                    const RunOptions &opts = {}) {
    protocol.validate();
    ProtocolOutcome out;
    const double resonance = transition_frequency(model);
    if (std::abs(model.carrier - resonance) > opts.resonance_tolerance * resonance) {
        std::ostringstream os;
        os << "carrier " << model.carrier / kTwoPi << " Hz is detuned from the 0 <-> -1 transition at "
           << resonance / kTwoPi << " Hz";
        out.warnings.push_back(os.str());
    }
    const double dt = opts.dt > 0.0 ? opts.dt : default_time_step(model, stim);
    const auto psi0 = StateVector3::basis(basis_index(protocol.prep));
    const auto psi = evolve(model, stim, protocol, 0.0, protocol.duration, dt, psi0);
    out.norm_drift = std::abs(psi.norm() - 1.0);
    out.probability = std::clamp(1.0 - psi.population(basis_index(protocol.readout)), 0.0, 1.0);
    return out;
}

struct TraceSample {
    double t = 0.0;
    std::array<double, 3> populations{};  ///< m = +1, 0, -1
    double sz = 0.0;
};

/// Evolution sampled at `samples` + 1 equally spaced instants over [0, duration].
inline std::vector<TraceSample> simulate_trace(const NvModel &model, const Stimulus &stim, const Protocol &protocol,
                                               std::size_t samples, double dt = 0.0) {
    protocol.validate();
    if (samples == 0) throw ContractError("simulate_trace: need at least one interval");
    if (dt <= 0.0) dt = default_time_step(model, stim);
    const auto sz = spin_operators<kSpinOne>().z;
    std::vector<TraceSample> trace;
    auto psi = StateVector3::basis(basis_index(protocol.prep));
    auto record = [&](double t) {
        TraceSample s;
        s.t = t;
        for (std::size_t i = 0; i < 3; ++i) s.populations[i] = psi.population(i);
        s.sz = expectation(sz, psi);
        trace.push_back(s);
    };
    record(0.0);
    const double step = protocol.duration / static_cast<double>(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double a = step * static_cast<double>(k);
        psi = evolve(model, stim, protocol, a, a + step, dt, psi);
        record(a + step);
    }
    return trace;
}

/// Transition frequencies from the static (B1 = 0, no stimulus) spectrum.
struct StaticTransitions {
    double lower = 0.0;       ///< |E(-1) - E(0)|, rad/s
    double upper = 0.0;       ///< |E(+1) - E(0)|, rad/s
    double separation = 0.0;  ///< | upper - lower |
};

inline StaticTransitions static_transitions(const NvModel &m) {
    NvModel s = m;
    s.drive_field = 0.0;
    const auto h = hamiltonian_at(s, Stimulus{}, false, 0.0, 0.0);
    const double e_plus = h(0, 0).real();
    const double e_zero = h(1, 1).real();
    const double e_minus = h(2, 2).real();
    StaticTransitions t;
    t.lower = std::abs(e_minus - e_zero);
    t.upper = std::abs(e_plus - e_zero);
    t.separation = std::abs(t.upper - t.lower);
    return t;
}

// JSON documents use SI units in the field names.

inline void to_json(nlohmann::json &j, const NvModel &m) {
    j = nlohmann::json{{"zero_field_splitting_rad_s", m.zero_field_splitting},
                       {"gyromagnetic_rad_s_per_T", m.gyromagnetic},
                       {"bias_field_T", m.bias_field},
                       {"drive_field_T", m.drive_field},
                       {"carrier_rad_s", m.carrier},
                       {"off_axis_rad", m.off_axis}};
}

inline void from_json(const nlohmann::json &j, NvModel &m) {
    m = NvModel{};
    m.zero_field_splitting = j.value("zero_field_splitting_rad_s", m.zero_field_splitting);
    m.gyromagnetic = j.value("gyromagnetic_rad_s_per_T", m.gyromagnetic);
    m.bias_field = j.value("bias_field_T", 0.0);
    m.drive_field = j.value("drive_field_T", 0.0);
    m.carrier = j.value("carrier_rad_s", 0.0);
    m.off_axis = j.value("off_axis_rad", 0.0);
}

NLOHMANN_JSON_SERIALIZE_ENUM(StimulusKind, {{StimulusKind::constant, "constant"},
                                            {StimulusKind::gaussian, "gaussian"},
                                            {StimulusKind::sinusoid, "sinusoid"}})

NLOHMANN_JSON_SERIALIZE_ENUM(Basis, {{Basis::ms0, "ms0"}, {Basis::ms_minus1, "ms_minus1"}})

inline void to_json(nlohmann::json &j, const Stimulus &s) {
    j = nlohmann::json{{"kind", s.kind},       {"amplitude_T", s.amplitude},       {"center_s", s.center},
                       {"fwhm_s", s.fwhm},     {"frequency_rad_s", s.frequency}, {"phase_rad", s.phase}};
}

inline void from_json(const nlohmann::json &j, Stimulus &s) {
    s = Stimulus{};
    s.kind = j.value("kind", StimulusKind::constant);
    s.amplitude = j.value("amplitude_T", 0.0);
    s.center = j.value("center_s", 0.0);
    s.fwhm = j.value("fwhm_s", 0.0);
    s.frequency = j.value("frequency_rad_s", 0.0);
    s.phase = j.value("phase_rad", 0.0);
}

inline void to_json(nlohmann::json &j, const PulseWindow &w) {
    j = nlohmann::json{{"start_s", w.start}, {"stop_s", w.stop}, {"carrier_phase_rad", w.carrier_phase}};
}

inline void from_json(const nlohmann::json &j, PulseWindow &w) {
    w.start = j.at("start_s").get<double>();
    w.stop = j.at("stop_s").get<double>();
    w.carrier_phase = j.value("carrier_phase_rad", 0.0);
}

inline void to_json(nlohmann::json &j, const Protocol &p) {
    j = nlohmann::json{
        {"windows", p.windows}, {"prep", p.prep}, {"readout", p.readout}, {"duration_s", p.duration}};
}

inline void from_json(const nlohmann::json &j, Protocol &p) {
    p = Protocol{};
    p.windows = j.value("windows", std::vector<PulseWindow>{});
    p.prep = j.value("prep", Basis::ms0);
    p.readout = j.value("readout", p.prep);
    p.duration = j.at("duration_s").get<double>();
}

}  // namespace qsl::lab
