#pragma once

// Piecewise-constant control sequences in the rotating frame of a spin-1/2
// and their exact propagation. Each segment evolves under
//
//   H = detuning * Sz + rabi * (Sy cos(phase) + Sx sin(phase))
//
// so phase 0 rotates about +Y and phase +pi/2 about +X. This axis choice is
// the one convention for the whole library; the lab-frame model maps its
// carrier phases onto it.

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qslsense/policy.hpp"
#include "qslsense/spinlin.hpp"

namespace qsl {

struct PulseSegment {
    double duration = 0.0;  ///< s
    double rabi = 0.0;      ///< rad/s
    double phase = 0.0;     ///< rad
    double detuning = 0.0;  ///< rad/s

    friend bool operator==(const PulseSegment &, const PulseSegment &) = default;
};

struct ControlSequence {
    std::vector<PulseSegment> segments;
    std::string label;

    double total_duration() const {
        double t = 0.0;
        for (const auto &s : segments) t += s.duration;
        return t;
    }

    /// Throws ContractError unless the sequence is non-empty, has positive
    /// total duration, and every segment has duration >= 0 and rabi >= 0.
    void validate() const {
        if (segments.empty()) throw ContractError("ControlSequence: no segments");
        for (const auto &s : segments) {
            if (!(s.duration >= 0.0)) throw ContractError("ControlSequence: negative segment duration");
            if (!(s.rabi >= 0.0)) throw ContractError("ControlSequence: negative Rabi frequency");
        }
        if (!(total_duration() > 0.0)) throw ContractError("ControlSequence: total duration must be > 0");
    }

    friend bool operator==(const ControlSequence &, const ControlSequence &) = default;
};

/// Rotating-frame Hamiltonian of one segment.
inline SpinMatrix2 segment_hamiltonian(const PulseSegment &seg) {
    static const auto s = spin_operators<kSpinHalf>();
    return seg.detuning * s.z + seg.rabi * (std::cos(seg.phase) * s.y + std::sin(seg.phase) * s.x);
}

inline SpinMatrix2 segment_propagator(const PulseSegment &seg) {
    return matexp_antihermitian(segment_hamiltonian(seg), seg.duration);
}

/// Two segments: k tau at phase 0, then (1 - k) tau at phase `phase_jump`.
/// Degenerate splits (k = 0 or 1) collapse to a single segment.
inline ControlSequence make_bipartite(double rabi, double tau, double timeshare = 0.5,
                                      double phase_jump = std::numbers::pi / 2, double detuning = 0.0) {
    if (!(timeshare >= 0.0 && timeshare <= 1.0))
        throw ContractError("make_bipartite: timeshare k must lie in [0, 1]");
    ControlSequence seq;
    seq.label = "bipartite";
    if (timeshare > 0.0) seq.segments.push_back({timeshare * tau, rabi, 0.0, detuning});
    if (timeshare < 1.0) seq.segments.push_back({(1.0 - timeshare) * tau, rabi, phase_jump, detuning});
    return seq;
}

/// Rotation of duration t_R, free evolution tau - 2 t_R, second rotation at +pi/2.
inline ControlSequence make_ramsey_with_delay(double rabi, double rotation_time, double tau, double detuning) {
    if (rotation_time < 0.0 || tau < 2.0 * rotation_time * (1.0 - 1e-12))
        throw ContractError("make_ramsey_with_delay: requires tau >= 2 t_R >= 0");
    ControlSequence seq;
    seq.label = "ramsey";
    seq.segments.push_back({rotation_time, rabi, 0.0, detuning});
    seq.segments.push_back({std::max(0.0, tau - 2.0 * rotation_time), 0.0, 0.0, detuning});
    seq.segments.push_back({rotation_time, rabi, std::numbers::pi / 2, detuning});
    return seq;
}

/// Time-ordered product of segment propagators (last segment leftmost).
inline SpinMatrix2 sequence_propagator(const ControlSequence &seq) {
    SpinMatrix2 u = SpinMatrix2::identity();
    for (const auto &seg : seq.segments) u = segment_propagator(seg) * u;
    return u;
}

inline StateVector2 propagate(const ControlSequence &seq, const StateVector2 &initial) {
    StateVector2 psi = initial;
    for (const auto &seg : seq.segments) psi = segment_propagator(seg) * psi;
    return psi;
}

/// p = 1 - |<0|U|0>|^2 starting from spin up.
inline double transition_probability(const ControlSequence &seq) {
    const auto up = StateVector2::basis(0);
    return 1.0 - overlap_probability(up, propagate(seq, up));
}

// JSON document: {"label": ..., "segments": [{"duration_s", "rabi_rad_s", "phase_rad", "detuning_rad_s"}]}

inline void to_json(nlohmann::json &j, const PulseSegment &s) {
    j = nlohmann::json{{"duration_s", s.duration},
                       {"rabi_rad_s", s.rabi},
                       {"phase_rad", s.phase},
                       {"detuning_rad_s", s.detuning}};
}

inline void from_json(const nlohmann::json &j, PulseSegment &s) {
    auto field = [&](const char *key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw ConfigError(std::string("pulse segment: missing numeric field '") + key + "'");
        return j.at(key).get<double>();
    };
    s.duration = field("duration_s");
    s.rabi = field("rabi_rad_s");
    s.phase = j.contains("phase_rad") ? field("phase_rad") : 0.0;
    s.detuning = j.contains("detuning_rad_s") ? field("detuning_rad_s") : 0.0;
}

inline void to_json(nlohmann::json &j, const ControlSequence &seq) {
    j = nlohmann::json{{"label", seq.label}, {"segments", seq.segments}};
}

inline void from_json(const nlohmann::json &j, ControlSequence &seq) {
    if (!j.contains("segments") || !j.at("segments").is_array())
        throw ConfigError("control sequence: missing 'segments' array");
    seq.label = j.value("label", std::string{});
    seq.segments = j.at("segments").get<std::vector<PulseSegment>>();
}

inline std::string serialize_sequence(const ControlSequence &seq) { return nlohmann::json(seq).dump(2); }

inline ControlSequence parse_sequence(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("control sequence: ") + e.what());
    }
    auto seq = j.get<ControlSequence>();
    try {
        seq.validate();
    } catch (const ContractError &e) {
        throw ConfigError(e.what());
    }
    return seq;
}

}  // namespace qsl
