#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qslsense/labframe.hpp"
#include "qslsense/response.hpp"

using namespace qsl;
using namespace qsl::lab;
using std::numbers::pi;

namespace {

constexpr double kMHz = 2 * pi * 1e6;

Protocol single_window(double length, double total, Basis basis = Basis::ms0) {
    Protocol p;
    p.windows.push_back({0.0, length, 0.0});
    p.prep = p.readout = basis;
    p.duration = total;
    return p;
}

}  // namespace

TEST(Hamiltonian, AxialFieldIsDiagonal) {
    NvModel m;
    m.bias_field = 0.3;
    const auto stim = Stimulus::constant_field(1e-3);
    const auto h = hamiltonian_at(m, stim, false, 0.0, 0.0);
    const double axial = kGyromagnetic * (0.3 + 1e-3);
    EXPECT_NEAR(h(0, 0).real(), kZeroFieldSplitting + axial, 1e-6);
    EXPECT_NEAR(h(1, 1).real(), 0.0, 1e-6);
    EXPECT_NEAR(h(2, 2).real(), kZeroFieldSplitting - axial, 1e-6);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            if (r != c) {
                EXPECT_EQ(h(r, c), Complex(0.0));
            }
}

TEST(Hamiltonian, PerpendicularStimulusIsTransverse) {
    NvModel m;
    m.bias_field = 0.3;
    m.off_axis = pi / 2;
    const double b = 2e-3;
    const auto h = hamiltonian_at(m, Stimulus::constant_field(b), false, 0.0, 0.0);
    // Expected: D Sz^2 + g B0 Sz + g b Sx, built from the spin-1 operators directly.
    const auto s = spin_operators<kSpinOne>();
    const auto expected = kZeroFieldSplitting * (s.z * s.z) + kGyromagnetic * 0.3 * s.z + kGyromagnetic * b * s.x;
    EXPECT_LE((h - expected).max_abs(), 1e-6 * expected.max_abs());
    EXPECT_TRUE(is_hermitian(h));
}

TEST(Hamiltonian, DriveTermFollowsCarrier) {
    auto m = make_resonant_model(1.0, 10 * kMHz);
    const double t = 3.7e-10;
    const auto h = hamiltonian_at(m, Stimulus{}, true, 0.4, t);
    const double expected = kGyromagnetic * m.drive_field * std::cos(m.carrier * t + 0.4) / std::sqrt(2.0);
    EXPECT_NEAR(h(0, 1).real(), expected, 1e-9 * std::abs(kGyromagnetic * m.drive_field));
    EXPECT_NEAR(h(1, 2).real(), expected, 1e-9 * std::abs(kGyromagnetic * m.drive_field));
}

TEST(Model, RabiBookkeepingAndTransitions) {
    const auto m = make_resonant_model(1.0, 10 * kMHz);
    EXPECT_NEAR(rabi_frequency(m), 10 * kMHz, 1e-6);
    EXPECT_NEAR(m.carrier, std::abs(kZeroFieldSplitting - kGyromagnetic), 1.0);
    EXPECT_EQ(transition_sign(m), -1.0);
    NvModel low;
    low.bias_field = 0.01;
    EXPECT_EQ(transition_sign(low), 1.0);
    NvModel degenerate;
    degenerate.bias_field = kZeroFieldSplitting / kGyromagnetic;
    EXPECT_THROW(transition_sign(degenerate), ContractError);
}

TEST(Model, StaticSplittingSaturatesAtTwoD) {
    // Below the crossing the 0 <-> +1 and 0 <-> -1 lines are 2 g B0 apart; above it, 2 D.
    for (double b0 : {0.001, 0.01, 0.05}) {
        NvModel m;
        m.bias_field = b0;
        EXPECT_NEAR(static_transitions(m).separation, 2 * kGyromagnetic * b0, 1e-6 * kZeroFieldSplitting);
    }
    for (double b0 : {0.2, 1.0, 40.0}) {
        NvModel m;
        m.bias_field = b0;
        EXPECT_NEAR(static_transitions(m).separation, 2 * kZeroFieldSplitting, 1e-6 * kZeroFieldSplitting);
    }
}

TEST(Evolve, ConstantHamiltonianMatchesSingleExponential) {
    NvModel m;
    m.bias_field = 0.05;
    m.off_axis = 0.6;
    const auto stim = Stimulus::constant_field(0.01);
    Protocol p;
    p.duration = 2e-9;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    StateVector3 psi;
    for (std::size_t i = 0; i < 3; ++i) psi[i] = Complex(n01(rng), n01(rng));
    psi = psi.normalized();
    const double dt = default_time_step(m, stim);
    const auto stepped = evolve(m, stim, p, 0.0, p.duration, dt, psi, {.merge_static_intervals = false});
    const auto merged = evolve(m, stim, p, 0.0, p.duration, dt, psi);
    const auto reference = oracle::taylor_exp(hamiltonian_at(m, stim, false, 0.0, 0.0), p.duration) * psi;
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LE(std::abs(stepped[i] - reference[i]), 1e-9);
        EXPECT_LE(std::abs(merged[i] - reference[i]), 1e-10);
    }
}

TEST(Evolve, PiPulseTransfersPopulation) {
    const double rabi = 10 * kMHz;
    const auto m = make_resonant_model(1.0, rabi);
    const auto out = run_protocol(m, Stimulus{}, single_window(pi / rabi, pi / rabi));
    EXPECT_GT(out.probability, 0.999);
    EXPECT_LT(out.norm_drift, 1e-9);
    EXPECT_TRUE(out.warnings.empty());
}

TEST(Evolve, RabiPeriodFromTrace) {
    const double rabi = 10 * kMHz;
    const auto m = make_resonant_model(1.0, rabi);
    const double period = 2 * pi / rabi;
    const auto trace = simulate_trace(m, Stimulus{}, single_window(1.5 * period, 1.5 * period), 600);
    // Population of m = 0 reaches its first minimum after half a period.
    std::size_t best = 0;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (trace[i].t < period && trace[i].populations[1] < trace[best].populations[1]) best = i;
    EXPECT_NEAR(2 * trace[best].t, period, 0.01 * period);
    std::size_t back = best;
    for (std::size_t i = best; i < trace.size(); ++i)
        if (trace[i].populations[1] > trace[back].populations[1]) back = i;
    EXPECT_NEAR(trace[back].t, period, 0.01 * period);
}

TEST(Evolve, TimeStepHalvingConverges) {
    const double rabi = 10 * kMHz;
    const auto m = make_resonant_model(1.0, rabi);
    const double tau = 0.8 * pi / rabi;
    const auto protocol = make_bipartite_protocol(m, tau);
    const auto stim = Stimulus::sinusoid(0.02 * rabi / kGyromagnetic, 0.7 * rabi, 0.3);
    const double dt = default_time_step(m, stim);
    const double p1 = run_protocol(m, stim, protocol, {.dt = dt}).probability;
    const double p2 = run_protocol(m, stim, protocol, {.dt = dt / 2}).probability;
    const double p4 = run_protocol(m, stim, protocol, {.dt = dt / 4}).probability;
    const double e1 = std::abs(p1 - p2), e2 = std::abs(p2 - p4);
    // Midpoint stepping is second order: halving dt cuts the change by about four.
    EXPECT_LT(e2, 0.5 * e1 + 1e-12);
    EXPECT_LT(e1, 1e-3);
}

TEST(Evolve, RejectsCoarseTimeStepNamingScale) {
    const auto m = make_resonant_model(1.0, 10 * kMHz);
    const auto protocol = make_bipartite_protocol(m, 50e-9);
    try {
        run_protocol(m, Stimulus{}, protocol, {.dt = 1e-10});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("Larmor"), std::string::npos) << e.what();
    }
    const auto fast = Stimulus::sinusoid(1e-6, 2 * pi * 1e12, 0.0);
    try {
        run_protocol(m, fast, protocol, {.dt = default_time_step(m, Stimulus{})});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("stimulus frequency"), std::string::npos) << e.what();
    }
}

TEST(Evolve, DetunedCarrierWarns) {
    auto m = make_resonant_model(1.0, 10 * kMHz);
    m.carrier *= 1.001;
    const auto out = run_protocol(m, Stimulus{}, single_window(10e-9, 10e-9));
    ASSERT_EQ(out.warnings.size(), 1u);
    EXPECT_NE(out.warnings[0].find("detuned"), std::string::npos);
}

TEST(Protocol, WindowsFollowSequence) {
    const auto m = make_resonant_model(1.0, 10 * kMHz);
    const auto p = make_bipartite_protocol(m, 40e-9, Basis::ms_minus1);
    ASSERT_EQ(p.windows.size(), 2u);
    EXPECT_DOUBLE_EQ(p.windows[0].stop, 20e-9);
    EXPECT_DOUBLE_EQ(p.windows[1].start, 20e-9);
    EXPECT_DOUBLE_EQ(p.duration, 40e-9);
    EXPECT_DOUBLE_EQ(p.windows[1].carrier_phase, -pi / 2);
    EXPECT_EQ(p.prep, Basis::ms_minus1);
    EXPECT_THROW(protocol_from_sequence(m, make_bipartite(20 * kMHz, 40e-9), Basis::ms0), ContractError);
    Protocol bad = p;
    std::swap(bad.windows[0], bad.windows[1]);
    EXPECT_THROW(bad.validate(), ContractError);
}

TEST(RotatingWave, LabFrameMatchesTwoLevelModel) {
    struct Case {
        double b0, rabi;
    };
    for (const Case c : {Case{1.0, 10 * kMHz}, Case{1.0, 1 * kMHz}, Case{kScaledBiasField, 10 * kMHz}}) {
        const auto m = make_resonant_model(c.b0, c.rabi);
        for (double alpha : {pi / 4, pi / 2}) {
            const double tau = 2 * alpha / c.rabi;
            const auto lab_runner = response::lab_frame_runner(m, tau);
            const auto rot_runner = response::rotating_frame_runner(c.rabi, tau);
            for (double d : {0.0, 0.05, -0.05}) {
                const auto stim = Stimulus::constant_field(d * c.rabi / kGyromagnetic);
                EXPECT_NEAR(lab_runner.probability(stim), rot_runner.probability(stim), 1e-3)
                    << "B0=" << c.b0 << " alpha=" << alpha << " d=" << d;
            }
        }
    }
}

TEST(RotatingWave, BreaksDownNearLevelCrossing) {
    // At 0.1 T the 0 <-> -1 line sits at only ~66 MHz (the crossing is at 0.1024 T),
    // so counter-rotating terms are visible even for a 1 MHz drive.
    const double rabi = 1 * kMHz;
    const auto m = make_resonant_model(0.1, rabi);
    EXPECT_LT(transition_frequency(m), 70 * kMHz);
    const double tau = pi / rabi;
    const double lab_p = response::lab_frame_runner(m, tau).probability(Stimulus{});
    EXPECT_GT(std::abs(lab_p - 0.5), 1e-3);
    EXPECT_LT(std::abs(lab_p - 0.5), 1e-2);
}

TEST(RotatingWave, ResponseReversesWithStimulusSign) {
    const double rabi = 10 * kMHz;
    const auto m = make_resonant_model(1.0, rabi);
    const auto runner = response::lab_frame_runner(m, pi / rabi);
    const double p0 = runner.probability(Stimulus{});
    const double b = 1e-3 * rabi / kGyromagnetic;
    const double up = runner.probability(Stimulus::constant_field(b)) - p0;
    const double down = runner.probability(Stimulus::constant_field(-b)) - p0;
    EXPECT_LT(up * down, 0.0);
    EXPECT_NEAR(up / -down, 1.0, 0.05);
}

TEST(Json, ModelAndProtocolRoundTrip) {
    const auto m = make_resonant_model(0.5, 3 * kMHz, 0.2);
    EXPECT_EQ(nlohmann::json(m).get<NvModel>(), m);
    const auto p = make_bipartite_protocol(m, 1e-7, Basis::ms_minus1);
    const auto back = nlohmann::json(p).get<Protocol>();
    ASSERT_EQ(back.windows.size(), p.windows.size());
    EXPECT_EQ(back.windows[1].carrier_phase, p.windows[1].carrier_phase);
    EXPECT_EQ(back.readout, Basis::ms_minus1);
    EXPECT_EQ(back.duration, p.duration);
}
