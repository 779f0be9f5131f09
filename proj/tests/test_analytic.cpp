#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qslsense/analytic.hpp"
#include "qslsense/roots.hpp"
#include "qslsense/sequence.hpp"

using namespace qsl;
using analytic::kPi;

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double propagated_probability(double rabi, double tau, double detuning) {
    return transition_probability(make_bipartite(rabi, tau, 0.5, kPi / 2, detuning));
}

}  // namespace

TEST(ExactProbability, BiasPointAndZeroDuration) {
    const double rabi = kTwoPi * 1e7;
    EXPECT_NEAR(analytic::exact_transition_probability({rabi, kPi / rabi, 0.0}), 0.5, 1e-15);
    EXPECT_NEAR(analytic::exact_transition_probability({rabi, 0.0, 0.3 * rabi}), 0.0, 1e-15);
}

TEST(ExactProbability, MatchesPropagatorProduct) {
    const double rabi = kTwoPi * 10e6;
    const double dw = kTwoPi * 0.1e6;
    const double tau = 50e-9;
    const auto s = spin_operators<kSpinHalf>();
    const auto u1 = matexp_antihermitian(dw * s.z + rabi * s.y, tau / 2);
    const auto u2 = matexp_antihermitian(dw * s.z + rabi * s.x, tau / 2);
    const auto psi = u2 * u1 * StateVector2::basis(0);
    const double oracle_p = 1.0 - psi.population(0);
    EXPECT_NEAR(analytic::exact_transition_probability({rabi, tau, dw}), oracle_p, 1e-12);
}

TEST(ExactProbability, LargeDetuningStillMatches) {
    const double rabi = 1.0;
    for (double dw : {-3.0, -1.0, 0.5, 2.0, 10.0})
        for (double tau : {0.3, 1.7, 4.0})
            EXPECT_NEAR(analytic::exact_transition_probability({rabi, tau, dw}), propagated_probability(rabi, tau, dw),
                        1e-12);
}

TEST(ExactProbability, RejectsOtherTimeshare) {
    analytic::BipartiteParams p{1.0, 1.0, 0.0};
    p.timeshare = 0.3;
    EXPECT_THROW(analytic::exact_transition_probability(p), ContractError);
}

TEST(FirstOrder, Values) {
    EXPECT_DOUBLE_EQ(analytic::first_order_probability(kPi / 2, 0.0), 0.5);
    EXPECT_NEAR(analytic::first_order_probability(1e-9, 0.3), 0.0, 1e-9);
    EXPECT_DOUBLE_EQ(analytic::first_order_probability(0.0, 0.3), 0.0);
    EXPECT_NEAR(analytic::first_order_probability(kPi / 2, 0.1), 0.5 - 0.1 / kPi, 1e-15);
    EXPECT_NEAR(analytic::first_order_probability(kPi / 2, 0.1), 0.46817, 5e-6);
}

TEST(FirstOrder, ExpansionQualityOverFlipAngles) {
    const double ratio = 1e-3;
    for (int i = 1; i <= 50; ++i) {
        const double a = 0.5 * kPi * i / 50.0;
        const double tau = 2.0 * a;
        EXPECT_LE(std::abs(analytic::first_order_probability(a, ratio * tau) -
                           analytic::exact_transition_probability({1.0, tau, ratio})),
                  10 * ratio * ratio)
            << "alpha=" << a;
    }
}

TEST(PhaseScaling, Values) {
    EXPECT_NEAR(analytic::phase_scaling_factor(kPi / 2), -2.0 / kPi, 1e-15);
    EXPECT_NEAR(analytic::phase_scaling_magnitude(kPi / 2), 0.637, 5e-4);
    EXPECT_NEAR(analytic::phase_scaling_factor(kPi), 0.0, 1e-15);
    EXPECT_EQ(analytic::phase_scaling_factor(0.0), 0.0);
    EXPECT_NEAR(analytic::phase_scaling_factor(kPi / 3), -3.0 * std::sqrt(3.0) / (4.0 * kPi), 1e-15);
    EXPECT_THROW(analytic::phase_scaling_factor(3.5), DomainError);
}

TEST(PhaseScaling, MatchesFiniteDifferenceOfExactProbability) {
    const double rabi = 1.0;
    for (int i = 1; i <= 20; ++i) {
        const double a = kPi * i / 20.0;
        const double tau = 2.0 * a / rabi;
        const double h = 1e-6;
        const double fd = (analytic::exact_transition_probability({rabi, tau, h}) -
                           analytic::exact_transition_probability({rabi, tau, -h})) /
                          (2 * h);
        EXPECT_NEAR(std::abs(fd), std::abs(analytic::phase_scaling_factor(a)) * tau / 2, 1e-8 * tau);
    }
}

TEST(EffectivePhase, Extended) {
    const double dw = kTwoPi * 1e6;
    EXPECT_DOUBLE_EQ(analytic::effective_phase_extended(dw, 1e-6, 0.0), dw * 1e-6);
    EXPECT_NEAR(analytic::effective_phase_extended(dw, 1e-6, 0.5e-6), 2.0 / kPi * dw * 1e-6, 1e-15);
    EXPECT_NEAR(analytic::effective_phase_extended(dw, 1e-6, 100e-9), 0.8 + 1.6 * kPi, 1e-12);
    EXPECT_THROW(analytic::effective_phase_extended(dw, 1e-6, 0.6e-6), ContractError);
}

TEST(Sensitivity, SpecialCases) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double rabi = 0.1 + 10 * u(rng), tau = 3 * u(rng), k = u(rng), th = kPi * u(rng);
        EXPECT_EQ(analytic::bipartite_sensitivity(rabi, tau, k, 0.0), 0.0);
        EXPECT_NEAR(analytic::bipartite_sensitivity(rabi, tau, 1.0, th), 0.0, 1e-15 / rabi);
        EXPECT_NEAR(analytic::bipartite_sensitivity(rabi, tau, k, th),
                    analytic::bipartite_sensitivity(rabi, tau, 1.0 - k, th), 1e-12 / rabi);
    }
    const double rabi = 2.0;
    EXPECT_NEAR(analytic::bipartite_sensitivity(rabi, kPi / rabi, 0.5, kPi / 2), -1.0 / rabi, 1e-15);
    EXPECT_NEAR(std::abs(analytic::bipartite_sensitivity(rabi, kPi / rabi, 0.5, kPi / 2)),
                analytic::phase_scaling_magnitude(kPi / 2) * (kPi / rabi) / 2, 1e-15);
}

TEST(Sensitivity, MatchesFiniteDifferenceOfPropagators) {
    const double rabi = 1.3;
    for (double k : {0.1, 0.35, 0.5, 0.8})
        for (double th : {0.4, kPi / 2, 2.5})
            for (double tau : {0.7, 2.0}) {
                const double h = 1e-6;
                const double fd = (transition_probability(make_bipartite(rabi, tau, k, th, h)) -
                                   transition_probability(make_bipartite(rabi, tau, k, th, -h))) /
                                  (2 * h);
                EXPECT_NEAR(fd, analytic::bipartite_sensitivity(rabi, tau, k, th), 1e-8);
            }
}

TEST(Kernel, Values) {
    const double rabi = kPi, tau = 1.0;
    EXPECT_EQ(analytic::kernel_value(0.5, rabi, tau), 0.0);
    EXPECT_EQ(analytic::kernel_value(-0.7, rabi, tau), 0.0);
    EXPECT_NEAR(analytic::kernel_value(0.0, rabi, tau), 1.0, 1e-15);
    EXPECT_NEAR(analytic::kernel_value(0.25, rabi, tau), std::sqrt(2.0) / 2, 1e-15);
}

TEST(Transfer, ValuesAndRoot) {
    const double rabi = 2.0, tau = kPi / rabi;
    EXPECT_NEAR(analytic::transfer_value(0.0, rabi, tau), std::sqrt(2.0 / kPi) / rabi, 1e-15);
    for (double a : {0.3, kPi / 4, 1.2, kPi / 2}) {
        const double t = 2 * a / rabi;
        EXPECT_NEAR(analytic::transfer_value(analytic::bandwidth_first_root(rabi, a), rabi, t), 0.0, 1e-12);
    }
    EXPECT_THROW(analytic::transfer_value(-1.0, rabi, tau), ContractError);
}

TEST(Transfer, MatchesNumericalFourierTransform) {
    const double rabi = 1.0;
    for (double a : {0.4, kPi / 4, kPi / 2}) {
        const double tau = 2 * a / rabi;
        const auto k = [&](double t) { return analytic::kernel_value(t, rabi, tau); };
        for (double w : {0.0, 0.5, 1.0, 1.7, 3.0, 6.5}) {
            EXPECT_NEAR(analytic::transfer_value(w, rabi, tau), oracle::fourier_magnitude(k, w, -tau / 2, tau / 2), 1e-10) << "a=" << a << " w=" << w;
        }
    }
}

TEST(Transfer, LimitAtRabiFrequency) {
    const double rabi = 3.0;
    for (double a : {0.5, 1.0, kPi / 2}) {
        const double tau = 2 * a / rabi;
        const double at = analytic::transfer_value(rabi, rabi, tau);
        EXPECT_NEAR(at, std::sqrt(2.0 / kPi) * tau / 4 * std::abs(std::sin(rabi * tau / 2)), 1e-14);
        const double lo = analytic::transfer_value(rabi * (1 - 1e-6), rabi, tau);
        const double hi = analytic::transfer_value(rabi * (1 + 1e-6), rabi, tau);
        EXPECT_NEAR(lo / at, 1.0, 1e-6);
        EXPECT_NEAR(hi / at, 1.0, 1e-6);
        const auto k = [&](double t) { return analytic::kernel_value(t, rabi, tau); };
        EXPECT_NEAR(at, oracle::fourier_magnitude(k, rabi, -tau / 2, tau / 2), 1e-9);
    }
}

TEST(Metrics, Fwhm) {
    EXPECT_NEAR(analytic::time_resolution_fwhm(1.0, kPi / 2), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(analytic::time_resolution_fwhm(1.0, 1e-7), 0.5, 1e-7);
    EXPECT_THROW(analytic::time_resolution_fwhm(1.0, 2.0), DomainError);
    for (double a : {kPi / 8, kPi / 4, 1.1, kPi / 2}) {
        const double rabi = 2 * a;
        const double dense = oracle::dense_fwhm([&](double t) { return analytic::kernel_value(t, rabi, 1.0); }, -0.6, 0.6);
        EXPECT_NEAR(analytic::time_resolution_fwhm(1.0, a), dense, 2e-5) << "a=" << a;
    }
    // The closed form at 45 degrees evaluates to 0.53989 tau.
    EXPECT_NEAR(analytic::time_resolution_fwhm(1.0, kPi / 4), 0.53989, 1e-5);
}

TEST(Metrics, RiseTimesAgreeWithStepResponseOracle) {
    for (double a : {kPi / 8, kPi / 4, 1.1, kPi / 2}) {
        const double tau = 1.0, rabi = 2 * a / tau;
        const int n = 400000;
        std::vector<double> t(n + 1), c(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) t[i] = -tau / 2 + tau * i / n;
        for (int i = 1; i <= n; ++i)
            c[i] = c[i - 1] + 0.5 * (analytic::kernel_value(t[i], rabi, tau) + analytic::kernel_value(t[i - 1], rabi, tau)) *
                                  (t[i] - t[i - 1]);
        auto when = [&](double f) {
            const double target = f * c[n];
            for (int i = 1; i <= n; ++i)
                if (c[i] >= target) return t[i - 1] + (target - c[i - 1]) / (c[i] - c[i - 1]) * (t[i] - t[i - 1]);
            return t[n];
        };
        EXPECT_NEAR(analytic::rise_time(tau, rabi, analytic::RiseBand::r20_80), when(0.8) - when(0.2), 1e-8);
        EXPECT_NEAR(analytic::rise_time(tau, rabi, analytic::RiseBand::r10_90), when(0.9) - when(0.1), 1e-8);
    }
}

TEST(Metrics, EquivalentDuration) {
    EXPECT_NEAR(analytic::equivalent_duration(1.0, kPi / 2), 2.0 / kPi, 1e-15);
    EXPECT_NEAR(analytic::equivalent_duration(1.0, 1e-6), 0.5, 1e-9);
    EXPECT_THROW(analytic::equivalent_duration(1.0, kPi), DomainError);
    const double a = kPi / 3, rabi = 2 * a;
    const double area = oracle::simpson([&](double t) { return analytic::kernel_value(t, rabi, 1.0); }, -0.5, 0.5);
    EXPECT_NEAR(analytic::equivalent_duration(1.0, a), area / analytic::kernel_value(0.0, rabi, 1.0), 1e-10);
    EXPECT_NEAR(analytic::equivalent_duration(1.0, a), 0.5513, 1e-4);
}

TEST(Metrics, Bandwidths) {
    EXPECT_NEAR(analytic::bandwidth_first_root(1.0, kPi / 2), 3.0, 1e-15);
    EXPECT_NEAR(analytic::bandwidth_first_root(1.0, kPi / 4), 7.0, 1e-14);
    EXPECT_NEAR(analytic::bandwidth_3db(1.0, kPi / 2), 1.19, 1e-2);

    // First zero of K located by bisection on a scan.
    const double a = kPi / 4, rabi = 1.0, tau = 2 * a;
    auto k = [&](double w) { return analytic::transfer_value(w, rabi, tau); };
    double prev = k(rabi * 1.01), root = 0;
    for (int i = 1; i <= 100000; ++i) {
        const double w = rabi * (1.01 + 10.0 * i / 100000);
        const double v = k(w);
        if (v < 1e-3 && v < prev && k(w + 1e-4) > v) {
            root = w;
            break;
        }
        prev = v;
    }
    EXPECT_NEAR(root, analytic::bandwidth_first_root(rabi, a), 2e-4);

    for (double alpha : {kPi / 8, kPi / 4, 1.2, kPi / 2}) {
        const double t = 2 * alpha;
        const double w3 = analytic::bandwidth_3db(1.0, alpha);
        const double k0 = analytic::transfer_value(0.0, 1.0, t);
        EXPECT_NEAR(analytic::transfer_value(w3, 1.0, t) / (k0 / std::sqrt(2.0)), 1.0, 1e-6);
        // Dense scan: the first crossing below K(0)/sqrt2 matches the root.
        double crossing = 0;
        for (int i = 1; i <= 100000; ++i) {
            const double w = 10.0 * i / 100000;
            if (analytic::transfer_value(w, 1.0, t) < k0 / std::sqrt(2.0)) {
                crossing = w;
                break;
            }
        }
        EXPECT_NEAR(w3, crossing, 1e-4) << "alpha=" << alpha;
    }
}

TEST(MetricsReport, FieldsAndInvariants) {
    const double rabi = kPi, tau = 1.0;
    const auto m = analytic::metrics_report(rabi, tau);
    for (double v : {m.t_fwhm, m.t_20_80, m.t_10_90, m.t_square}) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, tau);
    }
    EXPECT_LE(std::abs(*m.epsilon), 1.0);
    EXPECT_DOUBLE_EQ(*m.p0, 0.5);
    EXPECT_NEAR(*m.bw_first_root, 3 * rabi, 1e-12);
}

TEST(Qsl, PiRotationAndStationaryState) {
    const double rabi = kTwoPi * 1e7;
    const auto s = spin_operators<kSpinHalf>();
    const auto t = analytic::qsl_times<2>({rabi * s.y, StateVector2::basis(0), -rabi / 2});
    EXPECT_DOUBLE_EQ(t.mandelstam_tamm, kPi / rabi);
    EXPECT_NEAR(t.margolus_levitin, kPi / rabi, 1e-15 / rabi);
    const auto still = analytic::qsl_times<2>({rabi * s.z, StateVector2::basis(0), -rabi / 2});
    EXPECT_TRUE(std::isinf(still.mandelstam_tamm));
    const auto ground = analytic::qsl_times<2>({rabi * s.z, StateVector2::basis(1), -rabi / 2});
    EXPECT_TRUE(std::isinf(ground.margolus_levitin));
}

TEST(Qsl, TwoLevelCoincidence) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ph(0, 2 * kPi);
    for (int i = 0; i < 100; ++i) {
        const auto h = oracle::random_hermitian<2>(rng, 3.0);
        const auto e = hermitian_eigen(h);
        StateVector2 psi;
        const Complex w = std::polar(1.0, ph(rng));
        for (std::size_t r = 0; r < 2; ++r) psi[r] = (e.vectors(r, 0) + w * e.vectors(r, 1)) / std::sqrt(2.0);
        const auto t = analytic::qsl_times<2>({h, psi, e.values[0]});
        EXPECT_NEAR(t.mandelstam_tamm / t.margolus_levitin, 1.0, 1e-12);
        // Both equal pi / (E1 - E0), the actual orthogonalization time.
        EXPECT_NEAR(t.mandelstam_tamm * (e.values[1] - e.values[0]) / kPi, 1.0, 1e-12);
    }
}
