#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qslsense/spinlin.hpp"

using namespace qsl;

namespace {

template <std::size_t N>
double max_diff(const SpinMatrix<N> &a, const SpinMatrix<N> &b) {
    return (a - b).max_abs();
}

template <std::size_t N>
void expect_spin_algebra(double s) {
    const auto ops = spin_operators<N>();
    const Complex i(0.0, 1.0);
    EXPECT_LE(max_diff(commutator(ops.x, ops.y), i * ops.z), 1e-12);
    EXPECT_LE(max_diff(commutator(ops.y, ops.z), i * ops.x), 1e-12);
    EXPECT_LE(max_diff(commutator(ops.z, ops.x), i * ops.y), 1e-12);
    const auto casimir = ops.x * ops.x + ops.y * ops.y + ops.z * ops.z;
    EXPECT_LE(max_diff(casimir, s * (s + 1) * SpinMatrix<N>::identity()), 1e-12);
    EXPECT_TRUE(is_hermitian(ops.x));
    EXPECT_TRUE(is_hermitian(ops.y));
    EXPECT_TRUE(is_hermitian(ops.z));
}

}  // namespace

TEST(SpinOperators, SpinHalfAlgebraAndSz) {
    expect_spin_algebra<kSpinHalf>(0.5);
    const auto s = spin_operators<kSpinHalf>();
    EXPECT_EQ(s.z(0, 0), Complex(0.5));
    EXPECT_EQ(s.z(1, 1), Complex(-0.5));
}

TEST(SpinOperators, SpinOneAlgebraAndSz) {
    expect_spin_algebra<kSpinOne>(1.0);
    const auto s = spin_operators<kSpinOne>();
    EXPECT_EQ(s.z(0, 0), Complex(1.0));
    EXPECT_EQ(s.z(1, 1), Complex(0.0));
    EXPECT_EQ(s.z(2, 2), Complex(-1.0));
}

TEST(MatExp, ZeroTimeIsIdentity) {
    std::mt19937_64 rng(1);
    const auto h = oracle::random_hermitian<3>(rng);
    EXPECT_LE(max_diff(matexp_antihermitian(h, 0.0), SpinMatrix3::identity()), 1e-15);
    const auto h2 = oracle::random_hermitian<2>(rng);
    EXPECT_LE(max_diff(matexp_antihermitian(h2, 0.0), SpinMatrix2::identity()), 1e-15);
}

TEST(MatExp, PiRotationAboutYFlipsSpin) {
    const double rabi = 2.0 * std::numbers::pi * 1e7;
    const auto u = matexp_antihermitian(rabi * spin_operators<kSpinHalf>().y, std::numbers::pi / rabi);
    const auto out = u * StateVector2::basis(0);
    EXPECT_NEAR(out.population(1), 1.0, 1e-14);
}

TEST(MatExp, MatchesTaylorOracleForRandomHermitian) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto h3 = oracle::random_hermitian<3>(rng);
        EXPECT_LE(max_diff(matexp_antihermitian(h3, 1.0), oracle::taylor_exp(h3, 1.0)), 1e-9);
        const auto h2 = oracle::random_hermitian<2>(rng);
        EXPECT_LE(max_diff(matexp_antihermitian(h2, 1.0), oracle::taylor_exp(h2, 1.0)), 1e-9);
    }
}

TEST(MatExp, UnitarityNormAndComposition) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto h = oracle::random_hermitian<3>(rng, 5.0);
        const double t1 = ut(rng), t2 = ut(rng);
        const auto u1 = matexp_antihermitian(h, t1);
        const auto u2 = matexp_antihermitian(h, t2);
        EXPECT_LE(unitarity_defect(u1), 1e-10);
        EXPECT_LE(max_diff(u1 * u2, matexp_antihermitian(h, t1 + t2)), 1e-9);
        StateVector3 psi;
        for (std::size_t i = 0; i < 3; ++i) psi[i] = Complex(ut(rng), ut(rng));
        psi = psi.normalized();
        EXPECT_NEAR((u1 * psi).norm(), 1.0, 1e-10);

        const auto g = oracle::random_hermitian<2>(rng, 5.0);
        EXPECT_LE(unitarity_defect(matexp_antihermitian(g, t1)), 1e-10);
        EXPECT_LE(max_diff(matexp_antihermitian(g, t1) * matexp_antihermitian(g, t2), matexp_antihermitian(g, t1 + t2)),
                  1e-9);
    }
}

TEST(MatExp, RejectsNonHermitian) {
    SpinMatrix2 m;
    m(0, 1) = Complex(1.0, 0.0);
    EXPECT_THROW(matexp_antihermitian(m, 1.0), ContractError);
    SpinMatrix3 m3;
    m3(2, 0) = Complex(0.0, 1.0);
    EXPECT_THROW(matexp_antihermitian(m3, 1.0), ContractError);
}

TEST(HermitianEigen, ReconstructsMatrix) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto h = oracle::random_hermitian<3>(rng);
        const auto e = hermitian_eigen(h);
        EXPECT_LE(e.values[0], e.values[1]);
        EXPECT_LE(e.values[1], e.values[2]);
        const auto rebuilt = e.vectors * SpinMatrix3::diagonal(e.values) * e.vectors.adjoint();
        EXPECT_LE(max_diff(rebuilt, h), 1e-12);
    }
}

TEST(Expectation, BasisStates) {
    const auto s = spin_operators<kSpinHalf>();
    EXPECT_DOUBLE_EQ(expectation(s.z, StateVector2::basis(0)), 0.5);
    EXPECT_NEAR(expectation(s.y, StateVector2::basis(0)), 0.0, 1e-15);
    const auto s1 = spin_operators<kSpinOne>();
    StateVector3 psi;
    psi[0] = psi[2] = Complex(1.0 / std::sqrt(2.0));
    EXPECT_NEAR(expectation(s1.z * s1.z, psi), 1.0, 1e-15);
}

TEST(Overlap, Probabilities) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    StateVector2 psi;
    psi[0] = Complex(n01(rng), n01(rng));
    psi[1] = Complex(n01(rng), n01(rng));
    psi = psi.normalized();
    EXPECT_NEAR(overlap_probability(psi, psi), 1.0, 1e-15);
    EXPECT_EQ(overlap_probability(StateVector2::basis(0), StateVector2::basis(1)), 0.0);
    StateVector2 plus;
    plus[0] = plus[1] = Complex(1.0 / std::sqrt(2.0));
    EXPECT_NEAR(overlap_probability(StateVector2::basis(0), plus), 0.5, 1e-15);
}

TEST(Overlap, RejectsUnnormalized) {
    StateVector2 v;
    v[0] = Complex(2.0);
    EXPECT_THROW(overlap_probability(v, StateVector2::basis(0)), ContractError);
}
