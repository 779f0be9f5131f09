#pragma once

// Small dense complex linear algebra for spin-1/2 (2x2) and spin-1 (3x3)
// operators: spin matrices, Hermitian eigendecomposition, unitary
// propagators, expectation values and state overlaps.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>

#include "qslsense/policy.hpp"

namespace qsl {

using Complex = std::complex<double>;

inline constexpr std::size_t kSpinHalf = 2;
inline constexpr std::size_t kSpinOne = 3;

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

/// Dense N x N complex matrix, row-major.
template <std::size_t N>
struct SpinMatrix {
    static_assert(N == kSpinHalf || N == kSpinOne, "only 2x2 and 3x3 spin matrices are supported");
    static constexpr std::size_t dim = N;

    std::array<Complex, N * N> entries{};

    Complex &operator()(std::size_t r, std::size_t c) { return entries[r * N + c]; }
    const Complex &operator()(std::size_t r, std::size_t c) const { return entries[r * N + c]; }

    static SpinMatrix identity() {
        SpinMatrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    static SpinMatrix diagonal(const std::array<double, N> &d) {
        SpinMatrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
        return m;
    }

    SpinMatrix adjoint() const {
        SpinMatrix m;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) m(r, c) = std::conj((*this)(c, r));
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto &e : entries) m = std::max(m, std::abs(e));
        return m;
    }

    SpinMatrix &operator+=(const SpinMatrix &o) {
        for (std::size_t i = 0; i < N * N; ++i) entries[i] += o.entries[i];
        return *this;
    }
    SpinMatrix &operator-=(const SpinMatrix &o) {
        for (std::size_t i = 0; i < N * N; ++i) entries[i] -= o.entries[i];
        return *this;
    }
    SpinMatrix &operator*=(Complex s) {
        for (auto &e : entries) e *= s;
        return *this;
    }

    friend SpinMatrix operator+(SpinMatrix a, const SpinMatrix &b) { return a += b; }
    friend SpinMatrix operator-(SpinMatrix a, const SpinMatrix &b) { return a -= b; }
    friend SpinMatrix operator*(SpinMatrix a, Complex s) { return a *= s; }
    friend SpinMatrix operator*(Complex s, SpinMatrix a) { return a *= s; }
    friend SpinMatrix operator*(SpinMatrix a, double s) { return a *= Complex(s, 0.0); }
    friend SpinMatrix operator*(double s, SpinMatrix a) { return a *= Complex(s, 0.0); }

    friend SpinMatrix operator*(const SpinMatrix &a, const SpinMatrix &b) {
        SpinMatrix m;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t k = 0; k < N; ++k) {
                const Complex ark = a(r, k);
                for (std::size_t c = 0; c < N; ++c) m(r, c) += ark * b(k, c);
            }
        return m;
    }

    friend bool operator==(const SpinMatrix &, const SpinMatrix &) = default;
};

using SpinMatrix2 = SpinMatrix<kSpinHalf>;
using SpinMatrix3 = SpinMatrix<kSpinOne>;

/// Ket with N complex amplitudes. Index 0 is the highest-m basis state
/// (spin up for spin-1/2, m = +1 for spin-1).
template <std::size_t N>
struct StateVector {
    static constexpr std::size_t dim = N;
    std::array<Complex, N> amplitudes{};

    static StateVector basis(std::size_t index) {
        StateVector s;
        s.amplitudes.at(index) = 1.0;
        return s;
    }

    Complex &operator[](std::size_t i) { return amplitudes[i]; }
    const Complex &operator[](std::size_t i) const { return amplitudes[i]; }

    double norm() const {
        double s = 0.0;
        for (const auto &a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }

    StateVector normalized() const {
        StateVector out = *this;
        const double n = norm();
        if (n == 0.0) throw ContractError("cannot normalize the zero vector");
        for (auto &a : out.amplitudes) a /= n;
        return out;
    }

    double population(std::size_t i) const { return std::norm(amplitudes.at(i)); }

    friend bool operator==(const StateVector &, const StateVector &) = default;
};

using StateVector2 = StateVector<kSpinHalf>;
using StateVector3 = StateVector<kSpinOne>;

template <std::size_t N>
StateVector<N> operator*(const SpinMatrix<N> &m, const StateVector<N> &v) {
    StateVector<N> out;
    for (std::size_t r = 0; r < N; ++r) {
        Complex acc = 0.0;
        for (std::size_t c = 0; c < N; ++c) acc += m(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

template <std::size_t N>
Complex inner_product(const StateVector<N> &a, const StateVector<N> &b) {
    Complex acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

template <std::size_t N>
SpinMatrix<N> commutator(const SpinMatrix<N> &a, const SpinMatrix<N> &b) {
    return a * b - b * a;
}

template <std::size_t N>
struct SpinOperators {
    SpinMatrix<N> x, y, z;
};

/// Angular-momentum matrices for spin-1/2 (N = 2) or spin-1 (N = 3), hbar = 1.
template <std::size_t N>
SpinOperators<N> spin_operators() {
    SpinOperators<N> s;
    const Complex i(0.0, 1.0);
    if constexpr (N == kSpinHalf) {
        s.x(0, 1) = 0.5;
        s.x(1, 0) = 0.5;
        s.y(0, 1) = -0.5 * i;
        s.y(1, 0) = 0.5 * i;
        s.z = SpinMatrix<N>::diagonal({0.5, -0.5});
    } else {
        const double r = 1.0 / std::sqrt(2.0);
        s.x(0, 1) = r;
        s.x(1, 0) = r;
        s.x(1, 2) = r;
        s.x(2, 1) = r;
        s.y(0, 1) = -r * i;
        s.y(1, 0) = r * i;
        s.y(1, 2) = -r * i;
        s.y(2, 1) = r * i;
        s.z = SpinMatrix<N>::diagonal({1.0, 0.0, -1.0});
    }
    return s;
}

template <std::size_t N>
double hermiticity_defect(const SpinMatrix<N> &m) {
    double d = 0.0;
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) d = std::max(d, std::abs(m(r, c) - std::conj(m(c, r))));
    return d;
}

template <std::size_t N>
bool is_hermitian(const SpinMatrix<N> &m, const NumericPolicy &policy = kDefaultPolicy) {
    return hermiticity_defect(m) <= policy.hermitian_tol * std::max(1.0, m.max_abs());
}

/// max |U^dagger U - I|.
template <std::size_t N>
double unitarity_defect(const SpinMatrix<N> &u) {
    return (u.adjoint() * u - SpinMatrix<N>::identity()).max_abs();
}

template <std::size_t N>
bool is_unitary(const SpinMatrix<N> &u, const NumericPolicy &policy = kDefaultPolicy) {
    return unitarity_defect(u) <= policy.unitary_tol;
}

template <std::size_t N>
void require_hermitian(const SpinMatrix<N> &m, const NumericPolicy &policy, const char *what) {
    if (!is_hermitian(m, policy)) {
        std::ostringstream os;
        os << what << ": generator is not Hermitian (defect " << hermiticity_defect(m) << ")";
        throw ContractError(os.str());
    }
}

template <std::size_t N>
struct HermitianEigen {
    std::array<double, N> values{};
    SpinMatrix<N> vectors;  ///< eigenvectors stored as columns
};

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot element and then
/// applies a real Givens rotation, so the accumulated eigenvector matrix is
/// unitary to rounding.
template <std::size_t N>
HermitianEigen<N> hermitian_eigen(const SpinMatrix<N> &h, const NumericPolicy &policy = kDefaultPolicy) {
    require_hermitian(h, policy, "hermitian_eigen");
    SpinMatrix<N> a = h;
    SpinMatrix<N> v = SpinMatrix<N>::identity();
    // Symmetrize the diagonal so rounding in the input cannot leak imaginary parts.
    for (std::size_t i = 0; i < N; ++i) a(i, i) = a(i, i).real();

    const double scale = std::max(h.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-17 * scale) break;

        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const Complex phase = apq / mag;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * mag, app - aqq);
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                // Columns of the rotation J restricted to (p, q):
                //   J[:,p] = (c, s e^{-i phi}),  J[:,q] = (-s, c e^{-i phi})
                const Complex jqp = s * std::conj(phase);
                const Complex jqq = c * std::conj(phase);

                // a <- a J
                for (std::size_t r = 0; r < N; ++r) {
                    const Complex arp = a(r, p);
                    const Complex arq = a(r, q);
                    a(r, p) = arp * c + arq * jqp;
                    a(r, q) = -arp * s + arq * jqq;
                }
                // a <- J^dagger a
                for (std::size_t col = 0; col < N; ++col) {
                    const Complex apc = a(p, col);
                    const Complex aqc = a(q, col);
                    a(p, col) = c * apc + std::conj(jqp) * aqc;
                    a(q, col) = -s * apc + std::conj(jqq) * aqc;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                // v <- v J
                for (std::size_t r = 0; r < N; ++r) {
                    const Complex vrp = v(r, p);
                    const Complex vrq = v(r, q);
                    v(r, p) = vrp * c + vrq * jqp;
                    v(r, q) = -vrp * s + vrq * jqq;
                }
            }
        }
    }

    HermitianEigen<N> out;
    std::array<std::size_t, N> order{};
    for (std::size_t i = 0; i < N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return a(l, l).real() < a(r, r).real(); });
    for (std::size_t k = 0; k < N; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t r = 0; r < N; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

/// exp(-i * diag(values) * t) expressed back in the original basis.
template <std::size_t N>
SpinMatrix<N> propagator_from_eigen(const HermitianEigen<N> &eig, double t) {
    std::array<Complex, N> phases{};
    for (std::size_t k = 0; k < N; ++k) phases[k] = std::polar(1.0, -eig.values[k] * t);
    SpinMatrix<N> u;
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) {
            Complex acc = 0.0;
            for (std::size_t k = 0; k < N; ++k)
                acc += eig.vectors(r, k) * phases[k] * std::conj(eig.vectors(c, k));
            u(r, c) = acc;
        }
    return u;
}

/// U = exp(-i H t) for Hermitian H (rad/s) and t (s).
///
/// 2x2: closed form e^{-i h0 t} [cos(|h| t) I - i sin(|h| t) (h.sigma)/|h|].
/// 3x3: Jacobi eigendecomposition.
template <std::size_t N>
SpinMatrix<N> matexp_antihermitian(const SpinMatrix<N> &h, double t,
                                   const NumericPolicy &policy = kDefaultPolicy) {
    require_hermitian(h, policy, "matexp_antihermitian");
    if constexpr (N == kSpinHalf) {
        const double h0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
        const double hz = 0.5 * (h(0, 0).real() - h(1, 1).real());
        const double hx = 0.5 * (h(0, 1).real() + h(1, 0).real());
        const double hy = 0.5 * (h(1, 0).imag() - h(0, 1).imag());
        const double mag = std::sqrt(hx * hx + hy * hy + hz * hz);
        const double c = std::cos(mag * t);
        const double s_over = t * sinc(mag * t);  // sin(|h| t) / |h|
        const Complex global = std::polar(1.0, -h0 * t);
        const Complex i(0.0, 1.0);
        SpinMatrix<N> u;
        u(0, 0) = global * (c - i * s_over * hz);
        u(1, 1) = global * (c + i * s_over * hz);
        u(0, 1) = global * (-i * s_over * Complex(hx, -hy));
        u(1, 0) = global * (-i * s_over * Complex(hx, hy));
        return u;
    } else {
        return propagator_from_eigen(hermitian_eigen(h, policy), t);
    }
}

/// Real expectation value <psi|H|psi>.
template <std::size_t N>
double expectation(const SpinMatrix<N> &h, const StateVector<N> &psi,
                   const NumericPolicy &policy = kDefaultPolicy) {
    const Complex v = inner_product(psi, h * psi);
    const double scale = std::max(1.0, h.max_abs()) * std::max(1.0, psi.norm() * psi.norm());
    if (std::abs(v.imag()) > policy.imag_residue_tol * scale) {
        std::ostringstream os;
        os << "expectation: imaginary residue " << v.imag() << " exceeds tolerance; operator not Hermitian?";
        throw ContractError(os.str());
    }
    return v.real();
}

/// |<a|b>|^2 for normalized kets.
template <std::size_t N>
double overlap_probability(const StateVector<N> &a, const StateVector<N> &b,
                           const NumericPolicy &policy = kDefaultPolicy) {
    if (std::abs(a.norm() - 1.0) > policy.norm_tol || std::abs(b.norm() - 1.0) > policy.norm_tol)
        throw ContractError("overlap_probability: states must be normalized");
    return std::clamp(std::norm(inner_product(a, b)), 0.0, 1.0);
}

}  // namespace qsl
