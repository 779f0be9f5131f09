#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "qslsense/policy.hpp"

namespace qsl::numeric {

/// Bisection on [lo, hi]; f(lo) and f(hi) must have opposite signs (or one be zero).
template <class F>
double bisect(F &&f, double lo, double hi, double rel_tol = 1e-12, int max_iter = 400) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        std::ostringstream os;
        os << "bisect: no sign change on [" << lo << ", " << hi << "] (f = " << flo << ", " << fhi << ")";
        throw NumericError(os.str());
    }
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) return mid;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Scans [lo, hi] with `samples` uniform steps and returns the first
/// sub-interval across which f changes sign.
template <class F>
std::optional<std::pair<double, double>> first_sign_change(F &&f, double lo, double hi, int samples) {
    double x0 = lo;
    double f0 = f(x0);
    for (int i = 1; i <= samples; ++i) {
        const double x1 = lo + (hi - lo) * static_cast<double>(i) / samples;
        const double f1 = f(x1);
        if (f0 == 0.0) return std::pair{x0, x0};
        if (std::signbit(f0) != std::signbit(f1) || f1 == 0.0) return std::pair{x0, x1};
        x0 = x1;
        f0 = f1;
    }
    return std::nullopt;
}

struct GoldenResult {
    double x = 0.0;
    double value = 0.0;
    std::vector<double> best_history;  ///< best objective seen after each iteration
};

/// Golden-section maximization of a unimodal f on [lo, hi].
/// `seed` (x, f(x)) is kept as the incumbent so the result never falls below it.
template <class F>
GoldenResult golden_maximize(F &&f, double lo, double hi, double abs_tol,
                             std::optional<std::pair<double, double>> seed = std::nullopt,
                             int max_iter = 200) {
    constexpr double inv_phi = 0.6180339887498949;
    GoldenResult out;
    double best_x = seed ? seed->first : 0.5 * (lo + hi);
    double best_f = seed ? seed->second : f(best_x);

    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    auto track = [&](double x, double fx) {
        // Ties go to the smaller abscissa.
        if (fx > best_f || (fx == best_f && x < best_x)) {
            best_f = fx;
            best_x = x;
        }
    };
    track(c, fc);
    track(d, fd);
    out.best_history.push_back(best_f);
    for (int it = 0; it < max_iter && (b - a) > abs_tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            track(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            track(d, fd);
        }
        out.best_history.push_back(best_f);
    }
    out.x = best_x;
    out.value = best_f;
    return out;
}

/// Uniform grid of `n` points on [lo, hi] inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

/// Logarithmic grid of `n` points on [lo, hi] inclusive (lo, hi > 0).
inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
    for (auto &x : v) x = std::exp(x);
    if (n > 0) {
        v.front() = lo;
        v.back() = hi;
    }
    return v;
}

/// Trapezoid rule over samples (x_i, y_i).
inline double trapezoid(const std::vector<double> &x, const std::vector<double> &y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

}  // namespace qsl::numeric
