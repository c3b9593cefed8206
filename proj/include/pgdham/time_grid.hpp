// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/core.hpp"

#include <cmath>
#include <sstream>

namespace pgdham {

/// Uniform grid t^i = i * h on [0, T], i = 0..intervals.
struct TimeGrid {
    double T = 5.0;
    Index intervals = 4800;

    TimeGrid() = default;
    TimeGrid(double final_time, Index n_t) : T(final_time), intervals(n_t) { validate(); }

    void validate() const {
        detail::require(intervals >= 1, "time grid: n_t must be >= 1");
        detail::require(T > 0.0 && std::isfinite(T), "time grid: T must be > 0");
    }

    double step() const { return T / static_cast<double>(intervals); }
    Index nodes() const { return intervals + 1; }
    /// Computed as T * i / n_t so that grid-aligned breakpoints are hit exactly.
    double at(Index i) const { return T * static_cast<double>(i) / static_cast<double>(intervals); }

    template <class F>
    Vector sample(F&& f) const {
        Vector v(nodes());
        for (Index i = 0; i < nodes(); ++i) v[i] = f(at(i));
        return v;
    }

    bool operator==(const TimeGrid&) const = default;
};

/// Piecewise-linear time integration operators on a uniform grid.
///
///   integral(u v)      = u^T A v,   A = h/6 * tridiag(1, [2 4 ... 4 2], 1)
///   integral(du/dt v)  = u^T C v,   C = 1/2 * (lower +1, upper -1, diag(-1, 0, ..., 0, 1))
///
/// Both are exact for piecewise-linear interpolants of nodal samples, and
/// C + C^T = diag(-1, 0, ..., 0, 1) holds bitwise.
class TimeOperators {
public:
    explicit TimeOperators(const TimeGrid& grid) : grid_(grid), h_(grid.step()) { grid.validate(); }

    const TimeGrid& grid() const { return grid_; }
    Index size() const { return grid_.nodes(); }

    double mass_diag(Index i) const { return (i == 0 || i == size() - 1) ? h_ / 3.0 : 2.0 * h_ / 3.0; }
    double mass_offdiag() const { return h_ / 6.0; }

    /// u^T A v
    double mass(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) const {
        check(u);
        check(v);
        const Index n = size();
        double s = 0.0;
        for (Index i = 0; i < n; ++i) s += mass_diag(i) * u[i] * v[i];
        double off = 0.0;
        for (Index i = 0; i + 1 < n; ++i) off += u[i] * v[i + 1] + u[i + 1] * v[i];
        return s + mass_offdiag() * off;
    }

    /// u^T C v, the integral of du/dt times v.
    double derivative(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) const {
        check(u);
        check(v);
        const Index n = size();
        double s = 0.0;
        for (Index i = 1; i < n; ++i) s += (u[i] - u[i - 1]) * (v[i - 1] + v[i]);
        return 0.5 * s;
    }

    /// A v
    Vector apply_mass(const Eigen::Ref<const Vector>& v) const {
        check(v);
        const Index n = size();
        Vector r(n);
        for (Index i = 0; i < n; ++i) {
            double s = mass_diag(i) * v[i];
            if (i > 0) s += mass_offdiag() * v[i - 1];
            if (i + 1 < n) s += mass_offdiag() * v[i + 1];
            r[i] = s;
        }
        return r;
    }

    Matrix dense_mass() const {
        const Index n = size();
        Matrix A = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            A(i, i) = mass_diag(i);
            if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = mass_offdiag();
        }
        return A;
    }

    Matrix dense_derivative() const {
        const Index n = size();
        Matrix C = Matrix::Zero(n, n);
        C(0, 0) = -0.5;
        C(n - 1, n - 1) = 0.5;
        for (Index i = 0; i + 1 < n; ++i) {
            C(i, i + 1) = -0.5;
            C(i + 1, i) = 0.5;
        }
        return C;
    }

private:
    void check(const Eigen::Ref<const Vector>& u) const {
        if (u.size() != size()) {
            std::ostringstream os;
            os << "time operators: sample vector has " << u.size() << " entries, grid has " << size();
            throw InvalidArgument(os.str());
        }
    }

    TimeGrid grid_;
    double h_;
};

/// Asymmetric triangle wave: ramps to F on [0, t1), jumps to -F/2 and
/// ramps back to zero on [t1, t2), zero afterwards.
inline double triangle_signal(double t, double t1, double t2, double F) {
    if (!(t1 > 0.0) || !(t1 < t2)) throw InvalidArgument("triangle_signal: require 0 < t1 < t2");
    if (t < t1) return (t / t1) * F;
    if (t < t2) return -0.5 * (1.0 - (t - t1) / (t2 - t1)) * F;
    return 0.0;
}

/// Scalar time integrals of the space problem.
struct TimeCoeffs {
    double k = 0.0; ///< integral psi_q^2
    double c = 0.0; ///< integral psi_q dpsi_p/dt
    double d = 0.0; ///< -integral dpsi_q/dt psi_p
    double m = 0.0; ///< integral psi_p^2
};

/// d is evaluated directly as -psi_q^T C psi_p, which equals
/// c - psi_q(T) psi_p(T) + psi_q(0) psi_p(0) under summation by parts.
inline TimeCoeffs time_coeffs(const Eigen::Ref<const Vector>& psi_q, const Eigen::Ref<const Vector>& psi_p,
                              const TimeOperators& ops) {
    TimeCoeffs tc;
    tc.k = ops.mass(psi_q, psi_q);
    tc.m = ops.mass(psi_p, psi_p);
    tc.c = ops.derivative(psi_p, psi_q);
    tc.d = -ops.derivative(psi_q, psi_p);
    return tc;
}

} // namespace pgdham
