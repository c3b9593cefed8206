// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/assembly.hpp"
#include "pgdham/sparse.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace pgdham {

/// r lowest generalized eigenpairs K v = lambda M v, approximated by Ritz
/// pairs: V^T M V = I, V^T K V = diag(lambda), lambda ascending.
struct RitzBasis {
    Vector lambda;
    Matrix V;
    std::uint64_t seed = 0;

    Index size() const { return lambda.size(); }
    Index dofs() const { return V.rows(); }
};

struct LanczosOptions {
    double tol = 1e-8;               ///< relative eigen-residual for convergence
    std::uint64_t seed = 20240607;   ///< start vector seed
    Index max_iterations = 0;        ///< 0: 10 * r, capped at n
};

namespace detail {

inline Vector lanczos_start(Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = dist(gen);
    return v;
}

// Shift-invert Lanczos on K^{-1} M in the M inner product with full
// reorthogonalization. Fills `basis` (n x (steps)) and the tridiagonal
// coefficients. Breakdowns restart from a fresh random vector orthogonal to
// the current basis, leaving a zero in beta.
class ShiftInvertLanczos {
public:
    ShiftInvertLanczos(const SparseMatrix& K, const SparseMatrix& M, Index capacity, std::uint64_t seed)
        : K_(K), M_(M), Kfac_(K, "K (shift-invert Lanczos)"), gen_seed_(seed) {
        const Index n = K.rows();
        capacity_ = std::min(capacity, n);
        basis_.resize(n, capacity_);
        Mbasis_.resize(n, capacity_);
        alpha_.resize(capacity_);
        beta_.resize(capacity_);
        push_fresh_vector(detail::lanczos_start(n, seed));
    }

    Index steps() const { return steps_; }
    Index capacity() const { return capacity_; }
    bool exhausted() const { return steps_ >= capacity_; }

    /// One Lanczos step: adds alpha_j, beta_j and the next basis vector.
    /// The three-term recurrence is subtracted first; one full
    /// reorthogonalization pass follows, and a second one only when the
    /// first removed most of the remaining norm.
    void step() {
        const Index j = steps_;
        Vector w = Kfac_.solve(Mbasis_.col(j));
        alpha_[j] = w.dot(Mbasis_.col(j));
        w.noalias() -= alpha_[j] * basis_.col(j);
        if (j > 0 && beta_[j - 1] > 0.0) w.noalias() -= beta_[j - 1] * basis_.col(j - 1);
        ++steps_;
        if (steps_ >= capacity_) {
            beta_[j] = 0.0;
            return;
        }
        Vector Mw = M_ * w;
        const double before = std::sqrt(std::max(w.dot(Mw), 0.0));
        orthogonalize_once(w, j + 1);
        Mw = M_ * w;
        double b = std::sqrt(std::max(w.dot(Mw), 0.0));
        if (b < 0.7 * before) {
            orthogonalize_once(w, j + 1);
            Mw = M_ * w;
            b = std::sqrt(std::max(w.dot(Mw), 0.0));
        }
        if (b > 1e-10 * std::abs(alpha_[j]) && b > 0.0) {
            beta_[j] = b;
            basis_.col(steps_) = w / b;
            Mbasis_.col(steps_) = Mw / b;
        } else {
            beta_[j] = 0.0;
            ++restart_seed_;
            push_fresh_vector(detail::lanczos_start(K_.rows(), gen_seed_ + 7919 * restart_seed_));
        }
    }

    /// Eigen-decomposition of the current tridiagonal matrix, eigenvalues
    /// descending (largest theta = smallest lambda).
    void ritz(Vector& theta, Matrix& S) const {
        const Index k = steps_;
        Eigen::SelfAdjointEigenSolver<Matrix> es;
        Vector diag = alpha_.head(k);
        Vector sub = (k > 1) ? Vector(beta_.head(k - 1)) : Vector(0);
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        theta = es.eigenvalues().reverse();
        S = es.eigenvectors().rowwise().reverse();
    }

    double last_beta() const { return steps_ > 0 ? beta_[steps_ - 1] : 0.0; }
    auto basis() const { return basis_.leftCols(steps_); }

private:
    void set_column(Index j, const Vector& v) {
        basis_.col(j) = v;
        Mbasis_.col(j) = M_ * v;
    }

    void orthogonalize_once(Vector& w, Index cols) const {
        const Vector c = Mbasis_.leftCols(cols).transpose() * w;
        w.noalias() -= basis_.leftCols(cols) * c;
    }

    void orthogonalize(Vector& w, Index cols) const {
        orthogonalize_once(w, cols);
        orthogonalize_once(w, cols);
    }

    void push_fresh_vector(Vector v) {
        orthogonalize(v, steps_);
        const double nv = std::sqrt(std::max(v.dot(M_ * v), 0.0));
        if (!(nv > 0.0)) throw SolverError("Lanczos: could not generate a start vector outside the Krylov basis");
        set_column(steps_, v / nv);
    }

    const SparseMatrix& K_;
    const SparseMatrix& M_;
    SpdFactorization Kfac_;
    std::uint64_t gen_seed_;
    std::uint64_t restart_seed_ = 0;
    Index capacity_ = 0;
    Index steps_ = 0;
    Matrix basis_, Mbasis_;
    Vector alpha_, beta_;
};

inline void check_pencil(const SparseMatrix& K, const SparseMatrix& M, Index r) {
    if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
        throw InvalidArgument("ritz: K and M must be square and of equal size");
    if (r < 1 || r > K.rows()) throw InvalidArgument("ritz: requested count must satisfy 1 <= r <= n");
}

} // namespace detail

/// Ritz values after exactly `steps` Lanczos steps, ascending. Exposed for
/// convergence studies.
inline Vector lanczos_ritz_values(const SparseMatrix& K, const SparseMatrix& M, Index steps,
                                  std::uint64_t seed = LanczosOptions{}.seed) {
    detail::check_pencil(K, M, std::max<Index>(1, std::min(steps, K.rows())));
    detail::ShiftInvertLanczos lz(K, M, steps, seed);
    while (!lz.exhausted()) lz.step();
    Vector theta;
    Matrix S;
    lz.ritz(theta, S);
    return theta.cwiseInverse();
}

/// Relative residuals ||K v_i - lambda_i M v_i|| / ||K v_i||.
inline Vector ritz_residuals(const SparseMatrix& K, const SparseMatrix& M, const RitzBasis& basis) {
    Vector res(basis.size());
    for (Index i = 0; i < basis.size(); ++i) {
        const Vector Kv = K * basis.V.col(i);
        const Vector r = Kv - basis.lambda[i] * (M * basis.V.col(i));
        res[i] = r.norm() / Kv.norm();
    }
    return res;
}

/// Shift-invert (shift 0) Lanczos with full reorthogonalization, followed by
/// a Rayleigh-Ritz projection of K and M onto the converged Ritz vectors so
/// the returned basis is M-orthonormal and K-diagonal to working precision.
inline RitzBasis compute_ritz_pairs(const SparseMatrix& K, const SparseMatrix& M, Index r,
                                    const LanczosOptions& opt = {}) {
    detail::check_pencil(K, M, r);
    const Index n = K.rows();
    const Index budget = std::min<Index>(n, opt.max_iterations > 0 ? opt.max_iterations : 10 * r);
    if (budget < r) throw InvalidArgument("ritz: iteration budget smaller than requested count");
    detail::ShiftInvertLanczos lz(K, M, budget, opt.seed);

    Vector res_best;
    Index next_check = std::min<Index>(budget, r + std::max<Index>(10, r / 2));
    while (true) {
        while (lz.steps() < next_check && !lz.exhausted()) lz.step();

        Vector theta;
        Matrix S;
        lz.ritz(theta, S);
        // Cheap estimate first: |beta_k s_{k,i}| / theta_i for the wanted pairs.
        const Index k = lz.steps();
        bool estimate_ok = lz.exhausted();
        if (!estimate_ok) {
            double worst = 0.0;
            for (Index i = 0; i < r; ++i) worst = std::max(worst, std::abs(lz.last_beta() * S(k - 1, i)) / theta[i]);
            estimate_ok = worst <= 0.1 * opt.tol;
        }
        if (estimate_ok) {
            const Matrix Y = lz.basis() * S.leftCols(r);
            const Matrix KY = K * Y;
            const Matrix MY = M * Y;
            Matrix Kr = Y.transpose() * KY;
            Matrix Mr = Y.transpose() * MY;
            Kr = 0.5 * (Kr + Kr.transpose()).eval();
            Mr = 0.5 * (Mr + Mr.transpose()).eval();
            Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(Kr, Mr);
            if (ges.info() != Eigen::Success) throw SolverError("ritz: Rayleigh-Ritz projection failed");
            RitzBasis basis;
            basis.lambda = ges.eigenvalues();
            basis.V = Y * ges.eigenvectors();
            basis.seed = opt.seed;
            res_best = ritz_residuals(K, M, basis);
            if (res_best.maxCoeff() <= opt.tol) return basis;
        }
        if (lz.exhausted()) break;
        next_check = std::min<Index>(budget, lz.steps() + std::max<Index>(10, r / 5));
    }
    std::ostringstream os;
    os << "ritz: no convergence for r = " << r << " within " << budget << " Lanczos steps";
    if (res_best.size() > 0) os << "; achieved max relative residual " << res_best.maxCoeff() << " (tol " << opt.tol << ")";
    throw SolverError(os.str());
}

/// Block lift R = diag(V, M V) from reduced (q^, p^) to full (q, p).
struct SymplecticMap {
    Matrix V;
    Matrix MV;
    Vector lambda;

    Index reduced_size() const { return V.cols(); }

    /// || R^T J_2n R - J_2r ||_F computed blockwise.
    double defect() const {
        const Matrix G = V.transpose() * MV;
        const Matrix I = Matrix::Identity(G.rows(), G.cols());
        return std::sqrt((G - I).squaredNorm() + (G.transpose() - I).squaredNorm());
    }

    /// Diagonal of the reduced Hessian G = R^T H R = diag(lambda) (+) I.
    Vector reduced_hessian_diagonal() const {
        Vector g(2 * lambda.size());
        g << lambda, Vector::Ones(lambda.size());
        return g;
    }
};

inline SymplecticMap build_symplectic_map(const RitzBasis& basis, const SparseMatrix& M) {
    if (basis.dofs() != M.rows()) throw InvalidArgument("symplectic map: basis and mass sizes differ");
    return SymplecticMap{basis.V, M * basis.V, basis.lambda};
}

/// Reduced load V^T b per separated term; signals unchanged.
inline SeparatedLoad project_load(const SeparatedLoad& load, const RitzBasis& basis) {
    SeparatedLoad reduced;
    for (const auto& term : load.terms) {
        if (term.spatial.size() != basis.dofs()) throw InvalidArgument("project_load: load size differs from basis");
        reduced.terms.push_back({basis.V.transpose() * term.spatial, term.signal});
    }
    return reduced;
}

} // namespace pgdham
