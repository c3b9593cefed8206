// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/core.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#ifdef PGDHAM_USE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include <memory>
#include <string>

namespace pgdham {

/// Cholesky factorization of a sparse SPD matrix, reused for many solves.
/// Backed by CHOLMOD's supernodal LLT when available, Eigen's simplicial
/// LLT otherwise.
class SpdFactorization {
public:
#ifdef PGDHAM_USE_CHOLMOD
    using Backend = Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>;
#else
    using Backend = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower>;
#endif

    SpdFactorization() = default;
    SpdFactorization(const SparseMatrix& A, const std::string& what) { compute(A, what); }

    void compute(const SparseMatrix& A, const std::string& what) {
        solver_ = std::make_shared<Backend>();
        solver_->compute(A);
        if (solver_->info() != Eigen::Success)
            throw SolverError("factorization of " + what + " failed: operator is singular or not positive definite");
        n_ = A.rows();
    }

    Index size() const { return n_; }

    template <class Rhs>
    auto solve(const Rhs& b) const {
        return solver_->solve(b);
    }

private:
    std::shared_ptr<Backend> solver_;
    Index n_ = 0;
};

/// Symmetric, possibly indefinite, sparse solver with a fixed sparsity
/// pattern: the pattern is analysed once, every `factorize` is numeric only.
/// LDL^T without pivoting is tried first; if it breaks down (zero pivot or
/// a residual check fails) the matrix is refactorized by sparse LU.
class SymmetricPatternSolver {
public:
    void analyze(const SparseMatrix& A) {
        ldlt_.analyzePattern(A);
        analysed_ = true;
    }

    /// Returns false if the matrix is numerically singular.
    bool factorize(const SparseMatrix& A) {
        if (!analysed_) analyze(A);
        A_ = &A;
        use_lu_ = false;
        ldlt_.factorize(A);
        if (ldlt_.info() == Eigen::Success && pivots_finite()) return true;
        use_lu_ = true;
        lu_.compute(A);
        return lu_.info() == Eigen::Success;
    }

    Vector solve(const Vector& b) {
        if (!use_lu_) {
            Vector x = ldlt_.solve(b);
            const double res = (*A_ * x - b).norm();
            if (x.allFinite() && res <= 1e-8 * (b.norm() + 1e-300)) return x;
            use_lu_ = true;
            lu_.compute(*A_);
            if (lu_.info() != Eigen::Success) throw SolverError("sparse LU: matrix is singular");
        }
        return lu_.solve(b);
    }

    bool used_lu() const { return use_lu_; }

private:
    bool pivots_finite() const {
        const Vector& D = ldlt_.vectorD();
        if (!D.allFinite()) return false;
        const double dmax = D.cwiseAbs().maxCoeff();
        return D.cwiseAbs().minCoeff() > 1e-14 * dmax;
    }

    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    const SparseMatrix* A_ = nullptr;
    bool analysed_ = false;
    bool use_lu_ = false;
};

} // namespace pgdham
