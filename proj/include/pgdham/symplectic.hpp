// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/core.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>
#include <string_view>

namespace pgdham {

enum class BiorthMethod { LU, SVD };

inline constexpr std::string_view method_name(BiorthMethod m) { return m == BiorthMethod::LU ? "lu" : "svd"; }

/// Recombination factors with (Sq Q)^T (Sp P) = I_m.
struct BiorthogonalFactors {
    Matrix Q;
    Matrix P;
    BiorthMethod method = BiorthMethod::LU;
    bool pivoted = false;            ///< LU route fell back to partial pivoting
    Eigen::VectorXi permutation;     ///< row permutation of the pivoted LU (identity otherwise)
    Index rank = 0;                  ///< SVD route: singular values kept
};

/// || S^T J_2n S - J_2m ||_F for S = diag(Sq, Sp), computed blockwise as
/// sqrt(2) ||Sq^T Sp - I_m||_F.
inline double symplectic_defect(const Matrix& Sq, const Matrix& Sp) {
    if (Sq.cols() != Sp.cols() || Sq.rows() != Sp.rows())
        throw InvalidArgument("symplectic defect: Sq and Sp shapes differ");
    if (Sq.cols() == 0) return 0.0;
    const Matrix G = Sq.transpose() * Sp;
    return std::sqrt(2.0) * (G - Matrix::Identity(G.rows(), G.cols())).norm();
}

namespace detail {

inline bool diagonally_dominant(const Matrix& G) {
    for (Index i = 0; i < G.rows(); ++i) {
        const double off = G.row(i).cwiseAbs().sum() - std::abs(G(i, i));
        if (!(std::abs(G(i, i)) > 2.0 * off)) return false;
    }
    return true;
}

// Doolittle LU without pivoting: G = L U, L unit lower.
inline void doolittle(const Matrix& G, Matrix& L, Matrix& U) {
    const Index m = G.rows();
    L = Matrix::Identity(m, m);
    U = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = i; j < m; ++j) U(i, j) = G(i, j) - L.row(i).head(i).dot(U.col(j).head(i));
        if (U(i, i) == 0.0) throw SolverError("biorthogonalize: zero pivot in unpivoted LU");
        for (Index j = i + 1; j < m; ++j) L(j, i) = (G(j, i) - L.row(j).head(i).dot(U.col(i).head(i))) / U(i, i);
    }
}

} // namespace detail

/// LU route: G = Sq^T Sp = L U, Q = L^{-T}, P = U^{-1}, so Q^T G P = I.
/// With partial pivoting Pi G = L U the permutation is folded into Q:
/// Q = Pi^T L^{-T}.
/// SVD route: G = U Sigma V^T, Q = U Sigma^{-1/2}, P = V Sigma^{-1/2}, with
/// singular values below 1e-12 sigma_max dropped (their columns set to zero).
inline BiorthogonalFactors biorthogonalize(const Matrix& Sq, const Matrix& Sp, BiorthMethod method) {
    if (Sq.cols() != Sp.cols() || Sq.rows() != Sp.rows())
        throw InvalidArgument("biorthogonalize: Sq and Sp shapes differ");
    const Index m = Sq.cols();
    BiorthogonalFactors f;
    f.method = method;
    f.permutation = Eigen::VectorXi::LinSpaced(m, 0, static_cast<int>(m) - 1);
    if (m == 0) {
        f.Q.resize(0, 0);
        f.P.resize(0, 0);
        return f;
    }
    const Matrix G = Sq.transpose() * Sp;

    if (method == BiorthMethod::LU) {
        Matrix L, U;
        if (detail::diagonally_dominant(G)) {
            detail::doolittle(G, L, U);
        } else {
            Eigen::PartialPivLU<Matrix> lu(G);
            const Matrix LU = lu.matrixLU();
            L = LU.triangularView<Eigen::UnitLower>();
            U = LU.triangularView<Eigen::Upper>();
            f.pivoted = true;
            f.permutation = lu.permutationP().indices();
            const double umax = U.diagonal().cwiseAbs().maxCoeff();
            if (!(U.diagonal().cwiseAbs().minCoeff() > 1e-14 * umax)) {
                std::ostringstream os;
                os << "biorthogonalize: Sq^T Sp is numerically singular (pivot ratio "
                   << U.diagonal().cwiseAbs().minCoeff() / umax << "); use the SVD route";
                throw SolverError(os.str());
            }
        }
        const Matrix I = Matrix::Identity(m, m);
        const Matrix Linv = L.triangularView<Eigen::UnitLower>().solve(I);
        f.P = U.triangularView<Eigen::Upper>().solve(I);
        f.Q = Linv.transpose();
        if (f.pivoted) {
            // Pi G = L U  =>  (Pi^T L^{-T})^T G U^{-1} = I.
            Eigen::PermutationMatrix<Eigen::Dynamic> Pi(f.permutation);
            f.Q = Pi.transpose() * f.Q;
        }
        f.rank = m;
        return f;
    }

    Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    const double cut = 1e-12 * s[0];
    Vector w = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
        if (s[i] > cut) {
            w[i] = 1.0 / std::sqrt(s[i]);
            ++f.rank;
        }
    }
    f.Q = svd.matrixU() * w.asDiagonal();
    f.P = svd.matrixV() * w.asDiagonal();
    return f;
}

/// Recombined basis (Sq Q, Sp P) and temporal modes (Q^{-1} psi_q, P^{-1} psi_p),
/// which leave z_m(t) = S psi(t) unchanged. Psi blocks are (n_t+1) x m, so the
/// counter-recombination acts on rows: Psi_hat = Psi Q^{-T}.
struct Recombined {
    Matrix Sq, Sp, Psi_q, Psi_p;
};

inline Recombined recombine(const Matrix& Sq, const Matrix& Sp, const Matrix& Psi_q, const Matrix& Psi_p,
                            const BiorthogonalFactors& f) {
    if (f.rank != Sq.cols()) throw SolverError("recombine: factors are rank deficient, reconstruction is not exact");
    Recombined r;
    r.Sq = Sq * f.Q;
    r.Sp = Sp * f.P;
    r.Psi_q = f.Q.partialPivLu().solve(Psi_q.transpose()).transpose();
    r.Psi_p = f.P.partialPivLu().solve(Psi_p.transpose()).transpose();
    return r;
}

} // namespace pgdham
