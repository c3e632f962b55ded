#pragma once

#include "ftsyn/model.hpp"

namespace ftsyn {

/// All 2^p diagonal (0,1) sign patterns, binary-ordered: bit i of index j is
/// the i-th diagonal entry of E_j.
struct SignMatrixSet {
    int p = 0;
    std::vector<Vec> diagonals; // 2^p entries, each a p-vector of 0/1

    int count() const { return static_cast<int>(diagonals.size()); }
    const Vec& diag(int j) const { return diagonals[static_cast<size_t>(j)]; }
    Vec complement_diag(int j) const { return Vec::Ones(p) - diagonals[static_cast<size_t>(j)]; }
    Mat matrix(int j) const { return Mat(diagonals[static_cast<size_t>(j)].asDiagonal()); }
    Mat complement(int j) const { return Mat(complement_diag(j).asDiagonal()); }
};

SignMatrixSet enumerate_sign_matrices(int p);

/// Componentwise saturation onto [-u_max, u_max].
Vec saturate(const Vec& u, const InputBox& box);

/// Certificate block matrix for one (A, B) and sign pattern j:
///   [ tau*Q         0          (A Q + B E_j Y + B Ej- Z)^T ]
///   [ 0             (1-tau)I   0                           ]
///   [ A Q + ...     0          Q                           ]
/// Assembled upper triangle first, then mirrored.
Mat build_xi(const Mat& Q, const Mat& Y, const Mat& Z,
             const Mat& A, const Mat& B,
             const Vec& Ej_diag, double tau);

/// Smallest eigenvalue of a symmetric matrix. Throws ContractError if the
/// input is asymmetric beyond tolerance.
double min_eig(const Mat& M, double sym_tol = 1e-8);

/// Operator 2-norm (largest singular value).
double opnorm(const Mat& M);

} // namespace ftsyn
