#include "ftsyn/ldi.hpp"

#include <cmath>

namespace ftsyn {

SignMatrixSet enumerate_sign_matrices(int p) {
    if (p < 1 || p > 16)
        throw ConfigError("sign-matrix enumeration requires 1 <= p <= 16, got " +
                          std::to_string(p));
    SignMatrixSet set;
    set.p = p;
    const int count = 1 << p;
    set.diagonals.reserve(static_cast<size_t>(count));
    for (int j = 0; j < count; ++j) {
        Vec d(p);
        for (int i = 0; i < p; ++i) d(i) = (j >> i) & 1 ? 1.0 : 0.0;
        set.diagonals.push_back(std::move(d));
    }
    return set;
}

Vec saturate(const Vec& u, const InputBox& box) {
    Vec out(u.size());
    for (int i = 0; i < u.size(); ++i) {
        const double m = box.u_max(i);
        out(i) = std::copysign(std::min(std::abs(u(i)), m), u(i));
    }
    return out;
}

Mat build_xi(const Mat& Q, const Mat& Y, const Mat& Z,
             const Mat& A, const Mat& B,
             const Vec& Ej_diag, double tau) {
    const int n = static_cast<int>(Q.rows());
    const int p = static_cast<int>(Y.rows());
    if (Q.cols() != n || Y.cols() != n || Z.rows() != p || Z.cols() != n ||
        A.rows() != n || A.cols() != n || B.rows() != n || B.cols() != p ||
        Ej_diag.size() != p)
        throw AssemblyError("build_xi: inconsistent dimensions");
    if (!(tau >= 0.0 && tau <= 1.0))
        throw AssemblyError("build_xi: tau must be in [0,1]");

    const Vec ejm = Vec::Ones(p) - Ej_diag;
    Mat M = A * Q + B * (Ej_diag.asDiagonal() * Y) + B * (ejm.asDiagonal() * Z);

    Mat Xi = Mat::Zero(3 * n, 3 * n);
    // upper triangle
    Xi.block(0, 0, n, n) = tau * Q;
    Xi.block(n, n, n, n) = (1.0 - tau) * Mat::Identity(n, n);
    Xi.block(2 * n, 2 * n, n, n) = Q;
    Xi.block(0, 2 * n, n, n) = M.transpose();
    // mirror
    Xi.block(2 * n, 0, n, n) = M;
    // symmetrize the diagonal Q blocks against asymmetric Q input drift
    Xi.block(0, 0, n, n) = 0.5 * (Xi.block(0, 0, n, n) + Xi.block(0, 0, n, n).transpose().eval());
    Xi.block(2 * n, 2 * n, n, n) =
        0.5 * (Xi.block(2 * n, 2 * n, n, n) + Xi.block(2 * n, 2 * n, n, n).transpose().eval());
    return Xi;
}

double min_eig(const Mat& M, double sym_tol) {
    if (M.rows() != M.cols()) throw ContractError("min_eig: matrix is not square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol * scale)
        throw ContractError("min_eig: input asymmetric beyond tolerance");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()),
                                          Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("min_eig: eigensolver failed");
    return es.eigenvalues()(0);
}

double opnorm(const Mat& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()(0);
}

} // namespace ftsyn
