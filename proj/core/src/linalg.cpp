#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hamext/linalg.hpp"

namespace hamext {

Eigen::VectorXd singular_values(const CMatrix &a)
{
    if (a.rows() == 0 || a.cols() == 0) {
        return {};
    }
    return Eigen::BDCSVD<CMatrix>(a).singularValues();
}

CMatrix nullspace(const CMatrix &a, double rel_tol)
{
    const Eigen::Index n = a.cols();
    if (a.rows() == 0) {
        return CMatrix::Identity(n, n);
    }
    // pad to square so V is complete even for wide matrices
    CMatrix padded = a;
    if (a.rows() < n) {
        padded = CMatrix::Zero(n, n);
        padded.topRows(a.rows()) = a;
    }
    Eigen::BDCSVD<CMatrix> svd(padded, Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (smax > 0.0 && s(i) > rel_tol * smax) {
            ++rank;
        }
    }
    return svd.matrixV().rightCols(n - rank);
}

CMatrix readable_basis(const CMatrix &basis, double tol)
{
    CMatrix r = basis.transpose();
    const Eigen::Index rows = r.rows();
    const Eigen::Index cols = r.cols();
    Eigen::Index lead = 0;
    for (Eigen::Index row = 0; row < rows && lead < cols; ++lead) {
        Eigen::Index best = row;
        for (Eigen::Index i = row + 1; i < rows; ++i) {
            if (std::abs(r(i, lead)) > std::abs(r(best, lead))) {
                best = i;
            }
        }
        if (std::abs(r(best, lead)) < tol) {
            continue;
        }
        r.row(row).swap(r.row(best));
        r.row(row) /= r(row, lead);
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (i != row) {
                r.row(i) -= r(i, lead) * r.row(row);
            }
        }
        ++row;
    }
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        auto &v = r.data()[i];
        if (std::abs(v.real()) < tol) {
            v.real(0.0);
        }
        if (std::abs(v.imag()) < tol) {
            v.imag(0.0);
        }
    }
    return r.transpose();
}

namespace {

CMatrix orthonormal(const CMatrix &a)
{
    if (a.cols() == 0) {
        return a;
    }
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU);
    const auto &s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > 1e-12 * s(0)) {
            ++rank;
        }
    }
    return svd.matrixU().leftCols(rank);
}

} // namespace

Eigen::VectorXd principal_cosines(const CMatrix &a, const CMatrix &b)
{
    const CMatrix qa = orthonormal(a);
    const CMatrix qb = orthonormal(b);
    if (qa.cols() == 0 || qb.cols() == 0) {
        return {};
    }
    return singular_values(qa.adjoint() * qb);
}

CMatrix normalize_rows(const CMatrix &a)
{
    CMatrix out = a;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double n = out.row(i).norm();
        if (n > 0.0) {
            out.row(i) /= n;
        }
    }
    return out;
}

CVector eigenvalues(const CMatrix &a) { return Eigen::ComplexEigenSolver<CMatrix>(a, false).eigenvalues(); }

CMatrix pseudo_inverse(const CMatrix &a, double rel_tol)
{
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &s = svd.singularValues();
    Eigen::VectorXcd inv = Eigen::VectorXcd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) {
            inv(i) = 1.0 / s(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

} // namespace hamext
