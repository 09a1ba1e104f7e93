#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hamext {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const CMatrix &a);

/// Orthonormal basis (columns) of the numerical nullspace of `a`: right singular
/// vectors whose singular value is below rel_tol * sigma_max. A zero matrix has the
/// full space as nullspace.
CMatrix nullspace(const CMatrix &a, double rel_tol = 1e-9);

/// Reduced row echelon form of the column span of `basis` (columns), for
/// readable coefficient vectors: pivots are 1, tiny entries flushed to 0.
CMatrix readable_basis(const CMatrix &basis, double tol = 1e-10);

/// Cosines of the principal angles between span(a) and span(b) (columns).
Eigen::VectorXd principal_cosines(const CMatrix &a, const CMatrix &b);

/// Scales each row to unit 2-norm (zero rows stay zero).
CMatrix normalize_rows(const CMatrix &a);

/// Eigenvalues of the square complex matrix `a`.
CVector eigenvalues(const CMatrix &a);

/// Moore-Penrose pseudo-inverse.
CMatrix pseudo_inverse(const CMatrix &a, double rel_tol = 1e-12);

} // namespace hamext
