#pragma once

#include "etod/matrix.hpp"

namespace etod {

struct SymmetricEigen {
    Vector values;  ///< descending
    Matrix vectors; ///< column k pairs with values[k]
};

/// Cyclic Jacobi rotations; stops once the off-diagonal Frobenius norm drops
/// below 1e-12 * ||M||_F. Throws NotSymmetric when |M - M^T| exceeds 1e-10.
SymmetricEigen symmetric_eigen(const Matrix& m);

Vector symmetric_eigenvalues(const Matrix& m);

/// Largest |eigenvalue| of a symmetric matrix.
double spectral_norm_symmetric(const Matrix& m);

}  // namespace etod
