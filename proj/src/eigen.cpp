#include "etod/eigen.hpp"

#include "etod/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace etod {

namespace {

double off_diagonal_norm(const Matrix& a)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& m)
{
    if (!m.square()) throw Error(ErrorCode::DimensionMismatch, "eigen-decomposition of non-square matrix");
    if (max_abs_asymmetry(m) > 1e-10) throw Error(ErrorCode::NotSymmetric, "matrix asymmetry exceeds 1e-10");

    const std::size_t n = m.rows();
    Matrix a = m;
    // Symmetrize exactly so rotations see a symmetric input.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
    Matrix v = Matrix::identity(n);

    const double threshold = 1e-12 * frobenius_norm(a);
    for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) > threshold; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out{Vector(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

Vector symmetric_eigenvalues(const Matrix& m) { return symmetric_eigen(m).values; }

double spectral_norm_symmetric(const Matrix& m)
{
    const Vector ev = symmetric_eigenvalues(m);
    double best = 0.0;
    for (double e : ev) best = std::max(best, std::abs(e));
    return best;
}

}  // namespace etod
