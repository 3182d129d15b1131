#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace etod {

using Vector = std::vector<double>;

/// Small dense row-major matrix. Sized for the handful of rows and columns
/// that appear in cross-derivatives and estimator covariances (at most ~10).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Throws InvalidParameter when entries.size() != rows*cols or any entry
    /// is non-finite.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    static Matrix row_vector(std::span<const double> v);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const double> entries() const noexcept { return data_; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const
    {
        return std::span<const double>(data_).subspan(i * cols_, cols_);
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, std::span<const double> v);

Matrix transpose(const Matrix& a);
double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs_asymmetry(const Matrix& a);
/// Dense inverse by Gauss-Jordan with partial pivoting. Throws SingularMatrix
/// when a pivot falls below 1e-14 times the largest entry.
Matrix inverse(const Matrix& a);
/// Lower-triangular L with L*L^T == a. Throws SingularMatrix unless a is
/// symmetric positive semidefinite (zero pivots are allowed and give zero columns).
Matrix cholesky(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace etod
