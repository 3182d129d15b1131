#pragma once

#include "etod/matrix.hpp"
#include "etod/rng.hpp"

#include <cstddef>

namespace etod {

/// Distribution over the true parameter theta*.
class Prior {
public:
    enum class Kind { PointMass, Normal, Gamma };

    static Prior point_mass(Vector value);
    /// Multivariate normal; covariance must be symmetric PSD.
    static Prior normal(Vector mean, const Matrix& covariance);
    /// Independent Gamma(shape_i, scale) per coordinate.
    static Prior gamma(Vector shape, double scale = 1.0);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t dim() const noexcept { return center_.size(); }
    /// Point value, normal mean, or gamma shapes (the prior mean when scale is 1).
    [[nodiscard]] const Vector& center() const noexcept { return center_; }
    [[nodiscard]] const Matrix& covariance() const noexcept { return covariance_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }

    Vector sample(RngStream& stream) const;

private:
    Kind kind_ = Kind::PointMass;
    Vector center_;
    Matrix covariance_;
    Matrix cholesky_;
    double scale_ = 1.0;
};

}  // namespace etod
