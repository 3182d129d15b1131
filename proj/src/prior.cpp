#include "etod/prior.hpp"

#include "etod/error.hpp"

#include <cmath>

namespace etod {

Prior Prior::point_mass(Vector value)
{
    Prior p;
    p.kind_ = Kind::PointMass;
    p.center_ = std::move(value);
    return p;
}

Prior Prior::normal(Vector mean, const Matrix& covariance)
{
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
        throw Error(ErrorCode::DimensionMismatch, "normal prior: covariance shape does not match mean");
    }
    if (max_abs_asymmetry(covariance) > 1e-12) throw Error(ErrorCode::NotSymmetric, "normal prior covariance");
    Prior p;
    p.kind_ = Kind::Normal;
    p.center_ = std::move(mean);
    p.covariance_ = covariance;
    try {
        p.cholesky_ = cholesky(covariance);
    } catch (const Error&) {
        throw Error(ErrorCode::InvalidParameter, "normal prior covariance is not positive semidefinite");
    }
    return p;
}

Prior Prior::gamma(Vector shape, double scale)
{
    for (double k : shape)
        if (!(k > 0.0)) throw Error(ErrorCode::InvalidParameter, "gamma prior shapes must be positive");
    if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParameter, "gamma prior scale must be positive");
    Prior p;
    p.kind_ = Kind::Gamma;
    p.center_ = std::move(shape);
    p.scale_ = scale;
    return p;
}

Vector Prior::sample(RngStream& stream) const
{
    switch (kind_) {
    case Kind::PointMass:
        return center_;
    case Kind::Normal: {
        Vector z(center_.size());
        for (double& v : z) v = sample_normal(stream, 0.0, 1.0);
        Vector out = cholesky_ * std::span<const double>(z);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += center_[i];
        return out;
    }
    case Kind::Gamma: {
        Vector out(center_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_gamma(stream, center_[i], scale_);
        return out;
    }
    }
    return center_;
}

}  // namespace etod
