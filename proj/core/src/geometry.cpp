// SPDX-License-Identifier: Apache-2.0
#include "octgf/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace octgf {

CorrelationModel::CorrelationModel(double rho_xy, double rho_xz, double rho_yz,
                                   Vec3 drift)
    : rho_xy_(rho_xy), rho_xz_(rho_xz), rho_yz_(rho_yz), mu_(std::move(drift)) {
    for (double r : {rho_xy, rho_xz, rho_yz})
        if (!(r > -1.0 && r < 1.0))
            throw std::invalid_argument("correlations must lie in (-1, 1)");
    const double chi2 = 1.0 - rho_xy * rho_xy - rho_xz * rho_xz - rho_yz * rho_yz +
                        2.0 * rho_xy * rho_xz * rho_yz;
    if (chi2 <= 0.0)
        throw std::invalid_argument(
            "correlation matrix is not positive definite (chi^2 <= 0)");
    chi_ = std::sqrt(chi2);
    bxy_ = std::sqrt(1.0 - rho_xy * rho_xy);
    bxz_ = std::sqrt(1.0 - rho_xz * rho_xz);
    byz_ = std::sqrt(1.0 - rho_yz * rho_yz);
    omega_bar_ = std::acos(-rho_xy);
    S_ << 1.0, 0.0, 0.0,
        -rho_xy / bxy_, 1.0 / bxy_, 0.0,
        (rho_xy * rho_yz - rho_xz) / (bxy_ * chi_),
        (rho_xy * rho_xz - rho_yz) / (bxy_ * chi_), bxy_ / chi_;
    Sinv_ = S_.inverse();
    xi_ = S_ * mu_;
}

std::array<Vec3, 3> CorrelationModel::edges() const {
    const Vec3 e1(0.0, 0.0, 1.0);
    const Vec3 e2(0.0, chi_ / (bxy_ * bxz_), -(rho_yz_ - rho_xz_ * rho_xy_) / (bxy_ * bxz_));
    const Vec3 e3(chi_ / byz_, -rho_xy_ * chi_ / (bxy_ * byz_),
                  -(rho_xz_ - rho_yz_ * rho_xy_) / (bxy_ * byz_));
    return {e1, e2, e3};
}

double CorrelationModel::phi_of_parameter(double w) const {
    if (std::isinf(w)) return omega_bar_;
    const double num = 1.0 - rho_xy_ * w;
    const double den = std::sqrt(1.0 - 2.0 * rho_xy_ * w + w * w);
    return std::acos(std::clamp(num / den, -1.0, 1.0));
}

double CorrelationModel::theta_of_parameter(double w) const {
    const double A = rho_yz_ - rho_xz_ * rho_xy_;
    const double B = rho_xz_ - rho_yz_ * rho_xy_;
    if (std::isinf(w))
        return std::acos(std::clamp(-B / (bxy_ * byz_), -1.0, 1.0));
    const double num = -(A + w * B);
    const double den = std::sqrt(bxy_ * bxy_ *
                                 (bxz_ * bxz_ - 2.0 * w * (rho_xy_ - rho_xz_ * rho_yz_) +
                                  w * w * byz_ * byz_));
    return std::acos(std::clamp(num / den, -1.0, 1.0));
}

double CorrelationModel::theta_boundary(double phi) const {
    if (phi < -1e-12 || phi > omega_bar_ + 1e-12)
        throw std::invalid_argument("theta_boundary: phi outside [0, omega_bar]");
    phi = std::clamp(phi, 0.0, omega_bar_);
    if (phi == 0.0) return theta_of_parameter(0.0);
    if (phi >= omega_bar_ * (1.0 - 1e-14))
        return theta_of_parameter(std::numeric_limits<double>::infinity());
    // phi(w) is strictly monotone; grow the bracket geometrically until it
    // contains the target, then bisection/secant to 1e-12.
    double lo = 0.0, hi = 1.0;
    int grow = 0;
    while (phi_of_parameter(hi) < phi) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 220)
            throw numerical_error("theta_boundary: bracketing failed");
    }
    const double w = bisect_secant([&](double x) { return phi_of_parameter(x) - phi; },
                                   lo, hi, 1e-14);
    return theta_of_parameter(w);
}

double CorrelationModel::z_boundary(double phi) const {
    return std::log(std::tan(0.5 * theta_boundary(phi)));
}

bool CorrelationModel::zero_correlation() const {
    return rho_xy_ == 0.0 && rho_xz_ == 0.0 && rho_yz_ == 0.0;
}

ThetaCache::ThetaCache(const CorrelationModel& model)
    : fit_([&](double p) { return cxd(model.z_boundary(p)); }, 0.0, model.omega_bar(),
           1e-13, 512),
      omega_bar_(model.omega_bar()) {}

double ThetaCache::z(double phi) const {
    return fit_(std::clamp(phi, 0.0, omega_bar_)).real();
}

double ThetaCache::theta(double phi) const {
    return 2.0 * std::atan(std::exp(z(phi)));
}

Vec3 decorrelate(const Vec3& p, const CorrelationModel& model) {
    return model.matrix() * p;
}

Vec3 recorrelate(const Vec3& q, const CorrelationModel& model) {
    return model.inverse_matrix() * q;
}

WedgePoint to_spherical(const Vec3& q) {
    WedgePoint w;
    w.r = q.norm();
    if (w.r == 0.0) return w;  // angles by convention (0, 0)
    w.theta = std::acos(std::clamp(q.z() / w.r, -1.0, 1.0));
    w.phi = std::atan2(q.x(), q.y());  // azimuth measured from the beta axis
    if (w.phi < 0.0 && w.phi > -1e-15) w.phi = 0.0;
    return w;
}

Vec3 from_spherical(const WedgePoint& w) {
    const double st = std::sin(w.theta);
    return Vec3(w.r * st * std::sin(w.phi), w.r * st * std::cos(w.phi),
                w.r * std::cos(w.theta));
}

bool inside_wedge(const CorrelationModel& model, const WedgePoint& w) {
    return w.r > 0.0 && w.phi > 0.0 && w.phi < model.omega_bar() && w.theta > 0.0 &&
           w.theta < model.theta_boundary(w.phi);
}

double drift_prefactor(const CorrelationModel& model, double tau, const Vec3& p1,
                       const Vec3& p0) {
    if (tau < 0.0) throw std::invalid_argument("drift_prefactor: tau >= 0 required");
    if (model.zero_drift()) return 1.0;
    const Vec3 q1 = decorrelate(p1, model), q0 = decorrelate(p0, model);
    const Vec3& xi = model.xi();
    return std::exp(xi.dot(q1 - q0) - 0.5 * xi.squaredNorm() * tau);
}

}  // namespace octgf
