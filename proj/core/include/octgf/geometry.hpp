// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "octgf/kernels.hpp"

namespace octgf {

using Vec3 = Eigen::Vector3d;

/// Correlated, drifted Brownian motion in the octant and the linear map that
/// turns it into driftless standard Brownian motion on a spherical wedge.
///
/// The wedge is r > 0, 0 < phi < omega_bar, 0 < theta < Theta(phi) in the
/// spherical coordinates alpha = r sin(theta) sin(phi),
/// beta = r sin(theta) cos(phi), gamma = r cos(theta).
class CorrelationModel {
public:
    CorrelationModel(double rho_xy, double rho_xz, double rho_yz,
                     Vec3 drift = Vec3::Zero());

    double rho_xy() const { return rho_xy_; }
    double rho_xz() const { return rho_xz_; }
    double rho_yz() const { return rho_yz_; }
    const Vec3& drift() const { return mu_; }

    double chi() const { return chi_; }
    double rho_bar_xy() const { return bxy_; }
    double rho_bar_yz() const { return byz_; }
    double omega_bar() const { return omega_bar_; }

    /// Transformed drifts (xi_alpha, xi_beta, xi_gamma).
    const Vec3& xi() const { return xi_; }

    /// De-correlating linear map, (alpha,beta,gamma) = S (x,y,z).
    const Eigen::Matrix3d& matrix() const { return S_; }
    const Eigen::Matrix3d& inverse_matrix() const { return Sinv_; }

    /// Unit edges of the image cone (images of the z, y, x axes).
    std::array<Vec3, 3> edges() const;

    /// Polar boundary angle Theta(phi), phi in [0, omega_bar]; absolute
    /// tolerance 1e-12; inverts the parametric pair by bracketed root
    /// finding in the parameter omega.
    double theta_boundary(double phi) const;

    /// Z(phi) = ln tan(Theta(phi)/2).
    double z_boundary(double phi) const;

    /// Direct evaluation of the parametric pair (phi(w), Theta(w)).
    double phi_of_parameter(double w) const;
    double theta_of_parameter(double w) const;

    bool zero_correlation() const;
    bool zero_drift() const { return mu_.isZero(0.0); }

private:
    double rho_xy_, rho_xz_, rho_yz_;
    double chi_, bxy_, bxz_, byz_, omega_bar_;
    Vec3 mu_, xi_;
    Eigen::Matrix3d S_, Sinv_;
};

/// Optional per-model cache of Z(phi) on a Chebyshev grid for fast repeated
/// evaluation (1e-12 against direct inversion).
class ThetaCache {
public:
    explicit ThetaCache(const CorrelationModel& model);
    double z(double phi) const;
    double theta(double phi) const;

private:
    ChebyshevFit fit_;
    double omega_bar_;
};

struct WedgePoint {
    double r = 0.0;
    double phi = 0.0;
    double theta = 0.0;
};

/// Linear map octant -> wedge Cartesian.
Vec3 decorrelate(const Vec3& p, const CorrelationModel& model);
/// Inverse map wedge -> octant Cartesian.
Vec3 recorrelate(const Vec3& q, const CorrelationModel& model);

WedgePoint to_spherical(const Vec3& wedge_cartesian);
Vec3 from_spherical(const WedgePoint& w);

/// True when the wedge point lies strictly inside the wedge image of the
/// open octant.
bool inside_wedge(const CorrelationModel& model, const WedgePoint& w);

/// Likelihood-ratio factor mapping the driftless wedge density to the
/// drifted one over elapsed time tau >= 0:
///   G_drifted(tau, p1, p0) = prefactor(tau, p1, p0) * G_driftless(tau, p1, p0)
/// with points given in original octant coordinates.
double drift_prefactor(const CorrelationModel& model, double tau, const Vec3& p1,
                       const Vec3& p0);

}  // namespace octgf
