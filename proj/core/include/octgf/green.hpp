// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "octgf/nep.hpp"

namespace octgf {

enum class Frame { original, decorrelated, spherical };

/// Radial factor g(tau, r1, r0) = exp(-(r0^2+r1^2)/(2 tau)) / (tau sqrt(r0 r1))
///   * I_nu(r0 r1 / tau) with nu = sqrt(Lambda^2 + 1/4) = lambda - 1/2;
/// evaluated in scaled Bessel form to avoid overflow at small tau.
cxd eval_radial(double tau, double r1, double r0, cxd lambda);

/// Evaluable truncated expansion of the absorbed-octant transition density.
class GreensFunctionModel {
public:
    GreensFunctionModel(CorrelationModel model, std::vector<Eigenpair> pairs,
                        double alpha, Frame frame = Frame::original);

    static GreensFunctionModel from_set(const EigenpairSet& set,
                                        Frame frame = Frame::original);

    const CorrelationModel& model() const { return model_; }
    const std::vector<Eigenpair>& pairs() const { return pairs_; }
    Frame frame() const { return frame_; }
    int modes() const { return static_cast<int>(pairs_.size()); }

    /// Angular eigenfunction Psi_l at a wedge point.
    cxd psi(int l, double phi, double theta) const;

    /// Density at elapsed time tau > 0. Point semantics follow the frame:
    /// original octant coordinates (includes drift prefactor and the 1/chi
    /// Jacobian), decorrelated wedge Cartesian (drift prefactor only), or
    /// spherical wedge coordinates. Boundary points return 0.
    double eval(double tau, const Vec3& p1, const Vec3& p0) const;
    double eval(double tau, const WedgePoint& w1, const WedgePoint& w0) const;

    /// Driftless wedge density in spherical coordinates (the bare expansion).
    cxd eval_wedge_complex(double tau, const WedgePoint& w1, const WedgePoint& w0) const;

    /// Analytic phi'-derivative of the (driftless) expansion on a lateral
    /// face, divided sum form: face 0 is phi' = 0, face 1 is phi' = omega_bar.
    /// The drift prefactor of the face point is included when the model has
    /// drift.
    double dphi_face(double tau, int face, double r1, double theta1,
                     const Vec3& p0_original) const;

    /// Probability mass over the full octant (or a box in original
    /// coordinates) at elapsed time tau, start point in original coordinates.
    double integrate_octant(double tau, const Vec3& p0_original, int nr = 64,
                            int nphi = 48, int nu = 48) const;
    double integrate_box(double tau, const Vec3& p0_original, const Vec3& lo,
                         const Vec3& hi, int n1d = 48) const;

    /// Count of evaluations clamped from small negative truncation values.
    long clamped_negative_count() const { return clamp_count_.load(); }
    /// Largest observed |Im G| / |Re G| ratio (imaginary leakage diagnostic).
    double max_imag_ratio() const { return imag_ratio_; }

private:
    CorrelationModel model_;
    std::vector<Eigenpair> pairs_;
    double alpha_;
    Frame frame_;
    std::vector<PsiFunction> psi_;
    mutable std::atomic<long> clamp_count_{0};
    mutable double imag_ratio_ = 0.0;
};

/// Grid specification for CSV export: tensor grid in original coordinates.
struct GridSpec {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Ones();
    int n = 16;  // points per axis
};

struct GridRow {
    Vec3 point;
    double density;
};

std::vector<GridRow> evaluate_grid(const GreensFunctionModel& gfm, double tau,
                                   const Vec3& p0, const GridSpec& spec,
                                   int threads = 1);

/// CSV with header, 17 significant digits; optional oracle column.
void write_grid_csv(const std::string& path, const std::vector<GridRow>& rows,
                    const std::vector<double>* oracle = nullptr,
                    const std::string& oracle_name = "oracle");

/// L2 grid error between two density columns per the cell-volume-weighted
/// quadrature: sqrt(sum (a_i - b_i)^2 dV).
double l2_grid_error(const std::vector<GridRow>& rows,
                     const std::vector<double>& oracle, const GridSpec& spec);

}  // namespace octgf
