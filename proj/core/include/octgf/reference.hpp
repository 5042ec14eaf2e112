// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "octgf/geometry.hpp"

namespace octgf {

// ---------------------------------------------------------------------------
// Method of images (special correlation case)
// ---------------------------------------------------------------------------

/// Signed reflection group generated by the three wedge face planes. Closes
/// only for special correlation structures; construction is numeric (BFS
/// closure over products, capped) and throws when the group does not close.
class ImageSystem {
public:
    explicit ImageSystem(const CorrelationModel& model, int cap = 10000);

    /// Absorbed-octant density at original-coordinate points (zero drift),
    /// per unit original volume (includes the 1/chi Jacobian).
    double density(double tau, const Vec3& p1, const Vec3& p0) const;

    /// Same in the decorrelated frame (per unit wedge volume).
    double density_wedge(double tau, const Vec3& q1, const Vec3& q0) const;

    int order() const { return static_cast<int>(mats_.size()); }
    int parity_sum() const;

private:
    CorrelationModel model_;
    std::vector<Eigen::Matrix3d> mats_;
    std::vector<int> signs_;
};

/// Zero-correlation closed form: product over axes of the 1D absorbed kernel
/// with drift (reflection with exponential image weight). Density per unit
/// original volume.
double zero_corr_green(double tau, const Vec3& p1, const Vec3& p0, const Vec3& drift);

/// 1D absorbed kernel with drift, barrier at 0.
double absorbed_kernel_1d(double tau, double x1, double x0, double drift);
/// 1D survival probability of drifted BM from x0 > 0 over horizon tau.
double survival_1d(double tau, double x0, double drift);

// ---------------------------------------------------------------------------
// Hundsdorfer-Verwer ADI finite differences
// ---------------------------------------------------------------------------

struct FdGrid {
    int n_space = 50;      // interior points per axis
    int n_time = 100;      // time steps
    Vec3 extent = Vec3(5, 5, 5);  // box [0, extent] per axis
    double theta = 0.5 + std::sqrt(3.0) / 6.0;
};

struct FdSolution {
    FdGrid grid;
    Vec3 spacing;
    std::vector<double> values;  // interior nodes, x-major
    double at(const Vec3& p) const;  // trilinear interpolation
    double node(int i, int j, int k) const;
};

/// Forward density of the correlated drifted Brownian motion killed at the
/// octant boundary, HV scheme with explicit mixed derivatives, discrete
/// delta initial condition at the start point (snapped to the nearest node).
FdSolution adi_hv_solve(const CorrelationModel& model, const FdGrid& grid,
                        const Vec3& start, double horizon);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct McResult {
    double survival = 0.0;
    double std_error = 0.0;
    long paths = 0;
    std::vector<Vec3> survivor_sample;  // capped endpoint sample
};

/// Correlated drifted BM absorbed at the octant boundary; per-step
/// Brownian-bridge crossing correction per coordinate; per-path RNG streams
/// keyed by (seed, path index) so results do not depend on scheduling.
McResult mc_absorbed_paths(const CorrelationModel& model, const Vec3& start,
                           double horizon, long n_paths, int n_steps,
                           std::uint64_t seed, int threads = 1,
                           int survivor_cap = 0);

// ---------------------------------------------------------------------------
// Classical 2D wedge expansion
// ---------------------------------------------------------------------------

/// Absorbed density in a 2D wedge of opening omega_bar, polar coordinates,
/// driftless; terms truncated below 1e-16.
double wedge2d_green(double tau, double r1, double phi1, double r0, double phi0,
                     double omega_bar);

}  // namespace octgf
