// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "octgf/geometry.hpp"
#include "octgf/kernels.hpp"

namespace octgf {

/// Truncated boundary-matching problem T(lambda) c = 0 for one correlation
/// model: N basis functions, K trapezoid nodes on [0, omega_bar], and the
/// diagonal preconditioning D = diag(exp(-alpha k_n)).
class NepProblem {
public:
    enum class AlphaScale { max_z, mean_z };

    NepProblem(CorrelationModel model, int N = 20, int K = 1000,
               AlphaScale scale = AlphaScale::max_z);

    const CorrelationModel& model() const { return model_; }
    int basis_size() const { return N_; }
    int quad_size() const { return K_; }
    double alpha() const { return alpha_; }
    double k(int n) const { return kn_[n]; }  // n in [0, N): k_{n+1} = pi(n+1)/omega_bar
    const std::vector<double>& k_all() const { return kn_; }
    double z_max() const { return z_max_; }

    /// Preconditioned matrix D T(lambda) D, bilinear Gram form.
    MatrixXcd assemble(cxd lambda) const;
    MatrixXd assemble_real(double lambda) const;

    /// Central-difference derivative dT/dlambda (diagnostic only).
    MatrixXcd assemble_derivative(cxd lambda, double h = 1e-6) const;

    /// || T~(lambda) c || / || c || for a preconditioned coefficient vector.
    double residual(cxd lambda, const VectorXcd& c_pre) const;

private:
    CorrelationModel model_;
    int N_, K_;
    double alpha_ = 0.0, z_max_ = 0.0;
    std::vector<double> kn_;
    QuadratureGrid grid_;
    std::vector<double> zg_;   // sin^2(Theta(phi_j)/2)
    MatrixXd se_;              // sin(k_n phi_j) * exp(k_n (Z_j - alpha))
};

/// One accepted nonlinear eigenpair. Coefficients are stored in physical
/// form (c_n multiplying sin(k_n phi) tan^{k_n}(theta/2) 2F1(...)); stable
/// preconditioned coefficients are recovered with the set's alpha.
struct Eigenpair {
    cxd lambda;
    cxd lambda_sq;
    VectorXcd coeffs;
    double residual = 0.0;
    double norm_constant = 0.0;
};

struct SolverConfig {
    enum class Method { scan, cheb_pencil, contour };
    Method method = Method::cheb_pencil;

    int M = 30;                 // eigenpairs requested
    int m = 100;                // Chebyshev degree
    double window_lo = 0.5;     // window in Re(Lambda^2)
    double window_hi = 0.0;     // 0 => sized so >= M eigenvalues fit

    double contour_center = 0.0;  // mu_0 in the Lambda^2 plane; 0 => auto
    double contour_radius = 3.0;  // R
    int contour_nodes = 500;      // L
    double contour_mu_max = 0.0;  // 0 => auto from the window

    double tol_rank = 1e-8;
    double tol_res = 1e-6;
    double beyn_accept_res = 1e-8;  // contour candidates need this residual
    double max_imag_lambda = 0.25;  // interpolation trust region in Im(lambda)
    double cluster_tol = 1e-3;      // double-root cluster radius in lambda

    int threads = 1;
};

/// Angular eigenfunction evaluator
///   Psi(phi, theta) = sum_n c_n sin(k_n phi) tan^{k_n}(theta/2)
///                     2F1(lambda, 1-lambda; 1+k_n; sin^2(theta/2)),
/// evaluated through the preconditioned coefficients for stability, with
/// per-n Chebyshev proxies of the hypergeometric factor.
class PsiFunction {
public:
    PsiFunction(const Eigenpair& pair, const std::vector<double>& kn, double alpha,
                double z_max);
    cxd operator()(double phi, double theta) const;

private:
    cxd lambda_;
    std::vector<double> kn_;
    double alpha_;
    VectorXcd c_pre_;
    std::vector<ChebyshevFit> f_;
    double z_hi_;
};

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// Local minimizers of lambda -> mu_min(T(lambda)) over the window, as
/// Lambda^2 values (ascending). Chebyshev surrogate of degree config.m,
/// refined on the exact function.
std::vector<double> solve_scan(const NepProblem& problem, const SolverConfig& config);

/// Chebyshev-interpolation linearization: colleague pencil of the degree-m
/// interpolant, QZ solve, residual and trust filtering, double-root cluster
/// averaging, weighted normalization.
std::vector<Eigenpair> solve_cheb_pencil(const NepProblem& problem,
                                         const SolverConfig& config);

struct Contour {
    double center;
    double radius;
};

/// Beyn contour-integral solver on one circle in the Lambda^2 plane.
/// Returns raw accepted candidates (not yet normalized/deduplicated).
std::vector<Eigenpair> solve_beyn(const NepProblem& problem, const Contour& contour,
                                  const SolverConfig& config);

/// Sweep of circles center mu0, mu0 + 2R, ... up to mu_max, deduplicated,
/// clustered and normalized.
std::vector<Eigenpair> sweep_beyn(const NepProblem& problem, const SolverConfig& config);

/// Rescales coefficients so the sin(theta)-weighted bilinear norm of Psi is
/// one; records the previous norm in norm_constant.
void normalize_eigenpair(Eigenpair& pair, const NepProblem& problem);

/// Weighted bilinear inner product <Psi_a, Psi_b>_{sin theta} over the wedge.
cxd psi_inner(const Eigenpair& a, const Eigenpair& b, const NepProblem& problem);

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

struct EigenpairSet {
    int version = 1;
    double rho_xy = 0.0, rho_xz = 0.0, rho_yz = 0.0;
    Vec3 drift = Vec3::Zero();
    int N = 0, K = 0;
    double alpha = 0.0;
    std::string method;
    std::vector<Eigenpair> pairs;

    CorrelationModel make_model() const;
};

EigenpairSet make_eigenpair_set(const NepProblem& problem, const SolverConfig& config,
                                std::vector<Eigenpair> pairs);

std::string to_json(const EigenpairSet& set);
EigenpairSet eigenpair_set_from_json(const std::string& text);
void save_eigenpair_set(const EigenpairSet& set, const std::string& path);
EigenpairSet load_eigenpair_set(const std::string& path);

/// Estimated window [0.5, s_hi] expected to contain at least M eigenvalues,
/// from the Weyl counting estimate for the wedge area.
double estimate_window_hi(const CorrelationModel& model, int M);

}  // namespace octgf
