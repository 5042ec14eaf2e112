// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "octgf/green.hpp"

namespace octgf {

/// Three-bank structural model with mutual liabilities.
struct BankNetwork {
    Vec3 assets = Vec3::Zero();
    Vec3 external_liabilities = Vec3::Zero();
    Eigen::Matrix3d mutual_liabilities = Eigen::Matrix3d::Zero();  // row i owes col j
    Vec3 recovery_rates = Vec3::Ones();
    Vec3 volatilities = Vec3::Zero();
    Vec3 growth_rates = Vec3::Zero();
    double rho_xy = 0.0, rho_xz = 0.0, rho_yz = 0.0;
    double horizon = 1.0;

    Vec3 interbank_assets() const;       // A-hat_i = sum_j L_ji
    Vec3 interbank_liabilities() const;  // L-hat_i = sum_j L_ij
    void validate() const;
};

BankNetwork bank_network_from_json(const std::string& text);
std::string to_json(const BankNetwork& net);

/// Default boundaries: continuous (pre-horizon, Black-Cox style) and
/// terminal (settlement) levels.
struct Boundaries {
    Vec3 continuous;  // Xi^<  = R_i (L_i + Lhat_i) - Ahat_i
    Vec3 terminal;    // Xi^=  = L_i + Lhat_i - Ahat_i
};

Boundaries default_boundaries(const BankNetwork& net);

/// Post-default-of-k boundary shifts for the surviving banks i != k:
/// (1 - R_i R_k) * L_ki before the horizon, (1 - R_k) * L_ki at the horizon.
double boundary_shift(const BankNetwork& net, int i, int k, bool at_horizon);

/// Reindexing of the two survivors after bank k defaults.
int survivor_index(int i, int k);          // phi^k
int survivor_index_inverse(int i, int k);  // psi^k

/// Clearing fractions omega in [0,1]^3 for terminal assets A_T
/// (fixed point of the settlement system, greatest clearing vector).
Vec3 settlement_solve(const BankNetwork& net, const Vec3& terminal_assets);

/// Normalized dimensionless frame.
struct CreditFrame {
    Vec3 start;        // X^i = (Sigma/sigma_i) ln(A_i / Xi_i^<)
    Vec3 xi;           // -sigma_i / (2 Sigma)
    Vec3 mu_terminal;  // (Sigma/sigma_i) ln(Xi^=/Xi^<) >= 0
    double sigma_bar;  // Sigma = (s1 s2 s3)^(1/3)
    double tau;        // Sigma^2 T
    Vec3 sigma;
    double horizon;
};

CreditFrame make_frame(const BankNetwork& net);

/// Correlation model carrying the frame's normalized drifts.
CorrelationModel frame_model(const BankNetwork& net, const CreditFrame& frame);

/// Joint survival by the ultraspherical expansion of the drift exponential
/// (nu = 1); mu_max extends automatically while the last term contributes
/// more than 1e-8, up to mu_cap.
double joint_survival_gegenbauer(const GreensFunctionModel& gfm,
                                 const CreditFrame& frame, double tau,
                                 int mu_max = 40, int mu_cap = 90, int nphi = 48,
                                 int nu = 48);

/// Joint survival by direct tensor quadrature of the drift-weighted density.
double joint_survival_direct(const GreensFunctionModel& gfm, const CreditFrame& frame,
                             double tau, int nr = 64, int nphi = 48, int nu = 48);

// ---------------------------------------------------------------------------
// CDS on the reference name, non-risky counterparties (1D Black-Cox)
// ---------------------------------------------------------------------------

/// First-passage probability P(tau_hit <= s) of unit-vol BM from x > 0 with
/// drift xi (barrier at 0), and the truncated mean E[min(tau_hit, s)].
double first_passage_cdf(double s, double x, double xi);
double expected_min_tau(double s, double x, double xi);

/// CDS value per unit notional at normalized time t and normalized RN
/// distance z; spread is per unit physical time, zero rates, continuous
/// premium, protection (1 - R) at default.
double cds_value_1d(const CreditFrame& frame, double t, double z, double spread,
                    double recovery_rn);

struct CdsParams {
    double spread = 0.01;
    double recovery_rn = 0.4;
    double recovery_ps = 0.4;
    double recovery_pb = 0.4;
};

struct CvaQuadrature {
    int nt = 32;
    int nr = 64;
    int ntheta = 32;
};

/// Credit/debt valuation adjustments through the analytic face derivative of
/// the Green's function. x <-> protection seller, y <-> protection buyer,
/// z <-> reference name.
double cva(const GreensFunctionModel& gfm, const CreditFrame& frame,
           const CdsParams& params, const CvaQuadrature& quad = {});
double dva(const GreensFunctionModel& gfm, const CreditFrame& frame,
           const CdsParams& params, const CvaQuadrature& quad = {});

// ---------------------------------------------------------------------------
// Merton comparison (default monitored at the horizon only)
// ---------------------------------------------------------------------------

/// Free-space correlated Gaussian transition density (normalized).
double merton_green(const CorrelationModel& model, double tau, const Vec3& p1,
                    const Vec3& p0);

/// P(omega = (1,1,1)) with settlement_solve applied pointwise to sampled
/// terminal assets.
double merton_survival(const BankNetwork& net, long n_draws = 4000000,
                       std::uint64_t seed = 20170630);

/// Deterministic trivariate standard-normal CDF (nested quadrature).
double trivariate_normal_cdf(const Vec3& upper, double r12, double r13, double r23);

/// Full continuous-monitoring pipeline: frame, eigenpair solve, Gegenbauer
/// survival.
struct LiptonSurvivalResult {
    double q = 0.0;
    double q_direct = 0.0;
    int modes = 0;
};
LiptonSurvivalResult lipton_survival_full(const BankNetwork& net, int N = 24,
                                          int K = 1000, int m = 100,
                                          int threads = 1);

// ---------------------------------------------------------------------------
// 1D volatility calibration
// ---------------------------------------------------------------------------

enum class CalibModel { black_cox, merton };

/// Model par spread for a standalone bank (barrier/face value at L).
double model_spread_1d(CalibModel model, double sigma, double assets,
                       double liabilities, double horizon, double recovery);

/// sigma solving model_spread_1d(sigma) = target_spread, bracketed bisection.
double calibrate_sigma_1d(double target_spread, CalibModel model, double assets,
                          double liabilities, double horizon, double recovery);

}  // namespace octgf
