// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace octgf {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Error raised when a numerical routine cannot meet its contract.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Composite trapezoidal grid on [a, b] with K nodes (K-1 intervals).
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureGrid trapezoid_grid(double a, double b, int K);

/// Composite trapezoid of f over [a, b] with K nodes. Throws numerical_error
/// on a non-finite integrand sample.
double trapezoid(const std::function<double(double)>& f, double a, double b, int K);

/// Gauss-Legendre nodes/weights on [-1, 1]; cached per n.
const QuadratureGrid& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureGrid gauss_legendre(int n, double a, double b);

// ---------------------------------------------------------------------------
// Chebyshev tools
// ---------------------------------------------------------------------------

/// Chebyshev interpolation proxy of a smooth complex-valued function on
/// [a, b], built on first-kind nodes with adaptive degree. Used to avoid
/// re-evaluating expensive special functions on dense quadrature grids.
class ChebyshevFit {
public:
    ChebyshevFit() = default;
    ChebyshevFit(const std::function<cxd(double)>& f, double a, double b,
                 double tol = 1e-13, int max_degree = 256);

    cxd operator()(double x) const;  // Clenshaw evaluation
    int degree() const { return static_cast<int>(coef_.size()) - 1; }
    double a() const { return a_; }
    double b() const { return b_; }
    /// Max tail coefficient magnitude relative to the largest coefficient.
    double tail_estimate() const { return tail_; }

private:
    std::vector<cxd> coef_;
    double a_ = -1.0, b_ = 1.0, tail_ = 0.0;
};

/// Coefficients of the degree-m Chebyshev interpolant of f on [a, b]
/// sampled at first-kind nodes; f returns a dense matrix per sample.
std::vector<MatrixXd> chebyshev_matrix_coeffs(
    const std::function<MatrixXd(double)>& f, double a, double b, int m);

/// Real roots of a Chebyshev series sum_j c_j T_j(x) on [-1,1] via the
/// colleague matrix; |imag| below im_tol accepted.
std::vector<double> chebyshev_series_roots(const std::vector<double>& c,
                                           double im_tol = 1e-8);

// ---------------------------------------------------------------------------
// Scalar root finding / minimization
// ---------------------------------------------------------------------------

/// Bracketed root of a monotone continuous function: bisection refined by
/// secant steps. Requires f(a) and f(b) of opposite sign.
double bisect_secant(const std::function<double(double)>& f, double a, double b,
                     double xtol = 1e-14, int max_iter = 200);

/// Golden-section/parabolic minimization on [a, b] (Brent).
double brent_minimize(const std::function<double(double)>& f, double a, double b,
                      double xtol = 1e-10, int max_iter = 200);

// ---------------------------------------------------------------------------
// Dense linear algebra contracts (backed by Eigen / LAPACK)
// ---------------------------------------------------------------------------

struct SvdResult {
    MatrixXcd U;
    VectorXd S;   // nonincreasing
    MatrixXcd V;  // A = U * diag(S) * V^H
};

SvdResult svd(const MatrixXcd& A);

struct GeneralizedEigResult {
    VectorXcd values;            // finite eigenvalues only
    MatrixXcd vectors;           // columns match values
};

/// Eigenpairs of the real pencil (A, B): A x = lambda B x. Infinite
/// eigenvalues (beta ~ 0) are dropped.
GeneralizedEigResult eig_generalized(const MatrixXd& A, const MatrixXd& B,
                                     bool with_vectors = true);

/// Standard dense complex eigenproblem.
GeneralizedEigResult eig(const MatrixXcd& A);

/// Cholesky factor of a symmetric matrix; std::nullopt when not positive
/// definite (this failure signal is used by the eigenvalue scan).
std::optional<MatrixXd> cholesky(const MatrixXd& A);

/// Linear solve A X = B for complex dense A.
MatrixXcd solve(const MatrixXcd& A, const MatrixXcd& B);

/// Smallest eigenvalue of a symmetric matrix by Cholesky bisection on shifts.
double min_eig_sym(const MatrixXd& A, double tol = 1e-13);

// ---------------------------------------------------------------------------
// Deterministic parallel map
// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written into caller-owned slots indexed by i, so the outcome does not
/// depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace octgf
