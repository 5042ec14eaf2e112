// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>

namespace octgf {

using cxd = std::complex<double>;

// ---------------------------------------------------------------------------
// Gamma family
// ---------------------------------------------------------------------------

/// Complex gamma function (Lanczos approximation, reflection for Re z < 1/2).
/// Throws std::domain_error at nonpositive-integer poles.
cxd gamma_fn(cxd z);

/// Principal branch of ln Gamma(z) without spurious 2*pi*i jumps for the
/// argument ranges used here (Re z > 0 or via reflection).
cxd loggamma(cxd z);

/// Complex digamma function.
cxd digamma(cxd z);

// ---------------------------------------------------------------------------
// Gauss hypergeometric function
// ---------------------------------------------------------------------------

/// 2F1(a, b; c; z) for complex parameters and real z < 1.
///
/// Evaluation: power series for z <= 1/2 (and for terminating or
/// near-terminating a/b), the c-a-b linear transformation on (1/2, 1)
/// with the logarithmic variant when c-a-b is (close to) an integer,
/// and the Pfaff map for z < 0.
cxd gauss_2f1(cxd a, cxd b, cxd c, double z);

/// The paper family F(lambda, 1-lambda; 1+k; z) with k > 0, z in [0, 1).
cxd hyp2f1_lambda(cxd lambda, double k, double z);

// ---------------------------------------------------------------------------
// Bessel
// ---------------------------------------------------------------------------

/// Modified Bessel function of the first kind, complex order nu
/// (Re nu >= 0 expected), real argument x >= 0.
/// scaled == true returns exp(-x) * I_nu(x).
cxd bessel_i(cxd nu, double x, bool scaled = false);

// ---------------------------------------------------------------------------
// Generalized hypergeometric 3F3
// ---------------------------------------------------------------------------

/// 3F3(a1,a2,a3; b1,b2,b3; z) by term-ratio recurrence. Throws
/// numerical_error when more than max_terms are needed (caller falls back
/// to direct quadrature of the radial integral).
cxd hyp_3f3(const std::array<cxd, 3>& a, const std::array<cxd, 3>& b, double z,
            int max_terms = 10000);

// ---------------------------------------------------------------------------
// Orthogonal polynomials
// ---------------------------------------------------------------------------

/// Chebyshev polynomial of the second kind via three-term recurrence.
double chebyshev_u(int l, double x);

/// U_l(x) through the explicit finite sum with floor(l/2) terms.
double chebyshev_u_sum(int l, double x);

/// Gegenbauer (ultraspherical) polynomial C_k^nu(x) via recurrence.
double gegenbauer_c(int k, double nu, double x);

// ---------------------------------------------------------------------------
// Poeschl-Teller solutions
// ---------------------------------------------------------------------------

struct PoschlTellerSolutions {
    cxd even;      // Upsilon_e, = 1 at zeta = 0
    cxd odd;       // Upsilon_o, = 0 at zeta = 0
    cxd decaying;  // solution decaying as zeta -> -inf (normalization c = 1)
};

/// Fundamental solutions of Upsilon'' = (k^2 - lambda(lambda-1)/cosh^2)
/// Upsilon; used to cross-validate the angular building blocks.
PoschlTellerSolutions poschl_teller(cxd lambda, double k, double zeta);

// ---------------------------------------------------------------------------
// Gaussian distribution helpers
// ---------------------------------------------------------------------------

double norm_pdf(double x);
double norm_cdf(double x);

}  // namespace octgf
