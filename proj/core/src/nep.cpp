// SPDX-License-Identifier: Apache-2.0
#include "octgf/nep.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "octgf/specfun.hpp"

namespace octgf {

namespace {

cxd lambda_of_s(cxd s) { return 0.5 + std::sqrt(0.25 + s); }

// Chebyshev proxy of z -> 2F1(lambda, 1-lambda; 1+k; z) over [0, z_hi];
// falls back to an exact-evaluation marker when the fit cannot converge.
ChebyshevFit make_f_proxy(cxd lambda, double k, double z_hi, bool* exact) {
    if (z_hi < 1e-12) {
        *exact = true;
        return {};
    }
    ChebyshevFit fit([&](double z) { return hyp2f1_lambda(lambda, k, z); }, 0.0, z_hi,
                     5e-14, 256);
    *exact = fit.tail_estimate() > 1e-10;
    return fit;
}

}  // namespace

NepProblem::NepProblem(CorrelationModel model, int N, int K, AlphaScale scale)
    : model_(std::move(model)), N_(N), K_(K) {
    if (N_ < 1) throw std::invalid_argument("NepProblem: N >= 1 required");
    if (K_ < 2 * N_) throw std::invalid_argument("NepProblem: K >= 2N required");
    grid_ = trapezoid_grid(0.0, model_.omega_bar(), K_);
    kn_.resize(N_);
    for (int n = 0; n < N_; ++n) kn_[n] = M_PI * (n + 1) / model_.omega_bar();
    std::vector<double> Z(K_);
    double zsum = 0.0, zmax = -1e300;
    for (int j = 0; j < K_; ++j) {
        Z[j] = model_.z_boundary(grid_.nodes[j]);
        zsum += Z[j];
        zmax = std::max(zmax, Z[j]);
    }
    alpha_ = (scale == AlphaScale::max_z) ? zmax : zsum / K_;
    zg_.resize(K_);
    z_max_ = 0.0;
    for (int j = 0; j < K_; ++j) {
        const double e2 = std::exp(2.0 * Z[j]);
        zg_[j] = e2 / (1.0 + e2);
        z_max_ = std::max(z_max_, zg_[j]);
    }
    se_.resize(N_, K_);
    for (int n = 0; n < N_; ++n)
        for (int j = 0; j < K_; ++j)
            se_(n, j) = std::sin(kn_[n] * grid_.nodes[j]) *
                        std::exp(kn_[n] * (Z[j] - alpha_));
}

MatrixXcd NepProblem::assemble(cxd lambda) const {
    // N hypergeometric profiles per lambda (not N^2): each basis function is
    // evaluated once on the K-grid, then combined as a Gram matrix.
    MatrixXcd G(N_, K_);
    const bool use_proxy = K_ > 96;
    for (int n = 0; n < N_; ++n) {
        bool exact = !use_proxy;
        ChebyshevFit fit;
        if (use_proxy) fit = make_f_proxy(lambda, kn_[n], z_max_, &exact);
        for (int j = 0; j < K_; ++j) {
            const cxd F = exact ? hyp2f1_lambda(lambda, kn_[n], zg_[j]) : fit(zg_[j]);
            G(n, j) = se_(n, j) * F;
        }
    }
    MatrixXcd W = G;
    for (int j = 0; j < K_; ++j) W.col(j) *= grid_.weights[j];
    return W * G.transpose();  // bilinear: no conjugation
}

MatrixXd NepProblem::assemble_real(double lambda) const {
    return assemble(cxd(lambda)).real();
}

MatrixXcd NepProblem::assemble_derivative(cxd lambda, double h) const {
    return (assemble(lambda + h) - assemble(lambda - h)) / (2.0 * h);
}

double NepProblem::residual(cxd lambda, const VectorXcd& c_pre) const {
    const double nc = c_pre.norm();
    if (nc == 0.0) return std::numeric_limits<double>::infinity();
    return (assemble(lambda) * c_pre).norm() / nc;
}

// ---------------------------------------------------------------------------
// PsiFunction
// ---------------------------------------------------------------------------

PsiFunction::PsiFunction(const Eigenpair& pair, const std::vector<double>& kn,
                         double alpha, double z_max)
    : lambda_(pair.lambda), kn_(kn), alpha_(alpha), z_hi_(std::max(z_max, 1e-6)) {
    const int N = static_cast<int>(kn_.size());
    c_pre_.resize(N);
    for (int n = 0; n < N; ++n)
        c_pre_[n] = pair.coeffs[n] * std::exp(alpha_ * kn_[n]);
    f_.reserve(N);
    for (int n = 0; n < N; ++n)
        f_.emplace_back([&, n](double z) { return hyp2f1_lambda(lambda_, kn_[n], z); },
                        0.0, z_hi_, 5e-14, 256);
}

cxd PsiFunction::operator()(double phi, double theta) const {
    if (theta <= 0.0) return cxd(0.0);
    const double z = std::pow(std::sin(0.5 * theta), 2);
    const double zeta = std::log(std::tan(0.5 * theta));
    cxd sum(0.0);
    for (size_t n = 0; n < kn_.size(); ++n) {
        const double k = kn_[n];
        const cxd F = (z <= z_hi_) ? f_[n](z) : hyp2f1_lambda(lambda_, k, z);
        sum += c_pre_[n] * std::sin(k * phi) * std::exp(k * (zeta - alpha_)) * F;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Weighted inner products / normalization
// ---------------------------------------------------------------------------

namespace {

// Bilinear <Psi_a, Psi_b> sin(theta) over the wedge by tensor Gauss
// quadrature on the smooth map theta = u * Theta(phi).
cxd psi_inner_impl(const PsiFunction& pa, const PsiFunction& pb,
                   const CorrelationModel& model, int nphi = 64, int nu = 64) {
    const auto gphi = gauss_legendre(nphi, 0.0, model.omega_bar());
    const auto& gu = gauss_legendre(nu);
    cxd acc(0.0);
    for (int i = 0; i < nphi; ++i) {
        const double phi = gphi.nodes[i];
        const double Th = model.theta_boundary(phi);
        cxd inner(0.0);
        for (int j = 0; j < nu; ++j) {
            const double u = 0.5 * (gu.nodes[j] + 1.0);
            const double wu = 0.5 * gu.weights[j];
            const double th = u * Th;
            inner += wu * std::sin(th) * pa(phi, th) * pb(phi, th);
        }
        acc += gphi.weights[i] * Th * inner;
    }
    return acc;
}

}  // namespace

cxd psi_inner(const Eigenpair& a, const Eigenpair& b, const NepProblem& problem) {
    PsiFunction pa(a, problem.k_all(), problem.alpha(), problem.z_max());
    PsiFunction pb(b, problem.k_all(), problem.alpha(), problem.z_max());
    return psi_inner_impl(pa, pb, problem.model());
}

void normalize_eigenpair(Eigenpair& pair, const NepProblem& problem) {
    const cxd I = psi_inner(pair, pair, problem);
    if (std::abs(I) < 1e-28)
        throw numerical_error("normalize_eigenpair: degenerate eigenvector");
    const cxd scale = std::sqrt(I);
    pair.norm_constant = std::abs(scale);
    pair.coeffs /= scale;
}

// ---------------------------------------------------------------------------
// Candidate post-processing shared by the pencil and contour solvers
// ---------------------------------------------------------------------------

namespace {

struct Candidate {
    cxd lambda;
    VectorXcd vec_pre;  // preconditioned coefficients (may be empty)
    double residual;
};

VectorXcd physical_coeffs(const VectorXcd& c_pre, const NepProblem& p) {
    VectorXcd c = c_pre;
    for (int n = 0; n < p.basis_size(); ++n) c[n] *= std::exp(-p.alpha() * p.k(n));
    return c;
}

// Fold to the upper half plane, cluster split double roots, average cluster
// members, and emit ceil(size/2) eigenpairs per cluster with eigenvectors
// from the null space of T(lambda*), orthogonalized in the weighted inner
// product for true multiplicities.
std::vector<Eigenpair> finalize_candidates(std::vector<Candidate> cands,
                                           const NepProblem& problem,
                                           const SolverConfig& config) {
    for (auto& c : cands)
        if (c.lambda.imag() < 0.0) c.lambda = std::conj(c.lambda);
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
        if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
        return x.lambda.imag() < y.lambda.imag();
    });
    std::vector<std::vector<Candidate>> clusters;
    for (auto& c : cands) {
        if (!clusters.empty() &&
            std::abs(c.lambda - clusters.back().back().lambda) < config.cluster_tol)
            clusters.back().push_back(c);
        else
            clusters.push_back({c});
    }
    std::vector<Eigenpair> out;
    for (auto& cl : clusters) {
        cxd lam(0.0);
        for (const auto& c : cl) lam += c.lambda;
        lam /= static_cast<double>(cl.size());
        if (lam.imag() < 0.0) lam = std::conj(lam);
        const int mult = static_cast<int>((cl.size() + 1) / 2);
        const MatrixXcd T = problem.assemble(lam);
        const SvdResult sv = svd(T);
        const int N = problem.basis_size();

        std::vector<Eigenpair> group;
        for (int t = 0; t < mult; ++t) {
            VectorXcd v;
            if (mult == 1 && cl[0].vec_pre.size() == N) {
                // one inverse-iteration refinement of the solver's vector
                try {
                    v = solve(T, cl[0].vec_pre);
                    v /= v.norm();
                } catch (const numerical_error&) {
                    v = sv.V.col(N - 1);
                }
            } else {
                v = sv.V.col(N - 1 - t);
            }
            Eigenpair ep;
            ep.lambda = lam;
            ep.lambda_sq = lam * (lam - 1.0);
            ep.coeffs = physical_coeffs(v, problem);
            ep.residual = problem.residual(lam, v);
            group.push_back(std::move(ep));
        }
        // weighted modified Gram-Schmidt inside the degenerate group
        for (size_t i = 0; i < group.size(); ++i) {
            for (size_t j = 0; j < i; ++j) {
                const cxd proj = psi_inner(group[i], group[j], problem);
                group[i].coeffs -= proj * group[j].coeffs;
            }
            normalize_eigenpair(group[i], problem);
            // re-evaluate residual on the orthogonalized vector
            VectorXcd c_pre = group[i].coeffs;
            for (int n = 0; n < N; ++n) c_pre[n] *= std::exp(problem.alpha() * problem.k(n));
            group[i].residual = problem.residual(lam, c_pre);
        }
        for (auto& ep : group) out.push_back(std::move(ep));
    }
    std::sort(out.begin(), out.end(), [](const Eigenpair& a, const Eigenpair& b) {
        return a.lambda_sq.real() < b.lambda_sq.real();
    });
    if (static_cast<int>(out.size()) > config.M) out.resize(config.M);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scan solver
// ---------------------------------------------------------------------------

std::vector<double> solve_scan(const NepProblem& problem, const SolverConfig& config) {
    const double s_lo = config.window_lo;
    const double s_hi = config.window_hi > 0.0
                            ? config.window_hi
                            : estimate_window_hi(problem.model(), config.M);
    const double la = lambda_of_s(s_lo).real(), lb = lambda_of_s(s_hi).real();
    const int m = config.m;
    // surrogate samples at first-kind Chebyshev nodes
    std::vector<double> vals(m + 1);
    std::vector<double> xs(m + 1);
    parallel_for(m + 1, config.threads, [&](int k) {
        xs[k] = std::cos(M_PI * (k + 0.5) / (m + 1));
        const double lam = 0.5 * (la + lb) + 0.5 * (lb - la) * xs[k];
        vals[k] = min_eig_sym(problem.assemble_real(lam));
    });
    std::vector<double> coef(m + 1, 0.0);
    for (int j = 0; j <= m; ++j) {
        double s = 0.0;
        for (int k = 0; k <= m; ++k) s += vals[k] * std::cos(j * M_PI * (k + 0.5) / (m + 1));
        coef[j] = 2.0 / (m + 1) * s;
    }
    coef[0] *= 0.5;
    // derivative series in the mapped variable
    std::vector<double> dcoef(m, 0.0);
    {
        std::vector<double> d(m + 2, 0.0);
        for (int j = m; j >= 1; --j) {
            d[j - 1] = d[j + 1] + 2.0 * j * coef[j];
        }
        d[0] *= 0.5;
        dcoef.assign(d.begin(), d.begin() + m);
    }
    const auto roots = chebyshev_series_roots(dcoef);
    auto mu_of_x = [&](double x) {
        const double lam = 0.5 * (la + lb) + 0.5 * (lb - la) * x;
        return min_eig_sym(problem.assemble_real(lam));
    };
    auto series_val = [&](double x) {
        double b1 = 0, b2 = 0;
        for (int j = m; j >= 1; --j) {
            const double t = 2 * x * b1 - b2 + coef[j];
            b2 = b1;
            b1 = t;
        }
        return x * b1 - b2 + coef[0];
    };
    std::vector<double> out;
    const double dx = 2e-3;
    for (double x : roots) {
        // minima only
        const double f0 = series_val(std::max(-1.0, x - dx));
        const double f1 = series_val(x);
        const double f2 = series_val(std::min(1.0, x + dx));
        if (!(f1 <= f0 && f1 <= f2)) continue;
        // refine on the exact function
        double xa = std::max(-1.0, x - 5e-3), xb = std::min(1.0, x + 5e-3);
        double xm = brent_minimize(mu_of_x, xa, xb, 1e-12);
        // Two-sided line fit of sqrt(mu) around the minimum. Exact zeros make
        // mu locally quadratic, so sqrt(mu) is a V whose vertex intersection
        // recovers the eigenvalue to near machine precision; smooth positive
        // minima are even in the offset and the intersection still cancels
        // the leading Brent error.
        {
            const double h = 2e-5;
            const double y1 = std::sqrt(std::max(mu_of_x(xm - 2 * h), 0.0));
            const double y2 = std::sqrt(std::max(mu_of_x(xm - h), 0.0));
            const double y3 = std::sqrt(std::max(mu_of_x(xm + h), 0.0));
            const double y4 = std::sqrt(std::max(mu_of_x(xm + 2 * h), 0.0));
            const double sl = (y2 - y1) / h;
            const double sr = (y4 - y3) / h;
            if (sl < 0.0 && sr > 0.0) {
                const double bl = y2 + sl * h, br = y3 - sr * h;  // values at xm
                const double xv = (br - bl) / (sl - sr);
                if (std::abs(xv) < 4 * h) xm += xv;
            }
        }
        const double lam = 0.5 * (la + lb) + 0.5 * (lb - la) * xm;
        out.push_back(lam * (lam - 1.0));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Chebyshev pencil solver
// ---------------------------------------------------------------------------

namespace {

std::vector<Candidate> pencil_candidates(const NepProblem& problem,
                                         const SolverConfig& config, double s_lo,
                                         double s_hi) {
    const double la = lambda_of_s(s_lo).real(), lb = lambda_of_s(s_hi).real();
    const int N = problem.basis_size();
    const int m = config.m;
    std::vector<MatrixXd> samples(m + 1);
    parallel_for(m + 1, config.threads, [&](int k) {
        const double x = std::cos(M_PI * (k + 0.5) / (m + 1));
        samples[k] = problem.assemble_real(0.5 * (la + lb) + 0.5 * (lb - la) * x);
    });
    // background near-singularity level of the Gram basis: the residual of a
    // physical eigenpair must undercut this by a clear margin, spurious
    // pencil roots cannot
    std::vector<double> svals;
    for (int k = 0; k <= m; k += std::max(1, m / 6)) {
        Eigen::JacobiSVD<MatrixXd> sv(samples[k]);
        svals.push_back(sv.singularValues()(N - 1));
    }
    std::nth_element(svals.begin(), svals.begin() + svals.size() / 2, svals.end());
    const double background = svals[svals.size() / 2];

    std::vector<MatrixXd> A(m + 1, MatrixXd::Zero(N, N));
    for (int j = 0; j <= m; ++j) {
        for (int k = 0; k <= m; ++k)
            A[j] += std::cos(j * M_PI * (k + 0.5) / (m + 1)) * samples[k];
        A[j] *= 2.0 / (m + 1);
    }
    A[0] *= 0.5;
    // drop the numerically negligible trailing coefficients (assembly noise
    // plateau): the interpolant is unchanged at working precision and the
    // pencil stays small and well scaled
    std::vector<double> norms(m + 1);
    double amax = 0.0;
    for (int j = 0; j <= m; ++j) {
        norms[j] = A[j].cwiseAbs().maxCoeff();
        amax = std::max(amax, norms[j]);
    }
    // Noise-floor-aware truncation: the coefficients decay superexponentially
    // (T is entire in lambda) down to an assembly-noise plateau; cut the
    // whole plateau but none of the signal.
    double floor_est = 0.0;
    {
        std::vector<double> tailv(norms.end() - std::min(m + 1, 6), norms.end());
        std::nth_element(tailv.begin(), tailv.begin() + tailv.size() / 2, tailv.end());
        floor_est = tailv[tailv.size() / 2];
    }
    const double cut = std::max({20.0 * floor_est, 1e-14 * amax, 1e-300});
    int meff = m;
    while (meff > 2) {
        double tail = 0.0;
        for (int j = meff; j <= m; ++j) tail = std::max(tail, norms[j]);
        if (tail <= cut) --meff;
        else break;
    }
    if (std::getenv("OCTGF_DEBUG_PENCIL")) {
        std::fprintf(stderr, "meff=%d amax=%.3e cut=%.3e background=%.3e norms:", meff,
                     amax, cut, background);
        for (int j = 0; j <= m; j += std::max(1, m / 25))
            std::fprintf(stderr, " %.1e", norms[j]);
        std::fprintf(stderr, "\n");
    }

    const int dim = meff * N;
    MatrixXd P = MatrixXd::Zero(dim, dim), B = MatrixXd::Zero(dim, dim);
    B.block(0, 0, N, N) = A[meff];
    for (int i = 1; i < meff; ++i) B.block(i * N, i * N, N, N) = MatrixXd::Identity(N, N);
    // first block row
    P.block(0, 0, N, N) = -0.5 * A[meff - 1];
    if (meff >= 2) P.block(0, N, N, N) = 0.5 * (A[meff] - A[meff - 2]);
    for (int j = 2; j < meff; ++j) P.block(0, j * N, N, N) = -0.5 * A[meff - 1 - j];
    // interior recurrence rows
    for (int i = 1; i < meff - 1; ++i) {
        P.block(i * N, (i - 1) * N, N, N) = 0.5 * MatrixXd::Identity(N, N);
        P.block(i * N, (i + 1) * N, N, N) = 0.5 * MatrixXd::Identity(N, N);
    }
    // last row: lambda T_0 = T_1
    P.block((meff - 1) * N, (meff - 2) * N, N, N) = MatrixXd::Identity(N, N);

    GeneralizedEigResult eg = eig_generalized(P, B, false);

    // Acceptance: inside the window away from the interpolation edges, small
    // imaginary part, and sigma_min(T(lambda)) far below the near-null
    // background of the Gram basis. The eigenvalues come out of the QZ to
    // near machine precision, so a physical root collapses sigma_min by
    // several orders; spurious roots stay at the background level. The
    // eigenvector is the corresponding null direction.
    const double margin = 0.015 * (lb - la);
    const double r_accept = std::min(config.tol_res, 0.02 * background);
    std::vector<Candidate> cands;
    for (int i = 0; i < eg.values.size(); ++i) {
        const cxd x = eg.values[i];
        const cxd lam = 0.5 * (la + lb) + 0.5 * (lb - la) * x;
        if (!(lam.real() > la + margin && lam.real() < lb - margin)) continue;
        if (std::abs(lam.imag()) > config.max_imag_lambda) continue;
        const SvdResult sv = svd(problem.assemble(lam));
        const double r = sv.S(N - 1);
        if (std::getenv("OCTGF_DEBUG_PENCIL"))
            std::fprintf(stderr, "cand lam=(%.6f,%.6f) smin=%.3e accept=%d (thr %.3e)\n",
                         lam.real(), lam.imag(), r, r <= r_accept, r_accept);
        if (r <= r_accept) cands.push_back({lam, sv.V.col(N - 1), r});
    }
    return cands;
}

}  // namespace

std::vector<Eigenpair> solve_cheb_pencil(const NepProblem& problem,
                                         const SolverConfig& config) {
    const double s_lo = config.window_lo;
    double s_hi = config.window_hi > 0.0
                      ? config.window_hi
                      : estimate_window_hi(problem.model(), config.M);
    for (int attempt = 0; attempt < 3; ++attempt) {
        auto cands = pencil_candidates(problem, config, s_lo, s_hi);
        auto out = finalize_candidates(std::move(cands), problem, config);
        if (static_cast<int>(out.size()) >= config.M || config.window_hi > 0.0 ||
            attempt == 2)
            return out;
        s_hi *= 1.7;  // auto window was too small
    }
    return {};
}

// ---------------------------------------------------------------------------
// Beyn contour solver
// ---------------------------------------------------------------------------

std::vector<Eigenpair> solve_beyn(const NepProblem& problem, const Contour& contour,
                                  const SolverConfig& config) {
    const int N = problem.basis_size();
    const int L = config.contour_nodes;
    const double mu = contour.center, R = contour.radius;

    // factorized T(z_j); z conjugate-symmetric, so only half the assemblies
    std::vector<MatrixXcd> Tinv(L);
    const int half = L / 2;
    parallel_for(half + 1, config.threads, [&](int j) {
        const cxd z = mu + R * std::exp(cxd(0.0, 2.0 * M_PI * j / L));
        const MatrixXcd T = problem.assemble(lambda_of_s(z));
        Tinv[j] = solve(T, MatrixXcd::Identity(N, N));
    });
    for (int j = half + 1; j < L; ++j) Tinv[j] = Tinv[L - j].conjugate();

    double xscale = 0.0;
    for (const auto& X : Tinv) xscale = std::max(xscale, X.norm());

    for (int l = 1; l <= N; ++l) {
        MatrixXcd A0 = MatrixXcd::Zero(N, l), A1s = MatrixXcd::Zero(N, l);
        for (int j = 0; j < L; ++j) {
            const cxd e1 = std::exp(cxd(0.0, 2.0 * M_PI * j / L));
            const MatrixXcd X = Tinv[j].leftCols(l);
            A0 += (R / L) * e1 * X;
            A1s += (R * R / L) * e1 * e1 * X;
        }
        if (A0.norm() < 1e-10 * xscale) return {};  // no eigenvalues enclosed
        const SvdResult sv = svd(A0);
        int k = 0;
        for (int i = 0; i < sv.S.size(); ++i)
            if (sv.S[i] > config.tol_rank * sv.S[0]) ++k;
        if (k == l && l < N) continue;  // probe too narrow; grow l
        if (k == l && l == N)
            throw numerical_error(
                "solve_beyn: contour likely encloses >= N eigenvalues; shrink R");
        const MatrixXcd V0 = sv.U.leftCols(k);
        const MatrixXcd W0 = sv.V.leftCols(k);
        MatrixXcd B = V0.adjoint() * A1s * W0;
        for (int i = 0; i < k; ++i) B.col(i) /= sv.S[i];
        const GeneralizedEigResult eg = eig(B);
        std::vector<Eigenpair> out;
        for (int i = 0; i < eg.values.size(); ++i) {
            const cxd e = eg.values[i];
            if (std::abs(e) >= R * (1.0 - 1e-12)) continue;  // strictly inside
            const cxd s = mu + e;
            const cxd lam = lambda_of_s(s);
            if (std::abs(lam.imag()) > config.max_imag_lambda) continue;
            VectorXcd v = V0 * eg.vectors.col(i);
            v /= v.norm();
            const double r = problem.residual(lam, v);
            if (r > config.beyn_accept_res) continue;
            Eigenpair ep;
            ep.lambda = lam;
            ep.lambda_sq = s;
            ep.coeffs = v;  // preconditioned; finalize converts
            ep.residual = r;
            out.push_back(std::move(ep));
        }
        return out;
    }
    return {};
}

std::vector<Eigenpair> sweep_beyn(const NepProblem& problem, const SolverConfig& config) {
    const double R = config.contour_radius;
    const double s_lo = config.window_lo;
    const double mu_max = config.contour_mu_max > 0.0
                              ? config.contour_mu_max
                              : estimate_window_hi(problem.model(), config.M);
    double mu = config.contour_center > 0.0 ? config.contour_center : s_lo + R;

    std::vector<Candidate> cands;
    auto absorb = [&](const std::vector<Eigenpair>& got) {
        for (const auto& ep : got) {
            bool dup = false;
            for (const auto& c : cands)
                if (std::abs(ep.lambda_sq - c.lambda * (c.lambda - 1.0)) < 1e-6 ||
                    std::abs(std::conj(ep.lambda_sq) - c.lambda * (c.lambda - 1.0)) < 1e-6)
                    dup = true;  // overlap region duplicate
            if (!dup) cands.push_back({ep.lambda, ep.coeffs, ep.residual});
        }
    };
    while (mu <= mu_max) {
        try {
            absorb(solve_beyn(problem, {mu, R}, config));
        } catch (const numerical_error&) {
            // subdivide once before giving up
            absorb(solve_beyn(problem, {mu - 0.5 * R, 0.5 * R}, config));
            absorb(solve_beyn(problem, {mu + 0.5 * R, 0.5 * R}, config));
        }
        mu += 2.0 * R;
    }
    return finalize_candidates(std::move(cands), problem, config);
}

// ---------------------------------------------------------------------------
// Window estimate
// ---------------------------------------------------------------------------

double estimate_window_hi(const CorrelationModel& model, int M) {
    // Weyl counting estimate: N(s) ~ Area(Omega) * s / (4 pi)
    const auto g = gauss_legendre(64, 0.0, model.omega_bar());
    double area = 0.0;
    for (int i = 0; i < g.size(); ++i)
        area += g.weights[i] * (1.0 - std::cos(model.theta_boundary(g.nodes[i])));
    const double s_hi = 4.0 * M_PI * (M + 6) * 1.35 / area;
    return std::max(s_hi, 30.0);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

CorrelationModel EigenpairSet::make_model() const {
    return CorrelationModel(rho_xy, rho_xz, rho_yz, drift);
}

EigenpairSet make_eigenpair_set(const NepProblem& problem, const SolverConfig& config,
                                std::vector<Eigenpair> pairs) {
    EigenpairSet set;
    set.rho_xy = problem.model().rho_xy();
    set.rho_xz = problem.model().rho_xz();
    set.rho_yz = problem.model().rho_yz();
    set.drift = problem.model().drift();
    set.N = problem.basis_size();
    set.K = problem.quad_size();
    set.alpha = problem.alpha();
    switch (config.method) {
        case SolverConfig::Method::scan: set.method = "scan"; break;
        case SolverConfig::Method::cheb_pencil: set.method = "cheb_pencil"; break;
        case SolverConfig::Method::contour: set.method = "contour"; break;
    }
    set.pairs = std::move(pairs);
    return set;
}

std::string to_json(const EigenpairSet& set) {
    nlohmann::json j;
    j["format"] = "octgf-eigenpairs";
    j["version"] = set.version;
    j["model"] = {{"rho_xy", set.rho_xy},
                  {"rho_xz", set.rho_xz},
                  {"rho_yz", set.rho_yz},
                  {"drift", {set.drift[0], set.drift[1], set.drift[2]}}};
    j["N"] = set.N;
    j["K"] = set.K;
    j["alpha"] = set.alpha;
    j["method"] = set.method;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : set.pairs) {
        nlohmann::json jp;
        jp["lambda"] = {p.lambda.real(), p.lambda.imag()};
        jp["lambda_sq"] = {p.lambda_sq.real(), p.lambda_sq.imag()};
        jp["residual"] = p.residual;
        jp["norm_constant"] = p.norm_constant;
        nlohmann::json c = nlohmann::json::array();
        for (int n = 0; n < p.coeffs.size(); ++n)
            c.push_back({p.coeffs[n].real(), p.coeffs[n].imag()});
        jp["coeffs"] = std::move(c);
        pairs.push_back(std::move(jp));
    }
    j["pairs"] = std::move(pairs);
    return j.dump(2);
}

EigenpairSet eigenpair_set_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "octgf-eigenpairs")
        throw std::invalid_argument("eigenpair file: unrecognized format field");
    EigenpairSet set;
    set.version = j.at("version").get<int>();
    if (set.version != 1)
        throw std::invalid_argument("eigenpair file: unsupported version");
    const auto& jm = j.at("model");
    set.rho_xy = jm.at("rho_xy").get<double>();
    set.rho_xz = jm.at("rho_xz").get<double>();
    set.rho_yz = jm.at("rho_yz").get<double>();
    const auto& jd = jm.at("drift");
    set.drift = Vec3(jd[0].get<double>(), jd[1].get<double>(), jd[2].get<double>());
    set.N = j.at("N").get<int>();
    set.K = j.at("K").get<int>();
    set.alpha = j.at("alpha").get<double>();
    set.method = j.value("method", "");
    for (const auto& jp : j.at("pairs")) {
        Eigenpair p;
        p.lambda = cxd(jp.at("lambda")[0].get<double>(), jp.at("lambda")[1].get<double>());
        p.lambda_sq =
            cxd(jp.at("lambda_sq")[0].get<double>(), jp.at("lambda_sq")[1].get<double>());
        p.residual = jp.at("residual").get<double>();
        p.norm_constant = jp.at("norm_constant").get<double>();
        const auto& jc = jp.at("coeffs");
        p.coeffs.resize(jc.size());
        for (size_t n = 0; n < jc.size(); ++n)
            p.coeffs[static_cast<long>(n)] = cxd(jc[n][0].get<double>(), jc[n][1].get<double>());
        set.pairs.push_back(std::move(p));
    }
    return set;
}

void save_eigenpair_set(const EigenpairSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << to_json(set) << "\n";
}

EigenpairSet load_eigenpair_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return eigenpair_set_from_json(ss.str());
}

}  // namespace octgf
