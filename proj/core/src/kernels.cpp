// SPDX-License-Identifier: Apache-2.0
#include "octgf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>


namespace octgf {

QuadratureGrid trapezoid_grid(double a, double b, int K) {
    if (K < 2) throw std::invalid_argument("trapezoid_grid: K >= 2 required");
    QuadratureGrid g;
    g.nodes.resize(K);
    g.weights.resize(K);
    const double h = (b - a) / (K - 1);
    for (int i = 0; i < K; ++i) {
        g.nodes[i] = a + h * i;
        g.weights[i] = h;
    }
    g.nodes.back() = b;  // avoid roundoff drift at the endpoint
    g.weights.front() *= 0.5;
    g.weights.back() *= 0.5;
    return g;
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int K) {
    const QuadratureGrid g = trapezoid_grid(a, b, K);
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const double v = f(g.nodes[i]);
        if (!std::isfinite(v))
            throw numerical_error("trapezoid: non-finite integrand sample");
        s += g.weights[i] * v;
    }
    return s;
}

namespace {

QuadratureGrid make_gauss_legendre(int n) {
    // Newton iteration on Legendre polynomials, nodes by Chebyshev initial guess.
    QuadratureGrid g;
    g.nodes.resize(n);
    g.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        g.nodes[i] = -x;
        g.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        g.weights[i] = w;
        g.weights[n - 1 - i] = w;
    }
    return g;
}

}  // namespace

const QuadratureGrid& gauss_legendre(int n) {
    static std::map<int, QuadratureGrid> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

QuadratureGrid gauss_legendre(int n, double a, double b) {
    QuadratureGrid g = gauss_legendre(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        g.nodes[i] = c + h * g.nodes[i];
        g.weights[i] *= h;
    }
    return g;
}

// ---------------------------------------------------------------------------

ChebyshevFit::ChebyshevFit(const std::function<cxd(double)>& f, double a, double b,
                           double tol, int max_degree)
    : a_(a), b_(b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    int m = 16;
    std::vector<cxd> vals;
    while (true) {
        vals.assign(m + 1, cxd(0));
        for (int k = 0; k <= m; ++k) {
            const double x = std::cos(M_PI * (k + 0.5) / (m + 1));
            vals[k] = f(c + h * x);
        }
        coef_.assign(m + 1, cxd(0));
        for (int j = 0; j <= m; ++j) {
            cxd s(0);
            for (int k = 0; k <= m; ++k)
                s += vals[k] * std::cos(j * M_PI * (k + 0.5) / (m + 1));
            coef_[j] = s * (2.0 / (m + 1));
        }
        coef_[0] *= 0.5;
        double scale = 0.0;
        for (const auto& cj : coef_) scale = std::max(scale, std::abs(cj));
        double tail = 0.0;
        for (int j = m - 2; j <= m; ++j) tail = std::max(tail, std::abs(coef_[j]));
        tail_ = scale > 0 ? tail / scale : 0.0;
        if (tail_ <= tol || m >= max_degree) {
            // strip negligible trailing coefficients
            int last = m;
            while (last > 1 && std::abs(coef_[last]) < tol * scale) --last;
            coef_.resize(last + 1);
            return;
        }
        m *= 2;
    }
}

cxd ChebyshevFit::operator()(double x) const {
    const double t = (2.0 * x - a_ - b_) / (b_ - a_);
    cxd b1(0), b2(0);
    for (int j = static_cast<int>(coef_.size()) - 1; j >= 1; --j) {
        const cxd tmp = 2.0 * t * b1 - b2 + coef_[j];
        b2 = b1;
        b1 = tmp;
    }
    return t * b1 - b2 + coef_[0];
}

std::vector<MatrixXd> chebyshev_matrix_coeffs(
    const std::function<MatrixXd(double)>& f, double a, double b, int m) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::vector<MatrixXd> samples(m + 1);
    for (int k = 0; k <= m; ++k) {
        const double x = std::cos(M_PI * (k + 0.5) / (m + 1));
        samples[k] = f(c + h * x);
    }
    std::vector<MatrixXd> A(m + 1);
    for (int j = 0; j <= m; ++j) {
        MatrixXd s = MatrixXd::Zero(samples[0].rows(), samples[0].cols());
        for (int k = 0; k <= m; ++k)
            s += std::cos(j * M_PI * (k + 0.5) / (m + 1)) * samples[k];
        A[j] = s * (2.0 / (m + 1));
    }
    A[0] *= 0.5;
    return A;
}

std::vector<double> chebyshev_series_roots(const std::vector<double>& c, double im_tol) {
    int n = static_cast<int>(c.size()) - 1;
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return {};
    while (n > 0 && std::abs(c[n]) < 1e-14 * scale) --n;
    if (n < 1) return {};
    if (n == 1) {
        const double r = -c[0] / c[1];
        return (r >= -1.0 && r <= 1.0) ? std::vector<double>{r} : std::vector<double>{};
    }
    // Colleague matrix: row 0 encodes x T_0 = T_1, interior rows the
    // three-term recurrence, last row the series closure.
    MatrixXd C = MatrixXd::Zero(n, n);
    C(0, 1) = 1.0;
    for (int i = 1; i < n - 1; ++i) {
        C(i, i - 1) = 0.5;
        C(i, i + 1) = 0.5;
    }
    C(n - 1, n - 2) = 0.5;
    for (int j = 0; j < n; ++j) C(n - 1, j) -= 0.5 * c[j] / c[n];
    Eigen::EigenSolver<MatrixXd> es(C);
    std::vector<double> roots;
    for (int i = 0; i < n; ++i) {
        const cxd z = es.eigenvalues()[i];
        if (std::abs(z.imag()) < im_tol && z.real() > -1.0 - 1e-9 && z.real() < 1.0 + 1e-9)
            roots.push_back(std::clamp(z.real(), -1.0, 1.0));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// ---------------------------------------------------------------------------

double bisect_secant(const std::function<double(double)>& f, double a, double b,
                     double xtol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (fa * fb > 0) throw numerical_error("bisect_secant: no sign change in bracket");
    for (int it = 0; it < max_iter; ++it) {
        // secant candidate, guarded to the bracket interior
        double x = b - fb * (b - a) / (fb - fa);
        const double mid = 0.5 * (a + b);
        if (!(x > a && x < b)) x = mid;
        // alternate with bisection to guarantee progress
        if (it % 2 == 1) x = mid;
        const double fx = f(x);
        if (fx == 0 || b - a < xtol) return x;
        if (fa * fx < 0) {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    return 0.5 * (a + b);
}

double brent_minimize(const std::function<double(double)>& f, double a, double b,
                      double xtol, int max_iter) {
    const double gr = 0.5 * (3.0 - std::sqrt(5.0));
    double x = a + gr * (b - a), w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double m = 0.5 * (a + b);
        const double tol1 = xtol * std::abs(x) + 1e-15;
        if (std::abs(x - m) <= 2 * tol1 - 0.5 * (b - a)) break;
        double p = 0, q = 0, r = 0;
        bool parabolic = false;
        if (std::abs(e) > tol1) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2 * (q - r);
            if (q > 0) p = -p;
            q = std::abs(q);
            if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
                e = d;
                d = p / q;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x < m) ? b - x : a - x;
            d = gr * e;
        }
        const double u = x + ((std::abs(d) >= tol1) ? d : (d > 0 ? tol1 : -tol1));
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw; w = x; fw = fx; x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw; w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return x;
}

// ---------------------------------------------------------------------------

SvdResult svd(const MatrixXcd& A) {
    Eigen::JacobiSVD<MatrixXcd> s(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {s.matrixU(), s.singularValues(), s.matrixV()};
}

GeneralizedEigResult eig_generalized(const MatrixXd& A, const MatrixXd& B,
                                     bool with_vectors) {
    const int n = static_cast<int>(A.rows());
    if (A.rows() != A.cols() || B.rows() != n || B.cols() != n)
        throw std::invalid_argument("eig_generalized: square conformable matrices required");
    // Eigen's QZ implementation: the system LAPACK generation shipped here
    // miscomputes interior eigenvalues of badly scaled block pencils.
    Eigen::GeneralizedEigenSolver<MatrixXd> ges;
    ges.compute(A, B, with_vectors);
    if (ges.info() != Eigen::Success) throw numerical_error("generalized QZ failed");
    GeneralizedEigResult out;
    std::vector<cxd> vals;
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
        if (std::abs(ges.betas()[j]) < 1e-280) continue;  // infinite eigenvalue
        vals.push_back(cxd(ges.alphas()[j]) / ges.betas()[j]);
        idx.push_back(j);
    }
    out.values = Eigen::Map<VectorXcd>(vals.data(), static_cast<long>(vals.size()));
    if (with_vectors) {
        out.vectors.resize(n, static_cast<long>(vals.size()));
        for (size_t c = 0; c < idx.size(); ++c)
            out.vectors.col(static_cast<long>(c)) = ges.eigenvectors().col(idx[c]);
    }
    return out;
}

GeneralizedEigResult eig(const MatrixXcd& A) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(A, true);
    if (es.info() != Eigen::Success) throw numerical_error("complex eig failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

std::optional<MatrixXd> cholesky(const MatrixXd& A) {
    Eigen::LLT<MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) return std::nullopt;
    return MatrixXd(llt.matrixL());
}

MatrixXcd solve(const MatrixXcd& A, const MatrixXcd& B) {
    Eigen::PartialPivLU<MatrixXcd> lu(A);
    MatrixXcd X = lu.solve(B);
    if (!X.allFinite()) throw numerical_error("solve: singular system");
    return X;
}

double min_eig_sym(const MatrixXd& A, double tol) {
    // Bisection on shifts: mu_min is the largest s with A - s I not PD.
    double hi = A.diagonal().minCoeff();  // mu_min <= min diagonal
    double lo = hi;
    // grow lower bound until A - lo I is PD (or accept very negative)
    double span = std::max(1.0, std::abs(hi));
    while (cholesky(A - lo * MatrixXd::Identity(A.rows(), A.cols())) == std::nullopt) {
        lo -= span;
        span *= 2;
        if (span > 1e12) throw numerical_error("min_eig_sym: no PD shift found");
    }
    // now A - lo I is PD, A - hi' I with hi' slightly above mu_min is not; find hi that fails
    double hi2 = hi + std::max(1.0, std::abs(hi)) * 1e-12;
    while (cholesky(A - hi2 * MatrixXd::Identity(A.rows(), A.cols())) != std::nullopt)
        hi2 += std::max(std::abs(hi2), 1.0) * 0.5 + 1e-12;
    const double scale = std::max({std::abs(lo), std::abs(hi2), 1e-30});
    while (hi2 - lo > tol * scale) {
        const double mid = 0.5 * (lo + hi2);
        if (cholesky(A - mid * MatrixXd::Identity(A.rows(), A.cols())) != std::nullopt)
            lo = mid;
        else
            hi2 = mid;
    }
    return 0.5 * (lo + hi2);
}

// ---------------------------------------------------------------------------

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace octgf
