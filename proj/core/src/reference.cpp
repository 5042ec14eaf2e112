// SPDX-License-Identifier: Apache-2.0
#include "octgf/reference.hpp"

#include <cmath>
#include <deque>

#include "octgf/specfun.hpp"

namespace octgf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

double gauss3(const Vec3& d, double tau) {
    return std::exp(-d.squaredNorm() / (2.0 * tau)) / std::pow(kTwoPi * tau, 1.5);
}

Eigen::Matrix3d reflection(const Vec3& n) {
    const Vec3 u = n.normalized();
    return Eigen::Matrix3d::Identity() - 2.0 * u * u.transpose();
}

}  // namespace

ImageSystem::ImageSystem(const CorrelationModel& model, int cap) : model_(model) {
    const auto e = model.edges();
    const std::array<Eigen::Matrix3d, 3> gens = {
        reflection(e[0].cross(e[1])),  // face phi = 0 (octant face x = 0)
        reflection(e[0].cross(e[2])),  // face phi = omega_bar (y = 0)
        reflection(e[1].cross(e[2])),  // face theta = Theta(phi) (z = 0)
    };
    mats_.push_back(Eigen::Matrix3d::Identity());
    signs_.push_back(1);
    std::deque<int> frontier{0};
    auto find = [&](const Eigen::Matrix3d& M) {
        for (size_t i = 0; i < mats_.size(); ++i)
            if ((mats_[i] - M).cwiseAbs().maxCoeff() < 1e-9) return static_cast<int>(i);
        return -1;
    };
    while (!frontier.empty()) {
        const int idx = frontier.front();
        frontier.pop_front();
        for (const auto& g : gens) {
            const Eigen::Matrix3d M = g * mats_[idx];
            if (find(M) >= 0) continue;
            mats_.push_back(M);
            signs_.push_back(-signs_[idx]);
            frontier.push_back(static_cast<int>(mats_.size()) - 1);
            if (static_cast<int>(mats_.size()) > cap)
                throw numerical_error(
                    "ImageSystem: reflection group does not close; the "
                    "correlation structure admits no method of images");
        }
    }
}

int ImageSystem::parity_sum() const {
    int s = 0;
    for (int v : signs_) s += v;
    return s;
}

double ImageSystem::density_wedge(double tau, const Vec3& q1, const Vec3& q0) const {
    double acc = 0.0;
    for (size_t i = 0; i < mats_.size(); ++i)
        acc += signs_[i] * gauss3(q1 - mats_[i] * q0, tau);
    return acc;
}

double ImageSystem::density(double tau, const Vec3& p1, const Vec3& p0) const {
    const Vec3 q1 = decorrelate(p1, model_), q0 = decorrelate(p0, model_);
    return density_wedge(tau, q1, q0) / model_.chi();
}

// ---------------------------------------------------------------------------

double absorbed_kernel_1d(double tau, double x1, double x0, double drift) {
    if (x1 <= 0.0 || x0 <= 0.0) return 0.0;
    auto phi = [&](double d) {
        return std::exp(-d * d / (2.0 * tau)) / std::sqrt(kTwoPi * tau);
    };
    return phi(x1 - x0 - drift * tau) -
           std::exp(-2.0 * drift * x0) * phi(x1 + x0 - drift * tau);
}

double survival_1d(double tau, double x0, double drift) {
    if (x0 <= 0.0) return 0.0;
    const double sq = std::sqrt(tau);
    return norm_cdf((x0 + drift * tau) / sq) -
           std::exp(-2.0 * drift * x0) * norm_cdf((-x0 + drift * tau) / sq);
}

double zero_corr_green(double tau, const Vec3& p1, const Vec3& p0, const Vec3& drift) {
    double acc = 1.0;
    for (int i = 0; i < 3; ++i) acc *= absorbed_kernel_1d(tau, p1[i], p0[i], drift[i]);
    return acc;
}

// ---------------------------------------------------------------------------
// HV ADI
// ---------------------------------------------------------------------------

namespace {

struct Tridiag {
    // constant-coefficient Thomas solver with precomputed forward sweep
    std::vector<double> cp;  // modified super-diagonal
    double sub, diag, sup;
    void init(double a, double b, double c, int n) {
        sub = a;
        diag = b;
        sup = c;
        cp.resize(n);
        cp[0] = c / b;
        for (int i = 1; i < n; ++i) cp[i] = c / (b - a * cp[i - 1]);
    }
    // solves in place along a strided line
    void solve(double* d, int n, int stride) const {
        double prev = d[0] / diag;
        d[0] = prev;
        for (int i = 1; i < n; ++i) {
            const double m = diag - sub * cp[i - 1];
            prev = (d[i * stride] - sub * prev) / m;
            d[i * stride] = prev;
        }
        for (int i = n - 2; i >= 0; --i) {
            d[i * stride] -= cp[i] * d[(i + 1) * stride];
            prev = d[i * stride];
        }
    }
};

}  // namespace

double FdSolution::node(int i, int j, int k) const {
    const int n = grid.n_space;
    if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
    return values[(static_cast<size_t>(i) * n + j) * n + k];
}

double FdSolution::at(const Vec3& p) const {
    const int n = grid.n_space;
    double w[3][2];
    int idx[3];
    for (int a = 0; a < 3; ++a) {
        const double t = p[a] / spacing[a] - 1.0;  // node i sits at (i+1) h
        const int i0 = static_cast<int>(std::floor(t));
        const double f = t - i0;
        idx[a] = i0;
        w[a][0] = 1.0 - f;
        w[a][1] = f;
        if (i0 < -1 || i0 > n - 1) return 0.0;
    }
    double acc = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                acc += w[0][a] * w[1][b] * w[2][c] *
                       node(idx[0] + a, idx[1] + b, idx[2] + c);
    return acc;
}

FdSolution adi_hv_solve(const CorrelationModel& model, const FdGrid& grid,
                        const Vec3& start, double horizon) {
    const int n = grid.n_space;
    if (n < 8 || grid.n_time < 4)
        throw std::invalid_argument("adi_hv_solve: n_space >= 8 and n_time >= 4");
    const size_t total = static_cast<size_t>(n) * n * n;
    Vec3 h;
    for (int a = 0; a < 3; ++a) h[a] = grid.extent[a] / (n + 1);
    const double dt = horizon / grid.n_time;
    const double rho[3] = {model.rho_xy(), model.rho_xz(), model.rho_yz()};
    const Vec3 mu = model.drift();

    std::vector<double> U(total, 0.0);
    // discrete delta at the nearest mesh node
    int s[3];
    for (int a = 0; a < 3; ++a) {
        s[a] = static_cast<int>(std::lround(start[a] / h[a])) - 1;
        if (s[a] < 0 || s[a] >= n)
            throw std::invalid_argument("adi_hv_solve: start point outside the grid");
    }
    const size_t sidx = (static_cast<size_t>(s[0]) * n + s[1]) * n + s[2];
    U[sidx] = 1.0 / (h[0] * h[1] * h[2]);
    const double initial_max = U[sidx];

    const size_t strides[3] = {static_cast<size_t>(n) * n, static_cast<size_t>(n), 1};

    // directional operators F_a u = 1/2 u_aa - mu_a u_a  (forward equation)
    auto apply_dir = [&](const std::vector<double>& src, std::vector<double>& dst,
                         int a, double scale) {
        const double ph = 0.5 / (h[a] * h[a]) + (-mu[a]) / (2.0 * h[a]);
        const double qh = -1.0 / (h[a] * h[a]);
        const double rh = 0.5 / (h[a] * h[a]) - (-mu[a]) / (2.0 * h[a]);
        const long st = static_cast<long>(strides[a]);
        for (size_t idx = 0; idx < total; ++idx) {
            const int ia = static_cast<int>((idx / strides[a]) % n);
            double acc = qh * src[idx];
            if (ia > 0) acc += ph * src[idx - st];
            if (ia < n - 1) acc += rh * src[idx + st];
            dst[idx] += scale * acc;
        }
    };
    // mixed derivatives, explicit
    auto apply_mixed = [&](const std::vector<double>& src, std::vector<double>& dst,
                           double scale) {
        const double cxy = rho[0] / (4.0 * h[0] * h[1]);
        const double cxz = rho[1] / (4.0 * h[0] * h[2]);
        const double cyz = rho[2] / (4.0 * h[1] * h[2]);
        auto cross = [&](size_t idx, int ia, int ib, int a, int b) {
            const long sa = static_cast<long>(strides[a]), sb = static_cast<long>(strides[b]);
            double v = 0.0;
            const bool iao = ia > 0, iaq = ia < n - 1, ibo = ib > 0, ibq = ib < n - 1;
            if (iaq && ibq) v += src[idx + sa + sb];
            if (iaq && ibo) v -= src[idx + sa - sb];
            if (iao && ibq) v -= src[idx - sa + sb];
            if (iao && ibo) v += src[idx - sa - sb];
            return v;
        };
        for (size_t idx = 0; idx < total; ++idx) {
            const int i = static_cast<int>(idx / strides[0]);
            const int j = static_cast<int>((idx / strides[1]) % n);
            const int k = static_cast<int>(idx % n);
            double acc = 0.0;
            if (cxy != 0.0) acc += cxy * cross(idx, i, j, 0, 1);
            if (cxz != 0.0) acc += cxz * cross(idx, i, k, 0, 2);
            if (cyz != 0.0) acc += cyz * cross(idx, j, k, 1, 2);
            dst[idx] += scale * acc;
        }
    };

    Tridiag tri[3];
    for (int a = 0; a < 3; ++a) {
        const double ph = 0.5 / (h[a] * h[a]) + (-mu[a]) / (2.0 * h[a]);
        const double qh = -1.0 / (h[a] * h[a]);
        const double rh = 0.5 / (h[a] * h[a]) - (-mu[a]) / (2.0 * h[a]);
        tri[a].init(-grid.theta * dt * ph, 1.0 - grid.theta * dt * qh,
                    -grid.theta * dt * rh, n);
    }
    auto implicit_sweep = [&](std::vector<double>& rhs, int a) {
        // solve (I - theta dt F_a) X = rhs along every a-line
        const int st = static_cast<int>(strides[a]);
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                size_t base;
                if (a == 0) base = static_cast<size_t>(u) * n + v;
                else if (a == 1) base = (static_cast<size_t>(u) * n) * n + v;
                else base = (static_cast<size_t>(u) * n + v) * n;
                tri[a].solve(rhs.data() + base, n, st);
            }
    };

    std::vector<double> FU(total), Y(total), tmp(total), FY(total);
    for (int step = 0; step < grid.n_time; ++step) {
        std::fill(FU.begin(), FU.end(), 0.0);
        apply_mixed(U, FU, 1.0);
        for (int a = 0; a < 3; ++a) apply_dir(U, FU, a, 1.0);
        // Y0
        Y = U;
        for (size_t i = 0; i < total; ++i) Y[i] += dt * FU[i];
        // Y_a: (I - theta dt F_a) Y_a = Y_{a-1} - theta dt F_a U
        for (int a = 0; a < 3; ++a) {
            tmp.assign(total, 0.0);
            apply_dir(U, tmp, a, 1.0);
            for (size_t i = 0; i < total; ++i) Y[i] -= grid.theta * dt * tmp[i];
            implicit_sweep(Y, a);
        }
        // corrector
        std::fill(FY.begin(), FY.end(), 0.0);
        apply_mixed(Y, FY, 1.0);
        for (int a = 0; a < 3; ++a) apply_dir(Y, FY, a, 1.0);
        std::vector<double>& Yt = tmp;
        Yt = U;
        for (size_t i = 0; i < total; ++i)
            Yt[i] += dt * FU[i] + 0.5 * dt * (FY[i] - FU[i]);
        std::vector<double> Y3 = Y;  // keep F_a Y3 source
        for (int a = 0; a < 3; ++a) {
            std::vector<double> fa(total, 0.0);
            apply_dir(Y3, fa, a, 1.0);
            for (size_t i = 0; i < total; ++i) Yt[i] -= grid.theta * dt * fa[i];
            implicit_sweep(Yt, a);
        }
        U.swap(Yt);
        double mx = 0.0;
        for (double v : U) mx = std::max(mx, std::abs(v));
        if (mx > 10.0 * initial_max)
            throw numerical_error("adi_hv_solve: instability detected; refine steps");
    }

    FdSolution sol;
    sol.grid = grid;
    sol.spacing = h;
    sol.values = std::move(U);
    return sol;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

namespace {

struct SplitMix {
    std::uint64_t state;
    explicit SplitMix(std::uint64_t s) : state(s) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() {  // in (0, 1)
        return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }
    // Box-Muller pair
    void normals(double& a, double& b) {
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        a = r * std::cos(kTwoPi * u2);
        b = r * std::sin(kTwoPi * u2);
    }
};

}  // namespace

McResult mc_absorbed_paths(const CorrelationModel& model, const Vec3& start,
                           double horizon, long n_paths, int n_steps,
                           std::uint64_t seed, int threads, int survivor_cap) {
    if (n_paths < 1) throw std::invalid_argument("mc_absorbed_paths: n_paths >= 1");
    Eigen::Matrix3d C;
    C << 1.0, model.rho_xy(), model.rho_xz(),
         model.rho_xy(), 1.0, model.rho_yz(),
         model.rho_xz(), model.rho_yz(), 1.0;
    const Eigen::Matrix3d L = Eigen::LLT<Eigen::Matrix3d>(C).matrixL();
    const double dt = horizon / n_steps;
    const double sdt = std::sqrt(dt);
    const Vec3 mu = model.drift();

    const int chunks = static_cast<int>(
        std::max<long>(1, std::min<long>(static_cast<long>(threads) * 8, n_paths)));
    std::vector<long> alive(chunks, 0);
    std::vector<std::vector<Vec3>> samples(chunks);
    const long per = (n_paths + chunks - 1) / chunks;

    parallel_for(chunks, threads, [&](int c) {
        const long lo = c * per, hi = std::min<long>(n_paths, lo + per);
        for (long p = lo; p < hi; ++p) {
            SplitMix rng(seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(p + 1)));
            Vec3 X = start;
            bool ok = (X.array() > 0.0).all();
            for (int s = 0; s < n_steps && ok; ++s) {
                double z0, z1, z2, z3;
                rng.normals(z0, z1);
                rng.normals(z2, z3);
                const Vec3 Z(z0, z1, z2);
                const Vec3 G = L * Z;
                Vec3 Xn = X + mu * dt + sdt * G;
                if ((Xn.array() <= 0.0).any()) {
                    ok = false;
                    break;
                }
                // bridge crossing correction per coordinate
                for (int a = 0; a < 3 && ok; ++a) {
                    const double pc = std::exp(-2.0 * X[a] * Xn[a] / dt);
                    if (rng.uniform() < pc) ok = false;
                }
                X = Xn;
            }
            if (ok) {
                ++alive[c];
                if (survivor_cap > 0 &&
                    static_cast<int>(samples[c].size()) < survivor_cap)
                    samples[c].push_back(X);
            }
        }
    });

    McResult out;
    out.paths = n_paths;
    long total_alive = 0;
    for (int c = 0; c < chunks; ++c) {
        total_alive += alive[c];
        for (const auto& v : samples[c])
            if (survivor_cap == 0 ||
                static_cast<int>(out.survivor_sample.size()) < survivor_cap)
                out.survivor_sample.push_back(v);
    }
    out.survival = static_cast<double>(total_alive) / n_paths;
    out.std_error = std::sqrt(out.survival * (1.0 - out.survival) / n_paths);
    return out;
}

// ---------------------------------------------------------------------------

double wedge2d_green(double tau, double r1, double phi1, double r0, double phi0,
                     double omega_bar) {
    if (!(omega_bar > 0.0 && omega_bar < M_PI))
        throw std::invalid_argument("wedge2d_green: omega_bar in (0, pi)");
    if (r0 <= 0.0 || r1 <= 0.0) return 0.0;
    const double x = r0 * r1 / tau;
    const double pref = (2.0 / omega_bar) * std::exp(-(r1 - r0) * (r1 - r0) / (2.0 * tau)) / tau;
    double sum = 0.0;
    for (int nn = 1; nn < 4000; ++nn) {
        const double k = nn * M_PI / omega_bar;
        const double Iv = bessel_i(cxd(k), x, /*scaled=*/true).real();
        const double term = Iv * std::sin(k * phi1) * std::sin(k * phi0);
        sum += term;
        if (std::abs(Iv) < 1e-16 * (std::abs(sum) + 1e-300) && nn > 4) break;
    }
    return pref * sum;
}

}  // namespace octgf
