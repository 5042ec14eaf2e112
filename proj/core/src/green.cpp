// SPDX-License-Identifier: Apache-2.0
#include "octgf/green.hpp"

#include <cmath>
#include <fstream>

#include "octgf/specfun.hpp"

namespace octgf {

cxd eval_radial(double tau, double r1, double r0, cxd lambda) {
    if (tau <= 0.0) throw std::domain_error("eval_radial: tau > 0 required");
    if (r0 <= 0.0 || r1 <= 0.0) return cxd(0.0);
    const cxd nu = lambda - 0.5;
    const double x = r0 * r1 / tau;
    // exp(-(r0^2+r1^2)/(2 tau)) * I_nu(x) = exp(x - (r0^2+r1^2)/(2tau)) * e^{-x} I_nu(x)
    //                                     = exp(-(r1-r0)^2/(2tau)) * scaled
    const cxd scaled = bessel_i(nu, x, /*scaled=*/true);
    const double expo = -(r1 - r0) * (r1 - r0) / (2.0 * tau);
    return std::exp(expo) / (tau * std::sqrt(r0 * r1)) * scaled;
}

GreensFunctionModel::GreensFunctionModel(CorrelationModel model,
                                         std::vector<Eigenpair> pairs, double alpha,
                                         Frame frame)
    : model_(std::move(model)), pairs_(std::move(pairs)), alpha_(alpha), frame_(frame) {
    std::sort(pairs_.begin(), pairs_.end(), [](const Eigenpair& a, const Eigenpair& b) {
        return a.lambda_sq.real() < b.lambda_sq.real();
    });
    // z-range covering the whole wedge for the Psi proxies
    double zmax = 0.0;
    const auto g = gauss_legendre(64, 0.0, model_.omega_bar());
    for (int i = 0; i < g.size(); ++i) {
        const double Th = model_.theta_boundary(g.nodes[i]);
        zmax = std::max(zmax, std::pow(std::sin(0.5 * Th), 2));
    }
    zmax = std::max(zmax, std::pow(std::sin(0.5 * model_.theta_boundary(0.0)), 2));
    std::vector<double> kn(pairs_.empty() ? 0 : pairs_[0].coeffs.size());
    for (size_t n = 0; n < kn.size(); ++n)
        kn[n] = M_PI * (n + 1) / model_.omega_bar();
    psi_.reserve(pairs_.size());
    for (const auto& p : pairs_) psi_.emplace_back(p, kn, alpha_, zmax);
}

GreensFunctionModel GreensFunctionModel::from_set(const EigenpairSet& set, Frame frame) {
    return GreensFunctionModel(set.make_model(), set.pairs, set.alpha, frame);
}

cxd GreensFunctionModel::psi(int l, double phi, double theta) const {
    return psi_[l](phi, theta);
}

cxd GreensFunctionModel::eval_wedge_complex(double tau, const WedgePoint& w1,
                                            const WedgePoint& w0) const {
    cxd sum(0.0);
    for (size_t l = 0; l < pairs_.size(); ++l) {
        const cxd rad = eval_radial(tau, w1.r, w0.r, pairs_[l].lambda);
        if (std::abs(rad) < 1e-300) continue;
        sum += rad * psi_[l](w1.phi, w1.theta) * psi_[l](w0.phi, w0.theta);
    }
    return sum;
}

double GreensFunctionModel::eval(double tau, const WedgePoint& w1,
                                 const WedgePoint& w0) const {
    if (tau <= 0.0) throw std::domain_error("eval: tau > 0 required");
    const cxd g = eval_wedge_complex(tau, w1, w0);
    double re = g.real();
    const double ai = std::abs(g.imag());
    if (ai > 1e-3 * std::max(std::abs(re), 1e-300) && ai > 1e-14)
        imag_ratio_ = std::max(imag_ratio_, ai / std::max(std::abs(re), 1e-300));
    double pref = 1.0;
    if (!model_.zero_drift()) {
        const Vec3& xi = model_.xi();
        const Vec3 q1 = from_spherical(w1), q0 = from_spherical(w0);
        pref = std::exp(xi.dot(q1 - q0) - 0.5 * xi.squaredNorm() * tau);
    }
    double val = pref * re;
    if (frame_ == Frame::original) val /= model_.chi();
    if (val < 0.0) {
        clamp_count_.fetch_add(1, std::memory_order_relaxed);
        val = 0.0;
    }
    return val;
}

double GreensFunctionModel::eval(double tau, const Vec3& p1, const Vec3& p0) const {
    Vec3 q1 = p1, q0 = p0;
    if (frame_ == Frame::original) {
        if ((p1.array() <= 0.0).any() || (p0.array() <= 0.0).any()) return 0.0;
        q1 = decorrelate(p1, model_);
        q0 = decorrelate(p0, model_);
    }
    return eval(tau, to_spherical(q1), to_spherical(q0));
}

double GreensFunctionModel::dphi_face(double tau, int face, double r1, double theta1,
                                      const Vec3& p0_original) const {
    const Vec3 q0 = decorrelate(p0_original, model_);
    const WedgePoint w0 = to_spherical(q0);
    const double phi_face = face == 0 ? 0.0 : model_.omega_bar();
    const double z1 = std::pow(std::sin(0.5 * theta1), 2);
    const double zeta1 = std::log(std::tan(0.5 * theta1));
    const int N = pairs_.empty() ? 0 : static_cast<int>(pairs_[0].coeffs.size());
    cxd sum(0.0);
    for (size_t l = 0; l < pairs_.size(); ++l) {
        const cxd rad = eval_radial(tau, r1, w0.r, pairs_[l].lambda);
        if (std::abs(rad) < 1e-300) continue;
        // sin(k_n phi') -> k_n at phi' = 0, k_n cos(k_n omega_bar) = k_n (-1)^n
        // at phi' = omega_bar
        cxd dpsi(0.0);
        for (int n = 0; n < N; ++n) {
            const double k = M_PI * (n + 1) / model_.omega_bar();
            double dir = k;
            if (face == 1) dir = k * (((n + 1) % 2 == 0) ? 1.0 : -1.0);
            const cxd F = hyp2f1_lambda(pairs_[l].lambda, k, z1);
            dpsi += pairs_[l].coeffs[n] * dir * std::exp(k * zeta1) * F;
        }
        sum += rad * dpsi * psi_[l](w0.phi, w0.theta);
    }
    double pref = 1.0;
    if (!model_.zero_drift()) {
        const Vec3& xi = model_.xi();
        const Vec3 q1 = from_spherical({r1, phi_face, theta1});
        pref = std::exp(xi.dot(q1 - q0) - 0.5 * xi.squaredNorm() * tau);
    }
    return pref * sum.real();
}

double GreensFunctionModel::integrate_octant(double tau, const Vec3& p0_original,
                                             int nr, int nphi, int nu) const {
    const Vec3 q0 = decorrelate(p0_original, model_);
    const WedgePoint w0 = to_spherical(q0);
    const double rmax = std::max(w0.r, 8.0 * std::sqrt(tau)) + 8.0 * std::sqrt(tau);
    const auto gr = gauss_legendre(nr, 0.0, rmax);
    const auto gphi = gauss_legendre(nphi, 0.0, model_.omega_bar());
    const auto& gu = gauss_legendre(nu);
    const Vec3& xi = model_.xi();
    const bool drift = !model_.zero_drift();

    // radial profiles per mode
    std::vector<std::vector<cxd>> rad(pairs_.size(), std::vector<cxd>(nr));
    for (size_t l = 0; l < pairs_.size(); ++l)
        for (int i = 0; i < nr; ++i)
            rad[l][i] = eval_radial(tau, gr.nodes[i], w0.r, pairs_[l].lambda);

    std::vector<cxd> psi0(pairs_.size());
    for (size_t l = 0; l < pairs_.size(); ++l) psi0[l] = psi_[l](w0.phi, w0.theta);

    cxd total(0.0);
    for (int i = 0; i < nphi; ++i) {
        const double phi = gphi.nodes[i];
        const double Th = model_.theta_boundary(phi);
        for (int j = 0; j < nu; ++j) {
            const double u = 0.5 * (gu.nodes[j] + 1.0);
            const double wu = 0.5 * gu.weights[j] * Th;
            const double th = u * Th;
            const double st = std::sin(th);
            const Vec3 dir(st * std::sin(phi), st * std::cos(phi), std::cos(th));
            const double gam = drift ? xi.dot(dir) : 0.0;
            cxd ang(0.0);
            for (size_t l = 0; l < pairs_.size(); ++l) {
                const cxd pv = psi_[l](phi, th);
                if (std::abs(pv) < 1e-300) continue;
                cxd radial(0.0);
                for (int ir = 0; ir < nr; ++ir) {
                    const double r = gr.nodes[ir];
                    const double e = drift ? std::exp(gam * r) : 1.0;
                    radial += gr.weights[ir] * r * r * e * rad[l][ir];
                }
                ang += pv * psi0[l] * radial;
            }
            total += gphi.weights[i] * wu * st * ang;
        }
    }
    double mass = total.real();
    if (drift) mass *= std::exp(-xi.dot(q0) - 0.5 * xi.squaredNorm() * tau);
    return mass;
}

double GreensFunctionModel::integrate_box(double tau, const Vec3& p0_original,
                                          const Vec3& lo, const Vec3& hi,
                                          int n1d) const {
    const auto gx = gauss_legendre(n1d, lo[0], hi[0]);
    const auto gy = gauss_legendre(n1d, lo[1], hi[1]);
    const auto gz = gauss_legendre(n1d, lo[2], hi[2]);
    double acc = 0.0;
    for (int i = 0; i < n1d; ++i)
        for (int j = 0; j < n1d; ++j)
            for (int k = 0; k < n1d; ++k) {
                const Vec3 p(gx.nodes[i], gy.nodes[j], gz.nodes[k]);
                acc += gx.weights[i] * gy.weights[j] * gz.weights[k] * eval(tau, p, p0_original);
            }
    return acc;
}

std::vector<GridRow> evaluate_grid(const GreensFunctionModel& gfm, double tau,
                                   const Vec3& p0, const GridSpec& spec, int threads) {
    const int n = spec.n;
    std::vector<GridRow> rows(static_cast<size_t>(n) * n * n);
    parallel_for(n, threads, [&](int i) {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Vec3 p;  // cell centers of the n^3 partition
                p[0] = spec.lo[0] + (spec.hi[0] - spec.lo[0]) * (i + 0.5) / n;
                p[1] = spec.lo[1] + (spec.hi[1] - spec.lo[1]) * (j + 0.5) / n;
                p[2] = spec.lo[2] + (spec.hi[2] - spec.lo[2]) * (k + 0.5) / n;
                const size_t idx = (static_cast<size_t>(i) * n + j) * n + k;
                rows[idx] = {p, gfm.eval(tau, p, p0)};
            }
    });
    return rows;
}

void write_grid_csv(const std::string& path, const std::vector<GridRow>& rows,
                    const std::vector<double>* oracle, const std::string& oracle_name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "x,y,z,density";
    if (oracle) out << "," << oracle_name;
    out << "\n";
    out.precision(17);
    for (size_t i = 0; i < rows.size(); ++i) {
        out << rows[i].point[0] << "," << rows[i].point[1] << "," << rows[i].point[2]
            << "," << rows[i].density;
        if (oracle) out << "," << (*oracle)[i];
        out << "\n";
    }
}

double l2_grid_error(const std::vector<GridRow>& rows, const std::vector<double>& oracle,
                     const GridSpec& spec) {
    if (rows.size() != oracle.size())
        throw std::invalid_argument("l2_grid_error: size mismatch");
    const double dv =
        (spec.hi - spec.lo).prod() / std::pow(static_cast<double>(spec.n), 3);
    double acc = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
        const double d = rows[i].density - oracle[i];
        acc += d * d;
    }
    return std::sqrt(acc * dv);
}

}  // namespace octgf
