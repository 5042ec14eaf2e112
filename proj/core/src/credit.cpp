// SPDX-License-Identifier: Apache-2.0
#include "octgf/credit.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "octgf/reference.hpp"
#include "octgf/specfun.hpp"

namespace octgf {

Vec3 BankNetwork::interbank_assets() const {
    return mutual_liabilities.transpose() * Vec3::Ones();
}

Vec3 BankNetwork::interbank_liabilities() const {
    return mutual_liabilities * Vec3::Ones();
}

void BankNetwork::validate() const {
    if ((assets.array() < 0).any() || (external_liabilities.array() < 0).any() ||
        (volatilities.array() <= 0).any())
        throw std::invalid_argument("bank network: negative inputs");
    for (int i = 0; i < 3; ++i) {
        if (mutual_liabilities(i, i) != 0.0)
            throw std::invalid_argument("bank network: mutual liabilities diagonal must be zero");
        if (!(recovery_rates[i] >= 0.0 && recovery_rates[i] <= 1.0))
            throw std::invalid_argument("bank network: recovery rates in [0,1]");
    }
    if ((mutual_liabilities.array() < 0).any())
        throw std::invalid_argument("bank network: negative mutual liabilities");
    if (horizon <= 0.0) throw std::invalid_argument("bank network: horizon > 0");
    CorrelationModel check(rho_xy, rho_xz, rho_yz);  // validates positive definiteness
    (void)check;
}

BankNetwork bank_network_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    static const char* known[] = {"assets",         "external_liabilities",
                                  "mutual_liabilities", "recovery_rates",
                                  "volatilities",   "correlations",
                                  "growth_rates",   "horizon"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw std::invalid_argument("bank network config: unknown key " + it.key());
    }
    BankNetwork net;
    auto vec3 = [&](const char* key) {
        const auto& a = j.at(key);
        return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    };
    net.assets = vec3("assets");
    net.external_liabilities = vec3("external_liabilities");
    const auto& m = j.at("mutual_liabilities");
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) net.mutual_liabilities(i, k) = m[i][k].get<double>();
    net.recovery_rates = vec3("recovery_rates");
    net.volatilities = vec3("volatilities");
    if (j.contains("growth_rates")) net.growth_rates = vec3("growth_rates");
    const auto& r = j.at("correlations");
    net.rho_xy = r[0].get<double>();
    net.rho_xz = r[1].get<double>();
    net.rho_yz = r[2].get<double>();
    net.horizon = j.at("horizon").get<double>();
    net.validate();
    return net;
}

std::string to_json(const BankNetwork& net) {
    nlohmann::json j;
    j["assets"] = {net.assets[0], net.assets[1], net.assets[2]};
    j["external_liabilities"] = {net.external_liabilities[0], net.external_liabilities[1],
                                 net.external_liabilities[2]};
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < 3; ++i)
        m.push_back({net.mutual_liabilities(i, 0), net.mutual_liabilities(i, 1),
                     net.mutual_liabilities(i, 2)});
    j["mutual_liabilities"] = std::move(m);
    j["recovery_rates"] = {net.recovery_rates[0], net.recovery_rates[1],
                           net.recovery_rates[2]};
    j["volatilities"] = {net.volatilities[0], net.volatilities[1], net.volatilities[2]};
    j["growth_rates"] = {net.growth_rates[0], net.growth_rates[1], net.growth_rates[2]};
    j["correlations"] = {net.rho_xy, net.rho_xz, net.rho_yz};
    j["horizon"] = net.horizon;
    return j.dump(2);
}

Boundaries default_boundaries(const BankNetwork& net) {
    const Vec3 ahat = net.interbank_assets();
    const Vec3 lhat = net.interbank_liabilities();
    Boundaries b;
    for (int i = 0; i < 3; ++i) {
        const double tot = net.external_liabilities[i] + lhat[i];
        b.continuous[i] = net.recovery_rates[i] * tot - ahat[i];
        b.terminal[i] = tot - ahat[i];
    }
    return b;
}

double boundary_shift(const BankNetwork& net, int i, int k, bool at_horizon) {
    if (i == k) throw std::invalid_argument("boundary_shift: i != k required");
    const double receivable = net.mutual_liabilities(k, i);
    if (at_horizon) return (1.0 - net.recovery_rates[k]) * receivable;
    return (1.0 - net.recovery_rates[i] * net.recovery_rates[k]) * receivable;
}

int survivor_index(int i, int k) { return i < k ? i : i - 1; }
int survivor_index_inverse(int i, int k) { return i < k ? i : i + 1; }

Vec3 settlement_solve(const BankNetwork& net, const Vec3& terminal_assets) {
    const Vec3 lhat = net.interbank_liabilities();
    Vec3 total;
    for (int i = 0; i < 3; ++i) total[i] = net.external_liabilities[i] + lhat[i];
    Vec3 omega = Vec3::Ones();
    for (int it = 0; it < 10000; ++it) {
        Vec3 next;
        for (int i = 0; i < 3; ++i) {
            if (total[i] <= 0.0) {
                next[i] = 1.0;
                continue;
            }
            double incoming = 0.0;
            for (int j = 0; j < 3; ++j)
                if (j != i) incoming += omega[j] * net.mutual_liabilities(j, i);
            next[i] = std::min(1.0, std::max(0.0, (terminal_assets[i] + incoming) / total[i]));
        }
        const double change = (next - omega).cwiseAbs().maxCoeff();
        omega = next;
        if (change <= 1e-12) return omega;
    }
    throw numerical_error("settlement_solve: fixed point did not converge");
}

CreditFrame make_frame(const BankNetwork& net) {
    net.validate();
    const Boundaries b = default_boundaries(net);
    CreditFrame f;
    f.sigma = net.volatilities;
    f.sigma_bar = std::cbrt(net.volatilities.prod());
    f.horizon = net.horizon;
    f.tau = f.sigma_bar * f.sigma_bar * net.horizon;
    for (int i = 0; i < 3; ++i) {
        if (b.continuous[i] <= 0.0)
            throw std::invalid_argument(
                "default boundary nonpositive; model outside Black-Cox regime");
        const double x = std::log(net.assets[i] / b.continuous[i]);
        if (x <= 0.0)
            throw std::invalid_argument("bank already in default at valuation");
        f.start[i] = f.sigma_bar / net.volatilities[i] * x;
        f.xi[i] = -net.volatilities[i] / (2.0 * f.sigma_bar);
        f.mu_terminal[i] = f.sigma_bar / net.volatilities[i] *
                           std::log(std::max(b.terminal[i], b.continuous[i]) /
                                    b.continuous[i]);
    }
    return f;
}

CorrelationModel frame_model(const BankNetwork& net, const CreditFrame& frame) {
    return CorrelationModel(net.rho_xy, net.rho_xz, net.rho_yz, frame.xi);
}

// ---------------------------------------------------------------------------
// Joint survival
// ---------------------------------------------------------------------------

double joint_survival_direct(const GreensFunctionModel& gfm, const CreditFrame& frame,
                             double tau, int nr, int nphi, int nu) {
    return gfm.integrate_octant(tau, frame.start, nr, nphi, nu);
}

double joint_survival_gegenbauer(const GreensFunctionModel& gfm,
                                 const CreditFrame& frame, double tau, int mu_max,
                                 int mu_cap, int nphi, int nu) {
    const CorrelationModel& model = gfm.model();
    const Vec3& xi = model.xi();
    const Vec3 q0 = decorrelate(frame.start, model);
    const WedgePoint w0 = to_spherical(q0);
    const double r0 = w0.r;
    const double alpha = 1.0 / (2.0 * tau);
    const double beta = r0 / tau;
    const double z3 = beta * beta / alpha;

    const auto gphi = gauss_legendre(nphi, 0.0, model.omega_bar());
    const auto& gu = gauss_legendre(nu);
    const int M = gfm.modes();

    // moments P[l][j] = iint Psi_l sin(th) gamma(phi,th)^j over the wedge
    std::vector<std::vector<cxd>> P(M, std::vector<cxd>(mu_cap + 1, cxd(0.0)));
    std::vector<double> theta_cache(nphi);
    for (int i = 0; i < nphi; ++i)
        theta_cache[i] = model.theta_boundary(gphi.nodes[i]);
    for (int i = 0; i < nphi; ++i) {
        const double phi = gphi.nodes[i];
        const double Th = theta_cache[i];
        for (int j = 0; j < nu; ++j) {
            const double u = 0.5 * (gu.nodes[j] + 1.0);
            const double w = 0.5 * gu.weights[j] * Th * gphi.weights[i];
            const double th = u * Th;
            const double st = std::sin(th);
            const double gam = xi[0] * st * std::sin(phi) + xi[1] * st * std::cos(phi) +
                               xi[2] * std::cos(th);
            for (int l = 0; l < M; ++l) {
                const cxd base = w * st * gfm.psi(l, phi, th);
                double gp = 1.0;
                for (int q = 0; q <= mu_cap; ++q) {
                    P[l][q] += base * gp;
                    gp *= gam;
                }
            }
        }
    }
    std::vector<cxd> psi0(M);
    for (int l = 0; l < M; ++l) psi0[l] = gfm.psi(l, w0.phi, w0.theta);

    const double kappa = -xi.dot(q0) - alpha * r0 * r0 - 0.5 * xi.squaredNorm() * tau;
    const double pref = 2.0 * std::exp(kappa) / (beta * tau * std::sqrt(r0));

    auto i2_closed = [&](cxd nu_ord, int mu) -> cxd {
        const cxd s0 = nu_ord + static_cast<double>(mu + 1);
        const std::array<cxd, 3> a = {0.5 * (s0 + 1.0), 0.5 * (s0 + 2.0),
                                      0.5 * (s0 + 1.5)};
        const std::array<cxd, 3> bb = {cxd(mu + 2.0), nu_ord + 1.0, s0 + 1.0};
        const cxd F = hyp_3f3(a, bb, z3);
        const cxd lp = s0 * std::log(0.5 * beta) -
                       0.5 * (s0 + 1.5) * std::log(alpha) +
                       loggamma(0.5 * (s0 + 1.5)) - loggamma(nu_ord + 1.0) -
                       loggamma(cxd(mu + 2.0));
        return 0.5 * std::exp(lp) * F;
    };
    auto i2_quadrature = [&](cxd nu_ord, int mu) -> cxd {
        // direct radial integral fallback
        const auto gr = gauss_legendre(200, 0.0, r0 + 14.0 * std::sqrt(tau));
        cxd acc(0.0);
        for (int i = 0; i < gr.size(); ++i) {
            const double r = gr.nodes[i];
            if (r <= 0.0) continue;
            const cxd va = bessel_i(nu_ord, beta * r, true);
            const cxd vb = bessel_i(cxd(mu + 1.0), beta * r, true);
            acc += gr.weights[i] * std::exp(-alpha * r * r + 2.0 * beta * r) *
                   std::sqrt(r) * va * vb;
        }
        return acc;
    };

    cxd Q(0.0);
    int mu_used = mu_max;
    cxd last_contrib(0.0);
    for (int mu = 0; mu <= mu_cap; ++mu) {
        cxd layer(0.0);
        for (int l = 0; l < M; ++l) {
            const cxd nu_ord = gfm.pairs()[l].lambda - 0.5;
            // I1 via the finite Chebyshev-U representation
            cxd I1(0.0);
            for (int k = 0; k <= mu / 2; ++k) {
                double binom = 1.0;
                for (int t = 0; t < k; ++t)
                    binom *= static_cast<double>(mu - k - t) / (k - t);
                const double sgn = ((mu - k) % 2 == 0) ? 1.0 : -1.0;
                I1 += std::pow(2.0, mu - 2 * k) * sgn * binom *
                      std::pow(beta, -(mu - 2 * k)) * P[l][mu - 2 * k];
            }
            cxd I2;
            try {
                I2 = i2_closed(nu_ord, mu);
            } catch (const numerical_error&) {
                I2 = i2_quadrature(nu_ord, mu);
            }
            const double sgn = (mu % 2 == 0) ? 1.0 : -1.0;
            layer += sgn * (mu + 1.0) * psi0[l] * I1 * I2;
        }
        Q += layer;
        last_contrib = layer;
        if (mu >= mu_max && std::abs(pref * last_contrib) < 1e-8 * std::max(1e-12, std::abs(pref * Q))) {
            mu_used = mu;
            break;
        }
    }
    (void)mu_used;
    return (pref * Q).real();
}

// ---------------------------------------------------------------------------
// CDS and valuation adjustments
// ---------------------------------------------------------------------------

double first_passage_cdf(double s, double x, double xi) {
    if (x <= 0.0) return 1.0;
    if (s <= 0.0) return 0.0;
    const double sq = std::sqrt(s);
    return norm_cdf((-x - xi * s) / sq) + std::exp(-2.0 * xi * x) * norm_cdf((-x + xi * s) / sq);
}

double expected_min_tau(double s, double x, double xi) {
    if (x <= 0.0) return 0.0;
    if (s <= 0.0) return 0.0;
    if (std::abs(xi) < 1e-12) {
        // quadrature fallback for the driftless edge case
        const auto g = gauss_legendre(200, 0.0, s);
        double acc = 0.0;
        for (int i = 0; i < g.size(); ++i)
            acc += g.weights[i] * (1.0 - first_passage_cdf(g.nodes[i], x, xi));
        return acc;
    }
    const double sq = std::sqrt(s);
    const double dp = (x + xi * s) / sq, dm = (xi * s - x) / sq;
    const double e = std::exp(-2.0 * xi * x);
    const double B = x / xi * (e * norm_cdf(dm) + norm_cdf(dp) - 1.0);
    return B + s * (norm_cdf(dp) - e * norm_cdf(dm));
}

double cds_value_1d(const CreditFrame& frame, double t, double z, double spread,
                    double recovery_rn) {
    const double s = frame.tau - t;  // remaining normalized horizon
    if (s <= 0.0) return 0.0;
    if (z <= 0.0) return 1.0 - recovery_rn;
    const double xi3 = frame.xi[2];
    const double p_def = first_passage_cdf(s, z, xi3);
    const double emin_phys = expected_min_tau(s, z, xi3) / (frame.sigma_bar * frame.sigma_bar);
    return (1.0 - recovery_rn) * p_def - spread * emin_phys;
}

namespace {

double valuation_adjustment(const GreensFunctionModel& gfm, const CreditFrame& frame,
                            const CdsParams& params, const CvaQuadrature& quad,
                            int face) {
    const CorrelationModel& model = gfm.model();
    const double tau = frame.tau;
    const double theta_face =
        model.theta_boundary(face == 0 ? 0.0 : model.omega_bar());
    const Vec3 q0 = decorrelate(frame.start, model);
    const double r0 = to_spherical(q0).r;
    const double rmax = r0 + 10.0 * std::sqrt(tau);

    // t = u^2 tau clusters nodes near the valuation date where the CDS value
    // kinks
    const auto gu = gauss_legendre(quad.nt, 0.0, 1.0);
    const auto gr = gauss_legendre(quad.nr, 0.0, rmax);
    const auto gth = gauss_legendre(quad.ntheta, 0.0, theta_face);

    const double pref = face == 0 ? 0.5 * (1.0 - params.recovery_ps)
                                  : 0.5 * (params.recovery_pb - 1.0);
    double acc = 0.0;
    for (int it = 0; it < quad.nt; ++it) {
        const double u = gu.nodes[it];
        const double t = u * u * tau;
        const double wt = gu.weights[it] * 2.0 * u * tau;
        const double s_rem = tau - t;
        if (s_rem <= 1e-14) continue;
        for (int ir = 0; ir < quad.nr; ++ir) {
            const double r1 = gr.nodes[ir];
            for (int ith = 0; ith < quad.ntheta; ++ith) {
                const double th = gth.nodes[ith];
                // reference-name coordinate at the face point
                const Vec3 q1 = from_spherical(
                    {r1, face == 0 ? 0.0 : model.omega_bar(), th});
                const Vec3 p1 = recorrelate(q1, model);
                const double z = p1[2];
                double v = cds_value_1d(frame, t, z, params.spread, params.recovery_rn);
                v = face == 0 ? std::max(v, 0.0) : std::max(-v, 0.0);
                if (v == 0.0) continue;
                const double g =
                    gfm.dphi_face(t, face, r1, th, frame.start);
                acc += wt * gr.weights[ir] * gth.weights[ith] * v * g / std::sin(th);
            }
        }
    }
    return pref * acc;
}

}  // namespace

double cva(const GreensFunctionModel& gfm, const CreditFrame& frame,
           const CdsParams& params, const CvaQuadrature& quad) {
    if (params.recovery_ps >= 1.0) return 0.0;
    return valuation_adjustment(gfm, frame, params, quad, 0);
}

double dva(const GreensFunctionModel& gfm, const CreditFrame& frame,
           const CdsParams& params, const CvaQuadrature& quad) {
    if (params.recovery_pb >= 1.0) return 0.0;
    return valuation_adjustment(gfm, frame, params, quad, 1);
}

// ---------------------------------------------------------------------------
// Merton comparison
// ---------------------------------------------------------------------------

double merton_green(const CorrelationModel& model, double tau, const Vec3& p1,
                    const Vec3& p0) {
    if (tau <= 0.0) throw std::domain_error("merton_green: tau > 0 required");
    Eigen::Matrix3d C;
    C << 1.0, model.rho_xy(), model.rho_xz(),
         model.rho_xy(), 1.0, model.rho_yz(),
         model.rho_xz(), model.rho_yz(), 1.0;
    const Vec3 d = p1 - p0 - model.drift() * tau;
    const double det = C.determinant();
    const double quad = d.dot(C.inverse() * d) / tau;
    return std::exp(-0.5 * quad) /
           std::sqrt(std::pow(2.0 * M_PI, 3) * det * tau * tau * tau);
}

namespace {

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54; }
};

}  // namespace

double merton_survival(const BankNetwork& net, long n_draws, std::uint64_t seed) {
    net.validate();
    Eigen::Matrix3d C;
    C << 1.0, net.rho_xy, net.rho_xz,
         net.rho_xy, 1.0, net.rho_yz,
         net.rho_xz, net.rho_yz, 1.0;
    const Eigen::Matrix3d L = Eigen::LLT<Eigen::Matrix3d>(C).matrixL();
    const double T = net.horizon;
    // liabilities grow at the same per-bank rates as the assets; scale each
    // bank's settlement row by exp(-mu_i T)
    BankNetwork grown = net;
    for (int i = 0; i < 3; ++i) {
        const double g = std::exp(net.growth_rates[i] * T);
        grown.external_liabilities[i] *= g;
        for (int j = 0; j < 3; ++j) grown.mutual_liabilities(i, j) *= g;
    }
    long alive = 0;
    SplitMix64 rng{seed};
    for (long p = 0; p < n_draws; ++p) {
        double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform(), u4 = rng.uniform();
        const double r1 = std::sqrt(-2.0 * std::log(u1));
        const double r2 = std::sqrt(-2.0 * std::log(u3));
        const Vec3 Z(r1 * std::cos(2.0 * M_PI * u2), r1 * std::sin(2.0 * M_PI * u2),
                     r2 * std::cos(2.0 * M_PI * u4));
        const Vec3 G = L * Z;
        Vec3 AT;
        for (int i = 0; i < 3; ++i)
            AT[i] = net.assets[i] *
                    std::exp((net.growth_rates[i] - 0.5 * net.volatilities[i] * net.volatilities[i]) * T +
                             net.volatilities[i] * std::sqrt(T) * G[i]);
        const Vec3 omega = settlement_solve(grown, AT);
        if ((omega.array() >= 1.0 - 1e-12).all()) ++alive;
    }
    return static_cast<double>(alive) / n_draws;
}

double trivariate_normal_cdf(const Vec3& upper, double r12, double r13, double r23) {
    const int n = 160;
    const double lo = -8.5;
    if (upper[0] <= lo) return 0.0;
    const auto g1 = gauss_legendre(n, lo, upper[0]);
    const double s2 = std::sqrt(1.0 - r12 * r12), s3 = std::sqrt(1.0 - r13 * r13);
    double rc = (r23 - r12 * r13) / (s2 * s3);
    rc = std::clamp(rc, -0.999999999, 0.999999999);
    const double sc = std::sqrt(1.0 - rc * rc);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z1 = g1.nodes[i];
        const double a2 = (upper[1] - r12 * z1) / s2;
        const double a3 = (upper[2] - r13 * z1) / s3;
        if (a2 <= lo) continue;
        const auto g2 = gauss_legendre(n, lo, a2);
        double inner = 0.0;
        for (int j = 0; j < n; ++j) {
            const double u = g2.nodes[j];
            inner += g2.weights[j] * norm_pdf(u) * norm_cdf((a3 - rc * u) / sc);
        }
        acc += g1.weights[i] * norm_pdf(z1) * inner;
    }
    return acc;
}

LiptonSurvivalResult lipton_survival_full(const BankNetwork& net, int N, int K, int m,
                                          int threads) {
    const CreditFrame frame = make_frame(net);
    const CorrelationModel model = frame_model(net, frame);
    const Vec3 q0 = decorrelate(frame.start, model);
    const double r0 = q0.norm();
    // window wide enough for the mode decay scale r0^2/tau
    const double s_decay = 2.0 * (r0 * r0 / frame.tau + 1.0) * 17.0;
    SolverConfig cfg;
    cfg.method = SolverConfig::Method::cheb_pencil;
    cfg.m = m;
    cfg.M = 400;
    cfg.window_hi = std::max(estimate_window_hi(model, 40), s_decay);
    cfg.threads = threads;
    NepProblem problem(model, N, K);
    auto pairs = solve_cheb_pencil(problem, cfg);
    GreensFunctionModel gfm(model, pairs, problem.alpha(), Frame::original);
    LiptonSurvivalResult out;
    out.modes = static_cast<int>(pairs.size());
    out.q = joint_survival_gegenbauer(gfm, frame, frame.tau);
    out.q_direct = joint_survival_direct(gfm, frame, frame.tau);
    return out;
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

double model_spread_1d(CalibModel model, double sigma, double assets,
                       double liabilities, double horizon, double recovery) {
    const double x = std::log(assets / liabilities);
    if (x <= 0.0) throw std::invalid_argument("model_spread_1d: assets <= liabilities");
    if (model == CalibModel::black_cox) {
        // continuous barrier at L; unit-vol scaled distance and drift
        const double xs = x / sigma, xi = -0.5 * sigma;
        const double pd = first_passage_cdf(horizon, xs, xi);
        const double emin = expected_min_tau(horizon, xs, xi);
        if (emin <= 0.0) return 0.0;
        return (1.0 - recovery) * pd / emin;  // par CDS spread, zero rates
    }
    // Merton zero-coupon bond spread
    const double st = sigma * std::sqrt(horizon);
    const double d1 = (x + 0.5 * st * st) / st;
    const double d2 = d1 - st;
    const double debt = assets * norm_cdf(-d1) + liabilities * norm_cdf(d2);
    return -std::log(debt / liabilities) / horizon;
}

double calibrate_sigma_1d(double target_spread, CalibModel model, double assets,
                          double liabilities, double horizon, double recovery) {
    if (target_spread <= 0.0)
        throw std::invalid_argument("calibrate_sigma_1d: target spread > 0");
    auto f = [&](double s) {
        return model_spread_1d(model, s, assets, liabilities, horizon, recovery) -
               target_spread;
    };
    double lo = 1e-6, hi = 0.5;
    while (f(hi) < 0.0 && hi < 64.0) hi *= 2.0;
    if (f(lo) > 0.0 || f(hi) < 0.0)
        throw numerical_error("calibrate_sigma_1d: no bracket for the target spread");
    return bisect_secant(f, lo, hi, 1e-10);
}

}  // namespace octgf
