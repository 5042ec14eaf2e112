// SPDX-License-Identifier: Apache-2.0
//
// octgf: absorbed-octant transition densities and the three-bank credit
// model built on them. Subcommands: eigen, green, credit, validate.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "octgf/credit.hpp"
#include "octgf/green.hpp"
#include "octgf/nep.hpp"
#include "octgf/reference.hpp"
#include "octgf/validate.hpp"

namespace {

using namespace octgf;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

struct EigenArgs {
    std::vector<double> rho{0.0, 0.0, 0.0};
    std::vector<double> drift{0.0, 0.0, 0.0};
    std::string method = "cheb";
    int N = 20, K = 1000, m = 100, M = 30, L = 500;
    double window_lo = 0.5, window_hi = 0.0;
    double mu0 = 0.0, R = 3.0, mu_max = 0.0;
    double tol_rank = 1e-8, tol_res = 1e-6;
    std::string alpha_scale = "max";
    std::string out = "eigenpairs.json";
    int threads = 1;
};

int cmd_eigen(const EigenArgs& a) {
    CorrelationModel model(a.rho[0], a.rho[1], a.rho[2],
                           Vec3(a.drift[0], a.drift[1], a.drift[2]));
    NepProblem problem(model, a.N, a.K,
                       a.alpha_scale == "mean" ? NepProblem::AlphaScale::mean_z
                                               : NepProblem::AlphaScale::max_z);
    SolverConfig cfg;
    cfg.m = a.m;
    cfg.M = a.M;
    cfg.window_lo = a.window_lo;
    cfg.window_hi = a.window_hi;
    cfg.contour_center = a.mu0;
    cfg.contour_radius = a.R;
    cfg.contour_nodes = a.L;
    cfg.contour_mu_max = a.mu_max;
    cfg.tol_rank = a.tol_rank;
    cfg.tol_res = a.tol_res;
    cfg.threads = a.threads;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Eigenpair> pairs;
    if (a.method == "cheb") {
        cfg.method = SolverConfig::Method::cheb_pencil;
        pairs = solve_cheb_pencil(problem, cfg);
    } else if (a.method == "beyn") {
        cfg.method = SolverConfig::Method::contour;
        pairs = sweep_beyn(problem, cfg);
    } else if (a.method == "scan") {
        cfg.method = SolverConfig::Method::scan;
        const auto minima = solve_scan(problem, cfg);
        // eigenvectors from the null-space direction at each minimizer
        // (heuristic: the scan method only locates eigenvalues)
        std::vector<Eigenpair> out;
        for (double s : minima) {
            Eigenpair p;
            p.lambda = 0.5 + std::sqrt(cxd(0.25 + s));
            p.lambda_sq = s;
            const auto sv = svd(problem.assemble(p.lambda));
            VectorXcd v = sv.V.col(problem.basis_size() - 1);
            p.residual = problem.residual(p.lambda, v);
            for (int n = 0; n < problem.basis_size(); ++n)
                v[n] *= std::exp(-problem.alpha() * problem.k(n));
            p.coeffs = v;
            normalize_eigenpair(p, problem);
            out.push_back(std::move(p));
            if (static_cast<int>(out.size()) >= a.M) break;
        }
        pairs = std::move(out);
    } else {
        throw std::invalid_argument("unknown method: " + a.method +
                                    " (expected cheb, beyn, or scan)");
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (pairs.empty()) throw numerical_error("solver returned no eigenpairs");

    const EigenpairSet set = make_eigenpair_set(problem, cfg, pairs);
    save_eigenpair_set(set, a.out);

    std::printf("# %zu eigenpairs (%s), %.2f s\n", pairs.size(), a.method.c_str(), secs);
    std::printf("%4s %14s %12s %10s\n", "l", "Re(L^2)", "Im(L^2)", "residual");
    for (size_t i = 0; i < pairs.size(); ++i)
        std::printf("%4zu %14.6f %12.6f %10.2e\n", i + 1, pairs[i].lambda_sq.real(),
                    pairs[i].lambda_sq.imag(), pairs[i].residual);
    std::printf("wrote %s\n", a.out.c_str());
    return kExitOk;
}

struct GreenArgs {
    std::string pairs_file;
    std::vector<double> rho;  // optional frame check
    double tau = 1.0;
    std::vector<double> source{1.0, 1.0, 1.0};
    std::vector<double> lo{0.0, 0.0, 0.0};
    std::vector<double> hi{4.0, 4.0, 4.0};
    int n = 16;
    std::string frame = "original";
    std::string oracle;
    long paths = 1000000;
    int steps = 500;
    std::uint64_t seed = 7;
    int fd_n = 50, fd_nt = 100;
    std::string out = "green.csv";
    int threads = 1;
};

int cmd_green(const GreenArgs& a) {
    const EigenpairSet set = load_eigenpair_set(a.pairs_file);
    if (!a.rho.empty()) {
        if (a.rho.size() != 3) throw std::invalid_argument("--rho needs 3 values");
        if (std::abs(set.rho_xy - a.rho[0]) > 1e-12 ||
            std::abs(set.rho_xz - a.rho[1]) > 1e-12 ||
            std::abs(set.rho_yz - a.rho[2]) > 1e-12)
            throw std::invalid_argument(
                "eigenpair file correlations do not match the requested --rho");
    }
    Frame frame = Frame::original;
    if (a.frame == "decorrelated") frame = Frame::decorrelated;
    else if (a.frame != "original")
        throw std::invalid_argument("frame must be original or decorrelated");

    const GreensFunctionModel gfm = GreensFunctionModel::from_set(set, frame);
    const Vec3 p0(a.source[0], a.source[1], a.source[2]);
    GridSpec spec;
    spec.lo = Vec3(a.lo[0], a.lo[1], a.lo[2]);
    spec.hi = Vec3(a.hi[0], a.hi[1], a.hi[2]);
    spec.n = a.n;
    const auto rows = evaluate_grid(gfm, a.tau, p0, spec, a.threads);

    std::vector<double> oracle;
    std::string oracle_name = a.oracle;
    if (!a.oracle.empty()) {
        const CorrelationModel model = set.make_model();
        oracle.reserve(rows.size());
        if (a.oracle == "images") {
            if (!model.zero_drift())
                throw std::invalid_argument("images oracle requires zero drift");
            ImageSystem images(model);
            for (const auto& r : rows) oracle.push_back(images.density(a.tau, r.point, p0));
        } else if (a.oracle == "zerocorr") {
            if (!model.zero_correlation())
                throw std::invalid_argument("zerocorr oracle requires rho = 0");
            for (const auto& r : rows)
                oracle.push_back(zero_corr_green(a.tau, r.point, p0, model.drift()));
        } else if (a.oracle == "adi") {
            FdGrid grid;
            grid.n_space = a.fd_n;
            grid.n_time = a.fd_nt;
            grid.extent = spec.hi * 1.25;
            const FdSolution sol = adi_hv_solve(model, grid, p0, a.tau);
            for (const auto& r : rows) oracle.push_back(sol.at(r.point));
        } else if (a.oracle == "mc") {
            const McResult mc =
                mc_absorbed_paths(model, p0, a.tau, a.paths, a.steps, a.seed, a.threads,
                                  static_cast<int>(a.paths));
            // histogram of survivor endpoints over the grid cells
            std::vector<double> hist(rows.size(), 0.0);
            const Vec3 w = (spec.hi - spec.lo) / a.n;
            for (const auto& s : mc.survivor_sample) {
                int idx[3];
                bool in = true;
                for (int d = 0; d < 3; ++d) {
                    idx[d] = static_cast<int>((s[d] - spec.lo[d]) / w[d]);
                    in = in && idx[d] >= 0 && idx[d] < a.n;
                }
                if (in) hist[(static_cast<size_t>(idx[0]) * a.n + idx[1]) * a.n + idx[2]] += 1.0;
            }
            const double dv = w.prod();
            for (auto& h : hist) h /= dv * a.paths;
            oracle = std::move(hist);
        } else {
            throw std::invalid_argument("unknown oracle: " + a.oracle);
        }
        const double err = l2_grid_error(rows, oracle, spec);
        std::printf("L2 grid error vs %s oracle: %.6e\n", oracle_name.c_str(), err);
    }
    write_grid_csv(a.out, rows, oracle.empty() ? nullptr : &oracle, oracle_name);
    std::printf("wrote %s (%zu rows)\n", a.out.c_str(), rows.size());
    if (gfm.clamped_negative_count() > 0)
        std::printf("note: %ld small negative truncation values clamped to 0\n",
                    gfm.clamped_negative_count());
    return kExitOk;
}

struct CreditArgs {
    std::string config;
    std::string out = "credit_report.json";
    double spread = 0.02;
    double recovery_rn = 0.4, recovery_ps = 0.4, recovery_pb = 0.4;
    int N = 20, K = 1000, m = 100;
    bool with_cva = false;
    std::string surface;  // e.g. "yz" -> grid over (y, z) starts
    int surface_n = 8;
    int threads = 1;
};

int cmd_credit(const CreditArgs& a) {
    std::ifstream in(a.config);
    if (!in) throw std::invalid_argument("cannot open config: " + a.config);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string raw = ss.str();
    const BankNetwork net = bank_network_from_json(raw);

    const CreditFrame frame = make_frame(net);
    const CorrelationModel model = frame_model(net, frame);
    const auto lip = lipton_survival_full(net, a.N, a.K, a.m, a.threads);
    const double merton = merton_survival(net);

    nlohmann::json rep;
    rep["inputs_raw"] = raw;  // echoed byte-for-byte
    rep["frame"] = {{"start", {frame.start[0], frame.start[1], frame.start[2]}},
                    {"xi", {frame.xi[0], frame.xi[1], frame.xi[2]}},
                    {"tau", frame.tau},
                    {"sigma_bar", frame.sigma_bar}};
    rep["survival"] = {{"gegenbauer", lip.q},
                       {"direct", lip.q_direct},
                       {"merton", merton},
                       {"modes", lip.modes}};

    if (a.with_cva || !a.surface.empty()) {
        SolverConfig cfg;
        cfg.m = a.m;
        cfg.M = 40;
        cfg.threads = a.threads;
        NepProblem problem(model, a.N, a.K);
        const auto pairs = solve_cheb_pencil(problem, cfg);
        GreensFunctionModel gfm(model, pairs, problem.alpha(), Frame::original);
        CdsParams params;
        params.spread = a.spread;
        params.recovery_rn = a.recovery_rn;
        params.recovery_ps = a.recovery_ps;
        params.recovery_pb = a.recovery_pb;
        if (a.with_cva)
            rep["cds"] = {{"spread", a.spread},
                          {"cva", cva(gfm, frame, params)},
                          {"dva", dva(gfm, frame, params)}};
        if (!a.surface.empty()) {
            // survival surface over two normalized start coordinates
            int ax1, ax2;
            if (a.surface == "yz") { ax1 = 1; ax2 = 2; }
            else if (a.surface == "xz") { ax1 = 0; ax2 = 2; }
            else if (a.surface == "xy") { ax1 = 0; ax2 = 1; }
            else throw std::invalid_argument("surface must be xy, xz, or yz");
            const std::string path = a.out + ".surface.csv";
            std::ofstream sf(path);
            sf.precision(17);
            sf << "c1,c2,q\n";
            for (int i = 0; i < a.surface_n; ++i)
                for (int j = 0; j < a.surface_n; ++j) {
                    CreditFrame f2 = frame;
                    f2.start[ax1] = 0.25 + 2.25 * i / (a.surface_n - 1.0);
                    f2.start[ax2] = 0.25 + 2.25 * j / (a.surface_n - 1.0);
                    sf << f2.start[ax1] << "," << f2.start[ax2] << ","
                       << joint_survival_gegenbauer(gfm, f2, f2.tau) << "\n";
                }
            std::printf("wrote %s\n", path.c_str());
        }
    }

    std::ofstream outf(a.out);
    if (!outf) throw std::runtime_error("cannot open for writing: " + a.out);
    outf << rep.dump(2) << "\n";
    std::printf("Q (continuous monitoring) = %.6f [gegenbauer], %.6f [direct]\n", lip.q,
                lip.q_direct);
    std::printf("Q (Merton)                = %.6f\n", merton);
    std::printf("wrote %s\n", a.out.c_str());
    return kExitOk;
}

struct ValidateArgs {
    bool quick = false;
    std::vector<int> only;
    std::string out;
    int threads = 1;
};

int cmd_validate(const ValidateArgs& a) {
    std::vector<CriterionResult> results;
    if (a.only.empty()) {
        results = run_all_criteria(a.quick, a.threads);
    } else {
        for (int id : a.only) results.push_back(run_criterion(id, a.quick, a.threads));
    }
    bool all = true;
    for (const auto& r : results) {
        std::printf("criterion %d [%s] %s (%.1f s)\n", r.id,
                    r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
        std::fputs(r.details.c_str(), stdout);
        all = all && r.passed;
    }
    if (!a.out.empty()) {
        std::ofstream outf(a.out);
        outf << criteria_report_json(results) << "\n";
        std::printf("wrote %s\n", a.out.c_str());
    }
    return all ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-analytical absorbed-octant Brownian transition densities"};
    app.require_subcommand(1);

    EigenArgs ea;
    auto* se = app.add_subcommand("eigen", "solve the nonlinear eigenvalue problem");
    se->add_option("--rho", ea.rho, "correlations rho_xy rho_xz rho_yz")->expected(3);
    se->add_option("--drift", ea.drift, "drifts mu_x mu_y mu_z")->expected(3);
    se->add_option("--method", ea.method, "cheb | beyn | scan");
    se->add_option("--N", ea.N, "basis truncation");
    se->add_option("--K", ea.K, "trapezoid nodes");
    se->add_option("--m", ea.m, "Chebyshev degree");
    se->add_option("--M", ea.M, "eigenpairs requested");
    se->add_option("--L", ea.L, "contour quadrature nodes");
    se->add_option("--window-lo", ea.window_lo, "window lower end in Re(Lambda^2)");
    se->add_option("--window-hi", ea.window_hi, "window upper end (0 = auto)");
    se->add_option("--mu0", ea.mu0, "first contour center (0 = auto)");
    se->add_option("--R", ea.R, "contour radius");
    se->add_option("--mu-max", ea.mu_max, "sweep end (0 = auto)");
    se->add_option("--tol-rank", ea.tol_rank, "rank test tolerance");
    se->add_option("--tol-res", ea.tol_res, "residual tolerance");
    se->add_option("--alpha-scale", ea.alpha_scale, "max | mean");
    se->add_option("--out", ea.out, "output eigenpair file");
    se->add_option("--threads", ea.threads, "worker threads");

    GreenArgs ga;
    auto* sg = app.add_subcommand("green", "evaluate the density on a grid");
    sg->add_option("--pairs", ga.pairs_file, "eigenpair file")->required();
    sg->add_option("--rho", ga.rho, "expected correlations (frame check)")->expected(3);
    sg->add_option("--tau", ga.tau, "elapsed time");
    sg->add_option("--source", ga.source, "start point x y z")->expected(3);
    sg->add_option("--grid-lo", ga.lo, "grid lower corner")->expected(3);
    sg->add_option("--grid-hi", ga.hi, "grid upper corner")->expected(3);
    sg->add_option("--grid-n", ga.n, "points per axis");
    sg->add_option("--frame", ga.frame, "original | decorrelated");
    sg->add_option("--oracle", ga.oracle, "images | adi | zerocorr | mc");
    sg->add_option("--paths", ga.paths, "MC paths");
    sg->add_option("--steps", ga.steps, "MC steps");
    sg->add_option("--seed", ga.seed, "MC seed");
    sg->add_option("--fd-n", ga.fd_n, "ADI spatial points");
    sg->add_option("--fd-nt", ga.fd_nt, "ADI time steps");
    sg->add_option("--out", ga.out, "output CSV");
    sg->add_option("--threads", ga.threads, "worker threads");

    CreditArgs ca;
    auto* sc = app.add_subcommand("credit", "three-bank survival / CVA report");
    sc->add_option("--config", ca.config, "bank network JSON")->required();
    sc->add_option("--out", ca.out, "report path");
    sc->add_option("--spread", ca.spread, "CDS running spread (per year)");
    sc->add_option("--recovery-rn", ca.recovery_rn, "reference-name recovery");
    sc->add_option("--recovery-ps", ca.recovery_ps, "protection-seller recovery");
    sc->add_option("--recovery-pb", ca.recovery_pb, "protection-buyer recovery");
    sc->add_option("--N", ca.N, "basis truncation");
    sc->add_option("--K", ca.K, "trapezoid nodes");
    sc->add_option("--m", ca.m, "Chebyshev degree");
    sc->add_flag("--cva", ca.with_cva, "also value CVA/DVA for a CDS");
    sc->add_option("--surface", ca.surface, "survival surface plane: xy | xz | yz");
    sc->add_option("--surface-n", ca.surface_n, "surface grid points per axis");
    sc->add_option("--threads", ca.threads, "worker threads");

    ValidateArgs va;
    auto* sv = app.add_subcommand("validate", "run the acceptance suite");
    sv->add_flag("--quick", va.quick, "reduced-size smoke run");
    sv->add_option("--criterion", va.only, "run only these criteria (1..9)");
    sv->add_option("--out", va.out, "machine-readable report path");
    sv->add_option("--threads", va.threads, "worker threads");

    try {
        app.parse(argc, argv);
        if (se->parsed()) return cmd_eigen(ea);
        if (sg->parsed()) return cmd_green(ga);
        if (sc->parsed()) return cmd_credit(ca);
        if (sv->parsed()) return cmd_validate(va);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const octgf::numerical_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitOk;
}
