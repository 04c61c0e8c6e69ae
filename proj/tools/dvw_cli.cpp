// dvw: command-line driver.
//
//   dvw verify-ops [--orders 2,4,6]
//   dvw solve CONFIG [--out-dir DIR]
//   dvw convergence CONFIG [--out-dir DIR]
//   dvw normal-mode CONFIG [--out-dir DIR]
//
// Exit codes: 0 success, 1 usage or configuration error, 2 verification
// failure, 3 numerical instability.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dvw/config.hpp"
#include "dvw/disc.hpp"
#include "dvw/mms.hpp"
#include "dvw/normal_mode.hpp"
#include "dvw/sbp.hpp"
#include "dvw/timeint.hpp"
#include "dvw/verify.hpp"

namespace fs = std::filesystem;
using namespace dvw;

namespace {

constexpr int kOk = 0, kUsage = 1, kVerifyFailed = 2, kUnstable = 3;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Opens <dir>/<prefix>_<name>.csv and writes the config header line.
class CsvFile {
public:
    CsvFile(const RunConfig& c, const std::string& out_dir, const std::string& name) {
        fs::path dir = out_dir.empty() ? fs::path(c.dir) : fs::path(out_dir);
        fs::create_directories(dir);
        path_ = dir / (c.prefix + "_" + name + ".csv");
        os_.open(path_);
        if (!os_) throw std::runtime_error("cannot write " + path_.string());
        os_ << "# " << config_summary(c) << '\n';
    }
    std::ofstream& stream() { return os_; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream os_;
};

std::string time_tag(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

int cmd_verify_ops(const std::vector<int>& orders) {
    bool all = true;
    for (int order : orders) {
        std::printf("order %d\n", order);
        for (const auto& c : verify_operators(order)) {
            std::printf("  %-4s %-52s %10.3e  (tol %.0e)%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                        c.residual, c.tolerance, c.detail.empty() ? "" : "  ", c.detail.c_str());
            all = all && c.pass;
        }
        const SbpOperatorSet s = build_sbp_set(order, min_grid_points(order) * 2, 1.0);
        std::printf("  theta = %.10f, m = %d\n", s.theta, s.m);
    }
    std::printf("%s\n", all ? "all operator invariants hold" : "operator verification FAILED");
    return all ? kOk : kVerifyFailed;
}

int cmd_solve(const RunConfig& c, const std::string& out_dir) {
    require(c, "domain", "n");
    const Problem p = build_problem(c, c.n);
    const TimeConfig tc = build_time(c);
    Semidiscretization sd(p);
    Trajectory tr = rk4_advance(sd, sd.initial_state(), tc);

    std::vector<double> xs, ys;
    grid_coordinates(sd.grid(), xs, ys);
    const bool two_d = sd.dim() == 2;
    auto write_state = [&](const State& s, const std::string& name) {
        CsvFile f(c, out_dir, name);
        auto& os = f.stream();
        os << (two_d ? "x,y,v\n" : "x,v\n");
        for (int k = 0; k < sd.size(); ++k) {
            os << num(xs[k]) << ',';
            if (two_d) os << num(ys[k]) << ',';
            os << num(s.v[k]) << '\n';
        }
        std::printf("wrote %s\n", f.path().c_str());
    };
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k)
        write_state(tr.snapshots[k], "t" + time_tag(tc.snapshot_times[k]));
    write_state(tr.final, "final");
    if (tc.record_energy) {
        CsvFile f(c, out_dir, "energy");
        f.stream() << "t,energy\n";
        for (std::size_t k = 0; k < tr.energy.size(); ++k)
            f.stream() << num(tr.energy_t[k]) << ',' << num(tr.energy[k]) << '\n';
        std::printf("wrote %s\n", f.path().c_str());
    }
    std::printf("%ld steps, dt = %.6e, T = %g\n", tr.steps, tr.dt, tc.T);
    return kOk;
}

int cmd_convergence(const RunConfig& c, const std::string& out_dir) {
    ConvergenceReport rep;
    if (c.has("study.reference_n")) {
        require(c, "study", "resolutions");
        const TimeConfig tc = [&] {
            TimeConfig t = build_time(c);
            t.record_energy = false;
            t.snapshot_times.clear();
            return t;
        }();
        rep = run_self_convergence([&](int n) { return build_problem(c, n); }, tc, c.resolutions,
                                   c.reference_n);
    } else {
        rep = run_convergence(build_case(c));
    }
    CsvFile f(c, out_dir, "convergence");
    f.stream() << rep.csv();
    std::printf("%s", rep.table().c_str());
    std::printf("wrote %s\n", f.path().c_str());
    return kOk;
}

double constant_field(const std::string& src, const char* key) {
    const Expr e = parse(src);
    const double v = evaluate(e, 0.0, 0.0, 0.0);
    for (double x : {0.13, 0.5, 0.97})
        for (double y : {0.21, 0.77})
            if (std::abs(evaluate(e, x, y, 0.0) - v) > 1e-14 * std::max(1.0, std::abs(v)))
                throw ConfigError(std::string("[materials] ") + key +
                                  ": normal-mode analysis needs constant coefficients");
    return v;
}

int cmd_normal_mode(const RunConfig& c, const std::string& out_dir) {
    require(c, "materials", "gamma");
    const double alpha = constant_field(c.alpha, "alpha");
    const double beta = constant_field(c.beta, "beta");
    const double gamma = constant_field(c.gamma, "gamma");
    if (!(gamma > 0.0)) throw ConfigError("[materials] gamma: must be positive");
    if (c.order != 4) throw ConfigError("[discretization] order: normal-mode analysis supports order 4 only");

    if (!c.s_values.empty()) {
        const std::vector<double> hs = c.h_values.empty() ? std::vector<double>{0.01} : c.h_values;
        CsvFile f(c, out_dir, "roots");
        auto& os = f.stream();
        os << "s_re,s_im,h,kappa1_re,kappa1_im,kappa2_re,kappa2_im,abs_kappa1,abs_kappa2,"
              "residual1,residual2,inside\n";
        std::printf("%12s %12s %10s %24s %24s %7s\n", "Re s", "Im s", "h", "|kappa1|", "|kappa2|",
                    "inside");
        for (cplx s : c.s_values)
            for (double h : hs) {
                LaplaceParams lp{s, h, alpha, beta, gamma};
                const CharacteristicRoots r = characteristic_roots(lp);
                os << num(s.real()) << ',' << num(s.imag()) << ',' << num(h) << ','
                   << num(r.kappa1.real()) << ',' << num(r.kappa1.imag()) << ','
                   << num(r.kappa2.real()) << ',' << num(r.kappa2.imag()) << ','
                   << num(std::abs(r.kappa1)) << ',' << num(std::abs(r.kappa2)) << ','
                   << num(r.residual1) << ',' << num(r.residual2) << ',' << r.inside << '\n';
                std::printf("%12.5g %12.5g %10.3g %24.17g %24.17g %7d\n", s.real(), s.imag(), h,
                            std::abs(r.kappa1), std::abs(r.kappa2), r.inside);
            }
        std::printf("wrote %s\n", f.path().c_str());
    }

    if (!c.multipliers.empty()) {
        const double h = c.h_values.empty() ? 0.01 : c.h_values.front();
        const auto scan = determinant_scan(alpha, beta, gamma, h, c.multipliers);
        CsvFile f(c, out_dir, "determinant");
        auto& os = f.stream();
        os << "multiplier,tau3,tau1,det_norm,singular\n";
        std::printf("%10s %14s %14s %14s %9s\n", "multiplier", "tau3", "tau1", "det_norm", "singular");
        for (const auto& p : scan) {
            os << num(p.multiplier) << ',' << num(p.tau3) << ',' << num(p.tau1) << ','
               << num(p.det_norm) << ',' << (p.singular ? 1 : 0) << '\n';
            std::printf("%10.4g %14.6e %14.6e %14.6e %9s\n", p.multiplier, p.tau3, p.tau1,
                        p.det_norm, p.singular ? "yes" : "no");
        }
        std::printf("wrote %s\n", f.path().c_str());
    }
    if (c.s_values.empty() && c.multipliers.empty())
        throw ConfigError("[study]: normal-mode needs s_values or multipliers");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SBP-SAT solver for the diffusive viscous wave equation"};
    app.require_subcommand(1);

    std::vector<int> orders{2, 4, 6};
    auto* verify = app.add_subcommand("verify-ops", "check the SBP operator invariants");
    verify->add_option("--orders", orders, "orders to check")->delimiter(',')->check(CLI::IsMember({2, 4, 6}));

    std::string config_path, out_dir;
    auto add_run = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out-dir", out_dir, "output directory (overrides [output] dir)");
        return sub;
    };
    auto* solve = add_run("solve", "integrate one problem and write snapshots and energy");
    auto* conv = add_run("convergence", "run a convergence study");
    auto* nm = add_run("normal-mode", "characteristic roots and determinant scans");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (verify->parsed()) return cmd_verify_ops(orders);
        const RunConfig c = load_config(config_path);
        if (solve->parsed()) return cmd_solve(c, out_dir);
        if (conv->parsed()) return cmd_convergence(c, out_dir);
        if (nm->parsed()) return cmd_normal_mode(c, out_dir);
    } catch (const InstabilityError& e) {
        std::fprintf(stderr, "dvw: %s\n", e.what());
        return kUnstable;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dvw: error: %s\n", e.what());
        return kUsage;
    }
    return kUsage;
}
