// End-to-end acceptance checks.  Each criterion prints one PASS/FAIL line
// followed by the measured quantities; the exit code is the number of
// failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "dense_oracle.hpp"
#include "dvw/config.hpp"
#include "dvw/mms.hpp"
#include "dvw/normal_mode.hpp"
#include "dvw/verify.hpp"

using namespace dvw;

namespace {

const std::string kConfigDir = DVW_CONFIG_DIR;

RunConfig config(const std::string& name) { return load_config(kConfigDir + "/" + name + ".conf"); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail_if(bool bad, const std::string& why) {
        if (bad) {
            pass = false;
            detail += "  [" + why + "]";
        }
    }
    void note(const std::string& s) { detail += "\n      " + s; }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

int failures = 0;

void criterion(const char* id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail += std::string("  [exception: ") + e.what() + "]";
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %s: %s (%.1f s)%s\n", id, o.pass ? "PASS" : "FAIL", title, sec, o.detail.c_str());
    std::fflush(stdout);
}

std::string rates(const ConvergenceReport& r) {
    std::string s;
    for (const auto& row : r.rows)
        s += fmt("n=%g ", row.n) + fmt("e=%.3e ", row.l2_error) +
             (std::isnan(row.rate) ? std::string() : fmt("rate=%.3f ", row.rate));
    return s + fmt("fitted=%.3f", r.fitted_rate);
}

// Energy trace of a homogeneous run; returns the largest per-step increase
// relative to E(0).
double worst_increase(const Trajectory& tr) {
    double worst = -1e300;
    for (std::size_t k = 1; k < tr.energy.size(); ++k)
        worst = std::max(worst, (tr.energy[k] - tr.energy[k - 1]) / tr.energy[0]);
    return worst;
}

Outcome a1() {
    Outcome o;
    for (int order : {2, 4, 6}) {
        int failed = 0;
        double worst = 0.0;
        for (const auto& c : verify_operators(order, 50)) {
            if (!c.pass) {
                ++failed;
                o.note(fmt("order %g: ", order) + c.name + fmt(" residual %.3e", c.residual));
            }
            worst = std::max(worst, c.tolerance > 0 ? c.residual / c.tolerance : 0.0);
        }
        double exact = 0.0;
        for (const auto& row : exactness_table(order))
            exact = std::max({exact, row.interior_error, row.boundary_error});
        o.fail_if(failed > 0, fmt("order %g invariants", order));
        o.fail_if(!(exact < 1e-9), fmt("order %g exactness", order));
        o.note(fmt("order %g: ", order) + fmt("worst residual/tolerance %.2e, ", worst) +
               fmt("worst exactness error %.2e", exact));
    }
    return o;
}

Outcome a2() {
    Outcome o;
    const Borrowing b = compute_borrowing(4);
    o.fail_if(std::abs(b.theta - 0.2505765857) >= 1e-6, "theta");
    o.fail_if(b.m != 4, "m");
    o.note(fmt("theta = %.10f", b.theta) + fmt(", m = %g", b.m));
    return o;
}

Outcome a3() {
    Outcome o;
    const int n = 41;
    for (int order : {2, 4})
        for (int variable = 0; variable < 2; ++variable) {
            SbpOperatorSet s = build_sbp_set(order, n, 1.0 / (n - 1));
            std::vector<double> b(n);
            for (int i = 0; i < n; ++i) b[i] = variable ? 1.0 + 0.5 * std::sin(7.0 * i / (n - 1)) : 1.0;
            SecondDerivOp op(s, b);
            const Eigen::MatrixXd A = op.A().to_dense();
            const double scale = A.cwiseAbs().maxCoeff();
            const double asym = (A - A.transpose()).cwiseAbs().maxCoeff() / scale;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
            const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
            const double l0 = es.eigenvalues()(0) / norm, l1 = es.eigenvalues()(1) / norm;
            const std::string tag = fmt("order %g", order) + (variable ? " variable b" : " b = 1");
            o.fail_if(asym > 1e-12, tag + " symmetry");
            o.fail_if(std::abs(l0) > 1e-12, tag + " zero eigenvalue");
            o.fail_if(!(l1 > 1e-8), tag + " second eigenvalue");
            o.note(tag + fmt(": asym %.1e, ", asym) + fmt("l0/|l| %.1e, ", l0) + fmt("l1/|l| %.3e", l1));
        }
    return o;
}

Outcome a4() {
    Outcome o;
    for (const char* name : {"cancellation_dirichlet", "cancellation_neumann"}) {
        ManufacturedCase c = build_case(config(name));
        c.time.rule = DtRule::viscous;
        c.time.c_visc = 0.1;
        c.time.T = 0.5;
        const int n = 81;
        Problem p = make_problem(c, n);
        Semidiscretization sd(p);
        Trajectory tr = rk4_advance(sd, sd.initial_state(), c.time);
        const Grid1D& g = std::get<Grid1D>(p.grid);
        double err = 0.0;
        for (int i = 0; i < n; ++i)
            err = std::max(err, std::abs(tr.final.v[i] - evaluate(c.exact, g.x(i), 0.0, tr.final.t)));
        o.fail_if(!(err < 1e-10), name);
        o.note(std::string(name) + fmt(": max error %.3e", err) + fmt(" after %g steps", tr.steps));
    }
    return o;
}

Outcome a5() {
    Outcome o;
    for (int k = 1; k <= 4; ++k) {
        const std::string name = "case" + std::to_string(k);
        ConvergenceReport r = run_convergence(build_case(config(name)));
        o.fail_if(!(r.fitted_rate >= 3.8), name + " safety 2");
        o.note(name + " safety 2: " + rates(r));
    }
    for (const char* name : {"case1_limit", "case3_limit"}) {
        ConvergenceReport r = run_convergence(build_case(config(name)));
        o.fail_if(!(r.fitted_rate >= 2.3 && r.fitted_rate <= 3.0), name);
        o.note(std::string(name) + " safety 1 (constant-coefficient limit): " + rates(r));
    }
    // For reference only: safety 1 relative to the general borrowing constant.
    for (int k = 1; k <= 4; ++k) {
        const std::string name = "case" + std::to_string(k);
        ManufacturedCase c = build_case(config(name));
        c.penalty_safety = 1.0;
        ConvergenceReport r = run_convergence(c);
        o.note(name + " safety 1 (general theta, informational): " + rates(r));
    }
    return o;
}

Outcome a6() {
    Outcome o;
    for (const char* name : {"varcoef_o4_dirichlet", "varcoef_o4_neumann", "varcoef_o6_dirichlet",
                             "varcoef_o6_neumann"}) {
        ManufacturedCase c = build_case(config(name));
        const double need = c.order == 4 ? 3.8 : 5.2;
        ConvergenceReport r = run_convergence(c);
        o.fail_if(!(r.fitted_rate >= need), name);
        o.note(std::string(name) + ": " + rates(r));
    }
    return o;
}

Outcome a7() {
    Outcome o;
    const RunConfig c = config("ricker_convergence");
    ConvergenceReport r = run_self_convergence([&](int n) { return build_problem(c, n); }, build_time(c),
                                               c.resolutions, c.reference_n);
    o.fail_if(!(r.fitted_rate >= 3.5), "fitted rate");
    o.note(rates(r));
    return o;
}

Outcome a8() {
    Outcome o;
    for (int k = 1; k <= 4; ++k)
        for (BcKind bc : {BcKind::dirichlet, BcKind::neumann}) {
            RunConfig rc = config("case" + std::to_string(k));
            rc.bc = bc;
            Problem p = build_problem(rc, 81);
            p.initial_value = parse("exp(-100*(x-0.5)^2)");
            p.initial_rate = parse("sin(3*x)");
            p.T = 1.0;
            Semidiscretization sd(p);
            TimeConfig t = build_time(rc);
            t.T = 1.0;
            t.record_energy = true;
            Trajectory tr = rk4_advance(sd, sd.initial_state(), t);
            const double worst = worst_increase(tr);
            const std::string tag = "case" + std::to_string(k) + " " + to_string(bc);
            o.fail_if(worst > 1e-10, tag);
            o.note(tag + fmt(": largest relative step increase %.2e", worst) +
                   fmt(", E(T)/E(0) = %.6f", tr.energy.back() / tr.energy.front()));
        }

    Problem p;
    p.grid = Grid1D(0.1, 1.1, 81);
    p.fields = {parse("0"), parse("0"), parse("0.1")};
    p.bc.kind = BcKind::neumann;
    p.initial_value = parse("cos(2*pi*(x-0.1))");
    p.T = 1.0;
    Semidiscretization sd(p);
    TimeConfig t;
    t.T = 1.0;
    t.rule = DtRule::hyperbolic;
    t.record_energy = true;
    Trajectory tr = rk4_advance(sd, sd.initial_state(), t);
    const double drift = std::abs(tr.energy.back() - tr.energy.front()) / tr.energy.front();
    o.fail_if(!(drift < 1e-8), "conservation");
    o.note(fmt("alpha = beta = 0, neumann: |E(T) - E(0)|/E(0) = %.2e", drift));
    return o;
}

Outcome a9() {
    Outcome o;
    const CharacteristicRoots c0 = characteristic_roots(cplx(0.0));
    const double d0 = std::abs(c0.kappa1 - (7.0 - 4.0 * std::sqrt(3.0)));
    o.fail_if(!(d0 <= 1e-12), "kappa1(0)");
    o.note(fmt("|kappa1(0) - (7 - 4 sqrt 3)| = %.1e", d0));

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> re(0.0, 10.0), im(-10.0, 10.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const CharacteristicRoots c = characteristic_roots(cplx(re(rng), im(rng)));
        worst = std::max({worst, c.residual1, c.residual2});
    }
    o.fail_if(!(worst <= 1e-10), "quartic residual");
    o.note(fmt("largest quartic residual over 100 random r: %.2e", worst));

    for (int k = 1; k <= 4; ++k) {
        const RunConfig rc = config("normal_mode_case" + std::to_string(k));
        const double a = std::stod(rc.alpha), b = std::stod(rc.beta), g = std::stod(rc.gamma);
        const auto scan = determinant_scan(a, b, g, 0.01, {1.0, 1.01, 2.0}, 1e-10);
        const bool ok = scan[0].singular && !scan[1].singular && !scan[2].singular;
        o.fail_if(!ok, "case " + std::to_string(k));
        o.note("case " + std::to_string(k) + fmt(": det at 1x %.2e", scan[0].det_norm) +
               fmt(", 1.01x %.2e", scan[1].det_norm) + fmt(", 2x %.2e", scan[2].det_norm));
    }
    return o;
}

Outcome a10() {
    Outcome o;
    const RunConfig rc = config("case4");
    double lo = 1e300, hi = 0.0;
    for (double h : {1e-2, 1e-3, 1e-4}) {
        LaplaceParams p;
        p.s = 1.0;
        p.h = h;
        p.alpha = std::stod(rc.alpha);
        p.beta = std::stod(rc.beta);
        p.gamma = std::stod(rc.gamma);
        const CharacteristicRoots c = characteristic_roots(p);
        const double q = h / (1.0 - std::norm(c.kappa2));
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        o.note(fmt("h = %.0e: ", h) + fmt("|kappa2| = %.6f, ", std::abs(c.kappa2)) +
               fmt("h/(1 - |kappa2|^2) = %.6f", q));
    }
    o.fail_if(!(hi / lo < 2.0), "variation");
    o.note(fmt("variation factor %.4f", hi / lo));
    return o;
}

Outcome a11() {
    Outcome o;
    struct Setup {
        int dim, n, order;
    };
    double worst = 0.0;
    int combos = 0;
    for (Setup su : {Setup{1, 11, 2}, Setup{1, 11, 4}, Setup{2, 7, 2}})
        for (BcKind bc : {BcKind::dirichlet, BcKind::neumann})
            for (SatVariant var : {SatVariant::standard, SatVariant::fully_compatible})
                for (int data = 0; data < 2; ++data) {
                    Problem p;
                    if (su.dim == 1)
                        p.grid = Grid1D(0.1, 1.1, su.n);
                    else
                        p.grid = Grid2D{Grid1D(0.0, 1.0, su.n), Grid1D(0.0, 1.2, su.n)};
                    p.fields = {parse("1 + x*y"), parse("0.2 + 0.1*sin(3*x + y)"),
                                parse("0.5 + 0.2*cos(x - 2*y)")};
                    p.order = su.order;
                    p.bc.kind = bc;
                    p.sat_variant = var;
                    if (data) p.bc.data = parse("cos(x + 2*y)*(1 + t^2)");
                    const double m = oracle::oracle_mismatch(p);
                    worst = std::max(worst, m);
                    ++combos;
                    o.fail_if(!(m <= 1e-12), fmt("dim %g ", su.dim) + to_string(bc) + " " + to_string(var));
                }
    o.note(fmt("%g combinations, ", combos) + fmt("worst relative mismatch %.2e", worst));
    return o;
}

Outcome a12() {
    Outcome o;
    Problem p;
    const int n = 41;
    p.grid = Grid1D(0.0, 1.0, n);
    // Zero at the second and second-to-last nodes, positive at the ends.
    p.fields = {parse("0.5"), parse("0.1*(1 - cos(2*pi*(x - 0.025)/0.05))"), parse("0.3")};
    p.initial_value = parse("exp(-100*(x-0.5)^2)");
    p.T = 0.5;

    bool standard_rejected = false;
    try {
        Semidiscretization sd(p);
    } catch (const PenaltyError&) {
        standard_rejected = true;
    }
    o.fail_if(!standard_rejected, "standard variant accepted");

    p.sat_variant = SatVariant::fully_compatible;
    p.penalty_safety = 2.0;
    Semidiscretization sd(p);
    const SampledFields& f = sd.fields();
    const double b1 = f.beta[0], b2 = f.beta[1];
    const double expect = 2.0 * b1 * b1 / sd.set_x().omega1;
    const LinePenalty& lp = sd.penalties().x_lines.at(0);
    o.fail_if(!(std::abs(b2) < 1e-14 && b1 > 0.0), "beta profile");
    o.fail_if(std::abs(lp.beta_left - expect) > 1e-12 * expect, "left penalty");
    o.fail_if(std::abs(lp.beta_right - expect) > 1e-12 * expect, "right penalty");

    TimeConfig t;
    t.T = p.T;
    t.rule = DtRule::viscous;
    t.record_energy = true;
    Trajectory tr = rk4_advance(sd, sd.initial_state(), t);
    const double worst = worst_increase(tr);
    o.fail_if(worst > 1e-10, "energy increase");
    o.note(fmt("beta(x1) = %.3f, ", b1) + fmt("beta(x2) = %.1e, ", b2) + fmt("penalty %.6e ", lp.beta_left) +
           fmt("(expected %.6e)", expect));
    o.note(fmt("largest relative step increase %.2e", worst) +
           fmt(", E(T)/E(0) = %.6f", tr.energy.back() / tr.energy.front()));
    return o;
}

}  // namespace

int main() {
    criterion("A1", "operator identities and exactness", a1);
    criterion("A2", "borrowing constant for order 4", a2);
    criterion("A3", "stiffness spectrum", a3);
    criterion("A4", "exact cancellation", a4);
    criterion("A5", "constant-coefficient rates", a5);
    criterion("A6", "variable-coefficient rates", a6);
    criterion("A7", "2D Ricker self-convergence", a7);
    criterion("A8", "energy stability", a8);
    criterion("A9", "normal-mode roots and determinant", a9);
    criterion("A10", "boundary root bound", a10);
    criterion("A11", "matrix-free vs dense assembly", a11);
    criterion("A12", "fully compatible penalty path", a12);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
