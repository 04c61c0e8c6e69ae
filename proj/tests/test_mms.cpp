#include <atomic>
#include <cmath>

#include "doctest.h"
#include "dvw/mms.hpp"

using namespace dvw;

namespace {

constexpr double pi = 3.141592653589793;

ManufacturedCase small_case(BcKind bc, int order) {
    ManufacturedCase c;
    c.exact = parse("exp(-2*t)*cos(2*pi*x)");
    c.fields = {parse("1"), parse("0.1"), parse("0.1")};
    c.x_min = 0.1;
    c.x_max = 1.1;
    c.bc = bc;
    c.order = order;
    c.time.T = 0.2;
    c.time.rule = DtRule::viscous;
    c.time.c_visc = 1.0;
    c.time.record_energy = false;
    c.resolutions = {21, 41, 81};
    return c;
}

}  // namespace

TEST_CASE("forcing for a separable solution") {
    const Expr u = parse("exp(-2*t)*cos(2*pi*x)");
    const Expr f = synthesize_forcing(u, {parse("1"), parse("0.1"), parse("0.1")}, 1);
    const double factor = 2.0 - 0.04 * pi * pi;
    for (double x : {0.1, 0.37, 1.1})
        for (double t : {0.0, 0.8})
            CHECK(evaluate(f, x, 0.0, t) == doctest::Approx(factor * evaluate(u, x, 0.0, t)).epsilon(1e-12));

    // In 2D the y terms enter; u independent of y gives the same forcing.
    const Expr f2 = synthesize_forcing(u, {parse("1"), parse("0.1"), parse("0.1")}, 2);
    CHECK(evaluate(f2, 0.3, 0.9, 0.4) == doctest::Approx(evaluate(f, 0.3, 0.0, 0.4)));

    // The cancelling solution needs no forcing.
    const Expr g = synthesize_forcing(parse("exp(-t)*cos(2*pi*x)"), {parse("1"), parse("0.1"), parse("0.1")}, 1);
    CHECK(std::abs(evaluate(g, 0.4, 0.0, 0.3)) < 1e-14);
}

TEST_CASE("error norms and rate fitting") {
    std::vector<double> v{1.0, 2.0, 3.0}, u{1.0, 2.5, 2.0};
    CHECK(max_error(v, u) == 1.0);
    CHECK(l2_error(v, u, 0.5) == doctest::Approx(std::sqrt(0.5 * 1.25)));
    CHECK(fit_rate({0.1, 0.05, 0.025}, {3e-4, 3e-4 / 16, 3e-4 / 256}) == doctest::Approx(4.0));

    ConvergenceReport r;
    for (int k = 0; k < 3; ++k) {
        ConvergenceRow row;
        row.n = 10 * (1 << k) + 1;
        row.h = 0.1 / (1 << k);
        row.l2_error = std::pow(row.h, 3);
        row.max_error = 2 * row.l2_error;
        r.rows.push_back(row);
    }
    finish_report(r);
    CHECK(std::isnan(r.rows[0].rate));
    CHECK(r.rows[2].rate == doctest::Approx(3.0));
    CHECK(r.fitted_rate == doctest::Approx(3.0));
    CHECK_FALSE(r.exact);
    CHECK(r.csv().rfind("n,h,l2_error,max_error,rate", 0) == 0);

    for (auto& row : r.rows) row.l2_error = row.max_error = 1e-15;
    finish_report(r);
    CHECK(r.exact);
}

TEST_CASE("parallel_for visits every index and rethrows") {
    std::vector<std::atomic<int>> hits(17);
    parallel_for(17, 4, [&](int i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(5, 2,
                                 [](int i) {
                                     if (i == 3) throw StudyError("three");
                                 }),
                    StudyError);
    CHECK(thread_count() >= 1);
}

TEST_CASE("nested grids") {
    CHECK(nesting_stride(41, 321) == 8);
    CHECK(nesting_stride(81, 321) == 4);
    CHECK_THROWS(nesting_stride(40, 321));
    CHECK_THROWS(nesting_stride(321, 161));
}

TEST_CASE("manufactured problem carries the exact data") {
    ManufacturedCase c = small_case(BcKind::neumann, 4);
    Problem p = make_problem(c, 21);
    CHECK(p.bc.kind == BcKind::neumann);
    Semidiscretization sd(p);
    State s = sd.initial_state();
    CHECK(s.v[0] == doctest::Approx(std::cos(2 * pi * 0.1)));
    CHECK(s.w[0] == doctest::Approx(-2 * std::cos(2 * pi * 0.1)));
}

TEST_CASE("second-order scheme converges at rate two") {
    for (BcKind bc : {BcKind::dirichlet, BcKind::neumann}) {
        ConvergenceReport r = run_convergence(small_case(bc, 2), 1);
        CAPTURE(to_string(bc));
        CHECK(r.rows.size() == 3);
        CHECK(r.fitted_rate > 1.8);
        CHECK(r.fitted_rate < 3.0);
    }
}

TEST_CASE("too few resolutions are rejected") {
    ManufacturedCase c = small_case(BcKind::dirichlet, 2);
    c.resolutions = {21, 41};
    CHECK_THROWS_AS(run_convergence(c, 1), StudyError);
}

TEST_CASE("cancelling solution is reproduced to roundoff") {
    for (BcKind bc : {BcKind::dirichlet, BcKind::neumann}) {
        ManufacturedCase c = small_case(bc, 4);
        c.exact = parse("exp(-t)*cos(2*pi*x)");
        c.time.c_visc = 0.1;
        ConvergenceReport r = run_convergence(c, 1);
        CHECK(r.exact);
        for (const auto& row : r.rows) CHECK(row.max_error < 1e-12);
    }
}

TEST_CASE("self-convergence of a smooth problem") {
    auto make = [](int n) {
        Problem p;
        p.grid = Grid1D(0.0, 1.0, n);
        p.fields = {parse("0"), parse("0.05"), parse("1")};
        p.order = 2;
        p.initial_value = parse("exp(-40*(x-0.5)^2)");
        p.T = 0.1;
        return p;
    };
    TimeConfig t;
    t.T = 0.1;
    t.rule = DtRule::viscous;
    t.c_visc = 1.0;
    t.record_energy = false;
    ConvergenceReport r = run_self_convergence(make, t, {21, 41, 81}, 321, 1);
    CHECK(r.fitted_rate > 1.7);
}
