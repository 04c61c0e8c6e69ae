// The matrix-free semidiscretization against the dense assembly, plus
// structural energy checks.
#include <cmath>
#include <random>

#include "doctest.h"
#include "dense_oracle.hpp"
#include "dvw/disc.hpp"

using namespace dvw;
using namespace oracle;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Problem base_problem(int dim, int n, int order) {
    Problem p;
    if (dim == 1)
        p.grid = Grid1D(0.1, 1.1, n);
    else
        p.grid = Grid2D{Grid1D(0.0, 1.0, n), Grid1D(0.0, 1.2, n)};
    p.fields = {parse("1 + x*y"), parse("0.2 + 0.1*sin(3*x + y)"), parse("0.5 + 0.2*cos(x - 2*y)")};
    p.order = order;
    return p;
}

}  // namespace

TEST_CASE("matrix-free operator equals the dense assembly") {
    struct Setup {
        int dim, n, order;
    };
    for (Setup su : {Setup{1, 11, 4}, Setup{1, 11, 2}, Setup{2, 7, 2}, Setup{2, 11, 4}}) {
        for (BcKind bc : {BcKind::dirichlet, BcKind::neumann})
            for (SatVariant var : {SatVariant::standard, SatVariant::fully_compatible})
                for (int data = 0; data < 3; ++data) {
                    Problem p = base_problem(su.dim, su.n, su.order);
                    p.bc.kind = bc;
                    p.sat_variant = var;
                    if (data == 1) p.bc.data = parse("cos(x + 2*y)*(1 + t^2)");
                    if (data == 2 && bc == BcKind::neumann) {
                        p.bc.dudx = parse("sin(x - y)*exp(-t)");
                        if (su.dim == 2) p.bc.dudy = parse("x*y*t");
                    }
                    CAPTURE(su.dim);
                    CAPTURE(su.n);
                    CAPTURE(su.order);
                    CAPTURE(to_string(bc));
                    CAPTURE(to_string(var));
                    CAPTURE(data);
                    CHECK(oracle_mismatch(p) <= 1e-12);
                }
    }
}

TEST_CASE("2D constant-coefficient operator is a Kronecker sum") {
    for (BcKind bc : {BcKind::dirichlet, BcKind::neumann}) {
        Problem p;
        p.grid = Grid2D{Grid1D(0, 1, 11), Grid1D(0, 1, 11)};
        p.fields = {parse("0.5"), parse("0.1"), parse("0.4")};
        p.bc.kind = bc;
        Semidiscretization sd(p);
        MatrixXd Mv, Mw;
        probe(sd, Mv, Mw);

        Problem q;
        q.grid = Grid1D(0, 1, 11);
        q.fields = {parse("0"), parse("0.1"), parse("0.4")};
        q.bc.kind = bc;
        Semidiscretization s1(q);
        MatrixXd Av, Aw;
        probe(s1, Av, Aw);
        const MatrixXd I = MatrixXd::Identity(11, 11);
        const MatrixXd Kv = kron(Av, I) + kron(I, Av);
        const MatrixXd Kw = kron(Aw, I) + kron(I, Aw) - 0.5 * MatrixXd::Identity(121, 121);
        CHECK((Mv - Kv).cwiseAbs().maxCoeff() <= 1e-12 * Kv.cwiseAbs().maxCoeff());
        CHECK((Mw - Kw).cwiseAbs().maxCoeff() <= 1e-12 * Kw.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("energy structure: H Mv symmetric negative semidefinite, H Mw dissipative") {
    for (int dim : {1, 2})
        for (BcKind bc : {BcKind::dirichlet, BcKind::neumann})
            for (SatVariant var : {SatVariant::standard, SatVariant::fully_compatible}) {
                Problem p = base_problem(dim, dim == 1 ? 21 : 11, 4);
                p.bc.kind = bc;
                p.sat_variant = var;
                p.penalty_safety = 1.0;
                Semidiscretization sd(p);
                MatrixXd Mv, Mw;
                probe(sd, Mv, Mw);
                VectorXd H(sd.size());
                for (int k = 0; k < sd.size(); ++k) H(k) = sd.H(k);
                const MatrixXd K = H.asDiagonal() * Mv;
                const MatrixXd D = H.asDiagonal() * Mw;
                const double sk = K.cwiseAbs().maxCoeff(), sdd = D.cwiseAbs().maxCoeff();
                CAPTURE(dim);
                CAPTURE(to_string(bc));
                CAPTURE(to_string(var));
                CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * sk);
                Eigen::SelfAdjointEigenSolver<MatrixXd> ek(0.5 * (K + K.transpose()), Eigen::EigenvaluesOnly);
                CHECK(ek.eigenvalues().maxCoeff() <= 1e-10 * sk);
                Eigen::SelfAdjointEigenSolver<MatrixXd> ed(0.5 * (D + D.transpose()), Eigen::EigenvaluesOnly);
                CHECK(ed.eigenvalues().maxCoeff() <= 1e-10 * sdd);

                // The energy is the quadratic form of these matrices.
                std::mt19937 rng(3);
                std::normal_distribution<double> nd;
                State s;
                s.v.resize(sd.size());
                s.w.resize(sd.size());
                for (int k = 0; k < sd.size(); ++k) s.v[k] = nd(rng), s.w[k] = nd(rng);
                const VectorXd v = Eigen::Map<VectorXd>(s.v.data(), sd.size());
                const VectorXd w = Eigen::Map<VectorXd>(s.w.data(), sd.size());
                const double E = 0.5 * w.dot(H.asDiagonal() * w) - 0.5 * v.dot(K * v);
                CHECK(sd.energy(s) == doctest::Approx(E).epsilon(1e-12));
            }
}

TEST_CASE("penalty parameters") {
    const int n = 41;
    SbpOperatorSet s = build_sbp_set(4, n, 0.025);
    std::vector<double> beta(n, 0.1), gamma(n, 0.1);
    LinePenalty lp = compute_line_penalties(beta.data(), gamma.data(), n, 1, s, 1.0,
                                            SatVariant::standard, true);
    CHECK(lp.gamma_left == doctest::Approx(0.039908).epsilon(1e-5));
    CHECK(lp.gamma_right == lp.gamma_left);
    CHECK(lp.beta_left == doctest::Approx(0.039908).epsilon(1e-5));

    LinePenalty sharp = compute_line_penalties(beta.data(), gamma.data(), n, 1, s, 1.0,
                                               SatVariant::standard, true, PenaltyLimit::sharp);
    CHECK(sharp.gamma_left == doctest::Approx(0.01 / constant_coefficient_theta(4)));

    LinePenalty inviscid = compute_line_penalties(beta.data(), gamma.data(), n, 1, s, 2.0,
                                                  SatVariant::standard, false);
    CHECK(inviscid.beta_left == 0.0);
    CHECK(inviscid.gamma_left == doctest::Approx(2 * 0.039908).epsilon(1e-5));

    // Variable coefficient: b1^4 / (theta * bmin^2) with bmin over m nodes.
    std::vector<double> g2 = gamma;
    g2[0] = 0.2;
    g2[2] = 0.05;
    LinePenalty v = compute_line_penalties(beta.data(), g2.data(), n, 1, s, 1.0, SatVariant::standard, true);
    CHECK(v.gamma_left == doctest::Approx(std::pow(0.2, 4) / (s.theta * 0.05 * 0.05)));
    CHECK_THROWS_AS(compute_line_penalties(beta.data(), g2.data(), n, 1, s, 1.0, SatVariant::standard,
                                           true, PenaltyLimit::sharp),
                    PenaltyError);

    // beta vanishing at the boundary node zeroes its penalty.
    std::vector<double> b0 = beta;
    b0[0] = 0.0;
    LinePenalty z = compute_line_penalties(b0.data(), gamma.data(), n, 1, s, 1.0, SatVariant::standard, true);
    CHECK(z.beta_left == 0.0);
    CHECK(z.beta_right > 0.0);

    // beta vanishing next to the boundary: only the fully compatible form works.
    std::vector<double> b1 = beta;
    b1[1] = 0.0;
    CHECK_THROWS_AS(compute_line_penalties(b1.data(), gamma.data(), n, 1, s, 1.0, SatVariant::standard, true),
                    PenaltyError);
    LinePenalty fc1 = compute_line_penalties(b1.data(), gamma.data(), n, 1, s, 2.0,
                                             SatVariant::fully_compatible, true);
    CHECK(fc1.beta_left == doctest::Approx(2 * 0.01 / s.omega1));
    CHECK_THROWS_AS(compute_line_penalties(beta.data(), gamma.data(), n, 1, s, 0.5, SatVariant::standard, true),
                    std::invalid_argument);
}

TEST_CASE("beta zero near the boundary requires the fully compatible variant") {
    Problem p;
    p.grid = Grid1D(0, 1, 21);
    p.fields = {parse("0"), parse("(x - 0.05)^2"), parse("1")};
    CHECK_THROWS_AS(Semidiscretization{p}, PenaltyError);
    p.sat_variant = SatVariant::fully_compatible;
    CHECK_NOTHROW(Semidiscretization{p});
}

TEST_CASE("initial state and forcing sampling") {
    Problem p;
    p.grid = Grid1D(0, 1, 11);
    p.fields = {parse("0"), parse("0"), parse("1")};
    p.initial_value = parse("x^2");
    p.initial_rate = parse("1 + x");
    p.forcing = parse("t*x");
    Semidiscretization sd(p);
    State s = sd.initial_state();
    CHECK(s.v[5] == doctest::Approx(0.25));
    CHECK(s.w[10] == doctest::Approx(2.0));
    std::vector<double> f(11);
    sd.forcing(2.0, f);
    CHECK(f[5] == doctest::Approx(1.0));
    CHECK(sd.homogeneous_bc());
    CHECK_FALSE(sd.viscous());
}
