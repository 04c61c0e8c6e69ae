// Dense assembly of the semidiscretization written directly from the
// stiffness matrices.  Shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <random>

#include "dvw/disc.hpp"

namespace oracle {

using namespace dvw;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Affine {
    MatrixXd Mv, Mw;  // G = f + Mv v + Mw w + c
    VectorXd c;
};

inline VectorXd row_vector(const std::vector<double>& row, int n, bool left) {
    VectorXd r = VectorXd::Zero(n);
    const int len = static_cast<int>(row.size());
    for (int k = 0; k < len; ++k) r(left ? k : n - len + k) = row[k];
    return r;
}

// Boundary data seen by one line: value and time derivative at each end.
// For Neumann these are the derivative along the line direction.
struct LineData {
    double l = 0, lt = 0, r = 0, rt = 0;
};

// One line with its SATs, written from
//   Dirichlet: H^{-1}(-A - b1 e1 d1^T + bn en dn^T - b1 d1 e1^T + bn dn en^T - tau/h (e1 e1^T + en en^T))
//   Neumann:   -H^{-1} A, data entering through the boundary derivative rows.
inline Affine line_oracle(const SbpOperatorSet& s, const std::vector<double>& beta2,
                   const std::vector<double>& gamma2, const LinePenalty& tau, BcKind bc,
                   SatVariant variant, bool viscous, const LineData& d) {
    const int n = s.n;
    VectorXd Hinv(n);
    for (int i = 0; i < n; ++i) Hinv(i) = 1.0 / s.H(i);
    VectorXd e1 = VectorXd::Zero(n), en = VectorXd::Zero(n);
    e1(0) = 1.0;
    en(n - 1) = 1.0;

    auto part = [&](const SecondDerivOp& op, double tl, double tr, double gl, double gr, MatrixXd& M,
                    VectorXd& c) {
        const double bl = op.b()[0], br = op.b()[n - 1];
        const VectorXd dl = row_vector(op.bd_left(), n, true);
        const VectorXd dr = row_vector(op.bd_right(), n, false);
        MatrixXd K = op.A().to_dense();
        if (bc == BcKind::dirichlet) {
            K += bl * (e1 * dl.transpose() + dl * e1.transpose());
            K -= br * (en * dr.transpose() + dr * en.transpose());
            K += (tl / s.h) * e1 * e1.transpose() + (tr / s.h) * en * en.transpose();
            c += Hinv.asDiagonal() * (bl * dl * gl - br * dr * gr + (tl / s.h) * gl * e1 + (tr / s.h) * gr * en);
        } else {
            c += Hinv.asDiagonal() * (-bl * gl * e1 + br * gr * en);
        }
        M = -(Hinv.asDiagonal() * K);
    };

    Affine a;
    a.c = VectorXd::Zero(n);
    part(SecondDerivOp(s, gamma2, SatVariant::standard), tau.gamma_left, tau.gamma_right, d.l, d.r,
         a.Mv, a.c);
    if (viscous)
        part(SecondDerivOp(s, beta2, variant), tau.beta_left, tau.beta_right, d.lt, d.rt, a.Mw, a.c);
    else
        a.Mw = MatrixXd::Zero(n, n);
    return a;
}

inline double value_or_zero(const std::optional<Expr>& e, double x, double y, double t) {
    return e ? evaluate(*e, x, y, t) : 0.0;
}

// Data for a face node, as the SAT uses it.
inline void face_data(const Problem& p, int dir, double x_l, double x_r, double y_l, double y_r, double t,
               LineData& d) {
    if (p.bc.kind == BcKind::dirichlet) {
        d.l = value_or_zero(p.bc.data, x_l, y_l, t);
        d.r = value_or_zero(p.bc.data, x_r, y_r, t);
        if (p.bc.data) {
            const Expr dt = differentiate(*p.bc.data, Var::t);
            d.lt = evaluate(dt, x_l, y_l, t);
            d.rt = evaluate(dt, x_r, y_r, t);
        }
        return;
    }
    const auto& over = dir == 0 ? p.bc.dudx : p.bc.dudy;
    if (over) {
        const Expr dt = differentiate(*over, Var::t);
        d = {evaluate(*over, x_l, y_l, t), evaluate(dt, x_l, y_l, t), evaluate(*over, x_r, y_r, t),
             evaluate(dt, x_r, y_r, t)};
    } else if (p.bc.data) {
        const Expr dt = differentiate(*p.bc.data, Var::t);
        d = {-evaluate(*p.bc.data, x_l, y_l, t), -evaluate(dt, x_l, y_l, t),
             evaluate(*p.bc.data, x_r, y_r, t), evaluate(dt, x_r, y_r, t)};
    }
}

inline Affine dense_oracle(const Semidiscretization& sd, const Problem& p, double t) {
    const int N = sd.size();
    Affine a{MatrixXd::Zero(N, N), MatrixXd::Zero(N, N), VectorXd::Zero(N)};
    const auto& F = sd.fields();
    for (int k = 0; k < N; ++k) a.Mw(k, k) -= F.alpha[k];
    const auto beta2 = F.beta2(), gamma2 = F.gamma2();

    // Scatter a line operator acting on nodes offset + q*stride.
    auto scatter = [&](const Affine& L, int offset, int stride) {
        const int n = static_cast<int>(L.c.size());
        for (int q = 0; q < n; ++q) {
            a.c(offset + q * stride) += L.c(q);
            for (int r = 0; r < n; ++r) {
                a.Mv(offset + q * stride, offset + r * stride) += L.Mv(q, r);
                a.Mw(offset + q * stride, offset + r * stride) += L.Mw(q, r);
            }
        }
    };
    auto gather = [](const std::vector<double>& v, int offset, int stride, int n) {
        std::vector<double> r(n);
        for (int q = 0; q < n; ++q) r[q] = v[offset + q * stride];
        return r;
    };

    if (auto* g1 = std::get_if<Grid1D>(&sd.grid())) {
        LineData d;
        face_data(p, 0, g1->x_min, g1->x_max, 0.0, 0.0, t, d);
        scatter(line_oracle(sd.set_x(), beta2, gamma2, sd.penalties().x_lines[0], p.bc.kind,
                            p.sat_variant, sd.viscous(), d),
                0, 1);
        return a;
    }
    const auto& g = std::get<Grid2D>(sd.grid());
    for (int j = 0; j < g.ny(); ++j) {
        LineData d;
        face_data(p, 0, g.gx.x_min, g.gx.x_max, g.gy.x(j), g.gy.x(j), t, d);
        const int off = g.index(0, j), st = g.ny();
        Affine L = line_oracle(sd.set_x(), gather(beta2, off, st, g.nx()), gather(gamma2, off, st, g.nx()),
                               sd.penalties().x_lines[j], p.bc.kind, p.sat_variant, sd.viscous(), d);
        scatter(L, off, st);
    }
    for (int i = 0; i < g.nx(); ++i) {
        LineData d;
        face_data(p, 1, g.gx.x(i), g.gx.x(i), g.gy.x_min, g.gy.x_max, t, d);
        const int off = g.index(i, 0);
        Affine L = line_oracle(sd.set_y(), gather(beta2, off, 1, g.ny()), gather(gamma2, off, 1, g.ny()),
                               sd.penalties().y_lines[i], p.bc.kind, p.sat_variant, sd.viscous(), d);
        scatter(L, off, 1);
    }
    return a;
}

inline MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
    MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

// Runs rhs_apply and the oracle on random states; returns max diff / scale.
inline double oracle_mismatch(const Problem& p) {
    Semidiscretization sd(p);
    const int N = sd.size();
    std::mt19937 rng(17);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (double t : {0.0, 0.37}) {
        const Affine a = dense_oracle(sd, p, t);
        State s;
        s.v.resize(N);
        s.w.resize(N);
        s.t = t;
        std::vector<double> f(N), out(N);
        for (int k = 0; k < N; ++k) s.v[k] = nd(rng), s.w[k] = nd(rng), f[k] = nd(rng);
        sd.rhs_apply(s, f, out);
        const VectorXd v = Eigen::Map<VectorXd>(s.v.data(), N), w = Eigen::Map<VectorXd>(s.w.data(), N);
        const VectorXd ref = Eigen::Map<VectorXd>(f.data(), N) + a.Mv * v + a.Mw * w + a.c;
        const VectorXd scale_v = a.Mv.cwiseAbs() * v.cwiseAbs() + a.Mw.cwiseAbs() * w.cwiseAbs() +
                                 a.c.cwiseAbs() + Eigen::Map<VectorXd>(f.data(), N).cwiseAbs();
        const double scale = scale_v.maxCoeff();
        for (int k = 0; k < N; ++k) worst = std::max(worst, std::abs(out[k] - ref(k)) / scale);
    }
    return worst;
}

// Matrix of the homogeneous operator obtained by probing the matrix-free code.
inline void probe(const Semidiscretization& sd, MatrixXd& Mv, MatrixXd& Mw) {
    const int N = sd.size();
    Mv.resize(N, N);
    Mw.resize(N, N);
    State s;
    s.v.assign(N, 0.0);
    s.w.assign(N, 0.0);
    std::vector<double> out(N);
    for (int k = 0; k < N; ++k) {
        s.v[k] = 1.0;
        sd.rhs_apply(s, {}, out);
        for (int i = 0; i < N; ++i) Mv(i, k) = out[i];
        s.v[k] = 0.0;
        s.w[k] = 1.0;
        sd.rhs_apply(s, {}, out);
        for (int i = 0; i < N; ++i) Mw(i, k) = out[i];
        s.w[k] = 0.0;
    }
}


}  // namespace oracle
