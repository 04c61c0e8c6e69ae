#include "dvw/normal_mode.hpp"

#include <algorithm>
#include <cmath>

#include "dvw/sbp.hpp"

namespace dvw {

cplx LaplaceParams::r() const {
    const cplx den = beta * beta * s + gamma * gamma;
    if (std::abs(den) == 0.0) throw std::invalid_argument("beta^2 s + gamma^2 vanishes");
    return h * h * (s * s + alpha * s) / den;
}

cplx characteristic_poly(cplx k, cplx r) {
    return -1.0 / 12.0 + k * (4.0 / 3.0 + k * (-(2.5 + r) + k * (4.0 / 3.0 - k / 12.0)));
}

namespace {

cplx poly_deriv(cplx k, cplx r) {
    return 4.0 / 3.0 + k * (-2.0 * (2.5 + r) + k * (4.0 - k / 3.0));
}

}  // namespace

CharacteristicRoots characteristic_roots(cplx r, double match_tol) {
    // Monic form: k^4 - 16 k^3 + 12 (5/2 + r) k^2 - 16 k + 1.
    Eigen::Matrix4cd c = Eigen::Matrix4cd::Zero();
    const cplx a3 = -16.0, a2 = 12.0 * (2.5 + r), a1 = -16.0, a0 = 1.0;
    c(0, 0) = -a3;
    c(0, 1) = -a2;
    c(0, 2) = -a1;
    c(0, 3) = -a0;
    c(1, 0) = c(2, 1) = c(3, 2) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(c, false);

    CharacteristicRoots out;
    for (int i = 0; i < 4; ++i) {
        cplx k = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            const cplx d = poly_deriv(k, r);
            if (std::abs(d) < 1e-300) break;
            const cplx step = characteristic_poly(k, r) / d;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            if (std::abs(characteristic_poly(k - step, r)) < std::abs(characteristic_poly(k, r)))
                k -= step;
        }
        out.all[i] = k;
        if (std::abs(k) < 1.0) ++out.inside;
    }

    const cplx q = std::sqrt(9.0 - 3.0 * r);
    out.kappa1 = q + 4.0 - std::sqrt(8.0 * q - 3.0 * r + 24.0);
    out.kappa2 = -q + 4.0 - std::sqrt(-8.0 * q - 3.0 * r + 24.0);
    out.residual1 = std::abs(characteristic_poly(out.kappa1, r));
    out.residual2 = std::abs(characteristic_poly(out.kappa2, r));

    for (cplx kc : {out.kappa1, out.kappa2}) {
        double best = 1e300;
        for (cplx k : out.all) best = std::min(best, std::abs(k - kc));
        out.match_error = std::max(out.match_error, best);
    }
    if (out.match_error > match_tol)
        throw RootMatchError("closed-form admissible roots do not match the companion roots "
                             "(distance " + std::to_string(out.match_error) + ")");
    return out;
}

CharacteristicRoots characteristic_roots(const LaplaceParams& p) {
    return characteristic_roots(p.r());
}

double BoundarySystem::normalized_det() const {
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(A);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax == 0.0) return 0.0;
    double p = 1.0;
    for (int i = 0; i < 4; ++i) p *= sv(i) / smax;
    return p;
}

std::vector<cplx> BoundarySystem::reconstruct(const Eigen::Vector4cd& sigma, int count) const {
    std::vector<cplx> xi(count);
    for (int j = 0; j < count; ++j) {
        if (j < 2)
            xi[j] = sigma(j);
        else
            xi[j] = sigma(2) * std::pow(kappa1, j - 2) + sigma(3) * std::pow(kappa2, j - 2);
    }
    return xi;
}

BoundarySystem build_boundary_system(const LaplaceParams& p, double tau1, double tau3,
                                     int order) {
    if (order != 4)
        throw std::invalid_argument("the boundary system is only available for order 4");
    const int n = 24;
    SbpOperatorSet set = build_sbp_set(order, n, 1.0, false);
    SecondDerivOp op(set, std::vector<double>(n, 1.0));
    const BandedMatrix& D2 = op.D2();

    const cplx r = p.r();
    const cplx den = p.beta * p.beta * p.s + p.gamma * p.gamma;
    const cplx tau_eff = (tau1 * p.s + tau3) / den;
    CharacteristicRoots roots = characteristic_roots(r);

    BoundarySystem bs;
    bs.kappa1 = roots.kappa1;
    bs.kappa2 = roots.kappa2;
    int width = 0;
    for (int j = 0; j < 4; ++j) width = std::max(width, D2.row_first(j) + D2.row_len(j));
    width = std::max(width, static_cast<int>(set.d_left.size()));
    bs.width = width;
    bs.rows = Eigen::MatrixXcd::Zero(4, width);
    for (int j = 0; j < 4; ++j) {
        // r xi_j - (h^2 D2 xi)_j + omega_j^{-1} (d_j + tau_eff delta_j0) xi_1
        bs.rows(j, j) += r;
        for (int k = 0; k < D2.row_len(j); ++k) bs.rows(j, D2.row_first(j) + k) -= D2.row_data(j)[k];
        if (j < static_cast<int>(set.d_left.size())) bs.rows(j, 0) += set.d_left[j] / set.omega[j];
        if (j == 0) bs.rows(j, 0) += tau_eff / set.omega[0];
    }
    for (int j = 0; j < 4; ++j) {
        bs.A(j, 0) = bs.rows(j, 0);
        bs.A(j, 1) = bs.rows(j, 1);
        cplx c1 = 0.0, c2 = 0.0;
        for (int k = 2; k < width; ++k) {
            c1 += bs.rows(j, k) * std::pow(roots.kappa1, k - 2);
            c2 += bs.rows(j, k) * std::pow(roots.kappa2, k - 2);
        }
        bs.A(j, 2) = c1;
        bs.A(j, 3) = c2;
    }
    return bs;
}

std::vector<ScanPoint> determinant_scan(double alpha, double beta, double gamma, double h,
                                        const std::vector<double>& multipliers,
                                        double threshold) {
    const double theta = constant_coefficient_theta(4);
    std::vector<ScanPoint> out;
    LaplaceParams p;
    p.s = 0.0;
    p.h = h;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = gamma;
    for (double m : multipliers) {
        ScanPoint sp;
        sp.multiplier = m;
        sp.tau3 = m * gamma * gamma / theta;
        sp.tau1 = m * beta * beta / theta;
        BoundarySystem bs = build_boundary_system(p, sp.tau1, sp.tau3);
        sp.det_norm = bs.normalized_det();
        sp.singular = sp.det_norm < threshold;
        out.push_back(sp);
    }
    return out;
}

}  // namespace dvw
