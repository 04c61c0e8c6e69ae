// Normal-mode analysis of the order-4 Dirichlet scheme on the half line.
//
// In Laplace space the interior scheme is a five-point recurrence whose
// characteristic polynomial is
//
//   -1/12 + 4/3 k - (5/2 + r) k^2 + 4/3 k^3 - 1/12 k^4,
//   r = h^2 (s^2 + alpha s) / (beta^2 s + gamma^2).
//
// The two roots inside the unit circle span the bounded solutions.  The
// first four rows of the scheme, with xi_j = sigma_1 k1^(j-3) + sigma_2
// k2^(j-3) for j >= 3, give a 4x4 system for (xi_1, xi_2, sigma_1, sigma_2).
#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dvw {

using cplx = std::complex<double>;

struct LaplaceParams {
    cplx s{1.0, 0.0};
    double h = 0.01;
    double alpha = 0.0, beta = 0.0, gamma = 0.1;

    cplx r() const;
};

class RootMatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CharacteristicRoots {
    std::array<cplx, 4> all;   // companion-matrix roots, Newton polished
    cplx kappa1, kappa2;       // closed forms
    double residual1 = 0.0, residual2 = 0.0;
    int inside = 0;            // number of companion roots with |k| < 1
    double match_error = 0.0;  // distance from each closed form to its nearest root
};

cplx characteristic_poly(cplx k, cplx r);
// Throws RootMatchError when a closed form is not a root.
CharacteristicRoots characteristic_roots(cplx r, double match_tol = 1e-6);
CharacteristicRoots characteristic_roots(const LaplaceParams& p);

struct BoundarySystem {
    Eigen::Matrix4cd A;
    cplx kappa1, kappa2;
    // Rows of the half-line scheme (scaled by h^2 / (beta^2 s + gamma^2))
    // for nodes 1..4, acting on the first `width` grid values.
    Eigen::MatrixXcd rows;
    int width = 0;

    // Normalized determinant |det A| / sigma_max(A)^4.
    double normalized_det() const;
    // Grid values xi_1..xi_count from Sigma.
    std::vector<cplx> reconstruct(const Eigen::Vector4cd& sigma, int count) const;
};

// tau1 multiplies the v_t penalty, tau3 the v penalty.  Only order 4 is
// supported.
BoundarySystem build_boundary_system(const LaplaceParams& p, double tau1, double tau3,
                                     int order = 4);

struct ScanPoint {
    double multiplier = 1.0;
    double tau1 = 0.0, tau3 = 0.0;
    double det_norm = 0.0;
    bool singular = false;
};

// Determinant condition at s = 0.  Both penalties are scaled by each
// multiplier relative to their stability limits gamma^2/theta and
// beta^2/theta, with theta the constant-coefficient borrowing constant.
std::vector<ScanPoint> determinant_scan(double alpha, double beta, double gamma, double h,
                                        const std::vector<double>& multipliers,
                                        double threshold = 1e-10);

}  // namespace dvw
