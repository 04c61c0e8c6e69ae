// Grids, material fields, boundary conditions and the PDE problem
//
//   u_tt + alpha u_t - div(beta^2 grad u)_t - div(gamma^2 grad u) = f.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dvw/expr.hpp"
#include "dvw/sbp.hpp"

namespace dvw {

struct Grid1D {
    double x_min = 0.0, x_max = 1.0;
    int n = 2;

    Grid1D() = default;
    Grid1D(double lo, double hi, int count);

    double h() const { return (x_max - x_min) / (n - 1); }
    double x(int j) const { return j == n - 1 ? x_max : x_min + j * h(); }
    std::vector<double> nodes() const;
};

// Tensor grid.  Node (i, j), i along x and j along y, is stored at
// k = i * ny + j, so lines of constant x are contiguous in memory.
struct Grid2D {
    Grid1D gx, gy;

    int nx() const { return gx.n; }
    int ny() const { return gy.n; }
    int size() const { return gx.n * gy.n; }
    int index(int i, int j) const { return i * gy.n + j; }
    std::pair<int, int> ij(int k) const { return {k / gy.n, k % gy.n}; }
};

using Grid = std::variant<Grid1D, Grid2D>;

int grid_size(const Grid& g);
int grid_dim(const Grid& g);
// Node coordinates in storage order (y is all zeros in 1D).
void grid_coordinates(const Grid& g, std::vector<double>& xs, std::vector<double>& ys);

struct MaterialFields {
    Expr alpha, beta, gamma;
};

struct SampledFields {
    std::vector<double> alpha, beta, gamma;
    // Convenience: squared samples, used by the operators.
    std::vector<double> beta2() const;
    std::vector<double> gamma2() const;
};

class FieldError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

SampledFields sample_fields(const MaterialFields& f, const Grid& g);

enum class BcKind { dirichlet, neumann };
std::string to_string(BcKind k);

// Boundary data.  For Dirichlet, `data` is the boundary value g(x, y, t).
// For Neumann it is the outward normal derivative du/dn.  A missing
// expression means homogeneous data.
struct BoundaryCondition {
    BcKind kind = BcKind::dirichlet;
    std::optional<Expr> data;
    // Optional per-direction overrides for Neumann data given directly as
    // du/dx (on x faces) and du/dy (on y faces).  Manufactured solutions use
    // these so no sign bookkeeping is needed.
    std::optional<Expr> dudx, dudy;

    bool homogeneous() const { return !data && !dudx && !dudy; }
};

enum class BetaSide { positive, zero_at_boundary, zero_near_boundary };

struct BetaRegime {
    BetaSide left = BetaSide::positive, right = BetaSide::positive;
    bool identically_zero = false;

    bool needs_fully_compatible() const {
        return left == BetaSide::zero_near_boundary || right == BetaSide::zero_near_boundary;
    }
};

std::string to_string(BetaSide s);

// Classifies one line of beta samples.  `width` is the number of nodes next to
// each boundary that enter the penalty bounds.
BetaRegime classify_beta(const std::vector<double>& beta, int width);
BetaRegime classify_beta_line(const double* beta, int n, std::ptrdiff_t stride, int width);

struct Problem {
    Grid grid;
    MaterialFields fields;
    BoundaryCondition bc;
    Expr forcing;                     // zero by default
    Expr initial_value, initial_rate; // g1, g2
    double T = 1.0;
    int order = 4;
    SatVariant sat_variant = SatVariant::standard;
    double penalty_safety = 2.0;
    PenaltyLimit penalty_limit = PenaltyLimit::borrowing;

    void validate() const;
};

}  // namespace dvw
