// Diagonal-norm summation-by-parts operators in one space dimension.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dvw {

// Row-compressed matrix whose rows each hold one contiguous run of columns.
// Boundary blocks and interior stencils of SBP operators fit this shape.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    // Replaces row i with coefficients c placed at columns first..first+len-1.
    void set_row(int i, int first, std::span<const double> c);

    int row_first(int i) const { return first_[i]; }
    int row_len(int i) const { return ptr_[i + 1] - ptr_[i]; }
    const double* row_data(int i) const { return val_.data() + ptr_[i]; }
    double at(int i, int j) const;

    // y[i*sy] = sum_j A(i,j) x[j*sx]
    void apply(const double* x, std::ptrdiff_t sx, double* y, std::ptrdiff_t sy) const;
    void apply(std::span<const double> x, std::span<double> y) const;
    // y[i*sy] += c * sum_j A(i,j) x[j*sx]
    void apply_add(double c, const double* x, std::ptrdiff_t sx, double* y, std::ptrdiff_t sy) const;

    Eigen::MatrixXd to_dense() const;
    static BandedMatrix from_dense(const Eigen::MatrixXd& m, double drop_tol = 0.0);

private:
    void finalize() const;

    int rows_ = 0, cols_ = 0;
    std::vector<int> first_, ptr_;
    std::vector<double> val_;
};

class UnsupportedOrder : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SbpOperatorSet {
    int order = 0;          // interior accuracy 2p
    int n = 0;
    double h = 0.0;
    int closure = 0;        // boundary rows with non-unit norm weight
    std::vector<double> omega;  // norm weights without the factor h
    BandedMatrix D1;        // first derivative, includes 1/h
    // Boundary derivative rows, including 1/h.  The left rows act on the
    // first entries of a vector, the right rows on the last entries.
    std::vector<double> d_left, d_right;
    std::vector<double> dhat_left, dhat_right;
    double omega1 = 0.0;
    double theta = 0.0;
    int m = 0;

    double H(int i) const { return h * omega[i]; }
    void apply_D1(std::span<const double> v, std::span<double> out) const;

    // Dot products of boundary rows with a (possibly strided) vector.
    double dot_left(const std::vector<double>& row, const double* v, std::ptrdiff_t s = 1) const;
    double dot_right(const std::vector<double>& row, const double* v, std::ptrdiff_t s = 1) const;
};

int min_grid_points(int order);

// The `borrowing` flag lets callers that compute the borrowing constant
// itself skip the cached lookup.
SbpOperatorSet build_sbp_set(int order, int n, double h, bool borrowing = true);

enum class SatVariant { standard, fully_compatible };

std::string to_string(SatVariant v);

// Which borrowing constant the penalty bounds use.  `borrowing` is valid for
// any coefficient; `sharp` is the constant-coefficient limit and requires
// the coefficient to be uniform along each grid line.
enum class PenaltyLimit { borrowing, sharp };

std::string to_string(PenaltyLimit l);

class SecondDerivOp {
public:
    SecondDerivOp(const SbpOperatorSet& set, std::vector<double> b,
                  SatVariant variant = SatVariant::standard);

    const SbpOperatorSet& set() const { return *set_; }
    SatVariant variant() const { return variant_; }
    const std::vector<double>& b() const { return b_; }
    const BandedMatrix& A() const { return A_; }
    const BandedMatrix& D2() const { return D2_; }
    // Boundary rows used in the identity: d or dhat depending on variant.
    const std::vector<double>& bd_left() const;
    const std::vector<double>& bd_right() const;

    void apply(std::span<const double> v, std::span<double> out) const { D2_.apply(v, out); }

    // A^(b) - h*theta*(b_lmin d_l d_l^T + b_rmin d_r d_r^T), dense.
    Eigen::MatrixXd A_tilde_dense() const;

private:
    const SbpOperatorSet* set_;
    std::vector<double> b_;
    SatVariant variant_;
    BandedMatrix A_, D2_;
};

// A^(b) assembled from the operator family's difference rows.  Public so the
// borrowing computation and tests can evaluate it for arbitrary b.
BandedMatrix assemble_stiffness(const SbpOperatorSet& set, std::span<const double> b);

struct Borrowing {
    double theta;
    int m;
};

// Largest theta such that A^(b) - h*theta*(d_l d_l^T + d_r d_r^T) is PSD when
// b is one on the m nodes next to each boundary and zero elsewhere.  That is
// the coefficient pattern that makes the estimate hold with b_lmin for any
// b >= 0.  Cached per order after the first call.
Borrowing compute_borrowing(int order);
// Uncached bisection at a given grid size, for testing resolution independence.
Borrowing compute_borrowing_at(int order, int n, double tol = 1e-13);
int borrowing_width(int order);

// Sharp constant for b == 1 at a single boundary: the largest theta with
// A^(1) - h*theta*d_l d_l^T PSD.  This is the stability limit that the
// constant-coefficient normal-mode analysis sees.
double constant_coefficient_theta(int order);

// Pointer-level access to the embedded coefficient tables.
namespace tables {
struct Closure {
    std::vector<double> omega;               // boundary norm weights
    std::vector<std::vector<double>> d1;     // boundary rows of D1 starting at column 0
    std::vector<double> d1_interior;         // centered stencil, length 2*half+1
    std::vector<double> dbound;              // boundary derivative row
};
const Closure& closure(int order);
// For order 6: boundary element factors.  Element k contributes
// b_k * sum_r f_kr f_kr^T on the first nodes of the grid.
const std::vector<std::vector<std::vector<double>>>& order6_factors();
// Test hook: while nonzero, build_sbp_set perturbs one D1 boundary
// coefficient by this amount.  Used to check that verification detects it.
void set_perturbation(double delta);
double perturbation();
}  // namespace tables

}  // namespace dvw
