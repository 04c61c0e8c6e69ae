#include "dvw/sbp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace dvw {

// ------------------------------------------------------------ BandedMatrix

BandedMatrix::BandedMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), first_(rows, 0), ptr_(rows + 1, 0) {}

void BandedMatrix::set_row(int i, int first, std::span<const double> c) {
    if (i < 0 || i >= rows_) throw std::out_of_range("BandedMatrix::set_row: row");
    if (first < 0 || first + static_cast<int>(c.size()) > cols_)
        throw std::out_of_range("BandedMatrix::set_row: columns");
    const int old_len = row_len(i);
    const int new_len = static_cast<int>(c.size());
    const int delta = new_len - old_len;
    auto pos = val_.begin() + ptr_[i];
    if (delta > 0)
        val_.insert(pos + old_len, delta, 0.0);
    else if (delta < 0)
        val_.erase(pos + new_len, pos + old_len);
    std::copy(c.begin(), c.end(), val_.begin() + ptr_[i]);
    for (int r = i + 1; r <= rows_; ++r) ptr_[r] += delta;
    first_[i] = first;
}

double BandedMatrix::at(int i, int j) const {
    int k = j - first_[i];
    if (k < 0 || k >= row_len(i)) return 0.0;
    return val_[ptr_[i] + k];
}

void BandedMatrix::apply(const double* x, std::ptrdiff_t sx, double* y,
                         std::ptrdiff_t sy) const {
    for (int i = 0; i < rows_; ++i) {
        const double* c = val_.data() + ptr_[i];
        const int len = ptr_[i + 1] - ptr_[i];
        const double* xi = x + static_cast<std::ptrdiff_t>(first_[i]) * sx;
        double acc = 0.0;
        if (sx == 1) {
            for (int k = 0; k < len; ++k) acc += c[k] * xi[k];
        } else {
            for (int k = 0; k < len; ++k) acc += c[k] * xi[k * sx];
        }
        y[i * sy] = acc;
    }
}

void BandedMatrix::apply_add(double c, const double* x, std::ptrdiff_t sx, double* y,
                             std::ptrdiff_t sy) const {
    for (int i = 0; i < rows_; ++i) {
        const double* a = val_.data() + ptr_[i];
        const int len = ptr_[i + 1] - ptr_[i];
        const double* xi = x + static_cast<std::ptrdiff_t>(first_[i]) * sx;
        double acc = 0.0;
        for (int k = 0; k < len; ++k) acc += a[k] * xi[k * sx];
        y[i * sy] += c * acc;
    }
}

void BandedMatrix::apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_)
        throw std::invalid_argument("BandedMatrix::apply: length mismatch");
    apply(x.data(), 1, y.data(), 1);
}

Eigen::MatrixXd BandedMatrix::to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < row_len(i); ++k) m(i, first_[i] + k) = val_[ptr_[i] + k];
    return m;
}

BandedMatrix BandedMatrix::from_dense(const Eigen::MatrixXd& m, double drop_tol) {
    BandedMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    std::vector<double> row;
    for (int i = 0; i < m.rows(); ++i) {
        int lo = -1, hi = -1;
        for (int j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j)) > drop_tol) {
                if (lo < 0) lo = j;
                hi = j;
            }
        if (lo < 0) {
            lo = hi = std::min<int>(i, static_cast<int>(m.cols()) - 1);
        }
        row.assign(hi - lo + 1, 0.0);
        for (int j = lo; j <= hi; ++j) row[j - lo] = std::abs(m(i, j)) > drop_tol ? m(i, j) : 0.0;
        out.set_row(i, lo, row);
    }
    return out;
}

// --------------------------------------------------------- SbpOperatorSet

int min_grid_points(int order) {
    switch (order) {
        case 2: return 4;
        case 4: return 10;
        case 6: return 18;
        default: throw UnsupportedOrder("unsupported SBP order " + std::to_string(order) +
                                        " (supported: 2, 4, 6)");
    }
}

int borrowing_width(int order) {
    switch (order) {
        case 2: return 2;
        case 4: return 4;
        case 6: return 6;
        default: throw UnsupportedOrder("unsupported SBP order " + std::to_string(order));
    }
}

void SbpOperatorSet::apply_D1(std::span<const double> v, std::span<double> out) const {
    D1.apply(v, out);
}

double SbpOperatorSet::dot_left(const std::vector<double>& row, const double* v,
                                std::ptrdiff_t s) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * v[k * s];
    return acc;
}

double SbpOperatorSet::dot_right(const std::vector<double>& row, const double* v,
                                 std::ptrdiff_t s) const {
    const std::ptrdiff_t off = n - static_cast<std::ptrdiff_t>(row.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * v[(off + k) * s];
    return acc;
}

SbpOperatorSet build_sbp_set(int order, int n, double h, bool borrowing) {
    const int nmin = min_grid_points(order);
    if (n < nmin)
        throw std::invalid_argument("grid too small for order " + std::to_string(order) +
                                    ": n = " + std::to_string(n) + ", minimum is " +
                                    std::to_string(nmin));
    if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");

    const tables::Closure& c = tables::closure(order);
    SbpOperatorSet s;
    s.order = order;
    s.n = n;
    s.h = h;
    s.closure = static_cast<int>(c.omega.size());
    const int k = s.closure;

    s.omega.assign(n, 1.0);
    for (int i = 0; i < k; ++i) {
        s.omega[i] = c.omega[i];
        s.omega[n - 1 - i] = c.omega[i];
    }
    s.omega1 = c.omega[0];

    s.D1 = BandedMatrix(n, n);
    std::vector<double> row;
    for (int i = 0; i < k; ++i) {
        row = c.d1[i];
        if (i == 0 && borrowing && tables::perturbation() != 0.0) row[1] += tables::perturbation();
        for (double& v : row) v /= h;
        s.D1.set_row(i, 0, row);
        // Right boundary: negated mirror image.
        std::vector<double> mirrored(row.rbegin(), row.rend());
        for (double& v : mirrored) v = -v;
        s.D1.set_row(n - 1 - i, n - static_cast<int>(mirrored.size()), mirrored);
    }
    const int half = static_cast<int>(c.d1_interior.size()) / 2;
    row = c.d1_interior;
    for (double& v : row) v /= h;
    for (int i = k; i < n - k; ++i) s.D1.set_row(i, i - half, row);

    s.d_left = c.dbound;
    for (double& v : s.d_left) v /= h;
    s.d_right.assign(s.d_left.rbegin(), s.d_left.rend());
    for (double& v : s.d_right) v = -v;

    s.dhat_left.assign(s.D1.row_data(0), s.D1.row_data(0) + s.D1.row_len(0));
    s.dhat_right.assign(s.D1.row_data(n - 1), s.D1.row_data(n - 1) + s.D1.row_len(n - 1));

    if (borrowing) {
        Borrowing b = compute_borrowing(order);
        s.theta = b.theta;
        s.m = b.m;
    } else {
        s.m = borrowing_width(order);
    }
    return s;
}

std::string to_string(PenaltyLimit l) { return l == PenaltyLimit::borrowing ? "borrowing" : "sharp"; }

std::string to_string(SatVariant v) {
    return v == SatVariant::standard ? "standard" : "fully_compatible";
}

// ----------------------------------------------------- stiffness assembly

namespace {

// Symmetric band accumulator.  A(i,j) for |i-j| <= bw.
class BandAccumulator {
public:
    BandAccumulator(int n, int bw) : n_(n), bw_(bw), a_(static_cast<std::size_t>(n) * (2 * bw + 1), 0.0) {}

    // A += w * s s^T, with s placed at columns first..first+len-1.
    void add_outer(double w, int first, const double* s, int len) {
        if (w == 0.0) return;
        for (int p = 0; p < len; ++p) {
            if (s[p] == 0.0) continue;
            const double wp = w * s[p];
            for (int q = 0; q < len; ++q) ref(first + p, first + q) += wp * s[q];
        }
    }

    double& ref(int i, int j) {
        return a_[static_cast<std::size_t>(i) * (2 * bw_ + 1) + (j - i + bw_)];
    }

    BandedMatrix finish(double scale) {
        double amax = 0.0;
        for (double v : a_) amax = std::max(amax, std::abs(v));
        const double drop = 1e-15 * amax;
        BandedMatrix out(n_, n_);
        std::vector<double> row;
        for (int i = 0; i < n_; ++i) {
            int lo = std::max(0, i - bw_), hi = std::min(n_ - 1, i + bw_);
            // Entries that cancel to roundoff are dropped; the stencils are
            // symmetric so this keeps the matrix symmetric.
            while (lo < i && std::abs(ref(i, lo)) <= drop) ++lo;
            while (hi > i && std::abs(ref(i, hi)) <= drop) --hi;
            row.assign(hi - lo + 1, 0.0);
            for (int j = lo; j <= hi; ++j) row[j - lo] = ref(i, j) * scale;
            out.set_row(i, lo, row);
        }
        return out;
    }

private:
    int n_, bw_;
    std::vector<double> a_;
};

void add_d1_part(BandAccumulator& acc, const SbpOperatorSet& set, std::span<const double> b) {
    // D1^T H B D1 = (1/h) sum_l omega_l b_l r_l r_l^T, with r_l in units of 1/h.
    for (int l = 0; l < set.n; ++l) {
        const int len = set.D1.row_len(l);
        std::array<double, 16> r{};
        const double* src = set.D1.row_data(l);
        for (int q = 0; q < len; ++q) r[q] = src[q] * set.h;
        acc.add_outer(set.omega[l] * b[l], set.D1.row_first(l), r.data(), len);
    }
}

void add_order2_remainder(BandAccumulator& acc, int n, std::span<const double> b) {
    static const double s2[3] = {1.0, -2.0, 1.0};
    for (int l = 1; l < n - 1; ++l) acc.add_outer(0.25 * b[l], l - 1, s2, 3);
}

void add_order4_remainder(BandAccumulator& acc, int n, std::span<const double> b) {
    static const double s3[4] = {-1.0, 3.0, -3.0, 1.0};
    static const double s4[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
    static const double r2[6] = {-185893.0 / 301051.0,
                                 79000249461.0 / 54642863857.0,
                                 -33235054191.0 / 54642863857.0,
                                 -36887526683.0 / 54642863857.0,
                                 26183621850.0 / 54642863857.0,
                                 -4386.0 / 181507.0};
    const double c3_2 = 163928591571.0 / 53268010936.0;
    const double c3_3 = 189284.0 / 185893.0;
    const double c4_2 = 1644330.0 / 301051.0;
    const double c4_3 = 156114.0 / 181507.0;

    auto B3 = [&](int l) { return l < n - 1 ? 0.5 * (b[l] + b[l + 1]) : 0.5 * (b[l] + b[l - 1]); };

    // Staggered third differences.  Rows 0, 1, n-4, n-2, n-1 carry zero weight.
    double r2m[6];
    for (int q = 0; q < 6; ++q) r2m[q] = -r2[5 - q];
    for (int l = 2; l <= n - 3; ++l) {
        if (l == n - 4) continue;
        double w = 1.0;
        if (l == 2 || l == n - 3)
            w = c3_2;
        else if (l == 3 || l == n - 5)
            w = c3_3;
        w *= B3(l) / 18.0;
        if (l == 2)
            acc.add_outer(w, 0, r2, 6);
        else if (l == n - 3)
            acc.add_outer(w, n - 6, r2m, 6);
        else
            acc.add_outer(w, l - 1, s3, 4);
    }
    // Fourth differences.  Rows 0, 1, n-2, n-1 carry zero weight.
    for (int l = 2; l <= n - 3; ++l) {
        double w = 1.0;
        if (l == 2 || l == n - 3)
            w = c4_2;
        else if (l == 3 || l == n - 4)
            w = c4_3;
        acc.add_outer(w * b[l] / 144.0, l - 2, s4, 5);
    }
}

void add_order6_remainder(BandAccumulator& acc, int n, std::span<const double> b) {
    const auto& f = tables::order6_factors();
    const int K = static_cast<int>(f.size());
    for (int k = 0; k < K; ++k) {
        for (const auto& r : f[k]) {
            const int len = static_cast<int>(r.size());
            acc.add_outer(b[k], 0, r.data(), len);
            std::vector<double> m(r.rbegin(), r.rend());
            acc.add_outer(b[n - 1 - k], n - len, m.data(), len);
        }
    }
    // Interior element: fourth, fifth and sixth differences centred on node k.
    static const double s4[5] = {1, -4, 6, -4, 1};
    static const double s5[6] = {-1, 5, -10, 10, -5, 1};
    static const double s6[7] = {1, -6, 15, -20, 15, -6, 1};
    for (int k = K; k < n - K; ++k) {
        acc.add_outer(b[k] / 80.0, k - 2, s4, 5);
        acc.add_outer(b[k] / 1200.0, k - 3, s5, 6);
        acc.add_outer(b[k] / 1200.0, k - 2, s5, 6);
        acc.add_outer(b[k] / 3600.0, k - 3, s6, 7);
    }
}

}  // namespace

BandedMatrix assemble_stiffness(const SbpOperatorSet& set, std::span<const double> b) {
    if (static_cast<int>(b.size()) != set.n)
        throw std::invalid_argument("coefficient length " + std::to_string(b.size()) +
                                    " does not match grid size " + std::to_string(set.n));
    BandAccumulator acc(set.n, 12);
    add_d1_part(acc, set, b);
    switch (set.order) {
        case 2: add_order2_remainder(acc, set.n, b); break;
        case 4: add_order4_remainder(acc, set.n, b); break;
        case 6: add_order6_remainder(acc, set.n, b); break;
        default: throw UnsupportedOrder("unsupported SBP order");
    }
    return acc.finish(1.0 / set.h);
}

// ---------------------------------------------------------- SecondDerivOp

SecondDerivOp::SecondDerivOp(const SbpOperatorSet& set, std::vector<double> b,
                             SatVariant variant)
    : set_(&set), b_(std::move(b)), variant_(variant) {
    const int n = set.n;
    if (static_cast<int>(b_.size()) != n)
        throw std::invalid_argument("coefficient length " + std::to_string(b_.size()) +
                                    " does not match grid size " + std::to_string(n));
    for (int i = 0; i < n; ++i)
        if (!(b_[i] >= 0.0))
            throw std::invalid_argument("negative coefficient sample b[" + std::to_string(i) +
                                        "] = " + std::to_string(b_[i]));

    A_ = assemble_stiffness(set, b_);

    // D2 = H^{-1} (-A - b_1 e_1 d_1^T + b_n e_n d_n^T)
    D2_ = BandedMatrix(n, n);
    const auto& dl = bd_left();
    const auto& dr = bd_right();
    std::vector<double> row;
    for (int i = 0; i < n; ++i) {
        int lo = A_.row_first(i), hi = lo + A_.row_len(i) - 1;
        if (i == 0) hi = std::max(hi, static_cast<int>(dl.size()) - 1), lo = 0;
        if (i == n - 1) lo = std::min(lo, n - static_cast<int>(dr.size())), hi = n - 1;
        row.assign(hi - lo + 1, 0.0);
        for (int k = 0; k < A_.row_len(i); ++k) row[A_.row_first(i) + k - lo] = -A_.row_data(i)[k];
        if (i == 0)
            for (std::size_t k = 0; k < dl.size(); ++k) row[k - lo] -= b_[0] * dl[k];
        if (i == n - 1) {
            const int off = n - static_cast<int>(dr.size());
            for (std::size_t k = 0; k < dr.size(); ++k) row[off + k - lo] += b_[n - 1] * dr[k];
        }
        const double hinv = 1.0 / set.H(i);
        for (double& v : row) v *= hinv;
        D2_.set_row(i, lo, row);
    }
}

const std::vector<double>& SecondDerivOp::bd_left() const {
    return variant_ == SatVariant::standard ? set_->d_left : set_->dhat_left;
}
const std::vector<double>& SecondDerivOp::bd_right() const {
    return variant_ == SatVariant::standard ? set_->d_right : set_->dhat_right;
}

Eigen::MatrixXd SecondDerivOp::A_tilde_dense() const {
    const int n = set_->n, m = set_->m;
    Eigen::MatrixXd a = A_.to_dense();
    double bl = *std::min_element(b_.begin(), b_.begin() + m);
    double br = *std::min_element(b_.end() - m, b_.end());
    Eigen::VectorXd dl = Eigen::VectorXd::Zero(n), dr = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < set_->d_left.size(); ++k) dl(k) = set_->d_left[k];
    for (std::size_t k = 0; k < set_->d_right.size(); ++k)
        dr(n - set_->d_right.size() + k) = set_->d_right[k];
    const double c = set_->h * set_->theta;
    return a - c * bl * dl * dl.transpose() - c * br * dr * dr.transpose();
}

// --------------------------------------------------------------- borrowing

namespace {

bool is_psd(const Eigen::MatrixXd& a, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace

Borrowing compute_borrowing_at(int order, int n, double tol) {
    const int m = borrowing_width(order);
    const double h = 1.0 / (n - 1);
    SbpOperatorSet set = build_sbp_set(order, n, h, false);

    std::vector<double> b(n, 0.0);
    for (int i = 0; i < m; ++i) b[i] = b[n - 1 - i] = 1.0;
    Eigen::MatrixXd a = assemble_stiffness(set, b).to_dense();
    Eigen::VectorXd dl = Eigen::VectorXd::Zero(n), dr = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < set.d_left.size(); ++k) dl(k) = set.d_left[k];
    for (std::size_t k = 0; k < set.d_right.size(); ++k)
        dr(n - set.d_right.size() + k) = set.d_right[k];
    Eigen::MatrixXd g = h * (dl * dl.transpose() + dr * dr.transpose());

    const double eps = 1e-12 * a.cwiseAbs().maxCoeff();
    double lo = 0.0, hi = 1.0;
    if (!is_psd(a, eps))
        throw std::runtime_error("borrowing: A^(b) is not PSD for order " + std::to_string(order));
    int guard = 0;
    while (is_psd(a - hi * g, eps)) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 60)
            throw std::runtime_error("borrowing: bisection failed to bracket for order " +
                                     std::to_string(order) + " (PSD at theta = " +
                                     std::to_string(hi) + ")");
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (is_psd(a - mid * g, eps))
            lo = mid;
        else
            hi = mid;
    }
    return {lo, m};
}

namespace {

double sharp_theta_uncached(int order) {
    // theta = 1 / (d^T A^+ d) with h = 1.  d is orthogonal to the constants
    // that span the null space of A, so (A + 1 1^T) x = d gives A^+ d.
    const int n = 81;
    SbpOperatorSet set = build_sbp_set(order, n, 1.0, false);
    std::vector<double> ones(n, 1.0);
    Eigen::MatrixXd a = assemble_stiffness(set, ones).to_dense();
    a.array() += 1.0;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < set.d_left.size(); ++k) d(k) = set.d_left[k];
    Eigen::VectorXd x = a.ldlt().solve(d);
    return 1.0 / d.dot(x);
}

}  // namespace

double constant_coefficient_theta(int order) {
    static std::mutex mu;
    static std::map<int, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    const double t = sharp_theta_uncached(order);
    cache.emplace(order, t);
    return t;
}

Borrowing compute_borrowing(int order) {
    static std::mutex mu;
    static std::map<int, Borrowing> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    Borrowing b = compute_borrowing_at(order, std::max(41, min_grid_points(order)));
    cache.emplace(order, b);
    return b;
}

}  // namespace dvw
