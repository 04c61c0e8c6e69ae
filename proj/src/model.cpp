#include "dvw/model.hpp"

#include <cmath>
#include <sstream>

namespace dvw {

Grid1D::Grid1D(double lo, double hi, int count) : x_min(lo), x_max(hi), n(count) {
    if (count < 2) throw std::invalid_argument("grid needs at least 2 nodes");
    if (!(hi > lo)) throw std::invalid_argument("grid interval must satisfy x_max > x_min");
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = this->x(j);
    return x;
}

int grid_size(const Grid& g) {
    return std::visit(
        [](const auto& gr) -> int {
            if constexpr (std::is_same_v<std::decay_t<decltype(gr)>, Grid1D>)
                return gr.n;
            else
                return gr.size();
        },
        g);
}

int grid_dim(const Grid& g) { return std::holds_alternative<Grid1D>(g) ? 1 : 2; }

void grid_coordinates(const Grid& g, std::vector<double>& xs, std::vector<double>& ys) {
    if (auto* g1 = std::get_if<Grid1D>(&g)) {
        xs = g1->nodes();
        ys.assign(xs.size(), 0.0);
        return;
    }
    const auto& g2 = std::get<Grid2D>(g);
    xs.resize(g2.size());
    ys.resize(g2.size());
    for (int i = 0; i < g2.nx(); ++i)
        for (int j = 0; j < g2.ny(); ++j) {
            xs[g2.index(i, j)] = g2.gx.x(i);
            ys[g2.index(i, j)] = g2.gy.x(j);
        }
}

std::vector<double> SampledFields::beta2() const {
    std::vector<double> r(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) r[i] = beta[i] * beta[i];
    return r;
}

std::vector<double> SampledFields::gamma2() const {
    std::vector<double> r(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) r[i] = gamma[i] * gamma[i];
    return r;
}

namespace {

std::string node_name(const Grid& g, std::size_t k, double x, double y) {
    std::ostringstream os;
    if (grid_dim(g) == 1) {
        os << "node " << k << " (x = " << x << ")";
    } else {
        auto [i, j] = std::get<Grid2D>(g).ij(static_cast<int>(k));
        os << "node (" << i << ", " << j << ") (x = " << x << ", y = " << y << ")";
    }
    return os.str();
}

}  // namespace

SampledFields sample_fields(const MaterialFields& f, const Grid& g) {
    std::vector<double> xs, ys;
    grid_coordinates(g, xs, ys);
    SampledFields s;
    s.alpha.resize(xs.size());
    s.beta.resize(xs.size());
    s.gamma.resize(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        s.alpha[k] = evaluate(f.alpha, xs[k], ys[k], 0.0);
        s.beta[k] = evaluate(f.beta, xs[k], ys[k], 0.0);
        s.gamma[k] = evaluate(f.gamma, xs[k], ys[k], 0.0);
        if (!(s.gamma[k] > 0.0) || !std::isfinite(s.gamma[k]))
            throw FieldError("gamma must be positive: gamma = " + std::to_string(s.gamma[k]) +
                             " at " + node_name(g, k, xs[k], ys[k]));
        if (!(s.alpha[k] >= 0.0) || !std::isfinite(s.alpha[k]))
            throw FieldError("alpha must be nonnegative: alpha = " + std::to_string(s.alpha[k]) +
                             " at " + node_name(g, k, xs[k], ys[k]));
        if (!(s.beta[k] >= 0.0) || !std::isfinite(s.beta[k]))
            throw FieldError("beta must be nonnegative: beta = " + std::to_string(s.beta[k]) +
                             " at " + node_name(g, k, xs[k], ys[k]));
    }
    return s;
}

std::string to_string(BcKind k) { return k == BcKind::dirichlet ? "dirichlet" : "neumann"; }

std::string to_string(BetaSide s) {
    switch (s) {
        case BetaSide::positive: return "positive";
        case BetaSide::zero_at_boundary: return "zero_at_boundary";
        case BetaSide::zero_near_boundary: return "zero_near_boundary";
    }
    return "?";
}

BetaRegime classify_beta_line(const double* beta, int n, std::ptrdiff_t stride, int width) {
    BetaRegime r;
    auto side = [&](int first, int step) {
        if (beta[first * stride] == 0.0) return BetaSide::zero_at_boundary;
        for (int q = 1; q < width && q < n; ++q)
            if (beta[(first + q * step) * stride] == 0.0) return BetaSide::zero_near_boundary;
        return BetaSide::positive;
    };
    r.left = side(0, 1);
    r.right = side(n - 1, -1);
    r.identically_zero = true;
    for (int i = 0; i < n; ++i)
        if (beta[i * stride] != 0.0) {
            r.identically_zero = false;
            break;
        }
    return r;
}

BetaRegime classify_beta(const std::vector<double>& beta, int width) {
    return classify_beta_line(beta.data(), static_cast<int>(beta.size()), 1, width);
}

void Problem::validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("final time T must be positive");
    if (!(penalty_safety >= 1.0)) throw std::invalid_argument("penalty_safety must be >= 1");
    min_grid_points(order);
    if (bc.kind == BcKind::dirichlet && (bc.dudx || bc.dudy))
        throw std::invalid_argument("derivative boundary data given for a Dirichlet problem");
    if (grid_dim(grid) == 1 && bc.dudy)
        throw std::invalid_argument("y-derivative boundary data given for a 1D problem");
}

}  // namespace dvw
