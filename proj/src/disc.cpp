#include "dvw/disc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dvw {

namespace {

double line_min(const double* b, int count, std::ptrdiff_t stride) {
    double m = b[0];
    for (int q = 1; q < count; ++q) m = std::min(m, b[q * stride]);
    return m;
}

// safety * b_1^4 / (theta * b_min^2), or zero when b vanishes at the end node.
double borrowed_bound(const double* b, int n, std::ptrdiff_t step, const SbpOperatorSet& set,
                      double safety, const char* what, const char* side, PenaltyLimit limit) {
    const double b1 = b[0];
    if (b1 == 0.0) return 0.0;
    if (limit == PenaltyLimit::sharp) {
        for (int q = 1; q < n; ++q)
            if (std::abs(b[q * step] - b1) > 1e-14 * std::abs(b1))
                throw PenaltyError(std::string("the sharp penalty limit needs ") + what +
                                   " to be uniform along each grid line");
        return safety * b1 * b1 / constant_coefficient_theta(set.order);
    }
    const double bmin = line_min(b, std::min(set.m, n), step);
    if (bmin == 0.0)
        throw PenaltyError(std::string(what) + " vanishes near the " + side +
                           " boundary but not on it; the penalty bound is undefined for the "
                           "standard SAT variant, use the fully_compatible variant");
    return safety * b1 * b1 * b1 * b1 / (set.theta * bmin * bmin);
}

}  // namespace

LinePenalty compute_line_penalties(const double* beta, const double* gamma, int n,
                                   std::ptrdiff_t stride, const SbpOperatorSet& set,
                                   double safety, SatVariant variant, bool viscous,
                                   PenaltyLimit limit) {
    if (!(safety >= 1.0)) throw std::invalid_argument("penalty safety factor must be >= 1");
    LinePenalty p;
    const double* beta_r = beta + (n - 1) * stride;
    const double* gamma_r = gamma + (n - 1) * stride;
    p.gamma_left = borrowed_bound(gamma, n, stride, set, safety, "gamma", "left", limit);
    p.gamma_right = borrowed_bound(gamma_r, n, -stride, set, safety, "gamma", "right", limit);
    if (!viscous) return p;
    if (variant == SatVariant::fully_compatible) {
        p.beta_left = safety * beta[0] * beta[0] / set.omega1;
        p.beta_right = safety * beta_r[0] * beta_r[0] / set.omega1;
    } else {
        p.beta_left = borrowed_bound(beta, n, stride, set, safety, "beta", "left", limit);
        p.beta_right = borrowed_bound(beta_r, n, -stride, set, safety, "beta", "right", limit);
    }
    return p;
}

PenaltySet compute_penalties(const SampledFields& fields, const Grid& grid,
                             const SbpOperatorSet& sx, const SbpOperatorSet* sy, double safety,
                             SatVariant variant, bool viscous, PenaltyLimit limit) {
    PenaltySet ps;
    ps.safety = safety;
    if (auto* g1 = std::get_if<Grid1D>(&grid)) {
        ps.x_lines.push_back(compute_line_penalties(fields.beta.data(), fields.gamma.data(), g1->n,
                                                    1, sx, safety, variant, viscous, limit));
        return ps;
    }
    const auto& g = std::get<Grid2D>(grid);
    if (!sy) throw std::invalid_argument("2D penalties need an operator set for y");
    for (int j = 0; j < g.ny(); ++j)
        ps.x_lines.push_back(compute_line_penalties(&fields.beta[g.index(0, j)],
                                                    &fields.gamma[g.index(0, j)], g.nx(), g.ny(),
                                                    sx, safety, variant, viscous, limit));
    for (int i = 0; i < g.nx(); ++i)
        ps.y_lines.push_back(compute_line_penalties(&fields.beta[g.index(i, 0)],
                                                    &fields.gamma[g.index(i, 0)], g.ny(), 1, *sy,
                                                    safety, variant, viscous, limit));
    return ps;
}

// ----------------------------------------------------------------- assembly

Semidiscretization::Semidiscretization(const Problem& p)
    : grid_(p.grid), size_(grid_size(p.grid)), bc_(p.bc.kind), variant_(p.sat_variant) {
    p.validate();
    fields_ = sample_fields(p.fields, grid_);
    viscous_ = std::any_of(fields_.beta.begin(), fields_.beta.end(),
                           [](double b) { return b != 0.0; });

    const std::vector<double> beta2 = fields_.beta2();
    const std::vector<double> gamma2 = fields_.gamma2();

    if (auto* g1 = std::get_if<Grid1D>(&grid_)) {
        sx_ = std::make_shared<SbpOperatorSet>(build_sbp_set(p.order, g1->n, g1->h()));
        sy_ = sx_;
        if (viscous_ && variant_ == SatVariant::standard) {
            BetaRegime r = classify_beta(fields_.beta, sx_->m);
            if (r.needs_fully_compatible())
                throw PenaltyError("beta vanishes near a boundary but not on it; use the "
                                   "fully_compatible SAT variant");
        }
        penalties_ = compute_penalties(fields_, grid_, *sx_, nullptr, p.penalty_safety,
                                       variant_, viscous_, p.penalty_limit);
        hweight_.resize(size_);
        for (int i = 0; i < size_; ++i) hweight_[i] = sx_->H(i);
        add_line(xlines_, 0, 1, *sx_, penalties_.x_lines[0], 1.0, 0, beta2, gamma2);
    } else {
        const auto& g = std::get<Grid2D>(grid_);
        sx_ = std::make_shared<SbpOperatorSet>(build_sbp_set(p.order, g.nx(), g.gx.h()));
        if (g.ny() == g.nx() && g.gy.h() == g.gx.h())
            sy_ = sx_;
        else
            sy_ = std::make_shared<SbpOperatorSet>(build_sbp_set(p.order, g.ny(), g.gy.h()));
        penalties_ = compute_penalties(fields_, grid_, *sx_, sy_.get(), p.penalty_safety,
                                       variant_, viscous_, p.penalty_limit);
        hweight_.resize(size_);
        for (int i = 0; i < g.nx(); ++i)
            for (int j = 0; j < g.ny(); ++j) hweight_[g.index(i, j)] = sx_->H(i) * sy_->H(j);
        for (int j = 0; j < g.ny(); ++j)
            add_line(xlines_, g.index(0, j), g.ny(), *sx_, penalties_.x_lines[j], sy_->H(j), j,
                     beta2, gamma2);
        for (int i = 0; i < g.nx(); ++i)
            add_line(ylines_, g.index(i, 0), 1, *sy_, penalties_.y_lines[i], sx_->H(i), i, beta2,
                     gamma2);
    }

    build_faces(p);

    std::vector<double> xs, ys;
    grid_coordinates(grid_, xs, ys);
    if (!p.forcing.is_zero())
        forcing_ = std::make_unique<PointSampler>(std::vector<Expr>{p.forcing}, xs, ys);
    initial_ = std::make_unique<PointSampler>(
        std::vector<Expr>{p.initial_value, p.initial_rate}, xs, ys);
}

void Semidiscretization::add_line(std::vector<Line>& lines, int offset, std::ptrdiff_t stride,
                                  const SbpOperatorSet& set, const LinePenalty& tau,
                                  double weight, int face_index,
                                  const std::vector<double>& beta2,
                                  const std::vector<double>& gamma2) {
    Line L;
    L.offset = offset;
    L.stride = stride;
    L.set = &set;
    L.tau = tau;
    L.weight = weight;
    L.face_index = face_index;
    std::vector<double> b(set.n);
    for (int q = 0; q < set.n; ++q) b[q] = gamma2[offset + q * stride];
    L.gamma_op.emplace(set, b, SatVariant::standard);
    if (viscous_) {
        for (int q = 0; q < set.n; ++q) b[q] = beta2[offset + q * stride];
        L.beta_op.emplace(set, b, variant_);
    }
    lines.push_back(std::move(L));
}

void Semidiscretization::build_faces(const Problem& p) {
    if (p.bc.homogeneous()) return;
    const Expr zero;
    std::vector<double> xs[2][2], ys[2][2];
    if (auto* g1 = std::get_if<Grid1D>(&grid_)) {
        xs[0][0] = {g1->x_min};
        xs[0][1] = {g1->x_max};
        ys[0][0] = ys[0][1] = {0.0};
    } else {
        const auto& g = std::get<Grid2D>(grid_);
        for (int j = 0; j < g.ny(); ++j) {
            xs[0][0].push_back(g.gx.x_min);
            xs[0][1].push_back(g.gx.x_max);
            ys[0][0].push_back(g.gy.x(j));
            ys[0][1].push_back(g.gy.x(j));
        }
        for (int i = 0; i < g.nx(); ++i) {
            xs[1][0].push_back(g.gx.x(i));
            xs[1][1].push_back(g.gx.x(i));
            ys[1][0].push_back(g.gy.x_min);
            ys[1][1].push_back(g.gy.x_max);
        }
    }
    const int ndir = dim();
    faces_.resize(2 * ndir);
    for (int dir = 0; dir < ndir; ++dir)
        for (int side = 0; side < 2; ++side) {
            Expr e;
            if (bc_ == BcKind::dirichlet) {
                e = p.bc.data.value_or(zero);
            } else {
                // The SAT needs the derivative along the line direction.  The
                // outward normal points in -x (-y) on the low face.
                const auto& over = dir == 0 ? p.bc.dudx : p.bc.dudy;
                if (over)
                    e = *over;
                else if (p.bc.data)
                    e = side == 0 ? -*p.bc.data : *p.bc.data;
            }
            faces_[2 * dir + side].sampler = std::make_unique<PointSampler>(
                std::vector<Expr>{e, differentiate(e, Var::t)}, xs[dir][side], ys[dir][side]);
        }
}

// ------------------------------------------------------------------- apply

void Semidiscretization::forcing(double t, std::span<double> f) const {
    if (static_cast<int>(f.size()) != size_)
        throw std::invalid_argument("forcing: length mismatch");
    if (forcing_)
        forcing_->eval(0, t, f);
    else
        std::fill(f.begin(), f.end(), 0.0);
}

void Semidiscretization::apply_lines(const std::vector<Line>& lines, int dir, double t,
                                     const double* v, const double* w, double* out) const {
    thread_local std::vector<double> data[4];
    const bool inhom = !faces_.empty();
    if (inhom) {
        const std::size_t nl = lines.size();
        for (int side = 0; side < 2; ++side) {
            const PointSampler& s = *faces_[2 * dir + side].sampler;
            data[2 * side].resize(nl);
            data[2 * side + 1].resize(nl);
            s.eval(0, t, data[2 * side]);
            s.eval(1, t, data[2 * side + 1]);
        }
    }

    for (const Line& L : lines) {
        const SbpOperatorSet& set = *L.set;
        const int n = set.n;
        const std::ptrdiff_t s = L.stride;
        const double* vl = v + L.offset;
        const double* wl = w + L.offset;
        double* ol = out + L.offset;
        const std::ptrdiff_t last = (n - 1) * s;

        L.gamma_op->D2().apply_add(1.0, vl, s, ol, s);
        if (L.beta_op) L.beta_op->D2().apply_add(1.0, wl, s, ol, s);

        const double g_l = inhom ? data[0][L.face_index] : 0.0;
        const double gt_l = inhom ? data[1][L.face_index] : 0.0;
        const double g_r = inhom ? data[2][L.face_index] : 0.0;
        const double gt_r = inhom ? data[3][L.face_index] : 0.0;

        const double c_l = L.gamma_op->b()[0], c_r = L.gamma_op->b()[n - 1];
        const double b_l = L.beta_op ? L.beta_op->b()[0] : 0.0;
        const double b_r = L.beta_op ? L.beta_op->b()[n - 1] : 0.0;
        const std::vector<double>& dl = L.gamma_op->bd_left();
        const std::vector<double>& dr = L.gamma_op->bd_right();

        if (bc_ == BcKind::dirichlet) {
            const double ev_l = vl[0] - g_l, ev_r = vl[last] - g_r;
            const double ew_l = wl[0] - gt_l, ew_r = wl[last] - gt_r;
            // Symmetrizing terms: H^{-1} (b_1 d_1 e_1^T - b_n d_n e_n^T) e.
            for (std::size_t q = 0; q < dl.size(); ++q)
                ol[q * s] -= c_l * dl[q] * ev_l / set.H(static_cast<int>(q));
            const int off = n - static_cast<int>(dr.size());
            for (std::size_t q = 0; q < dr.size(); ++q)
                ol[(off + q) * s] += c_r * dr[q] * ev_r / set.H(off + static_cast<int>(q));
            if (L.beta_op) {
                const auto& bl = L.beta_op->bd_left();
                const auto& br = L.beta_op->bd_right();
                for (std::size_t q = 0; q < bl.size(); ++q)
                    ol[q * s] -= b_l * bl[q] * ew_l / set.H(static_cast<int>(q));
                const int offb = n - static_cast<int>(br.size());
                for (std::size_t q = 0; q < br.size(); ++q)
                    ol[(offb + q) * s] += b_r * br[q] * ew_r / set.H(offb + static_cast<int>(q));
            }
            // Penalty terms scaled by 1/h.
            ol[0] -= (L.tau.beta_left * ew_l + L.tau.gamma_left * ev_l) / (set.h * set.H(0));
            ol[last] -= (L.tau.beta_right * ew_r + L.tau.gamma_right * ev_r) /
                        (set.h * set.H(n - 1));
        } else {
            // Replace the boundary derivative in D2 by the data.
            double fl = c_l * (set.dot_left(dl, vl, s) - g_l);
            double fr = c_r * (set.dot_right(dr, vl, s) - g_r);
            if (L.beta_op) {
                fl += b_l * (set.dot_left(L.beta_op->bd_left(), wl, s) - gt_l);
                fr += b_r * (set.dot_right(L.beta_op->bd_right(), wl, s) - gt_r);
            }
            ol[0] += fl / set.H(0);
            ol[last] -= fr / set.H(n - 1);
        }
    }
}

void Semidiscretization::rhs_apply(const State& st, std::span<const double> f,
                                   std::span<double> out) const {
    if (static_cast<int>(st.v.size()) != size_ || static_cast<int>(st.w.size()) != size_ ||
        static_cast<int>(out.size()) != size_ || (!f.empty() && static_cast<int>(f.size()) != size_))
        throw std::invalid_argument("rhs_apply: length mismatch");
    const double* v = st.v.data();
    const double* w = st.w.data();
    for (int k = 0; k < size_; ++k) out[k] = (f.empty() ? 0.0 : f[k]) - fields_.alpha[k] * w[k];
    apply_lines(xlines_, 0, st.t, v, w, out.data());
    if (!ylines_.empty()) apply_lines(ylines_, 1, st.t, v, w, out.data());
}

void Semidiscretization::accel(double t, std::span<const double> v, std::span<const double> w,
                               std::span<double> out) const {
    if (static_cast<int>(out.size()) != size_)
        throw std::invalid_argument("accel: length mismatch");
    if (forcing_)
        forcing_->eval(0, t, out);
    else
        std::fill(out.begin(), out.end(), 0.0);
    for (int k = 0; k < size_; ++k) out[k] -= fields_.alpha[k] * w[k];
    apply_lines(xlines_, 0, t, v.data(), w.data(), out.data());
    if (!ylines_.empty()) apply_lines(ylines_, 1, t, v.data(), w.data(), out.data());
}

// ------------------------------------------------------------------ energy

double Semidiscretization::line_energy(const Line& L, const double* v) const {
    const SbpOperatorSet& set = *L.set;
    const int n = set.n;
    const std::ptrdiff_t s = L.stride;
    const BandedMatrix& A = L.gamma_op->A();
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* a = A.row_data(i);
        const int first = A.row_first(i);
        double acc = 0.0;
        for (int k = 0; k < A.row_len(i); ++k) acc += a[k] * v[(first + k) * s];
        q += v[i * s] * acc;
    }
    double e = 0.5 * q;
    if (bc_ == BcKind::dirichlet) {
        const double v1 = v[0], vn = v[(n - 1) * s];
        const double c_l = L.gamma_op->b()[0], c_r = L.gamma_op->b()[n - 1];
        e += c_l * v1 * set.dot_left(set.d_left, v, s);
        e -= c_r * vn * set.dot_right(set.d_right, v, s);
        e += L.tau.gamma_left / (2.0 * set.h) * v1 * v1;
        e += L.tau.gamma_right / (2.0 * set.h) * vn * vn;
    }
    return L.weight * e;
}

double Semidiscretization::energy(const State& st) const {
    if (static_cast<int>(st.v.size()) != size_ || static_cast<int>(st.w.size()) != size_)
        throw std::invalid_argument("energy: length mismatch");
    double kin = 0.0;
    for (int k = 0; k < size_; ++k) kin += hweight_[k] * st.w[k] * st.w[k];
    double e = 0.5 * kin;
    for (const Line& L : xlines_) e += line_energy(L, st.v.data() + L.offset);
    for (const Line& L : ylines_) e += line_energy(L, st.v.data() + L.offset);
    return e;
}

State Semidiscretization::initial_state() const {
    State s;
    s.v.resize(size_);
    s.w.resize(size_);
    initial_->eval(0, 0.0, s.v);
    initial_->eval(1, 0.0, s.w);
    s.t = 0.0;
    return s;
}

}  // namespace dvw
