#include "dvw/mms.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

namespace dvw {

Expr synthesize_forcing(const Expr& u, const MaterialFields& f, int dim) {
    const Expr ut = differentiate(u, Var::t);
    const Expr b2 = f.beta * f.beta;
    const Expr g2 = f.gamma * f.gamma;
    Expr r = differentiate(ut, Var::t) + f.alpha * ut;
    r = r - differentiate(b2 * differentiate(ut, Var::x), Var::x);
    r = r - differentiate(g2 * differentiate(u, Var::x), Var::x);
    if (dim == 2) {
        r = r - differentiate(b2 * differentiate(ut, Var::y), Var::y);
        r = r - differentiate(g2 * differentiate(u, Var::y), Var::y);
    }
    return r;
}

Problem make_problem(const ManufacturedCase& c, int n) {
    Problem p;
    Grid1D gx(c.x_min, c.x_max, n);
    if (c.dim == 1)
        p.grid = gx;
    else
        p.grid = Grid2D{gx, Grid1D(c.y_min, c.y_max, n)};
    p.fields = c.fields;
    p.bc.kind = c.bc;
    if (c.bc == BcKind::dirichlet) {
        p.bc.data = c.exact;
    } else {
        p.bc.dudx = differentiate(c.exact, Var::x);
        if (c.dim == 2) p.bc.dudy = differentiate(c.exact, Var::y);
    }
    p.forcing = synthesize_forcing(c.exact, c.fields, c.dim);
    p.initial_value = c.exact;
    p.initial_rate = differentiate(c.exact, Var::t);
    p.T = c.time.T;
    p.order = c.order;
    p.sat_variant = c.variant;
    p.penalty_safety = c.penalty_safety;
    p.penalty_limit = c.penalty_limit;
    return p;
}

double l2_error(std::span<const double> v, std::span<const double> u, double cell) {
    if (v.size() != u.size()) throw std::invalid_argument("l2_error: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(cell * s);
}

double max_error(std::span<const double> v, std::span<const double> u) {
    if (v.size() != u.size()) throw std::invalid_argument("max_error: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
    return m;
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& e) {
    const std::size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void finish_report(ConvergenceReport& r, double exact_tol) {
    std::sort(r.rows.begin(), r.rows.end(),
              [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.n < b.n; });
    r.exact = true;
    for (const auto& row : r.rows)
        if (row.max_error > exact_tol) r.exact = false;
    std::vector<double> hs, es;
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
        auto& row = r.rows[k];
        if (k > 0) {
            const auto& prev = r.rows[k - 1];
            row.rate = std::log(prev.l2_error / row.l2_error) / std::log(prev.h / row.h);
        }
        hs.push_back(row.h);
        es.push_back(row.l2_error);
    }
    r.fitted_rate = (r.exact || hs.size() < 2) ? std::numeric_limits<double>::quiet_NaN()
                                               : fit_rate(hs, es);
}

std::string ConvergenceReport::csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "n,h,l2_error,max_error,rate\n";
    for (const auto& r : rows) {
        os << r.n << ',' << r.h << ',' << r.l2_error << ',' << r.max_error << ',';
        if (!std::isnan(r.rate)) os << r.rate;
        os << '\n';
    }
    return os.str();
}

std::string ConvergenceReport::table() const {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%8s %12s %14s %14s %8s\n", "n", "h", "l2 error", "max error",
                  "rate");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%8d %12.5e %14.6e %14.6e ", r.n, r.h, r.l2_error,
                      r.max_error);
        os << buf;
        if (std::isnan(r.rate))
            os << "       -\n";
        else {
            std::snprintf(buf, sizeof buf, "%8.3f\n", r.rate);
            os << buf;
        }
    }
    if (exact)
        os << "errors at roundoff level: solution reproduced exactly\n";
    else {
        std::snprintf(buf, sizeof buf, "fitted rate: %.3f\n", fitted_rate);
        os << buf;
    }
    return os.str();
}

int thread_count() {
    if (const char* s = std::getenv("DVW_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v >= 1) return static_cast<int>(v);
        throw std::invalid_argument("DVW_THREADS must be an integer >= 1, got '" + std::string(s) +
                                    "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = thread_count();
    threads = std::min(threads, count);
    std::vector<std::exception_ptr> errors(count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (int i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

void check_resolutions(const std::vector<int>& res) {
    if (res.size() < 3)
        throw StudyError("a convergence study needs at least 3 resolutions, got " +
                         std::to_string(res.size()));
    for (std::size_t k = 1; k < res.size(); ++k)
        if (res[k] <= res[k - 1]) throw StudyError("resolutions must be strictly increasing");
}

template <class F>
auto annotate(int n, F&& f) {
    try {
        return f();
    } catch (const InstabilityError&) {
        throw;
    } catch (const std::exception& e) {
        throw StudyError("n = " + std::to_string(n) + ": " + e.what());
    }
}

double spacing(const Grid& g) {
    if (auto* g1 = std::get_if<Grid1D>(&g)) return g1->h();
    return std::get<Grid2D>(g).gx.h();
}

double cell_size(const Grid& g) {
    if (auto* g1 = std::get_if<Grid1D>(&g)) return g1->h();
    const auto& g2 = std::get<Grid2D>(g);
    return g2.gx.h() * g2.gy.h();
}

}  // namespace

ConvergenceReport run_convergence(const ManufacturedCase& c, int threads) {
    check_resolutions(c.resolutions);
    ConvergenceReport rep;
    rep.rows.resize(c.resolutions.size());
    parallel_for(static_cast<int>(c.resolutions.size()), threads, [&](int k) {
        const int n = c.resolutions[k];
        rep.rows[k] = annotate(n, [&] {
            auto t0 = std::chrono::steady_clock::now();
            Problem p = make_problem(c, n);
            Semidiscretization sd(p);
            Trajectory tr = rk4_advance(sd, sd.initial_state(), c.time);
            std::vector<double> xs, ys, u(sd.size());
            grid_coordinates(sd.grid(), xs, ys);
            for (int i = 0; i < sd.size(); ++i) u[i] = evaluate(c.exact, xs[i], ys[i], c.time.T);
            ConvergenceRow row;
            row.n = n;
            row.h = spacing(sd.grid());
            row.l2_error = l2_error(tr.final.v, u, cell_size(sd.grid()));
            row.max_error = max_error(tr.final.v, u);
            row.steps = tr.steps;
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return row;
        });
    });
    finish_report(rep);
    return rep;
}

int nesting_stride(int n, int n_ref) {
    if (n < 2 || (n_ref - 1) % (n - 1) != 0)
        throw StudyError("grid with n = " + std::to_string(n) +
                         " does not nest in the reference grid n = " + std::to_string(n_ref));
    return (n_ref - 1) / (n - 1);
}

ConvergenceReport run_self_convergence(const std::function<Problem(int)>& make,
                                       const TimeConfig& time, const std::vector<int>& resolutions,
                                       int n_ref, int threads) {
    check_resolutions(resolutions);
    const int finest = resolutions.back();
    if ((n_ref - 1) < 2 * (finest - 1))
        throw StudyError("reference grid n = " + std::to_string(n_ref) +
                         " must be at least twice as fine as the finest study grid n = " +
                         std::to_string(finest));
    std::vector<int> strides;
    for (int n : resolutions) strides.push_back(nesting_stride(n, n_ref));

    // Every run (study grids plus the reference) is one task; the reference
    // is started first because it dominates the cost.
    const int count = static_cast<int>(resolutions.size()) + 1;
    std::vector<State> finals(count);
    std::vector<Grid> grids(count);
    std::vector<long> steps(count);
    std::vector<double> secs(count);
    parallel_for(count, threads, [&](int k) {
        const int n = k == 0 ? n_ref : resolutions[k - 1];
        annotate(n, [&] {
            auto t0 = std::chrono::steady_clock::now();
            Problem p = make(n);
            Semidiscretization sd(p);
            Trajectory tr = rk4_advance(sd, sd.initial_state(), time);
            finals[k] = std::move(tr.final);
            grids[k] = sd.grid();
            steps[k] = tr.steps;
            secs[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return 0;
        });
    });

    const Grid& gref = grids[0];
    ConvergenceReport rep;
    for (std::size_t k = 0; k < resolutions.size(); ++k) {
        const Grid& g = grids[k + 1];
        const int r = strides[k];
        std::vector<double> u(grid_size(g));
        if (auto* g1 = std::get_if<Grid1D>(&g)) {
            for (int i = 0; i < g1->n; ++i) u[i] = finals[0].v[i * r];
        } else {
            const auto& g2 = std::get<Grid2D>(g);
            const auto& gr = std::get<Grid2D>(gref);
            for (int i = 0; i < g2.nx(); ++i)
                for (int j = 0; j < g2.ny(); ++j)
                    u[g2.index(i, j)] = finals[0].v[gr.index(i * r, j * r)];
        }
        ConvergenceRow row;
        row.n = resolutions[k];
        row.h = spacing(g);
        row.l2_error = l2_error(finals[k + 1].v, u, cell_size(g));
        row.max_error = max_error(finals[k + 1].v, u);
        row.steps = steps[k + 1];
        row.seconds = secs[k + 1];
        rep.rows.push_back(row);
    }
    finish_report(rep);
    return rep;
}

}  // namespace dvw
