// Manufactured solutions and convergence studies.
#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dvw/disc.hpp"
#include "dvw/timeint.hpp"

namespace dvw {

// f = u_tt + alpha u_t - div(beta^2 grad u_t) - div(gamma^2 grad u), with the
// y terms included when dim == 2.
Expr synthesize_forcing(const Expr& u, const MaterialFields& fields, int dim);

struct ManufacturedCase {
    Expr exact;
    MaterialFields fields;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    int dim = 1;
    BcKind bc = BcKind::dirichlet;
    int order = 4;
    double penalty_safety = 2.0;
    SatVariant variant = SatVariant::standard;
    PenaltyLimit penalty_limit = PenaltyLimit::borrowing;
    TimeConfig time;  // time.T is the final time
    std::vector<int> resolutions;
};

// The problem at resolution n (n x n in 2D) with forcing, boundary data
// and initial data taken from the exact solution.
Problem make_problem(const ManufacturedCase& c, int n);

// sqrt(cell * sum (u - v)^2), where cell = h^d.
double l2_error(std::span<const double> v, std::span<const double> u, double cell);
double max_error(std::span<const double> v, std::span<const double> u);

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    double l2_error = 0.0;
    double max_error = 0.0;
    double rate = std::numeric_limits<double>::quiet_NaN();  // vs the previous row
    long steps = 0;
    double seconds = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    // Every error is at roundoff level; rates are meaningless.
    bool exact = false;

    std::string csv() const;    // n,h,l2_error,max_error,rate
    std::string table() const;  // human-readable
};

// Fills per-pair rates, the least-squares rate and the exactness flag.
void finish_report(ConvergenceReport& r, double exact_tol = 1e-12);
double fit_rate(const std::vector<double>& h, const std::vector<double>& e);

// Worker count from the DVW_THREADS environment variable, else the
// hardware concurrency.
int thread_count();

// Runs fn(0..count-1) on up to `threads` workers.  Exceptions are rethrown
// in index order after all workers finish.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

class StudyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ConvergenceReport run_convergence(const ManufacturedCase& c, int threads = 0);

// Errors against a reference solution on a finer nested grid, restricted by
// injection.  `make` builds the problem for a given n (n x n in 2D).
ConvergenceReport run_self_convergence(const std::function<Problem(int)>& make,
                                       const TimeConfig& time, const std::vector<int>& resolutions,
                                       int n_ref, int threads = 0);

// Checks that n nests into n_ref and returns the injection stride.
int nesting_stride(int n, int n_ref);

}  // namespace dvw
