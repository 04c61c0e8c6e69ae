// Classical fourth-order Runge-Kutta for v_tt = G(t, v, v_t), written as the
// first-order system (v, w)' = (w, G).
#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "dvw/disc.hpp"

namespace dvw {

enum class DtRule {
    automatic,   // viscous when beta is nonzero somewhere, hyperbolic otherwise
    viscous,     // c_visc * h^2
    hyperbolic,  // c_hyp * h / gamma_max
    fixed,       // dt as given
};

std::string to_string(DtRule r);
DtRule dt_rule_from_string(const std::string& s);

struct TimeConfig {
    DtRule rule = DtRule::automatic;
    double c_visc = 0.1;
    double c_hyp = 0.1;
    double dt = 0.0;  // used by DtRule::fixed
    double dt_max = std::numeric_limits<double>::infinity();
    double T = 1.0;
    std::vector<double> snapshot_times;
    bool record_energy = false;
};

// Step size before rounding to an integer step count.  h is the smallest
// grid spacing.
double nominal_dt(const TimeConfig& cfg, double h, double gamma_max, bool viscous);
double nominal_dt(const TimeConfig& cfg, const Semidiscretization& sd);

class InstabilityError : public std::runtime_error {
public:
    InstabilityError(long step, double t, double vmax);
    long step() const { return step_; }

private:
    long step_;
};

struct Trajectory {
    State final;
    std::vector<State> snapshots;        // in the order of TimeConfig::snapshot_times
    std::vector<double> energy_t, energy;
    long steps = 0;
    double dt = 0.0;  // largest step actually taken
};

// Integrates from s to cfg.T.  Snapshot times split the run into segments
// that each use a whole number of equal steps no larger than `dt`.
Trajectory rk4_advance(const SecondOrderSystem& sys, State s, const TimeConfig& cfg, double dt);
Trajectory rk4_advance(const Semidiscretization& sd, State s, const TimeConfig& cfg);

// One RK4 step in place.
void rk4_step(const SecondOrderSystem& sys, State& s, double dt);

}  // namespace dvw
