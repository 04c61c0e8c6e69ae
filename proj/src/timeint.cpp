#include "dvw/timeint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dvw {

std::string to_string(DtRule r) {
    switch (r) {
        case DtRule::automatic: return "auto";
        case DtRule::viscous: return "viscous";
        case DtRule::hyperbolic: return "hyperbolic";
        case DtRule::fixed: return "fixed";
    }
    return "?";
}

DtRule dt_rule_from_string(const std::string& s) {
    if (s == "auto") return DtRule::automatic;
    if (s == "viscous") return DtRule::viscous;
    if (s == "hyperbolic") return DtRule::hyperbolic;
    if (s == "fixed") return DtRule::fixed;
    throw std::invalid_argument("unknown dt rule '" + s +
                                "' (expected auto, viscous, hyperbolic or fixed)");
}

double nominal_dt(const TimeConfig& cfg, double h, double gamma_max, bool viscous) {
    DtRule r = cfg.rule;
    if (r == DtRule::automatic) r = viscous ? DtRule::viscous : DtRule::hyperbolic;
    double dt = 0.0;
    switch (r) {
        case DtRule::viscous: dt = cfg.c_visc * h * h; break;
        case DtRule::hyperbolic: dt = cfg.c_hyp * h / gamma_max; break;
        case DtRule::fixed: dt = cfg.dt; break;
        case DtRule::automatic: break;
    }
    dt = std::min(dt, cfg.dt_max);
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("time step must be positive and finite");
    return dt;
}

double nominal_dt(const TimeConfig& cfg, const Semidiscretization& sd) {
    double h = sd.set_x().h;
    if (sd.dim() == 2) h = std::min(h, sd.set_y().h);
    const auto& g = sd.fields().gamma;
    const double gmax = *std::max_element(g.begin(), g.end());
    return nominal_dt(cfg, h, gmax, sd.viscous());
}

InstabilityError::InstabilityError(long step, double t, double vmax)
    : std::runtime_error("solution blew up at step " + std::to_string(step) + " (t = " +
                         std::to_string(t) + ", max |v| = " + std::to_string(vmax) + ")"),
      step_(step) {}

namespace {

struct Workspace {
    std::vector<double> kv[4], kw[4], tv, tw;
    void resize(std::size_t n) {
        for (auto& k : kv) k.resize(n);
        for (auto& k : kw) k.resize(n);
        tv.resize(n);
        tw.resize(n);
    }
};

void step_impl(const SecondOrderSystem& sys, State& s, double dt, Workspace& ws) {
    const std::size_t n = s.v.size();
    const double t = s.t;
    // Stage 1
    sys.accel(t, s.v, s.w, ws.kw[0]);
    // Stage 2
    for (std::size_t i = 0; i < n; ++i) {
        ws.tv[i] = s.v[i] + 0.5 * dt * s.w[i];
        ws.tw[i] = s.w[i] + 0.5 * dt * ws.kw[0][i];
    }
    ws.kv[1] = ws.tw;
    sys.accel(t + 0.5 * dt, ws.tv, ws.tw, ws.kw[1]);
    // Stage 3
    for (std::size_t i = 0; i < n; ++i) {
        ws.tv[i] = s.v[i] + 0.5 * dt * ws.kv[1][i];
        ws.tw[i] = s.w[i] + 0.5 * dt * ws.kw[1][i];
    }
    ws.kv[2] = ws.tw;
    sys.accel(t + 0.5 * dt, ws.tv, ws.tw, ws.kw[2]);
    // Stage 4
    for (std::size_t i = 0; i < n; ++i) {
        ws.tv[i] = s.v[i] + dt * ws.kv[2][i];
        ws.tw[i] = s.w[i] + dt * ws.kw[2][i];
    }
    sys.accel(t + dt, ws.tv, ws.tw, ws.kw[3]);
    // The v-stages are w, kv[1], kv[2] and tw.
    const double c = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        s.v[i] += c * (s.w[i] + 2.0 * ws.kv[1][i] + 2.0 * ws.kv[2][i] + ws.tw[i]);
        s.w[i] += c * (ws.kw[0][i] + 2.0 * ws.kw[1][i] + 2.0 * ws.kw[2][i] + ws.kw[3][i]);
    }
    s.t = t + dt;
}

}  // namespace

void rk4_step(const SecondOrderSystem& sys, State& s, double dt) {
    Workspace ws;
    ws.resize(s.v.size());
    step_impl(sys, s, dt, ws);
}

Trajectory rk4_advance(const SecondOrderSystem& sys, State s, const TimeConfig& cfg, double dt) {
    if (static_cast<int>(s.v.size()) != sys.size() || static_cast<int>(s.w.size()) != sys.size())
        throw std::invalid_argument("rk4_advance: state size does not match the system");
    if (!(cfg.T > s.t)) throw std::invalid_argument("rk4_advance: final time must exceed start");
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_advance: dt must be positive");

    std::vector<std::pair<double, std::size_t>> stops;
    for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
        const double ts = cfg.snapshot_times[k];
        if (ts < s.t || ts > cfg.T)
            throw std::invalid_argument("snapshot time " + std::to_string(ts) +
                                        " outside the simulated interval");
        stops.emplace_back(ts, k);
    }
    std::sort(stops.begin(), stops.end());

    Trajectory tr;
    tr.snapshots.resize(cfg.snapshot_times.size());
    Workspace ws;
    ws.resize(s.v.size());
    if (cfg.record_energy) {
        tr.energy_t.push_back(s.t);
        tr.energy.push_back(sys.energy(s));
    }

    auto check = [&](long step) {
        double vmax = 0.0;
        for (double x : s.v) {
            // NaN must not be swallowed by max().
            const double a = std::isnan(x) ? HUGE_VAL : std::abs(x);
            vmax = std::max(vmax, a);
        }
        if (!(vmax <= 1e12)) throw InstabilityError(step, s.t, vmax);
    };

    std::size_t next = 0;
    auto take_snapshots = [&] {
        while (next < stops.size() && stops[next].first <= s.t + 1e-12 * std::max(1.0, cfg.T)) {
            tr.snapshots[stops[next].second] = s;
            ++next;
        }
    };
    take_snapshots();

    std::vector<double> ends;
    for (auto& st : stops)
        if (st.first > s.t && (ends.empty() || st.first > ends.back())) ends.push_back(st.first);
    if (ends.empty() || ends.back() < cfg.T) ends.push_back(cfg.T);

    for (double end : ends) {
        const double t0 = s.t;
        const double len = end - t0;
        if (len <= 0.0) continue;
        const long nsteps = std::max(1L, static_cast<long>(std::ceil(len / dt - 1e-9)));
        const double h = len / nsteps;
        tr.dt = std::max(tr.dt, h);
        for (long k = 1; k <= nsteps; ++k) {
            step_impl(sys, s, h, ws);
            s.t = k == nsteps ? end : t0 + k * h;
            ++tr.steps;
            if ((tr.steps & 63) == 0 || k == nsteps) check(tr.steps);
            if (cfg.record_energy) {
                tr.energy_t.push_back(s.t);
                tr.energy.push_back(sys.energy(s));
            }
        }
        take_snapshots();
    }
    tr.final = std::move(s);
    return tr;
}

Trajectory rk4_advance(const Semidiscretization& sd, State s, const TimeConfig& cfg) {
    return rk4_advance(sd, std::move(s), cfg, nominal_dt(cfg, sd));
}

}  // namespace dvw
