// SBP-SAT semidiscretization of the diffusive viscous wave equation.
//
// The ODE system is v_tt = G(v, v_t, t) with
//
//   G = f + D^(beta^2) v_t + D^(gamma^2) v - alpha v_t - F
//
// where F holds the boundary terms.  In 2D the operators act line by line:
// every grid line in x carries its own 1D operators built from the
// coefficient samples on that line, and likewise in y.
#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dvw/model.hpp"
#include "dvw/sbp.hpp"

namespace dvw {

// Penalty parameters for the two ends of one grid line.  `beta_*` multiply
// the v_t terms (tau_1, tau_2), `gamma_*` the v terms (tau_3, tau_4).
struct LinePenalty {
    double beta_left = 0.0, beta_right = 0.0;
    double gamma_left = 0.0, gamma_right = 0.0;
};

struct PenaltySet {
    double safety = 1.0;
    std::vector<LinePenalty> x_lines;  // one per y index (a single entry in 1D)
    std::vector<LinePenalty> y_lines;  // one per x index (empty in 1D)
};

class PenaltyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Penalties for one line from its beta and gamma samples.  With
// `viscous == false` the beta parameters are zero.
LinePenalty compute_line_penalties(const double* beta, const double* gamma, int n,
                                   std::ptrdiff_t stride, const SbpOperatorSet& set,
                                   double safety, SatVariant variant, bool viscous,
                                   PenaltyLimit limit = PenaltyLimit::borrowing);

PenaltySet compute_penalties(const SampledFields& fields, const Grid& grid,
                             const SbpOperatorSet& sx, const SbpOperatorSet* sy, double safety,
                             SatVariant variant, bool viscous,
                             PenaltyLimit limit = PenaltyLimit::borrowing);

struct State {
    std::vector<double> v, w;  // solution and its time derivative
    double t = 0.0;
};

// A second-order system v_tt = G(t, v, v_t) with an energy functional.
class SecondOrderSystem {
public:
    virtual ~SecondOrderSystem() = default;
    virtual int size() const = 0;
    virtual void accel(double t, std::span<const double> v, std::span<const double> w,
                       std::span<double> out) const = 0;
    virtual double energy(const State& s) const = 0;
};

class Semidiscretization : public SecondOrderSystem {
public:
    explicit Semidiscretization(const Problem& problem);

    int size() const override { return size_; }
    int dim() const { return grid_dim(grid_); }
    const Grid& grid() const { return grid_; }
    const SampledFields& fields() const { return fields_; }
    const SbpOperatorSet& set_x() const { return *sx_; }
    const SbpOperatorSet& set_y() const { return *sy_; }
    const PenaltySet& penalties() const { return penalties_; }
    bool viscous() const { return viscous_; }
    BcKind bc_kind() const { return bc_; }
    SatVariant variant() const { return variant_; }
    bool has_forcing() const { return static_cast<bool>(forcing_); }
    bool homogeneous_bc() const { return faces_.empty(); }

    // Norm weight of node k (product of the 1D weights in 2D).
    double H(int k) const { return hweight_[k]; }

    // Forcing sampled at time t; zeros when the problem has none.
    void forcing(double t, std::span<double> f) const;

    // G for the given state with a pre-sampled forcing vector (empty span
    // means zero forcing).  Boundary data are evaluated at s.t.
    void rhs_apply(const State& s, std::span<const double> f, std::span<double> out) const;

    // G with forcing and boundary data sampled at time t.
    void accel(double t, std::span<const double> v, std::span<const double> w,
               std::span<double> out) const override;

    // Discrete energy.  Boundary data do not enter.
    double energy(const State& s) const override;

    // Initial state from the problem's initial data at t = 0.
    State initial_state() const;

private:
    struct Line {
        int offset = 0;
        std::ptrdiff_t stride = 1;
        const SbpOperatorSet* set = nullptr;
        std::optional<SecondDerivOp> beta_op;
        std::optional<SecondDerivOp> gamma_op;
        LinePenalty tau;
        double weight = 1.0;  // norm weight in the other direction
        int face_index = 0;   // index into the boundary data of this direction
    };

    // Boundary data for one face: node values of (data, d/dt data).
    struct Face {
        std::unique_ptr<PointSampler> sampler;
    };

    void add_line(std::vector<Line>& lines, int offset, std::ptrdiff_t stride,
                  const SbpOperatorSet& set, const LinePenalty& tau, double weight,
                  int face_index, const std::vector<double>& beta2,
                  const std::vector<double>& gamma2);
    void apply_lines(const std::vector<Line>& lines, int dir, double t, const double* v,
                     const double* w, double* out) const;
    double line_energy(const Line& L, const double* v) const;
    void build_faces(const Problem& p);

    Grid grid_;
    int size_ = 0;
    SampledFields fields_;
    std::shared_ptr<const SbpOperatorSet> sx_, sy_;
    PenaltySet penalties_;
    bool viscous_ = true;
    BcKind bc_ = BcKind::dirichlet;
    SatVariant variant_ = SatVariant::standard;
    std::vector<double> hweight_;
    std::vector<Line> xlines_, ylines_;
    // faces_[2*dir + side]; empty when the data are homogeneous.
    std::vector<Face> faces_;
    std::unique_ptr<PointSampler> forcing_;
    std::unique_ptr<PointSampler> initial_;
};

}  // namespace dvw
