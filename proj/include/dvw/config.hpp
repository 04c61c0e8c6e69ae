// Run configuration files.
//
//   # comment
//   [materials]
//   gamma = "0.1"
//   [study]
//   resolutions = 41, 81, 161
//
// Expressions and other text values are double-quoted; numbers and
// comma-separated number lists are bare.  Unknown sections and keys are
// rejected.
#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvw/mms.hpp"
#include "dvw/model.hpp"
#include "dvw/timeint.hpp"

namespace dvw {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // [domain]
    int dim = 1;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    int n = 0;

    // [materials]
    std::string alpha = "0", beta = "0", gamma;

    // [bc]
    BcKind bc = BcKind::dirichlet;
    std::string bc_data;  // empty: homogeneous

    // [time]
    double T = 0.0;
    DtRule rule = DtRule::automatic;
    double c_visc = 0.1, c_hyp = 0.1, dt = 0.0, dt_max = 0.0;  // dt_max 0: no cap
    std::vector<double> snapshots;
    bool record_energy = true;

    // [discretization]
    int order = 4;
    SatVariant variant = SatVariant::standard;
    double penalty_safety = 2.0;
    PenaltyLimit penalty_limit = PenaltyLimit::borrowing;

    // [study]
    std::string exact_solution, forcing, initial_value, initial_rate;
    std::vector<int> resolutions;
    int reference_n = 0;
    std::vector<std::complex<double>> s_values;
    std::vector<double> h_values, multipliers;

    // [output]
    std::string dir = ".";
    std::string prefix = "run";

    // Keys present in the source file, as "section.key".
    std::vector<std::string> present;
    bool has(const std::string& section_key) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize(const RunConfig& c);
// The resolved configuration on one line, for CSV header comments.
std::string config_summary(const RunConfig& c);

std::complex<double> parse_complex(const std::string& s);
std::string format_complex(std::complex<double> z);

// Throws ConfigError naming "[section] key" when a required key is missing.
void require(const RunConfig& c, const std::string& section, const std::string& key);

Problem build_problem(const RunConfig& c, int n);
TimeConfig build_time(const RunConfig& c);
ManufacturedCase build_case(const RunConfig& c);

}  // namespace dvw
