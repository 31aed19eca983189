#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sbp/ansatz.hpp"
#include "sbp/potential.hpp"

namespace sbp {

enum class Command { GroundState, FieldCheck, AnsatzCheck, Landscape, Solve, VerifyTheorem, Sweep };

const char* command_name(Command c);

struct RunConfig {
    Command command = Command::Solve;
    ReductionParams params;
    std::string potential = "radial";  // radial, anisotropic, flat
    PotentialSpec pot;
    std::vector<double> hess_diag;  // overrides the kind's matrix when set
    double cap_floor = 1.0;
    double potential_scale = 0.0;  // > 0 replaces the norm-bound scale c
    int K = 2;
    std::vector<double> eps_list{0.1, 0.07, 0.05, 0.035, 0.025};

    // grid: explicit (L, n) or chosen per eps from h_max
    double grid_L = 0.0;
    int grid_n = 0;
    double h_max = 0.45;
    int n_min = 64;
    int n_max = 160;

    // geometry for solve/landscape/sweep; r <= 0 picks the path radius
    double theta = 0.0;
    double phi = 1.5707963267948966;
    double r = 0.0;
    std::string path = "geometric";  // geometric: sqrt(r_lo r_hi); reference: eps^{-(alpha-lambda)/(alpha+1)}
    int landscape_points = 9;
    int scan_points = 9;
    double rel_tol = 1e-4;

    double profile_rmax = 25.0;
    double profile_tol = 1e-10;
    double profile_h = 1e-2;

    int field_checks = 10;
    std::string output_dir = "out";
    int workers = 1;
    std::uint64_t seed = 1;

    // raw key/value pairs in file order, for the manifest
    std::vector<std::pair<std::string, std::string>> echo;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);
// Applies one key = value override and revalidates.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
void finalize_config(RunConfig& cfg);

}  // namespace sbp
