#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sbp/config.hpp"

namespace sbp {

// One line of the results table.
struct ResultRow {
    double eps = 0.0;
    int K = 2;
    double p = 0.0, a = 0.0, alpha = 0.0, lambda = 0.0, beta = 0.0;
    double r_star = 0.0, theta_star = 0.0, phi_star = 0.0;
    double phi_eps = 0.0;
    double formula = 0.0;
    double error = 0.0;
    double n_norm = 0.0;
    double grad_norm = 0.0;
    double c_rad = 0.0, c_azi = 0.0, c_pol = 0.0;
    int boundary_flag = 0;
    int grid_n = 0;
    double grid_L = 0.0;
    double seconds = 0.0;
};

const std::string& csv_header();
std::string format_row(const ResultRow& row);
// Parses a results file written by run(); throws ParseError on a malformed line.
std::vector<ResultRow> read_results(const std::string& path);

// Exit codes of run().
enum ExitCode : int { Ok = 0, InternalError = 1, NotConverged = 2, NoAdmissible = 3 };

// Executes the configured workflow, writing into cfg.output_dir. Progress goes to log.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace sbp
