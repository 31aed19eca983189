#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sbp/ansatz.hpp"
#include "sbp/energy.hpp"
#include "sbp/fields.hpp"

namespace sbp {

struct AuxiliaryOptions {
    const ScalarField3D* initial = nullptr;  // warm start, projected onto N first
    // give up once the residual ratio exceeds this after the first iteration
    double divergence_ratio = 0.95;
};

struct AuxiliarySolution {
    ScalarField3D n;
    double n_norm = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    int krylov_iterations = 0;
    std::array<double, 3> multipliers{0.0, 0.0, 0.0};  // rad, azi, pol (first three coefficients)
    Eigen::VectorXd coefficients;                      // all tangent coefficients of the full gradient
    Eigen::MatrixXd gram;
    double full_gradient_norm = 0.0;  // unprojected, at W + n
    double energy = 0.0;              // I_eps(W + n)
    double orthogonality = 0.0;       // max_d |<n, T_d>| / (|n| |T_d|)
    std::vector<double> residual_history;
    std::vector<double> step_norms;
};

ScalarField3D project_normal(const ScalarField3D& f, const PeakConfig& cfg, const EnergyContext& ctx);

AuxiliarySolution solve_auxiliary(const PeakConfig& cfg, const EnergyContext& ctx, const AuxiliaryOptions& opt = {});
// Same iteration with an arbitrary tangent space around the ansatz W.
AuxiliarySolution solve_auxiliary_in(const ScalarField3D& W, const TangentSpace& tangent, const EnergyContext& ctx,
                                     const AuxiliaryOptions& opt = {});

double pseudo_critical_residual(const PeakConfig& cfg, const EnergyContext& ctx);

struct ReducedEvaluation {
    double phi = 0.0;
    double energy_W = 0.0;
    AuxiliarySolution aux;
};

ReducedEvaluation evaluate_reduced(const PeakConfig& cfg, const EnergyContext& ctx, const AuxiliaryOptions& opt = {},
                                   bool with_ansatz_energy = true);
double reduced_energy(const PeakConfig& cfg, const EnergyContext& ctx);

double asymptotic_formula(const PeakConfig& cfg, const EnergyContext& ctx);
double asymptotic_formula(const PeakConfig& cfg, const ReductionParams& params, const PotentialSpec& pot,
                          const GroundStateConstants& gc);

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Box for a peak radius: L = radius + 12/eta + pad, n points.
UniformGrid grid_for_radius(double radius, double eta, int n, double pad = 0.5);

struct ExpansionRow {
    double eps = 0.0;
    double r = 0.0;
    double direct = 0.0;
    double formula = 0.0;
    double error = 0.0;
    double n_norm = 0.0;
    double grad_norm = 0.0;  // pseudo-critical residual at W
    double orthogonality = 0.0;
    UniformGrid grid;
};

struct ExpansionReport {
    std::vector<ExpansionRow> rows;
    double mu_slope = 0.0;
};

struct ExpansionOptions {
    int K = 2;
    double theta = 0.0;
    double phi = 1.5707963267948966;
    int grid_n = 0;  // 0 picks fft_friendly_n(L, h_max, n_min)
    double h_max = 0.42;
    int n_min = 96;
    // radius on the path; default sqrt(r_lo r_hi)
    std::function<double(double eps, double r_lo, double r_hi)> radius;
};

ExpansionReport expansion_report(const ReductionParams& params, const PotentialSpec& pot,
                                 const std::vector<double>& eps_list, std::shared_ptr<const RadialProfile> profile,
                                 const ExpansionOptions& opt = {});

struct MinimizeOptions {
    int K = 2;
    double theta = 0.0;
    double phi = 1.5707963267948966;
    double rel_tol = 1e-4;
    int scan_points = 9;
    int coarse_points = 8;  // per axis, anisotropic search
    int descent_sweeps = 3;
    double phi_min = 3.14159265358979323846 / 6.0;
    double phi_max = 5.0 * 3.14159265358979323846 / 6.0;
};

struct MinimizerResult {
    PeakConfig cfg;
    double phi_value = 0.0;
    bool boundary = false;
    double r_lo = 0.0;
    double r_hi = 0.0;
    int evaluations = 0;
    int failed = 0;
    AuxiliarySolution aux;
    std::vector<std::pair<double, double>> scan;  // (r, Phi) of the converged scan points
};

MinimizerResult minimize_reduced(const EnergyContext& ctx, const MinimizeOptions& opt = {});

struct VerifyReport {
    double full_gradient_norm = 0.0;
    std::array<double, 3> multipliers{0.0, 0.0, 0.0};
    std::array<double, 3> thresholds{0.0, 0.0, 0.0};
    double gradient_threshold = 0.0;
    double n_norm = 0.0;
    bool pass = false;
};

VerifyReport verify_solution(const PeakConfig& cfg, const EnergyContext& ctx, const AuxiliarySolution* aux = nullptr);

struct GeneralEvaluation {
    double energy = 0.0;
    double energy_W = 0.0;
    AuxiliarySolution aux;
};

GeneralEvaluation general_config_energy(const GeneralConfig& gc, const EnergyContext& ctx,
                                        const AuxiliaryOptions& opt = {});

// eps^3/2 Q(U_j, U_j, U_k, U_k): BP interaction of two bare peaks on the grid
double bp_pair_energy(const Eigen::Vector3d& zj, const Eigen::Vector3d& zk, const EnergyContext& ctx);
// The same pair term with the kernel 1/(eps |x|), from the radial potential of U^2.
double coulomb_pair_energy(const Eigen::Vector3d& zj, const Eigen::Vector3d& zk, const EnergyContext& ctx);
// 4 pi [ (1/s) int_0^s U^2 t^2 dt + int_s^inf U^2 t dt ]
std::vector<double> coulomb_radial_potential(const RadialProfile& profile);

}  // namespace sbp
