#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sbp/fields.hpp"
#include "sbp/groundstate.hpp"
#include "sbp/potential.hpp"

namespace sbp {

struct PeakConfig {
    double r = 1.0;
    double theta = 0.0;
    double phi = 1.5707963267948966;
    int K = 2;

    PeakConfig() = default;
    PeakConfig(double r_, double theta_, double phi_, int K_);
};

struct GeneralConfig {
    std::vector<Eigen::Vector3d> centers;

    GeneralConfig() = default;
    explicit GeneralConfig(std::vector<Eigen::Vector3d> c);
    static GeneralConfig from(const PeakConfig& cfg);
};

struct SolverTolerances {
    double tol_aux = -1.0;     // <= 0 means 1e-2 eps^2
    double tol_krylov = -1.0;  // <= 0 means 1e-3 eps^2
    int max_outer = 30;
    int max_krylov = 200;
    int restarts = 2;
};

struct ReductionParams {
    double eps = 0.1;
    double a = 1.0;
    double p = 3.0;
    double alpha = 6.0;
    double lambda = 3.6;
    double beta = 1.2 / 7.0;
    SolverTolerances tolerances;
    // multiplies the eps^3 term; 0 switches the BP coupling off
    double bp_coupling = 1.0;
    // 2 runs the BP convolution on the half-resolution grid
    int bp_coarsen = 1;

    // lambda/beta <= 0 are filled by choose_exponents
    static ReductionParams make(double eps, double a, double p, double alpha, double lambda = 0.0,
                                double beta = 0.0);
    void validate() const;
    double tol_aux() const { return tolerances.tol_aux > 0 ? tolerances.tol_aux : 1e-2 * eps * eps; }
    double tol_krylov() const { return tolerances.tol_krylov > 0 ? tolerances.tol_krylov : 1e-3 * eps * eps; }
    // eps^{-(alpha - lambda)/(alpha + 1)}, always inside the admissible set
    double reference_radius() const;
};

std::vector<Eigen::Vector3d> peak_positions(const PeakConfig& cfg);
// P(r, theta, phi) and its partial derivatives
Eigen::Vector3d sphere_point(double r, double theta, double phi);
Eigen::Vector3d sphere_dtheta(double r, double theta, double phi);
Eigen::Vector3d sphere_dphi(double r, double theta, double phi);

double chord(int K, int j, int k);
// vector d_{j,k} between unit K-gon vertices (theta = 0, phi = 0 frame)
Eigen::Vector3d chord_vector(int K, int j, int k);

std::pair<double, double> choose_exponents(double alpha);
std::optional<std::pair<double, double>> admissible_interval(const ReductionParams& params, const PotentialSpec& pot);
// max over |x| = 1 of V(eps r x): 26 directions plus local refinement
double max_on_sphere(const PotentialSpec& pot, double eps, double r);

// Throws GridTooSmall unless L >= radius + 12/eta.
void check_grid_margin(const UniformGrid& grid, double radius, double eta);
double peak_radius(const std::vector<Eigen::Vector3d>& centers);
double min_separation(const std::vector<Eigen::Vector3d>& centers);

ScalarField3D build_W(const PeakConfig& cfg, const RadialProfile& profile, const UniformGrid& grid);
ScalarField3D build_sum(const std::vector<Eigen::Vector3d>& centers, const RadialProfile& profile,
                        const UniformGrid& grid);
ScalarField3D build_peak(const Eigen::Vector3d& center, const RadialProfile& profile, const UniformGrid& grid);

// rad, azi, pol
std::array<ScalarField3D, 3> tangent_basis(const PeakConfig& cfg, const RadialProfile& profile,
                                           const UniformGrid& grid);
// -d_i U(x - zeta_j) for every center j and axis i, ordered j-major
std::vector<ScalarField3D> translation_basis(const std::vector<Eigen::Vector3d>& centers,
                                             const RadialProfile& profile, const UniformGrid& grid);

// Tangent fields with their (-Laplacian + 1) images and the H1 Gram matrix.
class TangentSpace {
public:
    explicit TangentSpace(std::vector<ScalarField3D> fields);

    std::size_t dim() const { return fields_.size(); }
    const std::vector<ScalarField3D>& fields() const { return fields_; }
    const std::vector<ScalarField3D>& duals() const { return duals_; }
    const Eigen::MatrixXd& gram() const { return gram_; }

    // <f, T_d>_H1 for every d
    Eigen::VectorXd pairings(const ScalarField3D& f) const;
    // solves G c = pairings(f)
    Eigen::VectorXd coefficients(const ScalarField3D& f) const;
    ScalarField3D project_normal(const ScalarField3D& f) const;
    // projects f in place; when f_dual is given it is updated consistently
    void project_inplace(ScalarField3D& f, ScalarField3D* f_dual = nullptr) const;

private:
    std::vector<ScalarField3D> fields_;
    std::vector<ScalarField3D> duals_;
    Eigen::MatrixXd gram_;
    Eigen::LDLT<Eigen::MatrixXd> solver_;
};

Eigen::Matrix3d gram_matrix(const PeakConfig& cfg, const RadialProfile& profile, const UniformGrid& grid);
double overlap(const PeakConfig& cfg, const RadialProfile& profile, const UniformGrid& grid, int j, int k);
ScalarField3D potential_field(const PotentialSpec& pot, double eps, const UniformGrid& grid);

}  // namespace sbp
