#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "sbp/fields.hpp"

namespace sbp {

struct BPParams {
    double a = 1.0;
    double eps = 0.1;

    BPParams() = default;
    BPParams(double a_, double eps_);
    // sup of the rescaled kernel, attained at the origin
    double kernel_sup() const { return 1.0 / a; }
};

// (1 - exp(-r/a)) / r with the Taylor branch near 0.
double kappa(double rdist, double a);
// kappa(eps r) = kappa(r, a/eps) / eps
double kappa_eps(double rdist, const BPParams& params);
// Continuum multiplier (4 pi/eps) / (k^2 (1 + (a/eps)^2 k^2)).
double kappa_multiplier(double k, const BPParams& params);

// Free-space convolution with kappa_eps by a zero-padded transform on (2n)^3.
// With coarsen = 2 the source is spectrally truncated to an (n/2)^3 grid, convolved there
// and prolonged back by zero extension of its spectrum.
class BPSolver {
public:
    BPSolver(const UniformGrid& grid, const BPParams& params, int coarsen = 1);
    ~BPSolver();
    BPSolver(const BPSolver&) = delete;
    BPSolver& operator=(const BPSolver&) = delete;

    const UniformGrid& grid() const { return grid_; }
    const BPParams& params() const { return params_; }
    int coarsen() const { return coarsen_; }

    void convolve(const double* source, double* out);
    ScalarField3D potential(const ScalarField3D& source);
    // phi of the product a*b
    ScalarField3D potential_of_product(const ScalarField3D& a, const ScalarField3D& b);
    // transform of the sampled kernel, indexed like the padded r2c layout
    const std::vector<double>& kernel_spectrum() const { return khat_; }
    int padded_n() const { return m_; }

private:
    void convolve_coarse(const double* source, double* out);

    UniformGrid grid_;
    BPParams params_;
    int coarsen_ = 1;
    std::unique_ptr<BPSolver> inner_;
    int m_ = 0;
    std::size_t nc_ = 0;
    std::vector<double> khat_;
    double* rbuf_ = nullptr;
    std::complex<double>* cbuf_ = nullptr;
    void* plan_f_ = nullptr;
    void* plan_b_ = nullptr;
};

// Per-thread cached solver for this grid and parameter pair.
BPSolver& bp_solver_for(const UniformGrid& grid, const BPParams& params, int coarsen = 1);

ScalarField3D solve_potential_spectral(const ScalarField3D& source, const BPParams& params);
ScalarField3D solve_potential_direct(const ScalarField3D& source, const BPParams& params);
double quad_form(const ScalarField3D& u1, const ScalarField3D& u2, const ScalarField3D& u3,
                 const ScalarField3D& u4, const BPParams& params);

}  // namespace sbp
