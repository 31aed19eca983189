#pragma once

#include <memory>

#include "sbp/ansatz.hpp"
#include "sbp/bpfield.hpp"
#include "sbp/fields.hpp"
#include "sbp/groundstate.hpp"
#include "sbp/potential.hpp"

namespace sbp {

class EnergyContext {
public:
    EnergyContext(const ReductionParams& params, const PotentialSpec& pot, const UniformGrid& grid,
                  std::shared_ptr<const RadialProfile> profile);

    const ReductionParams& params() const { return params_; }
    const PotentialSpec& potential() const { return pot_; }
    const UniformGrid& grid() const { return grid_; }
    const ScalarField3D& v_eps() const { return v_eps_; }
    const ScalarField3D& v_minus_one() const { return v_m1_; }
    const RadialProfile& profile() const { return *profile_; }
    std::shared_ptr<const RadialProfile> profile_ptr() const { return profile_; }
    BPParams bp() const { return BPParams(params_.a, params_.eps); }
    BPSolver& bp_solver() const;
    // eps^3 times the coupling switch
    double coupling() const;
    // phi_{eps, f g}
    ScalarField3D potential_of(const ScalarField3D& f, const ScalarField3D& g) const;

private:
    ReductionParams params_;
    PotentialSpec pot_;
    UniformGrid grid_;
    std::shared_ptr<const RadialProfile> profile_;
    ScalarField3D v_eps_;
    ScalarField3D v_m1_;
};

struct EnergyParts {
    double quadratic = 0.0;  // 1/2 <u, u>_{H1_eps}
    double bp = 0.0;         // eps^3/4 Q(u,u,u,u), coupling applied
    double nonlinear = 0.0;  // 1/(p+1) int |u|^{p+1}
    double total() const { return quadratic + bp - nonlinear; }
};

EnergyParts energy_parts(const EnergyContext& ctx, const ScalarField3D& u);
// same, reusing phi_{u^2} when the caller already has it
EnergyParts energy_parts(const EnergyContext& ctx, const ScalarField3D& u, const ScalarField3D* phi_u2);
double energy(const EnergyContext& ctx, const ScalarField3D& u);

// Riesz representative g and its dual (-Laplacian + 1) g, which is the L2 residual.
struct Gradient {
    ScalarField3D g;
    ScalarField3D dual;
    double norm_h1() const;
};

// phi_out receives phi_{u^2} when the BP coupling is on
Gradient gradient_with_dual(const EnergyContext& ctx, const ScalarField3D& u, ScalarField3D* phi_out = nullptr);
ScalarField3D gradient(const EnergyContext& ctx, const ScalarField3D& u);
ScalarField3D hessian_apply(const EnergyContext& ctx, const ScalarField3D& u, const ScalarField3D& w);

// Hessian at a fixed u with the u-dependent pieces cached.
class HessianOperator {
public:
    HessianOperator(const EnergyContext& ctx, const ScalarField3D& u);
    // dual of H w given w and its dual (-Laplacian + 1) w
    ScalarField3D apply_dual(const ScalarField3D& w, const ScalarField3D& w_dual) const;
    ScalarField3D apply(const ScalarField3D& w) const;

private:
    const EnergyContext& ctx_;
    ScalarField3D u_;
    ScalarField3D mass_;  // V - 1 + c phi_{u^2} - p |u|^{p-1}
};

}  // namespace sbp
