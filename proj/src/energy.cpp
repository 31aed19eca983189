#include "sbp/energy.hpp"

#include <cmath>

#include "sbp/errors.hpp"
#include "sbp/kernels.hpp"

namespace sbp {

EnergyContext::EnergyContext(const ReductionParams& params, const PotentialSpec& pot, const UniformGrid& grid,
                             std::shared_ptr<const RadialProfile> profile)
    : params_(params), pot_(pot), grid_(grid), profile_(std::move(profile)) {
    params_.validate();
    if (!profile_) throw InvalidArgument("energy context needs a profile");
    if (profile_->p != params_.p) throw InvalidArgument("profile exponent differs from params.p");
    v_eps_ = potential_field(pot_, params_.eps, grid_);
    v_m1_ = v_eps_;
    for (std::size_t i = 0; i < v_m1_.size(); ++i) v_m1_[i] -= 1.0;
}

double EnergyContext::coupling() const {
    double e = params_.eps;
    return params_.bp_coupling * e * e * e;
}

BPSolver& EnergyContext::bp_solver() const { return bp_solver_for(grid_, bp(), params_.bp_coarsen); }

ScalarField3D EnergyContext::potential_of(const ScalarField3D& f, const ScalarField3D& g) const {
    return bp_solver().potential(product(f, g));
}

namespace {

void check_input(const EnergyContext& ctx, const ScalarField3D& u) {
    if (u.grid() != ctx.grid()) throw GridMismatch("field grid differs from the energy context grid");
}

}  // namespace

EnergyParts energy_parts(const EnergyContext& ctx, const ScalarField3D& u) { return energy_parts(ctx, u, nullptr); }

EnergyParts energy_parts(const EnergyContext& ctx, const ScalarField3D& u, const ScalarField3D* phi_u2) {
    check_input(ctx, u);
    EnergyParts e;
    e.quadratic = 0.5 * inner_h1(u, u, &ctx.v_eps());
    const double c = ctx.coupling();
    if (c != 0.0) {
        ScalarField3D u2 = product(u, u);
        if (phi_u2) {
            e.bp = 0.25 * c * integrate_product(*phi_u2, u2);
        } else {
            ScalarField3D phi = ctx.bp_solver().potential(u2);
            e.bp = 0.25 * c * integrate_product(phi, u2);
        }
    }
    const double p = ctx.params().p;
    ScalarField3D up(u.grid());
    kernels::abs_pow(u.data(), p + 1.0, up.data(), u.size());
    e.nonlinear = integrate(up) / (p + 1.0);
    return e;
}

double energy(const EnergyContext& ctx, const ScalarField3D& u) { return energy_parts(ctx, u).total(); }

double Gradient::norm_h1() const { return std::sqrt(std::max(0.0, integrate_product(g, dual))); }

Gradient gradient_with_dual(const EnergyContext& ctx, const ScalarField3D& u, ScalarField3D* phi_out) {
    check_input(ctx, u);
    const std::size_t N = u.size();
    // residual = (-Lap + 1) u + (V - 1) u + c phi_{u^2} u - sign(u)|u|^p
    ScalarField3D res = h1_dual(u);
    ScalarField3D t = product(ctx.v_minus_one(), u);
    res += t;
    const double c = ctx.coupling();
    if (c != 0.0) {
        ScalarField3D phi = ctx.potential_of(u, u);
        kernels::mul(phi.data(), u.data(), t.data(), N);
        kernels::axpy(c, t.data(), res.data(), N);
        if (phi_out) *phi_out = std::move(phi);
    }
    kernels::signed_pow(u.data(), ctx.params().p, t.data(), N);
    res -= t;
    Gradient out;
    out.g = riesz(res);
    out.dual = std::move(res);
    return out;
}

ScalarField3D gradient(const EnergyContext& ctx, const ScalarField3D& u) { return gradient_with_dual(ctx, u).g; }

HessianOperator::HessianOperator(const EnergyContext& ctx, const ScalarField3D& u) : ctx_(ctx), u_(u) {
    check_input(ctx, u);
    const std::size_t N = u.size();
    const double p = ctx.params().p;
    mass_ = ctx.v_minus_one();
    ScalarField3D t(u.grid());
    kernels::abs_pow(u.data(), p - 1.0, t.data(), N);
    kernels::axpy(-p, t.data(), mass_.data(), N);
    const double c = ctx.coupling();
    if (c != 0.0) {
        ScalarField3D phi = ctx.potential_of(u, u);
        kernels::axpy(c, phi.data(), mass_.data(), N);
    }
}

ScalarField3D HessianOperator::apply_dual(const ScalarField3D& w, const ScalarField3D& w_dual) const {
    check_input(ctx_, w);
    const std::size_t N = w.size();
    ScalarField3D out = w_dual;
    ScalarField3D t = product(mass_, w);
    out += t;
    const double c = ctx_.coupling();
    if (c != 0.0) {
        ScalarField3D phi = ctx_.potential_of(u_, w);
        kernels::mul(phi.data(), u_.data(), t.data(), N);
        kernels::axpy(2.0 * c, t.data(), out.data(), N);
    }
    return out;
}

ScalarField3D HessianOperator::apply(const ScalarField3D& w) const { return riesz(apply_dual(w, h1_dual(w))); }

ScalarField3D hessian_apply(const EnergyContext& ctx, const ScalarField3D& u, const ScalarField3D& w) {
    return HessianOperator(ctx, u).apply(w);
}

}  // namespace sbp
