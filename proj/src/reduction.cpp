#include "sbp/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "sbp/bpfield.hpp"
#include "sbp/errors.hpp"
#include "sbp/kernels.hpp"
#include "sbp/krylov.hpp"

namespace sbp {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<ScalarField3D> as_vector(std::array<ScalarField3D, 3>&& a) {
    std::vector<ScalarField3D> v;
    for (auto& f : a) v.push_back(std::move(f));
    return v;
}

TangentSpace tangent_space(const PeakConfig& cfg, const EnergyContext& ctx) {
    return TangentSpace(as_vector(tangent_basis(cfg, ctx.profile(), ctx.grid())));
}

void require_margin(const std::vector<Eigen::Vector3d>& centers, const EnergyContext& ctx) {
    check_grid_margin(ctx.grid(), peak_radius(centers), ctx.profile().eta_fit);
}

double orthogonality_of(const ScalarField3D& n, double n_norm, const TangentSpace& T) {
    if (n_norm == 0.0) return 0.0;
    Eigen::VectorXd pr = T.pairings(n);
    double worst = 0.0;
    for (Eigen::Index d = 0; d < pr.size(); ++d)
        worst = std::max(worst, std::fabs(pr(d)) / (n_norm * std::sqrt(T.gram()(d, d))));
    return worst;
}

}  // namespace

ScalarField3D project_normal(const ScalarField3D& f, const PeakConfig& cfg, const EnergyContext& ctx) {
    return tangent_space(cfg, ctx).project_normal(f);
}

AuxiliarySolution solve_auxiliary_in(const ScalarField3D& W, const TangentSpace& T, const EnergyContext& ctx,
                                     const AuxiliaryOptions& opt) {
    const ReductionParams& rp = ctx.params();
    const double tol = rp.tol_aux();
    const double ktol = rp.tol_krylov();
    const SolverTolerances& st = rp.tolerances;

    HessianOperator H(ctx, W);
    DualOperator L = [&](const DualPair& v) {
        DualPair out;
        out.b = H.apply_dual(v.v, v.b);
        out.v = riesz(out.b);
        T.project_inplace(out.v, &out.b);
        return out;
    };

    AuxiliarySolution sol;
    sol.gram = T.gram();
    sol.n = ScalarField3D(W.grid());
    if (opt.initial) {
        require_same_grid(*opt.initial, W);
        sol.n = T.project_normal(*opt.initial);
    }

    for (int it = 0;; ++it) {
        ScalarField3D u = W + sol.n;
        ScalarField3D phi;
        Gradient g = gradient_with_dual(ctx, u, &phi);
        ScalarField3D r = g.g, rd = g.dual;
        T.project_inplace(r, &rd);
        double res = std::sqrt(std::max(0.0, integrate_product(r, rd)));
        if (!std::isfinite(res)) throw NoConvergence("auxiliary residual is not finite", it, res);
        sol.residual_history.push_back(res);
        sol.residual_norm = res;
        sol.iterations = it;
        if (res < tol) {
            sol.full_gradient_norm = g.norm_h1();
            sol.coefficients = T.coefficients(g.g);
            for (int d = 0; d < 3 && d < sol.coefficients.size(); ++d) sol.multipliers[d] = sol.coefficients(d);
            sol.n_norm = norm_h1(sol.n);
            sol.orthogonality = orthogonality_of(sol.n, sol.n_norm, T);
            sol.energy = energy_parts(ctx, u, phi.size() ? &phi : nullptr).total();
            return sol;
        }
        if (it >= st.max_outer) throw NoConvergence("auxiliary iteration limit reached", it, res);
        if (it >= 2 && res > opt.divergence_ratio * sol.residual_history[it - 1])
            throw NoConvergence("auxiliary iteration is not contracting", it, res);

        KrylovResult kr = minres_h1(L, DualPair{std::move(r), std::move(rd)}, ktol, st.max_krylov, st.restarts);
        sol.krylov_iterations += kr.iterations;
        sol.step_norms.push_back(norm_h1(kr.x));
        sol.n -= kr.x;
        T.project_inplace(sol.n);
        if (!sol.n.all_finite()) throw NoConvergence("auxiliary iterate is not finite", it, res);
    }
}

AuxiliarySolution solve_auxiliary(const PeakConfig& cfg, const EnergyContext& ctx, const AuxiliaryOptions& opt) {
    require_margin(peak_positions(cfg), ctx);
    ScalarField3D W = build_W(cfg, ctx.profile(), ctx.grid());
    return solve_auxiliary_in(W, tangent_space(cfg, ctx), ctx, opt);
}

double pseudo_critical_residual(const PeakConfig& cfg, const EnergyContext& ctx) {
    require_margin(peak_positions(cfg), ctx);
    ScalarField3D W = build_W(cfg, ctx.profile(), ctx.grid());
    return gradient_with_dual(ctx, W).norm_h1();
}

ReducedEvaluation evaluate_reduced(const PeakConfig& cfg, const EnergyContext& ctx, const AuxiliaryOptions& opt,
                                   bool with_ansatz_energy) {
    require_margin(peak_positions(cfg), ctx);
    ScalarField3D W = build_W(cfg, ctx.profile(), ctx.grid());
    ReducedEvaluation ev;
    if (with_ansatz_energy) ev.energy_W = energy(ctx, W);
    ev.aux = solve_auxiliary_in(W, tangent_space(cfg, ctx), ctx, opt);
    ev.phi = ev.aux.energy;
    return ev;
}

double reduced_energy(const PeakConfig& cfg, const EnergyContext& ctx) { return evaluate_reduced(cfg, ctx).phi; }

double asymptotic_formula(const PeakConfig& cfg, const ReductionParams& rp, const PotentialSpec& pot,
                          const GroundStateConstants& gc) {
    const auto P = peak_positions(cfg);
    const int K = cfg.K;
    double vsum = 0.0;
    for (const auto& x : P) vsum += pot.at_scaled(rp.eps, x);
    BPParams bp(rp.a, rp.eps);
    double pair = 0.0;
    for (int j = 0; j < K; ++j)
        for (int k = j + 1; k < K; ++k) pair += kappa_eps(cfg.r * chord(K, j + 1, k + 1), bp);
    double e3 = rp.eps * rp.eps * rp.eps;
    double bp_term = gc.c1 * gc.c1 * e3 * (K * kappa_eps(0.0, bp) + 2.0 * pair);
    return K * gc.c0 + gc.c1 * vsum + rp.bp_coupling * bp_term;
}

double asymptotic_formula(const PeakConfig& cfg, const EnergyContext& ctx) {
    return asymptotic_formula(cfg, ctx.params(), ctx.potential(), constants(ctx.profile(), cfg.K));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs two or more matching points");
    const std::size_t m = x.size();
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd b(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("slope fit needs positive data");
        A(i, 0) = std::log(x[i]);
        A(i, 1) = 1.0;
        b(i) = std::log(y[i]);
    }
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    return c(0);
}

UniformGrid grid_for_radius(double radius, double eta, int n, double pad) {
    return UniformGrid(radius + 12.0 / eta + pad, n);
}

ExpansionReport expansion_report(const ReductionParams& params, const PotentialSpec& pot,
                                 const std::vector<double>& eps_list, std::shared_ptr<const RadialProfile> profile,
                                 const ExpansionOptions& opt) {
    ExpansionReport rep;
    std::vector<double> es, errs;
    const GroundStateConstants gc = constants(*profile, opt.K);
    for (double eps : eps_list) {
        ReductionParams rp = params;
        rp.eps = eps;
        auto iv = admissible_interval(rp, pot);
        if (!iv) throw EmptyAdmissible("admissible interval is empty");
        double r = opt.radius ? opt.radius(eps, iv->first, iv->second) : std::sqrt(iv->first * iv->second);
        double L = grid_for_radius(r, profile->eta_fit, 32).L;
        UniformGrid grid(L, opt.grid_n > 0 ? opt.grid_n : fft_friendly_n(L, opt.h_max, opt.n_min));
        EnergyContext ctx(rp, pot, grid, profile);
        PeakConfig cfg(r, opt.theta, opt.phi, opt.K);
        ExpansionRow row;
        row.eps = eps;
        row.r = r;
        row.grid = grid;
        row.grad_norm = pseudo_critical_residual(cfg, ctx);
        ReducedEvaluation ev = evaluate_reduced(cfg, ctx);
        row.direct = ev.phi;
        row.n_norm = ev.aux.n_norm;
        row.orthogonality = ev.aux.orthogonality;
        row.formula = asymptotic_formula(cfg, rp, pot, gc);
        row.error = std::fabs(row.direct - row.formula);
        rep.rows.push_back(row);
        es.push_back(eps);
        errs.push_back(row.error);
    }
    if (es.size() >= 2) rep.mu_slope = loglog_slope(es, errs) - 3.0;
    return rep;
}

namespace {

// Memoized reduced-energy evaluations with warm starts from the nearest stored corrections.
class Landscape {
public:
    Landscape(const EnergyContext& ctx, int K) : ctx_(ctx), K_(K) {}

    double operator()(double r, double theta, double phi) {
        Key key{r, theta, phi};
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        PeakConfig cfg(r, theta, phi, K_);
        AuxiliaryOptions opt;
        const Stored* warm = nearest(key);
        if (warm) opt.initial = &warm->n;
        double value = std::numeric_limits<double>::infinity();
        ++evaluations;
        try {
            ReducedEvaluation ev = evaluate_reduced(cfg, ctx_, opt, false);
            value = ev.phi;
            store(key, std::move(ev.aux));
        } catch (const NoConvergence&) {
            ++failed;
        }
        memo_[key] = value;
        return value;
    }

    const AuxiliarySolution* solution(double r, double theta, double phi) const {
        for (const auto& s : recent_)
            if (s.key == Key{r, theta, phi}) return &s.aux;
        return nullptr;
    }

    int evaluations = 0;
    int failed = 0;

private:
    using Key = std::array<double, 3>;
    struct Stored {
        Key key;
        ScalarField3D n;
        AuxiliarySolution aux;
    };

    const Stored* nearest(const Key& k) const {
        const Stored* best = nullptr;
        double bd = std::numeric_limits<double>::infinity();
        for (const auto& s : recent_) {
            double d = std::fabs(s.key[0] - k[0]) + K_ * (std::fabs(s.key[1] - k[1]) + std::fabs(s.key[2] - k[2])) * k[0];
            if (d < bd) {
                bd = d;
                best = &s;
            }
        }
        // corrections only help when the peaks have moved less than about a peak width
        return bd < 1.0 ? best : nullptr;
    }

    void store(const Key& k, AuxiliarySolution aux) {
        Stored s{k, aux.n, std::move(aux)};
        recent_.push_back(std::move(s));
        if (recent_.size() > 3) recent_.pop_front();
    }

    const EnergyContext& ctx_;
    int K_;
    std::map<Key, double> memo_;
    std::deque<Stored> recent_;
};

const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

// Golden section on [a, b]; returns the best abscissa seen.
template <class F>
double golden(F&& f, double a, double b, double tol) {
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

}  // namespace

MinimizerResult minimize_reduced(const EnergyContext& ctx, const MinimizeOptions& opt) {
    const ReductionParams& rp = ctx.params();
    auto iv = admissible_interval(rp, ctx.potential());
    if (!iv) throw EmptyAdmissible("admissible interval is empty");
    const double lo = iv->first, hi = iv->second;
    if (opt.scan_points < 3) throw InvalidArgument("scan needs at least three points");

    MinimizerResult res;
    res.r_lo = lo;
    res.r_hi = hi;
    Landscape land(ctx, opt.K);
    double r_best = lo, t_best = opt.theta, f_best = opt.phi;

    if (ctx.potential().is_radial()) {
        // Scan downward from r_hi and stop at the first bracketed minimum. Overlap attraction
        // makes the left end of the interval low at moderate eps, so a global scan would end there.
        const int m = opt.scan_points;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> rs(m), vs(m, inf);
        for (int i = 0; i < m; ++i) rs[i] = lo + (hi - lo) * i / (m - 1);
        int pick = -1;
        for (int i = m - 1; i >= 0 && pick < 0; --i) {
            vs[i] = land(rs[i], opt.theta, opt.phi);
            if (std::isfinite(vs[i])) res.scan.emplace_back(rs[i], vs[i]);
            int j = i + 1;
            if (j + 1 < m && std::isfinite(vs[i]) && std::isfinite(vs[j]) && std::isfinite(vs[j + 1]) &&
                vs[j] <= vs[i] && vs[j] <= vs[j + 1])
                pick = j;
        }
        if (pick < 0) {
            int arg = -1;
            for (int i = 0; i < m; ++i)
                if (std::isfinite(vs[i]) && (arg < 0 || vs[i] < vs[arg])) arg = i;
            if (arg < 0) throw NoConvergence("no scan point converged", land.evaluations, 0.0);
            r_best = rs[arg];
            res.boundary = true;
        } else {
            auto f = [&](double r) { return land(r, opt.theta, opt.phi); };
            r_best = golden(f, rs[pick - 1], rs[pick + 1], opt.rel_tol * rs[pick]);
            if (f(rs[pick]) < f(r_best)) r_best = rs[pick];
            res.boundary = (r_best - lo) < opt.rel_tol * lo || (hi - r_best) < opt.rel_tol * hi;
        }
    } else {
        const int m = opt.coarse_points;
        const double tspan = 2.0 * kPi;
        auto rv = [&](int i) { return lo + (hi - lo) * (i + 0.5) / m; };
        auto tv = [&](int i) { return tspan * i / m; };
        auto fv = [&](int i) { return opt.phi_min + (opt.phi_max - opt.phi_min) * (i + 0.5) / m; };
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    double v = land(rv(i), tv(j), fv(k));
                    if (v < best) {
                        best = v;
                        r_best = rv(i);
                        t_best = tv(j);
                        f_best = fv(k);
                    }
                }
        if (!std::isfinite(best)) throw NoConvergence("no coarse point converged", land.evaluations, 0.0);
        double hr = (hi - lo) / m, ht = tspan / m, hf = (opt.phi_max - opt.phi_min) / m;
        for (int sweep = 0; sweep < opt.descent_sweeps; ++sweep) {
            double r0 = r_best, t0 = t_best, f0 = f_best;
            r_best = golden([&](double r) { return land(r, t_best, f_best); }, std::max(lo, r_best - hr),
                            std::min(hi, r_best + hr), opt.rel_tol * r_best);
            t_best = golden([&](double t) { return land(r_best, t, f_best); }, t_best - ht, t_best + ht,
                            opt.rel_tol);
            f_best = golden([&](double f) { return land(r_best, t_best, f); }, std::max(opt.phi_min, f_best - hf),
                            std::min(opt.phi_max, f_best + hf), opt.rel_tol);
            if (std::fabs(r_best - r0) < opt.rel_tol * r0 && std::fabs(t_best - t0) < opt.rel_tol &&
                std::fabs(f_best - f0) < opt.rel_tol)
                break;
            hr *= 0.5;
            ht *= 0.5;
            hf *= 0.5;
        }
        res.boundary = (r_best - lo) < opt.rel_tol * lo || (hi - r_best) < opt.rel_tol * hi ||
                       f_best - opt.phi_min < opt.rel_tol || opt.phi_max - f_best < opt.rel_tol;
    }

    res.cfg = PeakConfig(r_best, t_best, f_best, opt.K);
    res.phi_value = land(r_best, t_best, f_best);
    if (!std::isfinite(res.phi_value)) throw NoConvergence("minimizer evaluation failed", land.evaluations, 0.0);
    const AuxiliarySolution* aux = land.solution(r_best, t_best, f_best);
    res.aux = aux ? *aux : solve_auxiliary(res.cfg, ctx);
    res.evaluations = land.evaluations;
    res.failed = land.failed;
    return res;
}

VerifyReport verify_solution(const PeakConfig& cfg, const EnergyContext& ctx, const AuxiliarySolution* aux) {
    AuxiliarySolution local;
    if (!aux) {
        local = solve_auxiliary(cfg, ctx);
        aux = &local;
    }
    const double tol = ctx.params().tol_aux();
    VerifyReport rep;
    rep.full_gradient_norm = aux->full_gradient_norm;
    rep.multipliers = aux->multipliers;
    rep.n_norm = aux->n_norm;
    rep.gradient_threshold = 10.0 * tol;
    bool ok = rep.full_gradient_norm <= rep.gradient_threshold;
    for (int d = 0; d < 3; ++d) {
        rep.thresholds[d] = 10.0 * tol / std::sqrt(aux->gram(d, d));
        ok = ok && std::fabs(rep.multipliers[d]) <= rep.thresholds[d];
    }
    rep.pass = ok;
    return rep;
}

GeneralEvaluation general_config_energy(const GeneralConfig& gc, const EnergyContext& ctx,
                                        const AuxiliaryOptions& opt) {
    require_margin(gc.centers, ctx);
    if (min_separation(gc.centers) < 4.0 * ctx.grid().spacing())
        throw PeaksUnresolved("peaks closer than four grid spacings");
    ScalarField3D W = build_sum(gc.centers, ctx.profile(), ctx.grid());
    TangentSpace T(translation_basis(gc.centers, ctx.profile(), ctx.grid()));
    GeneralEvaluation ev;
    ev.energy_W = energy(ctx, W);
    ev.aux = solve_auxiliary_in(W, T, ctx, opt);
    ev.energy = ev.aux.energy;
    return ev;
}

double bp_pair_energy(const Eigen::Vector3d& zj, const Eigen::Vector3d& zk, const EnergyContext& ctx) {
    ScalarField3D uj = build_peak(zj, ctx.profile(), ctx.grid());
    ScalarField3D uk = build_peak(zk, ctx.profile(), ctx.grid());
    ScalarField3D sj = product(uj, uj);
    ScalarField3D sk = product(uk, uk);
    ScalarField3D phi = ctx.bp_solver().potential(sj);
    return 0.5 * ctx.coupling() * integrate_product(phi, sk);
}

std::vector<double> coulomb_radial_potential(const RadialProfile& prof) {
    const std::size_t m = prof.nodes.size();
    const double h = prof.spacing();
    std::vector<double> inner(m, 0.0), outer(m, 0.0), out(m);
    for (std::size_t i = 1; i < m; ++i) {
        double a = prof.u[i - 1] * prof.u[i - 1] * prof.nodes[i - 1] * prof.nodes[i - 1];
        double b = prof.u[i] * prof.u[i] * prof.nodes[i] * prof.nodes[i];
        inner[i] = inner[i - 1] + 0.5 * h * (a + b);
    }
    for (std::size_t i = m - 1; i-- > 0;) {
        double a = prof.u[i] * prof.u[i] * prof.nodes[i];
        double b = prof.u[i + 1] * prof.u[i + 1] * prof.nodes[i + 1];
        outer[i] = outer[i + 1] + 0.5 * h * (a + b);
    }
    for (std::size_t i = 0; i < m; ++i) {
        double s = prof.nodes[i];
        double in = s > 0.0 ? inner[i] / s : 0.0;
        out[i] = 4.0 * kPi * (in + outer[i]);
    }
    return out;
}

double coulomb_pair_energy(const Eigen::Vector3d& zj, const Eigen::Vector3d& zk, const EnergyContext& ctx) {
    const RadialProfile& prof = ctx.profile();
    const std::vector<double> psi = coulomb_radial_potential(prof);
    const double total = psi.front() > 0.0 ? radial_integral(prof, [](double, double u, double) { return u * u; })
                                           : 0.0;
    const double h = prof.spacing();
    const UniformGrid& g = ctx.grid();
    ScalarField3D uk = build_peak(zk, prof, g);
    ScalarField3D f = ScalarField3D::sample(g, [&](double x, double y, double z) {
        double s = (Eigen::Vector3d(x, y, z) - zj).norm();
        if (s >= prof.r_max) return total / s;
        double t = s / h;
        std::size_t i = std::min(static_cast<std::size_t>(t), prof.nodes.size() - 2);
        double w = t - i;
        return (1.0 - w) * psi[i] + w * psi[i + 1];
    });
    ScalarField3D sk = product(uk, uk);
    double e = ctx.params().eps;
    // kernel 1/(eps |x|) in place of kappa_eps
    return 0.5 * ctx.params().bp_coupling * e * e * integrate_product(f, sk);
}

}  // namespace sbp
