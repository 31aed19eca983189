// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: sbp_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "sbp/ansatz.hpp"
#include "sbp/bpfield.hpp"
#include "sbp/config.hpp"
#include "sbp/energy.hpp"
#include "sbp/reduction.hpp"
#include "sbp/run.hpp"
#include "support.hpp"

using namespace sbp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void note(const std::string& s) {
    std::printf("    %s\n", s.c_str());
    std::fflush(stdout);
}

Verdict c1() {
    bool ok = true;
    double worst = 0.0;
    for (double p : {2.0, 2.5, 3.0, 4.0}) {
        RadialProfile prof = solve_ground_state(p);
        GroundStateConstants c = constants(prof);
        double nehari = std::fabs(c.norm_grad_sq + c.norm_l2_sq - c.norm_lp1) / c.norm_lp1;
        double poh = std::fabs(0.5 * c.norm_grad_sq - 3.0 * (c.norm_lp1 / (p + 1.0) - 0.5 * c.norm_l2_sq)) /
                     c.norm_grad_sq;
        note(fmt("p=%.1f U(0)=%.15f nehari %.2e pohozaev %.2e", p, prof.u0(), nehari, poh));
        worst = std::max({worst, nehari, poh});
        ok = ok && nehari < 1e-6 && poh < 1e-6;
        if (p == 3.0) {
            double d = test::rel(prof.u0(), test::oracle_u0(3.0));
            note(fmt("U(0) vs oracle %.2e", d));
            ok = ok && d < 1e-6;
        }
    }
    return {ok, fmt("worst identity residual %.2e", worst)};
}

Verdict c2() {
    UniformGrid g(10.0, 32);
    BPParams bp(1.0, 0.1);
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        ScalarField3D s = test::smooth_field(g, rng);
        ScalarField3D b = solve_potential_direct(s, bp);
        worst = std::max(worst, norm_l2(solve_potential_spectral(s, bp) - b) / norm_l2(b));
    }
    return {worst < 1e-3, fmt("max relative L2 error %.2e over 10 sources", worst)};
}

Verdict c3() {
    auto prof = test::profile(3.0);
    GroundStateConstants gc = constants(*prof);
    UniformGrid g(12.0, 64);
    Eigen::Vector3d P(0.7, -0.4, 0.25);
    ScalarField3D s = ScalarField3D::sample(g, [&](double x, double y, double z) {
        double u = evaluate(*prof, (Eigen::Vector3d(x, y, z) - P).norm()).u;
        return u * u;
    });
    bool ok = true;
    double worst = 0.0;
    for (double eps : {0.2, 0.1, 0.05}) {
        BPParams bp(1.0, eps);
        ScalarField3D phi = solve_potential_spectral(s, bp);
        double dev = 0.0;
        for (int k = 0; k < g.n; ++k)
            for (int j = 0; j < g.n; ++j)
                for (int i = 0; i < g.n; ++i) {
                    double d = (Eigen::Vector3d(g.coord(i), g.coord(j), g.coord(k)) - P).norm();
                    dev = std::max(dev, std::fabs(phi.at(i, j, k) - kappa_eps(d, bp) * gc.norm_l2_sq));
                }
        double bound = 1.1 * 0.5 * eps * gc.first_moment;
        note(fmt("eps=%.2f deviation %.4e bound %.4e", eps, dev, bound));
        worst = std::max(worst, dev / bound);
        ok = ok && dev <= bound;
    }
    return {ok, fmt("worst deviation/bound %.3f", worst)};
}

Verdict c4() {
    UniformGrid g(8.0, 32);
    std::mt19937_64 rng(404);
    double wg = 0.0, wh = 0.0, ws = 0.0;
    const double ps[] = {2.0, 2.5, 3.0, 2.0, 3.0};
    for (int t = 0; t < 5; ++t) {
        ReductionParams rp = ReductionParams::make(0.3, 1.0, ps[t], 6.0);
        EnergyContext ctx(rp, PotentialSpec::anisotropic(6.0), g, test::profile(ps[t]));
        ScalarField3D u = test::smooth_field(g, rng, 3, 2.0);
        ScalarField3D w1 = test::smooth_field(g, rng), w2 = test::smooth_field(g, rng);
        const double d = 1e-4;
        double fd = (energy(ctx, u + d * w1) - energy(ctx, u - d * w1)) / (2 * d);
        wg = std::max(wg, test::rel(inner_h1(gradient(ctx, u), w1), fd));
        ScalarField3D h1 = hessian_apply(ctx, u, w1), h2 = hessian_apply(ctx, u, w2);
        const double dh = 1e-5;
        ScalarField3D fdh = (1.0 / dh) * (gradient(ctx, u + dh * w1) - gradient(ctx, u));
        wh = std::max(wh, norm_h1(fdh - h1) / norm_h1(h1));
        ws = std::max(ws, test::rel(inner_h1(h1, w2), inner_h1(h2, w1)));
    }
    return {wg < 1e-4 && wh < 1e-3 && ws < 1e-10,
            fmt("gradient %.2e, Hessian %.2e, symmetry %.2e", wg, wh, ws)};
}

Verdict c5() {
    bool ok = true;
    std::string detail;
    for (double p : {2.0, 3.0}) {
        auto prof = test::profile(p);
        UniformGrid g(12.5, p == 3.0 ? 192 : 80);
        ReductionParams rp = ReductionParams::make(0.1, 1.0, p, 6.0);
        rp.bp_coupling = 0.0;
        EnergyContext ctx(rp, PotentialSpec::constant_one(), g, prof);
        ScalarField3D U = build_peak(Eigen::Vector3d::Zero(), *prof, g);
        HessianOperator H(ctx, U);
        double nu = norm_h1(U);
        double e1 = test::rel(inner_h1(H.apply(U), U), (1.0 - p) * nu * nu);
        double e2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            ScalarField3D dU = partial(U, i);
            e2 = std::max(e2, norm_h1(H.apply(dU)) / norm_h1(dU));
        }
        note(fmt("p=%.0f n=%d <H U,U> rel %.2e, near-kernel %.2e", p, g.n, e1, e2));
        ok = ok && e1 < 1e-3 && e2 < 1e-2;
        detail += fmt("p=%.0f: %.1e/%.1e ", p, e1, e2);
    }
    return {ok, detail};
}

const std::vector<double> kHalvings{0.1, 0.05, 0.025, 0.0125, 0.00625};

struct Sweeps {
    ExpansionReport on, control;
    bool done = false;
    double omega_floor[8]{};
};

Sweeps& sweeps() {
    static Sweeps s;
    if (s.done) return s;
    auto prof = test::profile(2.0);
    ReductionParams rp = ReductionParams::make(0.1, 4.0, 2.0, 6.0);
    PotentialSpec rad = PotentialSpec::radial(6.0);
    // both runs follow the radius path of the radial potential
    ExpansionOptions opt;
    opt.radius = [&](double eps, double, double) {
        ReductionParams q = rp;
        q.eps = eps;
        auto iv = admissible_interval(q, rad);
        return std::sqrt(iv->first * iv->second);
    };
    s.on = expansion_report(rp, rad, kHalvings, prof, opt);
    for (const auto& r : s.on.rows)
        note(fmt("eps=%.5f r=%.3f n=%d |Phi-formula| %.3e |n| %.3e |grad W| %.3e orth %.1e", r.eps, r.r, r.grid.n,
                 r.error, r.n_norm, r.grad_norm, r.orthogonality));
    ReductionParams off = rp;
    off.bp_coupling = 0.0;
    s.control = expansion_report(off, PotentialSpec::constant_one(), kHalvings, prof, opt);
    // overlap floor: interaction of the bare peaks plus the grid error of one peak
    for (std::size_t i = 0; i < s.control.rows.size(); ++i) {
        const auto& r = s.control.rows[i];
        ReductionParams q = off;
        q.eps = r.eps;
        EnergyContext ctx(q, PotentialSpec::constant_one(), r.grid, prof);
        double single = energy(ctx, build_peak(Eigen::Vector3d::Zero(), *prof, r.grid));
        double pairW = energy(ctx, build_W(PeakConfig(r.r, opt.theta, opt.phi, opt.K), *prof, r.grid));
        GroundStateConstants gc = constants(*prof);
        double omega = std::fabs(pairW - opt.K * single);
        double grid_floor = opt.K * std::fabs(single - (gc.c0 + gc.c1));
        s.omega_floor[i] = 2.0 * omega + grid_floor;
        note(fmt("control eps=%.5f error %.3e, overlap %.3e, grid floor %.3e", r.eps, r.error, omega, grid_floor));
    }
    s.done = true;
    return s;
}

std::vector<double> column(const ExpansionReport& rep, double ExpansionRow::*m) {
    std::vector<double> v;
    for (const auto& r : rep.rows) v.push_back(r.*m);
    return v;
}

Verdict c6() {
    Sweeps& s = sweeps();
    double slope = loglog_slope(column(s.on, &ExpansionRow::eps), column(s.on, &ExpansionRow::grad_norm));
    return {slope >= 1.9, fmt("slope of |grad I(W)| vs eps %.3f over 4 halvings", slope)};
}

Verdict c7() {
    Sweeps& s = sweeps();
    double slope = loglog_slope(column(s.on, &ExpansionRow::eps), column(s.on, &ExpansionRow::n_norm));
    double orth = 0.0;
    for (const auto& r : s.on.rows) orth = std::max(orth, r.orthogonality);
    return {slope >= 1.9 && orth < 1e-8, fmt("slope of |n| %.3f, max orthogonality %.1e", slope, orth)};
}

Verdict c8() {
    Sweeps& s = sweeps();
    double err_slope = s.on.mu_slope + 3.0;
    bool floor_ok = true;
    for (std::size_t i = 0; i < s.control.rows.size(); ++i)
        floor_ok = floor_ok && s.control.rows[i].error <= s.omega_floor[i];
    return {err_slope > 3.0 && floor_ok,
            fmt("error slope %.3f (mu %.3f); control within overlap floor: %s", err_slope, s.on.mu_slope,
                floor_ok ? "yes" : "no")};
}

Verdict c9() {
    auto prof = test::profile(2.0);
    PotentialSpec pot = PotentialSpec::radial(6.0);
    // halving ladder first: which steps fit n <= 160 at h ~ 0.45
    std::vector<double> ladder;
    for (double eps : kHalvings) {
        ReductionParams rp = ReductionParams::make(eps, 4.0, 2.0, 6.0);
        auto iv = admissible_interval(rp, pot);
        int n = fft_friendly_n(iv->second + 12.5, 0.4525, 64);
        note(fmt("eps=%.5f r_hi %.2f needs n=%d", eps, iv->second, n));
        if (n <= 160) ladder.push_back(eps);
    }
    int halvings = static_cast<int>(ladder.size()) - 1;
    // trends on the sqrt(2) ladder that fits the budget
    const std::vector<double> eps_list{0.1, 0.07, 0.05, 0.035, 0.025};
    std::vector<double> r, er, nn;
    bool verify = true;
    for (double eps : eps_list) {
        ReductionParams rp = ReductionParams::make(eps, 4.0, 2.0, 6.0);
        rp.bp_coarsen = 2;
        auto iv = admissible_interval(rp, pot);
        double L = iv->second + 12.5;
        UniformGrid grid(L, fft_friendly_n(L, 0.4525, 64));
        EnergyContext ctx(rp, pot, grid, prof);
        MinimizerResult m = minimize_reduced(ctx);
        VerifyReport v = verify_solution(m.cfg, ctx, &m.aux);
        note(fmt("eps=%.3f n=%d r*=%.5f eps r*=%.5f |n|=%.3e boundary %d verify %s", eps, grid.n, m.cfg.r,
                 eps * m.cfg.r, m.aux.n_norm, int(m.boundary), v.pass ? "pass" : "fail"));
        r.push_back(m.cfg.r);
        er.push_back(eps * m.cfg.r);
        nn.push_back(m.aux.n_norm);
        verify = verify && v.pass && !m.boundary;
    }
    bool trends = true;
    for (std::size_t i = 1; i < r.size(); ++i) trends = trends && r[i] > r[i - 1] && er[i] < er[i - 1] && nn[i] < nn[i - 1];
    note(fmt("sqrt(2) ladder 0.1..0.025: trends %s, verify %s", trends ? "hold" : "broken", verify ? "all pass" : "failed"));
    return {halvings >= 4 && trends && verify,
            fmt("%d consecutive halvings fit n <= 160 (4 required); trends %s, verify %s on 4 sqrt(2) steps", halvings,
                trends ? "hold" : "broken", verify ? "pass" : "fail")};
}

Verdict c10() {
    auto prof = test::profile(3.0);
    ReductionParams rp = ReductionParams::make(0.1, 1.0, 3.0, 6.0);
    double L = 19.5;
    UniformGrid g(L, fft_friendly_n(L, 0.25, 64));
    EnergyContext ctx(rp, PotentialSpec::radial(6.0), g, prof);
    Eigen::Vector3d z3(0.0, -4.0, 0.0);
    auto pair = [&](double d) {
        GeneralConfig gc({Eigen::Vector3d(-d / 2, 3.0, 0.0), Eigen::Vector3d(d / 2, 3.0, 0.0), z3});
        return std::make_pair(bp_pair_energy(gc.centers[0], gc.centers[1], ctx),
                              coulomb_pair_energy(gc.centers[0], gc.centers[1], ctx));
    };
    auto [bp0, c0] = pair(12.0);
    auto [bp1, c1] = pair(3.0);
    double rb = bp1 / bp0, rc = c1 / c0;
    note(fmt("n=%d d 12 -> 3: BP %.4e -> %.4e, Coulomb %.4e -> %.4e", g.n, bp0, bp1, c0, c1));
    return {rb < 2.0 && rb > 0.5 && rc > 3.0, fmt("BP ratio %.3f, Coulomb ratio %.3f", rb, rc)};
}

std::string strip_seconds(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

Verdict c11() {
    std::string a, b;
    for (int rep = 0; rep < 2; ++rep) {
        fs::path dir = fs::temp_directory_path() / ("sbp_acceptance_sweep_" + std::to_string(rep));
        fs::remove_all(dir);
        RunConfig cfg = parse_config_text("command = sweep\np = 2\na = 4\nalpha = 6\nK = 2\ngrid_n = 64\nworkers = 4\n"
                                          "seed = 7\noutput = " +
                                          dir.string() + "\n");
        std::ostringstream log;
        int code = run(cfg, log);
        if (code != ExitCode::Ok) return {false, fmt("sweep exited with %d", code)};
        std::ifstream in(dir / "results.csv");
        std::stringstream ss;
        ss << in.rdbuf();
        (rep == 0 ? a : b) = strip_seconds(ss.str());
    }
    std::size_t rows = std::count(a.begin(), a.end(), '\n') - 1;
    return {a == b && rows == 5, fmt("%zu rows, identical modulo seconds: %s", rows, a == b ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, std::function<Verdict()>>> all{
        {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}};
    std::set<int> want;
    for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& [id, fn] : all) {
        if (!want.empty() && !want.count(id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), sec);
        std::fflush(stdout);
        if (!v.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
