#include "sbp/groundstate.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <regex>
#include <sstream>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "sbp/errors.hpp"

namespace sbp {

namespace {

using State = std::array<double, 2>;
using Stepper = boost::numeric::odeint::runge_kutta_fehlberg78<State>;

constexpr double kPi = 3.14159265358979323846;

double spow(double u, double p) { return std::copysign(std::pow(std::fabs(u), p), u); }

constexpr int kSeriesTerms = 24;

std::vector<double> series_coefficients(double u0, double p) {
    std::vector<double> a(kSeriesTerms, 0.0), g(kSeriesTerms, 0.0);
    a[0] = u0;
    g[0] = std::pow(u0, p);
    for (int k = 1; k < kSeriesTerms; ++k) {
        a[k] = (a[k - 1] - g[k - 1]) / (2.0 * k * (2.0 * k + 1.0));
        double acc = 0.0;
        for (int j = 1; j <= k; ++j) acc += ((p + 1.0) * j - k) * a[j] * g[k - j];
        g[k] = acc / (k * u0);
    }
    return a;
}

// radius inside which the truncated series is accurate to roundoff
double series_radius(const std::vector<double>& a) {
    const int m = static_cast<int>(a.size());
    double r = 1e300;
    for (int k = m - 3; k < m; ++k) {
        if (a[k] == 0.0) continue;
        double lim = std::pow(1e-17 * std::fabs(a[0]) / std::fabs(a[k]), 1.0 / (2.0 * k));
        r = std::min(r, lim);
    }
    return r;
}

// value and first three derivatives of the even series at r
std::array<double, 4> series_eval(const std::vector<double>& a, double r) {
    std::array<double, 4> out{0.0, 0.0, 0.0, 0.0};
    const int m = static_cast<int>(a.size());
    for (int k = m - 1; k >= 0; --k) {
        double e = 2.0 * k;
        out[0] += a[k] * std::pow(r, e);
        if (k >= 1) out[1] += e * a[k] * std::pow(r, e - 1.0);
        if (k >= 1) out[2] += e * (e - 1.0) * a[k] * std::pow(r, e - 2.0);
        if (k >= 2) out[3] += e * (e - 1.0) * (e - 2.0) * a[k] * std::pow(r, e - 3.0);
    }
    return out;
}

struct RadialOde {
    double p;
    void operator()(const State& s, State& ds, double r) const {
        ds[0] = s[1];
        ds[1] = -2.0 * s[1] / r + s[0] - spow(s[0], p);
    }
};

enum class Outcome { overshoot, undershoot, reached_end };

struct Trajectory {
    Outcome outcome = Outcome::reached_end;
    std::vector<double> u, du;
};

Trajectory shoot(double u0, double p, double h, std::size_t nsteps, bool record) {
    Trajectory t;
    if (record) {
        t.u.reserve(nsteps + 1);
        t.du.reserve(nsteps + 1);
        t.u.push_back(u0);
        t.du.push_back(0.0);
    }
    RadialOde ode{p};
    Stepper stepper;
    auto coef = series_coefficients(u0, p);
    std::size_t first = std::max<std::size_t>(1, static_cast<std::size_t>(series_radius(coef) / h));
    first = std::min(first, nsteps / 4);
    State s{};
    for (std::size_t i = 1; i <= first; ++i) {
        auto sv = series_eval(coef, h * static_cast<double>(i));
        s = {sv[0], sv[1]};
        if (record) {
            t.u.push_back(s[0]);
            t.du.push_back(s[1]);
        }
    }
    for (std::size_t i = first; i < nsteps; ++i) {
        if (s[0] < 0.0) {
            t.outcome = Outcome::overshoot;
            return t;
        }
        if (s[1] > 0.0) {
            t.outcome = Outcome::undershoot;
            return t;
        }
        stepper.do_step(ode, s, h * static_cast<double>(i), h);
        if (record) {
            t.u.push_back(s[0]);
            t.du.push_back(s[1]);
        }
    }
    if (s[0] < 0.0) {
        t.outcome = Outcome::overshoot;
    } else if (s[1] > 0.0) {
        t.outcome = Outcome::undershoot;
    } else {
        // growing-mode component decides
        double r = h * static_cast<double>(nsteps);
        t.outcome = s[1] + s[0] * (1.0 + 1.0 / r) > 0.0 ? Outcome::undershoot : Outcome::overshoot;
    }
    return t;
}

// Integrates inward from r_max along the decaying branch, amplitude A.
void integrate_tail(double A, double p, double h, std::size_t nsteps, std::size_t stop,
                    std::vector<double>& u, std::vector<double>& du) {
    RadialOde ode{p};
    Stepper stepper;
    double rm = h * static_cast<double>(nsteps);
    State s{A * std::exp(-rm) / rm, -A * std::exp(-rm) * (1.0 + rm) / (rm * rm)};
    u[nsteps] = s[0];
    du[nsteps] = s[1];
    for (std::size_t i = nsteps; i > stop; --i) {
        stepper.do_step(ode, s, h * static_cast<double>(i), -h);
        u[i - 1] = s[0];
        du[i - 1] = s[1];
    }
}

double fit_eta(const RadialProfile& prof) {
    // least squares slope of log(u r) over the middle third of the tail
    double a = prof.r_max / 3.0, b = 2.0 * prof.r_max / 3.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < prof.nodes.size(); ++i) {
        double r = prof.nodes[i];
        if (r < a || r > b) continue;
        double y = std::log(prof.u[i] * r);
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
        ++m;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return std::min(1.0, -slope);
}

}  // namespace

namespace {

RadialProfile solve_at_step(double p, double r_max, double tol, double h_ode) {
    const auto nsteps = static_cast<std::size_t>(std::llround(r_max / h_ode));
    const double h = r_max / static_cast<double>(nsteps);

    // u0 <= 1 always undershoots; grow the upper end until it overshoots
    double lo = 1.0, hi = 2.0;
    int guard = 0;
    while (shoot(hi, p, h, nsteps, false).outcome != Outcome::overshoot) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 60) throw NoConvergence("ground state bracket search", guard, hi);
    }
    int iters = 0;
    for (; iters < 200; ++iters) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (shoot(mid, p, h, nsteps, false).outcome == Outcome::overshoot)
            hi = mid;
        else
            lo = mid;
    }
    if (hi - lo > tol * lo) throw NoConvergence("ground state shooting", iters, (hi - lo) / lo);

    Trajectory tl = shoot(lo, p, h, nsteps, true);
    Trajectory th = shoot(hi, p, h, nsteps, true);
    std::size_t common = std::min(tl.u.size(), th.u.size());

    // keep the shooting trajectory while both bracket ends agree closely
    std::size_t match = 1;
    for (std::size_t i = 1; i < common; ++i) {
        double ua = tl.u[i], ub = th.u[i];
        if (ua <= 0.0 || ub <= 0.0 || std::fabs(ua - ub) > 1e-7 * ua) break;
        match = i;
    }
    if (match + 2 >= nsteps) match = nsteps - 2;

    RadialProfile prof;
    prof.p = p;
    prof.r_max = h * static_cast<double>(nsteps);
    prof.nodes.resize(nsteps + 1);
    prof.u.assign(nsteps + 1, 0.0);
    prof.du.assign(nsteps + 1, 0.0);
    for (std::size_t i = 0; i <= nsteps; ++i) prof.nodes[i] = h * static_cast<double>(i);
    for (std::size_t i = 0; i <= match; ++i) {
        prof.u[i] = 0.5 * (tl.u[i] + th.u[i]);
        prof.du[i] = 0.5 * (tl.du[i] + th.du[i]);
    }
    prof.du[0] = 0.0;

    // match the amplitude of the inward-integrated decaying branch
    const double target = prof.u[match];
    const double rmatch = prof.nodes[match];
    std::vector<double> tu(nsteps + 1), tdu(nsteps + 1);
    double A = target * rmatch * std::exp(rmatch);
    for (int k = 0; k < 8; ++k) {
        integrate_tail(A, p, h, nsteps, match, tu, tdu);
        double ratio = target / tu[match];
        A *= ratio;
        if (std::fabs(ratio - 1.0) < 1e-15) break;
    }
    integrate_tail(A, p, h, nsteps, match, tu, tdu);
    for (std::size_t i = match + 1; i <= nsteps; ++i) {
        prof.u[i] = tu[i];
        prof.du[i] = tdu[i];
    }
    prof.du[match] = 0.5 * (prof.du[match] + tdu[match]);

    for (std::size_t i = 1; i <= nsteps; ++i) {
        if (!(prof.u[i] > 0.0) || !(prof.u[i] < prof.u[i - 1]))
            throw NoConvergence("ground state profile lost monotonicity", iters, prof.nodes[i]);
    }
    if (!(prof.u.back() < 1e-8 * prof.u.front()))
        throw NoConvergence("ground state tail too large at r_max", iters, prof.u.back());

    fill_derived(prof);
    prof.eta_fit = fit_eta(prof);
    return prof;
}

}  // namespace

void fill_derived(RadialProfile& prof) {
    const std::size_t m = prof.nodes.size();
    const double p = prof.p;
    prof.series = series_coefficients(prof.u.front(), p);
    prof.series_radius = std::max(prof.spacing(), std::min(series_radius(prof.series), prof.r_max / 4.0));
    prof.ddu.assign(m, 0.0);
    prof.dddu.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double r = prof.nodes[i], u = prof.u[i], v = prof.du[i];
        double f = u - spow(u, p);
        if (i == 0) {
            prof.ddu[i] = f / 3.0;
            continue;
        }
        double fp = 1.0 - p * std::pow(std::fabs(u), p - 1.0);
        prof.ddu[i] = f - 2.0 * v / r;
        prof.dddu[i] = fp * v - 2.0 * prof.ddu[i] / r + 2.0 * v / (r * r);
    }
}

RadialProfile solve_ground_state(double p, double r_max, double tol, double h_ode) {
    if (!(p > 1.0 && p < 5.0)) throw InvalidExponent("p must lie in (1, 5)");
    if (!(r_max >= 20.0)) throw InvalidArgument("r_max must be at least 20");
    if (!(tol > 1e-14 && tol < 1e-4)) throw InvalidArgument("tol must lie in (1e-14, 1e-4)");
    if (!(h_ode > 0.0 && h_ode <= 0.05)) throw InvalidArgument("h_ode must lie in (0, 0.05]");
    // halve the node spacing until the interpolated profile meets the residual target
    double h = h_ode;
    for (int level = 0;; ++level) {
        RadialProfile prof = solve_at_step(p, r_max, tol, h);
        double res = ode_residual(prof, 2);
        if (res <= 10.0 * tol) return prof;
        if (level == 4) throw NoConvergence("ground state interpolation residual", level, res);
        h *= 0.5;
    }
}

namespace {

// Septic Hermite segment through (u, u', u'', u''') at both ends, in t = (s - r_i)/h.
std::array<double, 8> segment(const RadialProfile& prof, double s, double& t) {
    const double h = prof.spacing();
    std::size_t i = static_cast<std::size_t>(s / h);
    if (i + 1 >= prof.nodes.size()) i = prof.nodes.size() - 2;
    t = (s - prof.nodes[i]) / h;
    std::array<double, 8> c{};
    c[0] = prof.u[i];
    c[1] = h * prof.du[i];
    c[2] = 0.5 * h * h * prof.ddu[i];
    c[3] = h * h * h * prof.dddu[i] / 6.0;
    double A = prof.u[i + 1] - (c[0] + c[1] + c[2] + c[3]);
    double B = h * prof.du[i + 1] - (c[1] + 2.0 * c[2] + 3.0 * c[3]);
    double C = h * h * prof.ddu[i + 1] - (2.0 * c[2] + 6.0 * c[3]);
    double D = h * h * h * prof.dddu[i + 1] - 6.0 * c[3];
    c[4] = 35.0 * A - 15.0 * B + 2.5 * C - D / 6.0;
    c[5] = -84.0 * A + 39.0 * B - 7.0 * C + 0.5 * D;
    c[6] = 70.0 * A - 34.0 * B + 6.5 * C - 0.5 * D;
    c[7] = -20.0 * A + 10.0 * B - 2.0 * C + D / 6.0;
    return c;
}

}  // namespace

RadialValue evaluate(const RadialProfile& prof, double s) {
    const double rm = prof.r_max;
    if (s >= rm) {
        double um = prof.u.back();
        double v = um * (rm / s) * std::exp(-(s - rm));
        return {v, -v * (1.0 + 1.0 / s)};
    }
    if (s < prof.series_radius) {
        auto e = series_eval(prof.series, s);
        return {e[0], e[1]};
    }
    double t;
    auto c = segment(prof, s, t);
    double val = c[7];
    double der = 7.0 * c[7];
    for (int k = 6; k >= 0; --k) val = val * t + c[k];
    for (int k = 6; k >= 1; --k) der = der * t + k * c[k];
    return {val, der / prof.spacing()};
}

double evaluate_second(const RadialProfile& prof, double s) {
    const double rm = prof.r_max;
    if (s >= rm) {
        double v = prof.u.back() * (rm / s) * std::exp(-(s - rm));
        return v * (1.0 + 2.0 / s + 2.0 / (s * s));
    }
    if (s < prof.series_radius) return series_eval(prof.series, s)[2];
    double t;
    auto c = segment(prof, s, t);
    double dd = 42.0 * c[7];
    for (int k = 6; k >= 2; --k) dd = dd * t + k * (k - 1) * c[k];
    const double h = prof.spacing();
    return dd / (h * h);
}

double ode_residual(const RadialProfile& prof, int refine) {
    const double h = prof.spacing();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < prof.nodes.size(); ++i) {
        for (int k = (i == 0 ? 1 : 0); k < refine; ++k) {
            double s = prof.nodes[i] + h * static_cast<double>(k) / refine;
            RadialValue v = evaluate(prof, s);
            double dd = evaluate_second(prof, s);
            double res = dd + 2.0 * v.du / s - v.u + spow(v.u, prof.p);
            worst = std::max(worst, std::fabs(res));
        }
    }
    return worst;
}

GroundStateConstants constants(const RadialProfile& prof, int K) {
    if (prof.nodes.size() < 3) throw InvalidArgument("profile has too few nodes");
    const double p = prof.p;
    GroundStateConstants c;
    c.norm_l2_sq = radial_integral(prof, [](double, double u, double) { return u * u; });
    c.norm_grad_sq = radial_integral(prof, [](double, double, double du) { return du * du; });
    c.norm_lp1 = radial_integral(prof, [p](double, double u, double) { return std::pow(std::fabs(u), p + 1.0); });
    double lap_sq = radial_integral(prof, [p](double, double u, double) {
        double l = u - spow(u, p);
        return l * l;
    });
    c.first_moment = radial_integral(prof, [](double r, double u, double) { return r * u * u; });
    // for radial U: sum_i |d_i d_1 U|^2 integrates to |Delta U|^2 / 3
    c.norm_d1U_h1_sq = (c.norm_grad_sq + lap_sq) / 3.0;
    c.c0 = 0.5 * c.norm_grad_sq - c.norm_lp1 / (p + 1.0);
    c.c1 = 0.5 * c.norm_l2_sq;
    c.sigma = std::min(1.0, p - 1.0);
    c.gamma = std::sqrt(2.0 - 2.0 * std::cos(2.0 * kPi / K));

    // tail of the L2 integral beyond r_max, from the decaying branch
    double um = prof.u.back(), rm = prof.r_max;
    double tail = 4.0 * kPi * um * um * rm * rm * 0.5;
    if (tail > 1e-8 * c.norm_l2_sq)
        throw QuadratureUnderflow("r_max too small for relative accuracy 1e-8");
    return c;
}

void write_profile(const RadialProfile& prof, std::ostream& out) {
    std::ostringstream head;
    head << std::setprecision(17) << "SBPC1 p=" << prof.p << " rmax=" << prof.r_max << " eta=" << prof.eta_fit;
    out << head.str() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < prof.nodes.size(); ++i)
        out << prof.nodes[i] << ' ' << prof.u[i] << ' ' << prof.du[i] << '\n';
}

RadialProfile read_profile(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "header", "empty profile cache");
    static const std::regex head_re(R"(SBPC1 p=(\S+) rmax=(\S+) eta=(\S+))");
    std::smatch m;
    if (!std::regex_match(line, m, head_re)) throw ParseError(1, "header", "not an SBPC1 profile cache");
    RadialProfile prof;
    try {
        prof.p = std::stod(m[1]);
        prof.r_max = std::stod(m[2]);
        prof.eta_fit = std::stod(m[3]);
    } catch (const std::exception&) {
        throw ParseError(1, "header", "malformed number");
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        double r, u, du;
        if (!(ls >> r >> u >> du)) throw ParseError(lineno, "node", "expected 'r u du'");
        prof.nodes.push_back(r);
        prof.u.push_back(u);
        prof.du.push_back(du);
    }
    if (prof.nodes.size() < 3) throw ParseError(lineno, "node", "too few nodes");
    fill_derived(prof);
    return prof;
}

void save_profile(const RadialProfile& prof, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + path);
    write_profile(prof, f);
}

RadialProfile load_profile(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot read " + path);
    return read_profile(f);
}

}  // namespace sbp
