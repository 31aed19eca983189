#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sbp {

// Positive radial ground state of -u'' - (2/r)u' + u = u^p on a uniform node set.
struct RadialProfile {
    double p = 3.0;
    double r_max = 25.0;
    double eta_fit = 1.0;
    std::vector<double> nodes;
    std::vector<double> u;
    std::vector<double> du;
    // derived from the ODE after solving or loading, not persisted
    std::vector<double> ddu;
    std::vector<double> dddu;
    std::vector<double> series;  // u = sum series[k] r^(2k) for r < series_radius
    double series_radius = 0.0;

    double spacing() const { return nodes.size() > 1 ? nodes[1] - nodes[0] : 0.0; }
    double u0() const { return u.front(); }
};

struct GroundStateConstants {
    double c0 = 0.0;
    double c1 = 0.0;
    double norm_l2_sq = 0.0;
    double norm_grad_sq = 0.0;
    double norm_lp1 = 0.0;
    double norm_d1U_h1_sq = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    double first_moment = 0.0;  // integral of |y| U(y)^2
};

struct RadialValue {
    double u;
    double du;
};

RadialProfile solve_ground_state(double p, double r_max = 25.0, double tol = 1e-10, double h_ode = 1e-2);

GroundStateConstants constants(const RadialProfile& profile, int K = 2);

RadialValue evaluate(const RadialProfile& profile, double s);
// Second derivative of the interpolant (tail formula beyond r_max).
double evaluate_second(const RadialProfile& profile, double s);

// Sup of |u'' + (2/r)u' - u + u^p| over the interpolant at `refine` points per node interval.
double ode_residual(const RadialProfile& profile, int refine = 2);

// 4*pi * integral of f(r, u, du) r^2 dr by the trapezoid rule on the nodes.
template <class F>
double radial_integral(const RadialProfile& prof, F&& f);

void write_profile(const RadialProfile& profile, std::ostream& out);
RadialProfile read_profile(std::istream& in);
void save_profile(const RadialProfile& profile, const std::string& path);
RadialProfile load_profile(const std::string& path);

// Recomputes the derived arrays from the ODE. Needed after building a profile by hand.
void fill_derived(RadialProfile& profile);

template <class F>
double radial_integral(const RadialProfile& prof, F&& f) {
    const double pi = 3.14159265358979323846;
    const std::size_t m = prof.nodes.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double r = prof.nodes[i];
        double w = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
        acc += w * f(r, prof.u[i], prof.du[i]) * r * r;
    }
    return 4.0 * pi * acc * prof.spacing();
}

}  // namespace sbp
