#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sbp/groundstate.hpp"
#include "sbp/fields.hpp"

namespace sbp::test {

// U(0) from an independent scipy DOP853 shooting run (rtol 1e-13), frozen here.
inline double oracle_u0(double p) {
    static const std::map<double, double> table{
        {2.0, 4.1916829544425624}, {2.5, 4.208745707025999}, {3.0, 4.337387679977015}, {4.0, 5.223878560730184}};
    return table.at(p);
}

// One production profile per exponent, shared by every test case.
inline std::shared_ptr<const RadialProfile> profile(double p) {
    static std::map<double, std::shared_ptr<const RadialProfile>> cache;
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    auto prof = std::make_shared<const RadialProfile>(solve_ground_state(p));
    cache[p] = prof;
    return prof;
}

// Box with the decay margin around a peak cluster of the given radius, spacing at most h.
inline UniformGrid margin_grid(double radius, const RadialProfile& prof, double h) {
    double L = radius + 12.0 / prof.eta_fit + 0.5;
    return UniformGrid(L, fft_friendly_n(L, h, 32));
}

inline double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// Sum of a few Gaussian bumps with random centers, widths and signs, centered in |x| < L/4.
inline ScalarField3D smooth_field(const UniformGrid& g, std::mt19937_64& rng, int bumps = 3, double amp = 1.0) {
    struct Bump {
        Eigen::Vector3d c;
        double w, a;
    };
    std::uniform_real_distribution<double> pos(-g.L / 4.0, g.L / 4.0), width(0.9, 1.4), a(-amp, amp);
    std::vector<Bump> b;
    for (int i = 0; i < bumps; ++i) {
        Eigen::Vector3d c;
        for (int d = 0; d < 3; ++d) c[d] = pos(rng);
        double w = width(rng);
        b.push_back({c, w, a(rng)});
    }
    return ScalarField3D::sample(g, [&](double x, double y, double z) {
        double s = 0.0;
        for (const auto& q : b) s += q.a * std::exp(-(Eigen::Vector3d(x, y, z) - q.c).squaredNorm() / (q.w * q.w));
        return s;
    });
}

}  // namespace sbp::test
