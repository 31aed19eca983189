#pragma once

#include <Eigen/Dense>

namespace sbp {

// V(x) = 1 + g(x)^alpha on the unit ball with g(x) = c (x^T A x) s(|x|),
// blended smoothly to a constant on 1 <= |x| <= outer_end.
struct PotentialSpec {
    double alpha = 6.0;
    Eigen::Matrix3d hess = Eigen::Matrix3d::Identity();
    double cap_start = 0.75;
    double cap_floor = 1.0;
    double outer_level = 2.0;
    double outer_end = 2.0;
    double scale = 0.5;  // c
    bool flat = false;   // V identically 1 (control experiments)

    // Validated potential; c is chosen from the sampled C^{3,1} norm of x^T A x s(|x|).
    static PotentialSpec make(double alpha, const Eigen::Matrix3d& A, double cap_floor = 1.0,
                              double cap_start = 0.75, double outer_level = 2.0, double outer_end = 2.0);
    static PotentialSpec radial(double alpha = 6.0) { return make(alpha, Eigen::Matrix3d::Identity()); }
    static PotentialSpec anisotropic(double alpha = 6.0);
    static PotentialSpec constant_one();
    // Explicit c, bypassing the norm bound. Used to exercise constraint failures.
    static PotentialSpec with_scale(double alpha, const Eigen::Matrix3d& A, double c);

    bool is_radial() const;
    double g(const Eigen::Vector3d& x) const;
    double operator()(const Eigen::Vector3d& x) const;
    double at_scaled(double eps, const Eigen::Vector3d& x) const { return (*this)(eps * x); }
};

// max over derivative orders 0..4 of sup |d^k/dt^k f(x + t v)| over sampled x in B1 and unit v.
double sampled_c31_norm(const PotentialSpec& pot, double c);

// smooth step from 0 (t <= 0) to 1 (t >= 1)
double smooth_step(double t);

}  // namespace sbp
