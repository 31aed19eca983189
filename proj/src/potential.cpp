#include "sbp/potential.hpp"

#include <cmath>
#include <vector>

#include "sbp/errors.hpp"

namespace sbp {

namespace {

std::vector<Eigen::Vector3d> lattice_directions() {
    std::vector<Eigen::Vector3d> dirs;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                dirs.push_back(Eigen::Vector3d(i, j, k).normalized());
            }
    return dirs;
}

double cap(const PotentialSpec& pot, double t) {
    if (t <= pot.cap_start) return 1.0;
    double tau = (t - pot.cap_start) / (1.0 - pot.cap_start);
    return 1.0 - (1.0 - pot.cap_floor) * smooth_step(tau);
}

double g_unscaled(const PotentialSpec& pot, const Eigen::Vector3d& x) {
    return x.dot(pot.hess * x) * cap(pot, x.norm());
}

}  // namespace

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double sampled_c31_norm(const PotentialSpec& pot, double c) {
    const auto dirs = lattice_directions();
    std::vector<Eigen::Vector3d> vs = dirs;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(pot.hess);
    for (int i = 0; i < 3; ++i) vs.push_back(es.eigenvectors().col(i));
    const double d = 0.02;
    double worst = 0.0;
    std::vector<Eigen::Vector3d> pts{Eigen::Vector3d::Zero()};
    for (int s = 1; s <= 8; ++s)
        for (const auto& u : dirs) pts.push_back(u * (s / 8.0));
    for (const auto& x : pts) {
        for (const auto& v : vs) {
            double f[5];
            for (int m = -2; m <= 2; ++m) f[m + 2] = c * g_unscaled(pot, x + (m * d) * v);
            double k0 = std::fabs(f[2]);
            double k1 = std::fabs((-f[4] + 8 * f[3] - 8 * f[1] + f[0]) / (12 * d));
            double k2 = std::fabs((-f[4] + 16 * f[3] - 30 * f[2] + 16 * f[1] - f[0]) / (12 * d * d));
            double k3 = std::fabs((f[4] - 2 * f[3] + 2 * f[1] - f[0]) / (2 * d * d * d));
            double k4 = std::fabs((f[4] - 4 * f[3] + 6 * f[2] - 4 * f[1] + f[0]) / (d * d * d * d));
            worst = std::max({worst, k0, k1, k2, k3, k4});
        }
    }
    return worst;
}

PotentialSpec PotentialSpec::make(double alpha, const Eigen::Matrix3d& A, double cap_floor, double cap_start,
                                  double outer_level, double outer_end) {
    if (!(alpha > 3.0 + std::sqrt(7.0))) throw AlphaTooSmall("alpha must exceed 3+sqrt(7)");
    if ((A - A.transpose()).norm() > 1e-12 * A.norm()) throw InvalidArgument("hess must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw InvalidArgument("hess must be positive definite");
    if (!(cap_floor > 0.0 && cap_floor <= 1.0)) throw InvalidArgument("cap floor must lie in (0, 1]");
    if (!(cap_start > 0.0 && cap_start < 1.0)) throw InvalidArgument("cap start must lie in (0, 1)");
    if (!(outer_end > 1.0)) throw InvalidArgument("outer blend must end beyond |x| = 1");
    if (!(outer_level > 1.0) || !std::isfinite(outer_level)) throw InvalidArgument("outer level must exceed 1");
    PotentialSpec pot;
    pot.alpha = alpha;
    pot.hess = A;
    pot.cap_floor = cap_floor;
    pot.cap_start = cap_start;
    pot.outer_level = outer_level;
    pot.outer_end = outer_end;
    pot.scale = 1.0 / sampled_c31_norm(pot, 1.0);

    // (V1)-(V3) on samples
    if (pot(Eigen::Vector3d::Zero()) != 1.0) throw InvalidArgument("V(0) must equal 1");
    const auto dirs = lattice_directions();
    double lo = 1e300, hi = -1e300;
    for (int s = 1; s <= 24; ++s)
        for (const auto& u : dirs) {
            double r = s / 8.0;
            double v = pot(u * r);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            // V - 1 = g^alpha may round away near the center, so test g itself
            if (r <= 1.0 && !(pot.g(u * r) > 0.0 && v >= 1.0))
                throw InvalidArgument("V must exceed 1 on the punctured unit ball");
        }
    if (!(lo > 0.0) || !std::isfinite(hi)) throw InvalidArgument("V must be bounded and positive");
    return pot;
}

PotentialSpec PotentialSpec::anisotropic(double alpha) {
    Eigen::Matrix3d A = Eigen::Vector3d(1.0, 1.5, 2.0).asDiagonal();
    return make(alpha, A);
}

PotentialSpec PotentialSpec::constant_one() {
    PotentialSpec pot;
    pot.flat = true;
    return pot;
}

PotentialSpec PotentialSpec::with_scale(double alpha, const Eigen::Matrix3d& A, double c) {
    PotentialSpec pot = make(alpha, A);
    pot.scale = c;
    return pot;
}

bool PotentialSpec::is_radial() const {
    if (flat) return true;
    Eigen::Matrix3d d = hess - hess(0, 0) * Eigen::Matrix3d::Identity();
    return d.norm() == 0.0;
}

double PotentialSpec::g(const Eigen::Vector3d& x) const { return scale * g_unscaled(*this, x); }

double PotentialSpec::operator()(const Eigen::Vector3d& x) const {
    if (flat) return 1.0;
    double t = x.norm();
    if (t >= outer_end) return outer_level;
    if (t <= 1.0) return 1.0 + std::pow(g(x), alpha);
    double b = smooth_step((t - 1.0) / (outer_end - 1.0));
    return (1.0 - b) * (1.0 + std::pow(g(x), alpha)) + b * outer_level;
}

}  // namespace sbp
