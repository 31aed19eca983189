#include "sbp/ansatz.hpp"

#include <algorithm>
#include <cmath>

#include "sbp/errors.hpp"
#include "sbp/kernels.hpp"

namespace sbp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxPeaks = 64;

// order-independent sum of per-peak contributions
double canonical_sum(double* v, int m) {
    for (int i = 1; i < m; ++i) {
        double x = v[i];
        int j = i - 1;
        while (j >= 0 && v[j] > x) {
            v[j + 1] = v[j];
            --j;
        }
        v[j + 1] = x;
    }
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += v[i];
    return s;
}

void check_peaks(const std::vector<Eigen::Vector3d>& centers, const RadialProfile& profile, const UniformGrid& grid) {
    if (centers.empty() || static_cast<int>(centers.size()) > kMaxPeaks)
        throw InvalidArgument("peak count must lie in [1, 64]");
    check_grid_margin(grid, peak_radius(centers), profile.eta_fit);
    if (centers.size() > 1 && min_separation(centers) < 4.0 * grid.spacing())
        throw PeaksUnresolved("peaks closer than four grid cells");
}

// Fills W and fields T_d = -sum_j U'(rho_j) (x - P_j)/rho_j . D_{d,j}.
void assemble(const std::vector<Eigen::Vector3d>& centers,
              const std::vector<std::vector<Eigen::Vector3d>>& dirs, const RadialProfile& profile,
              const UniformGrid& grid, ScalarField3D* W, std::vector<ScalarField3D>* T) {
    const int K = static_cast<int>(centers.size());
    const int n = grid.n;
    const std::size_t nd = dirs.size();
    if (W) *W = ScalarField3D(grid);
    if (T) T->assign(nd, ScalarField3D(grid));
    double vals[kMaxPeaks];
    std::vector<double> us(K), dus(K);
    std::vector<Eigen::Vector3d> unit(K);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                Eigen::Vector3d x(grid.coord(i), grid.coord(j), grid.coord(k));
                for (int q = 0; q < K; ++q) {
                    Eigen::Vector3d y = x - centers[q];
                    double rho = y.norm();
                    RadialValue rv = evaluate(profile, rho);
                    us[q] = rv.u;
                    dus[q] = rv.du;
                    unit[q] = rho > 0.0 ? Eigen::Vector3d(y / rho) : Eigen::Vector3d::Zero();
                }
                std::size_t idx = grid.index(i, j, k);
                if (W) {
                    for (int q = 0; q < K; ++q) vals[q] = us[q];
                    (*W)[idx] = canonical_sum(vals, K);
                }
                if (T) {
                    for (std::size_t d = 0; d < nd; ++d) {
                        int m = 0;
                        for (int q = 0; q < K; ++q) {
                            const Eigen::Vector3d& D = dirs[d][q];
                            if (D.isZero(0.0)) continue;
                            vals[m++] = -dus[q] * unit[q].dot(D);
                        }
                        (*T)[d][idx] = canonical_sum(vals, m);
                    }
                }
            }
}

}  // namespace

PeakConfig::PeakConfig(double r_, double theta_, double phi_, int K_) : r(r_), theta(theta_), phi(phi_), K(K_) {
    if (!(r_ > 0.0)) throw InvalidArgument("r must be positive");
    if (K_ < 2) throw InvalidArgument("K must be at least 2");
}

GeneralConfig::GeneralConfig(std::vector<Eigen::Vector3d> c) : centers(std::move(c)) {
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            if ((centers[i] - centers[j]).norm() == 0.0) throw InvalidArgument("centers must be distinct");
}

GeneralConfig GeneralConfig::from(const PeakConfig& cfg) { return GeneralConfig(peak_positions(cfg)); }

ReductionParams ReductionParams::make(double eps, double a, double p, double alpha, double lambda, double beta) {
    ReductionParams rp;
    rp.eps = eps;
    rp.a = a;
    rp.p = p;
    rp.alpha = alpha;
    auto lb = choose_exponents(alpha);
    rp.lambda = lambda > 0.0 ? lambda : lb.first;
    rp.beta = beta > 0.0 ? beta : 0.5 * (alpha - rp.lambda) / (alpha + 1.0);
    rp.validate();
    return rp;
}

void ReductionParams::validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
    if (!(a > 0.0)) throw InvalidArgument("a must be positive");
    if (!(p > 1.0 && p < 5.0)) throw InvalidExponent("p must lie in (1, 5)");
    if (!(alpha > 3.0 + std::sqrt(7.0))) throw AlphaTooSmall("alpha must exceed 3+sqrt(7)");
    double lo = 2.0 * (alpha + 2.0) / (alpha - 1.0), hi = std::min(2.0 * alpha - 8.0, alpha);
    if (!(lambda > lo && lambda < hi)) throw InvalidArgument("lambda outside its window");
    if (!(beta > 0.0 && beta < (alpha - lambda) / (alpha + 1.0))) throw InvalidArgument("beta outside its window");
    if (bp_coarsen != 1 && bp_coarsen != 2) throw InvalidArgument("bp_coarsen must be 1 or 2");
}

double ReductionParams::reference_radius() const { return std::pow(eps, -(alpha - lambda) / (alpha + 1.0)); }

Eigen::Vector3d sphere_point(double r, double t, double f) {
    return r * Eigen::Vector3d(std::cos(t) * std::sin(f), std::sin(t) * std::sin(f), std::cos(f));
}

Eigen::Vector3d sphere_dtheta(double r, double t, double f) {
    return r * Eigen::Vector3d(-std::sin(t) * std::sin(f), std::cos(t) * std::sin(f), 0.0);
}

Eigen::Vector3d sphere_dphi(double r, double t, double f) {
    return r * Eigen::Vector3d(std::cos(t) * std::cos(f), std::sin(t) * std::cos(f), -std::sin(f));
}

std::vector<Eigen::Vector3d> peak_positions(const PeakConfig& cfg) {
    std::vector<Eigen::Vector3d> out;
    for (int j = 1; j <= cfg.K; ++j) out.push_back(sphere_point(cfg.r, cfg.theta, cfg.phi + 2.0 * kPi * j / cfg.K));
    return out;
}

double chord(int K, int j, int k) {
    if (j < 1 || k < 1 || j > K || k > K) throw InvalidArgument("chord indices must lie in [1, K]");
    if (j == k) return 0.0;
    return std::sqrt(2.0 - 2.0 * std::cos(2.0 * kPi * (j - k) / K));
}

Eigen::Vector3d chord_vector(int K, int j, int k) {
    if (j < 1 || k < 1 || j > K || k > K) throw InvalidArgument("chord indices must lie in [1, K]");
    return sphere_point(1.0, 0.0, 2.0 * kPi * j / K) - sphere_point(1.0, 0.0, 2.0 * kPi * k / K);
}

std::pair<double, double> choose_exponents(double alpha) {
    if (!(alpha > 3.0 + std::sqrt(7.0))) throw AlphaTooSmall("alpha must exceed 3+sqrt(7)");
    double lo = 2.0 * (alpha + 2.0) / (alpha - 1.0), hi = std::min(2.0 * alpha - 8.0, alpha);
    if (!(hi > lo)) throw AlphaTooSmall("exponent window is empty");
    double lambda = 0.5 * (lo + hi);
    double beta = 0.5 * (alpha - lambda) / (alpha + 1.0);
    return {lambda, beta};
}

double max_on_sphere(const PotentialSpec& pot, double eps, double r) {
    std::vector<Eigen::Vector3d> dirs;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k)
                if (i || j || k) dirs.push_back(Eigen::Vector3d(i, j, k).normalized());
    Eigen::Vector3d best = dirs[0];
    double bv = -1e300;
    for (const auto& d : dirs) {
        double v = pot(eps * r * d);
        if (v > bv) {
            bv = v;
            best = d;
        }
    }
    // local hill climb on the sphere
    double step = 0.25;
    for (int it = 0; it < 40 && step > 1e-4; ++it) {
        bool moved = false;
        for (int ax = 0; ax < 3; ++ax)
            for (double s : {step, -step}) {
                Eigen::Vector3d c = best;
                c[ax] += s;
                c.normalize();
                double v = pot(eps * r * c);
                if (v > bv) {
                    bv = v;
                    best = c;
                    moved = true;
                }
            }
        if (!moved) step *= 0.5;
    }
    return bv;
}

std::optional<std::pair<double, double>> admissible_interval(const ReductionParams& rp, const PotentialSpec& pot) {
    const double e = rp.eps, al = rp.alpha;
    double lo = std::pow(e, rp.beta - (al - rp.lambda) / (al + 1.0));
    double hi = std::pow(e, -al / (al + 1.0));
    if (!(lo < hi)) return std::nullopt;
    const double cap = 1.0 + std::pow(e, 3.0 * al / (al + 1.0));
    auto ok = [&](double r) { return max_on_sphere(pot, e, r) < cap; };
    if (!ok(lo)) return std::nullopt;
    if (ok(hi)) return std::make_pair(lo, hi);
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
        double m = 0.5 * (a + b);
        if (ok(m))
            a = m;
        else
            b = m;
    }
    return std::make_pair(lo, a);
}

double peak_radius(const std::vector<Eigen::Vector3d>& centers) {
    double r = 0.0;
    for (const auto& c : centers) r = std::max(r, c.norm());
    return r;
}

double min_separation(const std::vector<Eigen::Vector3d>& centers) {
    double d = 1e300;
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) d = std::min(d, (centers[i] - centers[j]).norm());
    return d;
}

void check_grid_margin(const UniformGrid& grid, double radius, double eta) {
    if (grid.L < radius + 12.0 / eta) throw GridTooSmall("grid half width must be at least peak radius + 12/eta");
}

ScalarField3D build_sum(const std::vector<Eigen::Vector3d>& centers, const RadialProfile& profile,
                        const UniformGrid& grid) {
    check_peaks(centers, profile, grid);
    ScalarField3D W;
    assemble(centers, {}, profile, grid, &W, nullptr);
    return W;
}

ScalarField3D build_peak(const Eigen::Vector3d& center, const RadialProfile& profile, const UniformGrid& grid) {
    return build_sum({center}, profile, grid);
}

ScalarField3D build_W(const PeakConfig& cfg, const RadialProfile& profile, const UniformGrid& grid) {
    return build_sum(peak_positions(cfg), profile, grid);
}

std::array<ScalarField3D, 3> tangent_basis(const PeakConfig& cfg, const RadialProfile& profile,
                                           const UniformGrid& grid) {
    auto centers = peak_positions(cfg);
    check_peaks(centers, profile, grid);
    std::vector<std::vector<Eigen::Vector3d>> dirs(3);
    for (int j = 1; j <= cfg.K; ++j) {
        double fj = cfg.phi + 2.0 * kPi * j / cfg.K;
        dirs[0].push_back(sphere_point(1.0, cfg.theta, fj));
        dirs[1].push_back(sphere_dtheta(cfg.r, cfg.theta, fj));
        dirs[2].push_back(sphere_dphi(cfg.r, cfg.theta, fj));
    }
    std::vector<ScalarField3D> T;
    assemble(centers, dirs, profile, grid, nullptr, &T);
    return {std::move(T[0]), std::move(T[1]), std::move(T[2])};
}

std::vector<ScalarField3D> translation_basis(const std::vector<Eigen::Vector3d>& centers,
                                             const RadialProfile& profile, const UniformGrid& grid) {
    check_peaks(centers, profile, grid);
    const std::size_t K = centers.size();
    std::vector<std::vector<Eigen::Vector3d>> dirs(3 * K, std::vector<Eigen::Vector3d>(K, Eigen::Vector3d::Zero()));
    for (std::size_t j = 0; j < K; ++j)
        for (int i = 0; i < 3; ++i) dirs[3 * j + i][j] = Eigen::Vector3d::Unit(i);
    std::vector<ScalarField3D> T;
    assemble(centers, dirs, profile, grid, nullptr, &T);
    return T;
}

TangentSpace::TangentSpace(std::vector<ScalarField3D> fields) : fields_(std::move(fields)) {
    const std::size_t m = fields_.size();
    if (m == 0) throw InvalidArgument("empty tangent space");
    duals_.reserve(m);
    for (const auto& f : fields_) duals_.push_back(h1_dual(f));
    gram_.resize(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) gram_(a, b) = integrate_product(fields_[a], duals_[b]);
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
    double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    if (!(lmin >= 1e-10 * lmax)) throw SingularGram("tangent Gram matrix is numerically singular");
    solver_.compute(gram_);
}

Eigen::VectorXd TangentSpace::pairings(const ScalarField3D& f) const {
    Eigen::VectorXd v(dim());
    for (std::size_t d = 0; d < dim(); ++d) v[d] = integrate_product(f, duals_[d]);
    return v;
}

Eigen::VectorXd TangentSpace::coefficients(const ScalarField3D& f) const { return solver_.solve(pairings(f)); }

ScalarField3D TangentSpace::project_normal(const ScalarField3D& f) const {
    ScalarField3D out = f;
    project_inplace(out);
    return out;
}

void TangentSpace::project_inplace(ScalarField3D& f, ScalarField3D* f_dual) const {
    Eigen::VectorXd c = coefficients(f);
    for (std::size_t d = 0; d < dim(); ++d) {
        axpy(-c[d], fields_[d], f);
        if (f_dual) axpy(-c[d], duals_[d], *f_dual);
    }
}

Eigen::Matrix3d gram_matrix(const PeakConfig& cfg, const RadialProfile& profile, const UniformGrid& grid) {
    auto T = tangent_basis(cfg, profile, grid);
    TangentSpace ts({T[0], T[1], T[2]});
    return ts.gram();
}

double overlap(const PeakConfig& cfg, const RadialProfile& profile, const UniformGrid& grid, int j, int k) {
    if (j == k) throw InvalidArgument("overlap needs distinct peaks");
    auto P = peak_positions(cfg);
    if (j < 1 || k < 1 || j > cfg.K || k > cfg.K) throw InvalidArgument("peak index out of range");
    check_peaks(P, profile, grid);
    ScalarField3D Uj = build_peak(P[j - 1], profile, grid);
    ScalarField3D Uk = build_peak(P[k - 1], profile, grid);
    return inner_h1(Uj, Uk);
}

ScalarField3D potential_field(const PotentialSpec& pot, double eps, const UniformGrid& grid) {
    return ScalarField3D::sample(grid, [&](double x, double y, double z) { return pot(eps * Eigen::Vector3d(x, y, z)); });
}

}  // namespace sbp
