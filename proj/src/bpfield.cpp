#include "sbp/bpfield.hpp"

#include <fftw3.h>

#include <cmath>
#include <algorithm>
#include <cstring>
#include <memory>

#include "sbp/errors.hpp"
#include "sbp/kernels.hpp"

namespace sbp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

BPParams::BPParams(double a_, double eps_) : a(a_), eps(eps_) {
    if (!(a_ > 0.0)) throw InvalidArgument("BP length a must be positive");
    if (!(eps_ > 0.0 && eps_ < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
}

double kappa(double rdist, double a) {
    if (rdist <= a * 1e-6) return 1.0 / a - rdist / (2.0 * a * a) + rdist * rdist / (6.0 * a * a * a);
    return -std::expm1(-rdist / a) / rdist;
}

double kappa_eps(double rdist, const BPParams& p) { return kappa(rdist, p.a / p.eps) / p.eps; }

double kappa_multiplier(double k, const BPParams& p) {
    double b = p.a / p.eps;
    return (4.0 * kPi / p.eps) / (k * k * (1.0 + b * b * k * k));
}

BPSolver::BPSolver(const UniformGrid& grid, const BPParams& params, int coarsen)
    : grid_(grid), params_(params), coarsen_(coarsen) {
    if (coarsen != 1 && coarsen != 2) throw InvalidArgument("coarsening factor must be 1 or 2");
    const int n = grid.n;
    if (coarsen == 2) {
        if (n % 4 != 0) throw InvalidArgument("coarsened BP solve needs n divisible by 4");
        inner_ = std::make_unique<BPSolver>(UniformGrid(grid.L, n / 2), params, 1);
        m_ = inner_->padded_n();
        return;
    }
    m_ = 2 * n;
    const int m = m_, mh = m / 2 + 1;
    const std::size_t nreal = static_cast<std::size_t>(m) * m * m;
    nc_ = static_cast<std::size_t>(m) * m * mh;
    rbuf_ = fftw_alloc_real(nreal);
    cbuf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nc_));
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_f_ = fftw_plan_dft_r2c_3d(m, m, m, rbuf_, reinterpret_cast<fftw_complex*>(cbuf_), FFTW_ESTIMATE);
        plan_b_ = fftw_plan_dft_c2r_3d(m, m, m, reinterpret_cast<fftw_complex*>(cbuf_), rbuf_, FFTW_ESTIMATE);
    }
    // sampled kernel on the doubled box, offsets folded to [-n, n)
    const double h = grid.spacing();
    const double w = h * h * h / static_cast<double>(nreal);
    std::vector<double> axis(m);
    for (int i = 0; i < m; ++i) {
        int d = i <= n ? i : i - m;
        axis[i] = h * d;
    }
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j) {
            double* row = rbuf_ + static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k);
            double yz = axis[j] * axis[j] + axis[k] * axis[k];
            for (int i = 0; i < m; ++i) row[i] = w * kappa_eps(std::sqrt(axis[i] * axis[i] + yz), params);
        }
    fftw_execute(static_cast<fftw_plan>(plan_f_));
    khat_.resize(nc_);
    for (std::size_t i = 0; i < nc_; ++i) khat_[i] = cbuf_[i].real();
}

BPSolver::~BPSolver() {
    if (!plan_f_) return;
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_f_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_b_));
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

void BPSolver::convolve(const double* source, double* out) {
    if (inner_) {
        convolve_coarse(source, out);
        return;
    }
    const int n = grid_.n, m = m_;
    const std::size_t nreal = static_cast<std::size_t>(m) * m * m;
    std::memset(rbuf_, 0, nreal * sizeof(double));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            std::memcpy(rbuf_ + static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k),
                        source + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k),
                        n * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_f_));
    kernels::cscale(reinterpret_cast<double*>(cbuf_), khat_.data(), nc_);
    fftw_execute(static_cast<fftw_plan>(plan_b_));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            std::memcpy(out + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k),
                        rbuf_ + static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k),
                        n * sizeof(double));
}

void BPSolver::convolve_coarse(const double* source, double* out) {
    auto fs_hold = spectral_for(grid_);
    Spectral& fs = *fs_hold;
    const UniformGrid cg = inner_->grid();
    auto cs_hold = spectral_for(cg);
    Spectral& cs = *cs_hold;
    const int n = grid_.n, nc = cg.n, nh = n / 2 + 1, nch = nc / 2 + 1;
    const double ratio = static_cast<double>(nc) * nc * nc / (static_cast<double>(n) * n * n);
    // coarse wavenumbers strictly below the coarse Nyquist, mapped to fine indices
    std::vector<int> map(nc, -1);
    for (int q = 0; q < nc; ++q) {
        if (q == nc / 2) continue;
        map[q] = q < nc / 2 ? q : q - nc + n;
    }
    std::vector<std::complex<double>> F(fs.complex_size()), C(cs.complex_size());
    std::vector<double> coarse(cg.size()), phic(cg.size());
    fs.forward(source, F.data());
    std::fill(C.begin(), C.end(), std::complex<double>(0.0, 0.0));
    for (int kz = 0; kz < nc; ++kz) {
        if (map[kz] < 0) continue;
        for (int ky = 0; ky < nc; ++ky) {
            if (map[ky] < 0) continue;
            const std::size_t fo = (static_cast<std::size_t>(map[kz]) * n + map[ky]) * nh;
            const std::size_t co = (static_cast<std::size_t>(kz) * nc + ky) * nch;
            for (int kx = 0; kx < nc / 2; ++kx) C[co + kx] = ratio * F[fo + kx];
        }
    }
    cs.backward(C.data(), coarse.data());
    inner_->convolve(coarse.data(), phic.data());
    cs.forward(phic.data(), C.data());
    std::fill(F.begin(), F.end(), std::complex<double>(0.0, 0.0));
    for (int kz = 0; kz < nc; ++kz) {
        if (map[kz] < 0) continue;
        for (int ky = 0; ky < nc; ++ky) {
            if (map[ky] < 0) continue;
            const std::size_t fo = (static_cast<std::size_t>(map[kz]) * n + map[ky]) * nh;
            const std::size_t co = (static_cast<std::size_t>(kz) * nc + ky) * nch;
            for (int kx = 0; kx < nc / 2; ++kx) F[fo + kx] = C[co + kx] / ratio;
        }
    }
    fs.backward(F.data(), out);
}

ScalarField3D BPSolver::potential(const ScalarField3D& source) {
    if (source.grid() != grid_) throw GridMismatch("source grid differs from solver grid");
    ScalarField3D out(grid_);
    convolve(source.data(), out.data());
    return out;
}

ScalarField3D BPSolver::potential_of_product(const ScalarField3D& a, const ScalarField3D& b) {
    return potential(product(a, b));
}

BPSolver& bp_solver_for(const UniformGrid& grid, const BPParams& params, int coarsen) {
    thread_local std::unique_ptr<BPSolver> cached;
    if (!cached || cached->grid() != grid || cached->params().a != params.a || cached->params().eps != params.eps ||
        cached->coarsen() != coarsen) {
        cached.reset();
        cached = std::make_unique<BPSolver>(grid, params, coarsen);
    }
    return *cached;
}

namespace {

// the source must have decayed at the box faces for the free-space result to mean anything
void check_margin(const ScalarField3D& s) {
    const int n = s.grid().n;
    double inner = 0.0, face = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) inner = std::max(inner, std::fabs(s[i]));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                bool edge = i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1;
                if (edge) face = std::max(face, std::fabs(s.at(i, j, k)));
            }
    if (face > 1e-6 * inner) throw GridTooSmall("source has not decayed at the box faces");
}

}  // namespace

ScalarField3D solve_potential_spectral(const ScalarField3D& source, const BPParams& params) {
    check_margin(source);
    return bp_solver_for(source.grid(), params).potential(source);
}

ScalarField3D solve_potential_direct(const ScalarField3D& source, const BPParams& params) {
    const UniformGrid& g = source.grid();
    const int n = g.n;
    if (n > 48) throw GridTooLarge("direct convolution is limited to n <= 48");
    const double h = g.spacing();
    // table indexed by absolute offsets
    std::vector<double> table(static_cast<std::size_t>(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                table[g.index(i, j, k)] = h * h * h * kappa_eps(h * std::sqrt(double(i * i + j * j + k * k)), params);
    ScalarField3D out(g);
    std::vector<double> row(n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int kk = 0; kk < n; ++kk)
                    for (int jj = 0; jj < n; ++jj) {
                        const double* trow = &table[g.index(0, std::abs(j - jj), std::abs(k - kk))];
                        const double* srow = &source.data()[g.index(0, jj, kk)];
                        for (int ii = 0; ii < n; ++ii) acc += trow[std::abs(i - ii)] * srow[ii];
                    }
                out.at(i, j, k) = acc;
            }
    return out;
}

double quad_form(const ScalarField3D& u1, const ScalarField3D& u2, const ScalarField3D& u3,
                 const ScalarField3D& u4, const BPParams& params) {
    require_same_grid(u1, u2);
    require_same_grid(u1, u3);
    require_same_grid(u1, u4);
    ScalarField3D phi = bp_solver_for(u1.grid(), params).potential(product(u1, u2));
    ScalarField3D w = product(u3, u4);
    return integrate_product(phi, w);
}

}  // namespace sbp
