#include "sbp/fields.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>

#include "sbp/errors.hpp"
#include "sbp/kernels.hpp"

namespace sbp {

int fft_friendly_n(double L, double h_max, int n_min) {
    if (!(L > 0.0) || !(h_max > 0.0)) throw InvalidArgument("grid sizing needs positive L and h_max");
    int n = std::max(n_min, static_cast<int>(std::ceil(2.0 * L / h_max)));
    for (;; ++n) {
        if (n % 4 != 0) continue;
        int m = n;
        for (int f : {2, 3, 5, 7})
            while (m % f == 0) m /= f;
        if (m == 1) return n;
    }
}

namespace {
constexpr double kPi = 3.14159265358979323846;
}

UniformGrid::UniformGrid(double half_width, int points) : L(half_width), n(points) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw InvalidArgument("grid half width must be positive");
    if (points < 32 || points % 2 != 0) throw InvalidArgument("grid n must be even and at least 32");
}

ScalarField3D& ScalarField3D::operator+=(const ScalarField3D& o) {
    require_same_grid(*this, o);
    kernels::axpy(1.0, o.data(), data(), size());
    return *this;
}

ScalarField3D& ScalarField3D::operator-=(const ScalarField3D& o) {
    require_same_grid(*this, o);
    kernels::axpy(-1.0, o.data(), data(), size());
    return *this;
}

ScalarField3D& ScalarField3D::operator*=(double a) {
    kernels::scale(a, data(), size());
    return *this;
}

bool ScalarField3D::all_finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

ScalarField3D operator+(ScalarField3D a, const ScalarField3D& b) { return a += b; }
ScalarField3D operator-(ScalarField3D a, const ScalarField3D& b) { return a -= b; }
ScalarField3D operator*(double s, ScalarField3D a) { return a *= s; }

ScalarField3D product(const ScalarField3D& a, const ScalarField3D& b) {
    require_same_grid(a, b);
    ScalarField3D out(a.grid());
    kernels::mul(a.data(), b.data(), out.data(), a.size());
    return out;
}

void axpy(double a, const ScalarField3D& x, ScalarField3D& y) {
    require_same_grid(x, y);
    kernels::axpy(a, x.data(), y.data(), x.size());
}

void require_same_grid(const ScalarField3D& a, const ScalarField3D& b) {
    if (a.grid() != b.grid() || a.size() != b.size()) throw GridMismatch("fields live on different grids");
}

double integrate(const ScalarField3D& f) {
    double h = f.grid().spacing();
    return h * h * h * kernels::sum(f.data(), f.size());
}

double integrate_product(const ScalarField3D& f, const ScalarField3D& g) {
    require_same_grid(f, g);
    double h = f.grid().spacing();
    return h * h * h * kernels::dot(f.data(), g.data(), f.size());
}

double norm_l2(const ScalarField3D& f) { return std::sqrt(integrate_product(f, f)); }

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

Spectral::Spectral(const UniformGrid& g) : grid_(g) {
    const int n = g.n;
    const int nh = n / 2 + 1;
    nc_ = static_cast<std::size_t>(n) * n * nh;
    ksq_.resize(nc_);
    w_.resize(nc_);
    riesz_.resize(nc_);
    for (int kz = 0; kz < n; ++kz)
        for (int ky = 0; ky < n; ++ky)
            for (int kx = 0; kx < nh; ++kx) {
                std::size_t idx = static_cast<std::size_t>(kx) + static_cast<std::size_t>(nh) * (ky + static_cast<std::size_t>(n) * kz);
                double ax = wavenumber(kx), ay = wavenumber(ky), az = wavenumber(kz);
                ksq_[idx] = ax * ax + ay * ay + az * az;
                w_[idx] = (kx == 0 || kx == n / 2) ? 1.0 : 2.0;
                riesz_[idx] = 1.0 / (1.0 + ksq_[idx]);
            }
    rin_ = fftw_alloc_real(g.size());
    buf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nc_));
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_f_ = fftw_plan_dft_r2c_3d(n, n, n, rin_, reinterpret_cast<fftw_complex*>(buf_), FFTW_ESTIMATE);
    plan_b_ = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(buf_), rin_, FFTW_ESTIMATE);
}

Spectral::~Spectral() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_f_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_b_));
    fftw_free(rin_);
    fftw_free(buf_);
}

double Spectral::wavenumber(int idx) const {
    const int n = grid_.n;
    int j = idx <= n / 2 ? idx : idx - n;
    return 2.0 * kPi * j / (2.0 * grid_.L);
}

void Spectral::forward(const double* in, std::complex<double>* out) {
    std::memcpy(rin_, in, grid_.size() * sizeof(double));
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_f_), rin_, reinterpret_cast<fftw_complex*>(out));
}

void Spectral::backward(std::complex<double>* in, double* out) {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_b_), reinterpret_cast<fftw_complex*>(in), rin_);
    const double s = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) out[i] = rin_[i] * s;
}

void Spectral::apply_multiplier(const double* in, const std::vector<double>& m, double* out) {
    forward(in, buf_);
    kernels::cscale(reinterpret_cast<double*>(buf_), m.data(), nc_);
    backward(buf_, out);
}

std::shared_ptr<Spectral> spectral_for(const UniformGrid& g) {
    // callers may still hold evicted entries, hence shared ownership
    thread_local std::map<std::pair<int, double>, std::shared_ptr<Spectral>> cache;
    auto key = std::make_pair(g.n, g.L);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() >= 4) cache.clear();
    auto& slot = cache[key];
    slot = std::make_shared<Spectral>(g);
    return slot;
}

namespace {

// h^3/N * sum_k w m(k) Re(F conj(G))
double spectral_pairing(Spectral& sp, const ScalarField3D& f, const ScalarField3D& g, bool with_ksq) {
    const std::size_t nc = sp.complex_size();
    std::vector<std::complex<double>> F(nc), G(nc);
    sp.forward(f.data(), F.data());
    sp.forward(g.data(), G.data());
    std::vector<double> terms(nc);
    const auto& w = sp.weights();
    const auto& k2 = sp.ksq();
    for (std::size_t i = 0; i < nc; ++i) {
        double re = F[i].real() * G[i].real() + F[i].imag() * G[i].imag();
        terms[i] = with_ksq ? (w[i] * k2[i]) * re : w[i] * re;
    }
    const double h = f.grid().spacing();
    return h * h * h * kernels::sum(terms.data(), nc) / static_cast<double>(f.size());
}

}  // namespace

double inner_h1(const ScalarField3D& f, const ScalarField3D& g, const ScalarField3D* mass) {
    require_same_grid(f, g);
    auto sp_hold = spectral_for(f.grid());
    Spectral& sp = *sp_hold;
    double grad = spectral_pairing(sp, f, g, true);
    if (!mass) return grad + integrate_product(f, g);
    require_same_grid(f, *mass);
    ScalarField3D fg = product(f, g);
    return grad + integrate_product(fg, *mass);
}

double norm_h1(const ScalarField3D& f) { return std::sqrt(inner_h1(f, f)); }

double spectral_l2_sq(const ScalarField3D& f) {
    return spectral_pairing(*spectral_for(f.grid()), f, f, false);
}

ScalarField3D laplacian(const ScalarField3D& f, bool* alias_warning) {
    auto sp_hold = spectral_for(f.grid());
    Spectral& sp = *sp_hold;
    const std::size_t nc = sp.complex_size();
    std::complex<double>* buf = sp.scratch();
    sp.forward(f.data(), buf);
    if (alias_warning) {
        const double h = f.grid().spacing();
        const double kcut = 0.8 * kPi / h;
        double total = 0.0, high = 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            double e = sp.weights()[i] * std::norm(buf[i]);
            total += e;
            if (sp.ksq()[i] > kcut * kcut) high += e;
        }
        *alias_warning = total > 0.0 && high > 1e-6 * total;
    }
    std::vector<double> m(nc);
    for (std::size_t i = 0; i < nc; ++i) m[i] = -sp.ksq()[i];
    kernels::cscale(reinterpret_cast<double*>(buf), m.data(), nc);
    ScalarField3D out(f.grid());
    sp.backward(buf, out.data());
    return out;
}

ScalarField3D riesz(const ScalarField3D& f) {
    auto sp_hold = spectral_for(f.grid());
    Spectral& sp = *sp_hold;
    ScalarField3D out(f.grid());
    sp.apply_multiplier(f.data(), sp.riesz_multiplier(), out.data());
    return out;
}

ScalarField3D h1_dual(const ScalarField3D& f) {
    auto sp_hold = spectral_for(f.grid());
    Spectral& sp = *sp_hold;
    std::vector<double> m(sp.complex_size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 1.0 + sp.ksq()[i];
    ScalarField3D out(f.grid());
    sp.apply_multiplier(f.data(), m, out.data());
    return out;
}

ScalarField3D partial(const ScalarField3D& f, int axis) {
    if (axis < 0 || axis > 2) throw InvalidArgument("axis must be 0, 1 or 2");
    auto sp_hold = spectral_for(f.grid());
    Spectral& sp = *sp_hold;
    const int n = f.grid().n, nh = n / 2 + 1;
    std::complex<double>* buf = sp.scratch();
    sp.forward(f.data(), buf);
    for (int kz = 0; kz < n; ++kz)
        for (int ky = 0; ky < n; ++ky)
            for (int kx = 0; kx < nh; ++kx) {
                int c = axis == 0 ? kx : (axis == 1 ? ky : kz);
                std::size_t idx = static_cast<std::size_t>(kx) + static_cast<std::size_t>(nh) * (ky + static_cast<std::size_t>(n) * kz);
                double k = (c == n / 2) ? 0.0 : sp.wavenumber(c);
                buf[idx] *= std::complex<double>(0.0, k);
            }
    ScalarField3D out(f.grid());
    sp.backward(buf, out.data());
    return out;
}

namespace {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

}  // namespace

void dump_field(const ScalarField3D& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path);
    out.write("SBPF1", 5);
    std::int64_t n = to_little<std::int64_t>(f.grid().n);
    double L = to_little(f.grid().L);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&L), 8);
    for (std::size_t i = 0; i < f.size(); ++i) {
        double v = to_little(f[i]);
        out.write(reinterpret_cast<const char*>(&v), 8);
    }
}

ScalarField3D load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "SBPF1", 5) != 0) throw ParseError(0, "magic", "not an SBPF1 field dump");
    std::int64_t n;
    double L;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&L), 8);
    if (!in) throw ParseError(0, "header", "truncated field dump");
    UniformGrid g(to_little(L), static_cast<int>(to_little(n)));
    ScalarField3D f(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        f[i] = to_little(v);
    }
    if (!in) throw ParseError(0, "values", "truncated field dump");
    return f;
}

}  // namespace sbp
