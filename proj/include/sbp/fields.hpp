#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace sbp {

// Cube [-L, L)^3 with n points per axis, periodic indexing.
struct UniformGrid {
    double L = 1.0;
    int n = 32;

    UniformGrid() = default;
    UniformGrid(double half_width, int points);

    double spacing() const { return 2.0 * L / n; }
    double coord(int i) const { return -L + spacing() * i; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
    }
    bool operator==(const UniformGrid& o) const { return L == o.L && n == o.n; }
    bool operator!=(const UniformGrid& o) const { return !(*this == o); }
};

// Smallest n >= n_min with 2L/n <= h_max, n divisible by 4 and free of prime factors above 7.
int fft_friendly_n(double L, double h_max, int n_min = 32);

// Real samples in row-major order, x fastest.
class ScalarField3D {
public:
    ScalarField3D() = default;
    explicit ScalarField3D(const UniformGrid& g, double value = 0.0) : grid_(g), v_(g.size(), value) {}

    const UniformGrid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    double& at(int i, int j, int k) { return v_[grid_.index(i, j, k)]; }
    double at(int i, int j, int k) const { return v_[grid_.index(i, j, k)]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    template <class F>
    static ScalarField3D sample(const UniformGrid& g, F&& f) {
        ScalarField3D out(g);
        for (int k = 0; k < g.n; ++k)
            for (int j = 0; j < g.n; ++j)
                for (int i = 0; i < g.n; ++i) out.at(i, j, k) = f(g.coord(i), g.coord(j), g.coord(k));
        return out;
    }

    ScalarField3D& operator+=(const ScalarField3D& o);
    ScalarField3D& operator-=(const ScalarField3D& o);
    ScalarField3D& operator*=(double a);
    bool all_finite() const;

private:
    UniformGrid grid_;
    std::vector<double> v_;
};

ScalarField3D operator+(ScalarField3D a, const ScalarField3D& b);
ScalarField3D operator-(ScalarField3D a, const ScalarField3D& b);
ScalarField3D operator*(double s, ScalarField3D a);
// pointwise product
ScalarField3D product(const ScalarField3D& a, const ScalarField3D& b);
// y += a x
void axpy(double a, const ScalarField3D& x, ScalarField3D& y);

void require_same_grid(const ScalarField3D& a, const ScalarField3D& b);

double integrate(const ScalarField3D& f);
// integral of f g
double integrate_product(const ScalarField3D& f, const ScalarField3D& g);
double norm_l2(const ScalarField3D& f);

// Integral of grad f . grad g + mass f g. A null mass means mass = 1.
double inner_h1(const ScalarField3D& f, const ScalarField3D& g, const ScalarField3D* mass = nullptr);
double norm_h1(const ScalarField3D& f);

ScalarField3D laplacian(const ScalarField3D& f, bool* alias_warning = nullptr);
// Solves (-Laplacian + 1) g = f.
ScalarField3D riesz(const ScalarField3D& f);
// (-Laplacian + 1) f
ScalarField3D h1_dual(const ScalarField3D& f);
// Spectral partial derivative along axis 0, 1 or 2 (Nyquist mode dropped).
ScalarField3D partial(const ScalarField3D& f, int axis);
// h^3/N times the weighted spectral sum of |F|^2; equals integrate(f^2) by Parseval.
double spectral_l2_sq(const ScalarField3D& f);

void dump_field(const ScalarField3D& f, const std::string& path);
ScalarField3D load_field(const std::string& path);

// FFTW planning is not thread-safe; every planner call takes this lock.
std::mutex& fftw_planner_mutex();

// Per-thread FFT workspace for one grid size.
class Spectral {
public:
    explicit Spectral(const UniformGrid& g);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    const UniformGrid& grid() const { return grid_; }
    std::size_t complex_size() const { return nc_; }
    // k^2 per complex coefficient and Parseval weights (1 or 2)
    const std::vector<double>& ksq() const { return ksq_; }
    const std::vector<double>& weights() const { return w_; }
    double wavenumber(int idx) const;

    void forward(const double* in, std::complex<double>* out);
    // destroys `in`; output normalised so backward(forward(f)) = f
    void backward(std::complex<double>* in, double* out);

    // out = IFFT(m * FFT(in)), multiplier indexed like ksq()
    void apply_multiplier(const double* in, const std::vector<double>& m, double* out);
    const std::vector<double>& riesz_multiplier() const { return riesz_; }

    std::complex<double>* scratch() { return buf_; }

private:
    UniformGrid grid_;
    std::size_t nc_ = 0;
    std::vector<double> ksq_, w_, riesz_;
    double* rin_ = nullptr;
    std::complex<double>* buf_ = nullptr;
    void* plan_f_ = nullptr;
    void* plan_b_ = nullptr;
};

std::shared_ptr<Spectral> spectral_for(const UniformGrid& g);

}  // namespace sbp
