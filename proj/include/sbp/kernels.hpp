#pragma once

#include <cstddef>

// Pointwise and reduction kernels on contiguous double arrays.
// Two implementations exist: a portable scalar reference and an AVX2 one.
// Both follow the same operation order, so results agree bit for bit.
namespace sbp::kernels {

struct Table {
    const char* name;
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    void (*mul)(const double* x, const double* y, double* z, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    void (*scale)(double a, double* x, std::size_t n);
    // c[i] *= m[i] where c holds interleaved complex pairs
    void (*cscale)(double* c, const double* m, std::size_t ncomplex);
    // y = sign(x)|x|^p
    void (*signed_pow)(const double* x, double p, double* y, std::size_t n);
    // y = |x|^q, with 0^q = 0 for q > 0
    void (*abs_pow)(const double* x, double q, double* y, std::size_t n);
};

const Table& scalar_table();
// nullptr when the CPU lacks AVX2/FMA
const Table* avx2_table();
// Selected once per process. SBP_FORCE_SCALAR=1 forces the scalar path.
const Table& active();

inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void mul(const double* x, const double* y, double* z, std::size_t n) { active().mul(x, y, z, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }
inline void scale(double a, double* x, std::size_t n) { active().scale(a, x, n); }
inline void cscale(double* c, const double* m, std::size_t n) { active().cscale(c, m, n); }
inline void signed_pow(const double* x, double p, double* y, std::size_t n) { active().signed_pow(x, p, y, n); }
inline void abs_pow(const double* x, double q, double* y, std::size_t n) { active().abs_pow(x, q, y, n); }

namespace detail {
// Leaf size and split rule shared by both implementations.
constexpr std::size_t kLeaf = 64;
inline std::size_t split_point(std::size_t n) { return (n / 8) * 4; }
}  // namespace detail

}  // namespace sbp::kernels
