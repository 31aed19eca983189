#include <immintrin.h>

#include <cmath>

#include "sbp/kernels.hpp"

namespace sbp::kernels {

namespace {

double leaf_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double a[4];
    _mm256_store_pd(a, acc);
    for (std::size_t j = 0; i + j < n; ++j) a[j] += x[i + j];
    return (a[0] + a[1]) + (a[2] + a[3]);
}

double sum_avx2(const double* x, std::size_t n) {
    if (n <= detail::kLeaf) return leaf_sum(x, n);
    std::size_t m = detail::split_point(n);
    return sum_avx2(x, m) + sum_avx2(x + m, n - m);
}

double leaf_dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, t);
    }
    alignas(32) double a[4];
    _mm256_store_pd(a, acc);
    for (std::size_t j = 0; i + j < n; ++j) {
        double t = x[i + j] * y[i + j];
        a[j] += t;
    }
    return (a[0] + a[1]) + (a[2] + a[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    if (n <= detail::kLeaf) return leaf_dot(x, y, n);
    std::size_t m = detail::split_point(n);
    return dot_avx2(x, y, m) + dot_avx2(x + m, y + m, n - m);
}

void mul_avx2(const double* x, const double* y, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) z[i] = x[i] * y[i];
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
    }
    for (; i < n; ++i) {
        double t = a * x[i];
        y[i] = y[i] + t;
    }
}

void scale_avx2(double a, double* x, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void cscale_avx2(double* c, const double* m, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d vm = _mm256_set_pd(m[i + 1], m[i + 1], m[i], m[i]);
        _mm256_storeu_pd(c + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(c + 2 * i), vm));
    }
    for (; i < n; ++i) {
        c[2 * i] *= m[i];
        c[2 * i + 1] *= m[i];
    }
}

inline __m256d abs_mask() { return _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL)); }

void signed_pow_avx2(const double* x, double p, double* y, std::size_t n) {
    if (p != 2.0 && p != 3.0) {
        scalar_table().signed_pow(x, p, y, n);
        return;
    }
    std::size_t i = 0;
    if (p == 2.0) {
        for (; i + 4 <= n; i += 4) {
            __m256d v = _mm256_loadu_pd(x + i);
            _mm256_storeu_pd(y + i, _mm256_mul_pd(v, _mm256_and_pd(v, abs_mask())));
        }
        for (; i < n; ++i) y[i] = x[i] * std::fabs(x[i]);
    } else {
        for (; i + 4 <= n; i += 4) {
            __m256d v = _mm256_loadu_pd(x + i);
            _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_mul_pd(v, v), v));
        }
        for (; i < n; ++i) y[i] = (x[i] * x[i]) * x[i];
    }
}

void abs_pow_avx2(const double* x, double q, double* y, std::size_t n) {
    if (q != 1.0 && q != 2.0 && q != 1.5 && q != 3.0) {
        scalar_table().abs_pow(x, q, y, n);
        return;
    }
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_and_pd(_mm256_loadu_pd(x + i), abs_mask());
        __m256d r;
        if (q == 1.0)
            r = a;
        else if (q == 2.0)
            r = _mm256_mul_pd(a, a);
        else if (q == 1.5)
            r = _mm256_mul_pd(a, _mm256_sqrt_pd(a));
        else
            r = _mm256_mul_pd(_mm256_mul_pd(a, a), a);
        _mm256_storeu_pd(y + i, r);
    }
    if (i < n) scalar_table().abs_pow(x + i, q, y + i, n - i);
}

const Table kAvx2{"avx2",          sum_avx2,   dot_avx2,        mul_avx2,    axpy_avx2,
                  scale_avx2,      cscale_avx2, signed_pow_avx2, abs_pow_avx2};

}  // namespace

namespace detail {
const Table& avx2_impl() { return kAvx2; }
}  // namespace detail

}  // namespace sbp::kernels
