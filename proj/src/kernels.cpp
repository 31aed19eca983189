#include "sbp/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace sbp::kernels {

namespace {

double leaf_sum(const double* x, std::size_t n) {
    double a[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a[0] += x[i];
        a[1] += x[i + 1];
        a[2] += x[i + 2];
        a[3] += x[i + 3];
    }
    for (std::size_t j = 0; i + j < n; ++j) a[j] += x[i + j];
    return (a[0] + a[1]) + (a[2] + a[3]);
}

double sum_scalar(const double* x, std::size_t n) {
    if (n <= detail::kLeaf) return leaf_sum(x, n);
    std::size_t m = detail::split_point(n);
    return sum_scalar(x, m) + sum_scalar(x + m, n - m);
}

double leaf_dot(const double* x, const double* y, std::size_t n) {
    double a[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int j = 0; j < 4; ++j) {
            double t = x[i + j] * y[i + j];
            a[j] += t;
        }
    }
    for (std::size_t j = 0; i + j < n; ++j) {
        double t = x[i + j] * y[i + j];
        a[j] += t;
    }
    return (a[0] + a[1]) + (a[2] + a[3]);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    if (n <= detail::kLeaf) return leaf_dot(x, y, n);
    std::size_t m = detail::split_point(n);
    return dot_scalar(x, y, m) + dot_scalar(x + m, y + m, n - m);
}

void mul_scalar(const double* x, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double t = a * x[i];
        y[i] = y[i] + t;
    }
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void cscale_scalar(double* c, const double* m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        c[2 * i] *= m[i];
        c[2 * i + 1] *= m[i];
    }
}

void signed_pow_scalar(const double* x, double p, double* y, std::size_t n) {
    if (p == 2.0) {
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * std::fabs(x[i]);
    } else if (p == 3.0) {
        for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] * x[i]) * x[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] = std::copysign(std::pow(std::fabs(x[i]), p), x[i]);
    }
}

void abs_pow_scalar(const double* x, double q, double* y, std::size_t n) {
    if (q == 1.0) {
        for (std::size_t i = 0; i < n; ++i) y[i] = std::fabs(x[i]);
    } else if (q == 2.0) {
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i];
    } else if (q == 1.5) {
        for (std::size_t i = 0; i < n; ++i) {
            double a = std::fabs(x[i]);
            y[i] = a * std::sqrt(a);
        }
    } else if (q == 3.0) {
        for (std::size_t i = 0; i < n; ++i) {
            double a = std::fabs(x[i]);
            y[i] = (a * a) * a;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double a = std::fabs(x[i]);
            y[i] = a == 0.0 ? 0.0 : std::pow(a, q);
        }
    }
}

const Table kScalar{"scalar",          sum_scalar,   dot_scalar,        mul_scalar,
                    axpy_scalar,       scale_scalar, cscale_scalar,     signed_pow_scalar,
                    abs_pow_scalar};

const Table& select_table() {
    const char* env = std::getenv("SBP_FORCE_SCALAR");
    if (env && std::strcmp(env, "0") != 0 && env[0] != '\0') return kScalar;
    const Table* v = avx2_table();
    return v ? *v : kScalar;
}

}  // namespace

namespace detail {
const Table& avx2_impl();
}

const Table& scalar_table() { return kScalar; }

const Table* avx2_table() {
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &detail::avx2_impl();
    return nullptr;
}

const Table& active() {
    static const Table& t = select_table();
    return t;
}

}  // namespace sbp::kernels
