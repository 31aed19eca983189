#include "sbp/krylov.hpp"

#include <cmath>

#include "sbp/errors.hpp"
#include "sbp/kernels.hpp"

namespace sbp {

namespace {

double ip(const DualPair& x, const DualPair& y) { return integrate_product(x.v, y.b); }

void scale_pair(DualPair& x, double s) {
    x.v *= s;
    x.b *= s;
}

// x += s * y on both components
void axpy_pair(double s, const DualPair& y, DualPair& x) {
    axpy(s, y.v, x.v);
    axpy(s, y.b, x.b);
}

struct Cycle {
    double residual;
    int iterations;
    bool converged;
};

// One MINRES cycle from x = 0; the update is added into x.
Cycle minres_cycle(const DualOperator& A, const DualPair& rhs, double tol, int max_iter, ScalarField3D& x) {
    const UniformGrid& grid = rhs.v.grid();
    double beta1 = std::sqrt(std::max(0.0, ip(rhs, rhs)));
    if (!std::isfinite(beta1)) throw KrylovBreakdown("right-hand side is not finite");
    if (beta1 <= tol) return {beta1, 0, true};

    DualPair v = rhs;
    scale_pair(v, 1.0 / beta1);
    DualPair v_prev{ScalarField3D(grid), ScalarField3D(grid)};
    ScalarField3D w(grid), w_prev(grid), w_prev2(grid);

    double c1 = 1.0, s1 = 0.0;  // rotation k-1
    double c2 = 1.0, s2 = 0.0;  // rotation k-2
    double beta = 0.0;          // T(k-1, k)
    double phibar = beta1;

    for (int k = 1; k <= max_iter; ++k) {
        DualPair p = A(v);
        double alpha = ip(v, p);
        axpy_pair(-alpha, v, p);
        if (k > 1) axpy_pair(-beta, v_prev, p);
        double beta_next = std::sqrt(std::max(0.0, ip(p, p)));
        if (!std::isfinite(alpha) || !std::isfinite(beta_next)) throw KrylovBreakdown("Lanczos produced non-finite values");

        double eps_k = s2 * beta;
        double dtil = c2 * beta;
        double delta = c1 * dtil + s1 * alpha;
        double gtil = -s1 * dtil + c1 * alpha;
        double gamma = std::hypot(gtil, beta_next);
        if (!(gamma > 0.0)) throw KrylovBreakdown("operator is singular on the Krylov space");
        double c = gtil / gamma, s = beta_next / gamma;
        double tau = c * phibar;
        phibar = -s * phibar;

        // w_k = (v_k - delta w_{k-1} - eps w_{k-2}) / gamma
        std::swap(w_prev2, w_prev);
        std::swap(w_prev, w);
        w = v.v;
        if (k > 1) axpy(-delta, w_prev, w);
        if (k > 2) axpy(-eps_k, w_prev2, w);
        w *= 1.0 / gamma;
        axpy(tau, w, x);

        double res = std::fabs(phibar);
        if (res <= tol || beta_next <= 1e-14 * beta1) return {res, k, true};

        c2 = c1;
        s2 = s1;
        c1 = c;
        s1 = s;
        beta = beta_next;
        std::swap(v_prev, v);
        v = std::move(p);
        scale_pair(v, 1.0 / beta_next);
    }
    return {std::fabs(phibar), max_iter, false};
}

}  // namespace

KrylovResult minres_h1(const DualOperator& A, const DualPair& rhs, double tol, int max_iter, int max_restarts) {
    require_same_grid(rhs.v, rhs.b);
    KrylovResult out;
    out.x = ScalarField3D(rhs.v.grid());
    DualPair r = rhs;
    for (int cycle = 0;; ++cycle) {
        Cycle c = minres_cycle(A, r, tol, max_iter, out.x);
        out.iterations += c.iterations;
        out.residual = c.residual;
        if (c.converged) {
            out.converged = true;
            break;
        }
        if (cycle >= max_restarts) break;
        // true residual for the restart
        DualPair xd{out.x, h1_dual(out.x)};
        DualPair ax = A(xd);
        r = rhs;
        axpy_pair(-1.0, ax, r);
        ++out.restarts;
        out.residual = std::sqrt(std::max(0.0, ip(r, r)));
        if (out.residual <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace sbp
