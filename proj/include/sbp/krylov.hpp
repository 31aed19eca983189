#pragma once

#include <functional>

#include "sbp/fields.hpp"

namespace sbp {

// A field together with its image under (-Laplacian + 1).
struct DualPair {
    ScalarField3D v;
    ScalarField3D b;
};

// Self-adjoint operator in the H1 inner product. Receives (v, Bv) and returns (Av, B Av).
using DualOperator = std::function<DualPair(const DualPair&)>;

struct KrylovResult {
    ScalarField3D x;
    double residual = 0.0;  // H1 norm of b - A x
    int iterations = 0;
    int restarts = 0;
    bool converged = false;
};

// MINRES for A x = rhs with <f, g> = int f (Bg). Stops once the H1 residual is below tol.
KrylovResult minres_h1(const DualOperator& A, const DualPair& rhs, double tol, int max_iter, int max_restarts);

}  // namespace sbp
