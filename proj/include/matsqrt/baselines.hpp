#pragma once

#include <cstddef>
#include <vector>

#include "matsqrt/linalg.hpp"

namespace matsqrt::baselines {

using linalg::SpdMatrix;
using linalg::SymmetricMatrix;

// Heron/Newton iterates u_{t+1} = (u_t + m / u_t) / 2; returns u_0 .. u_iters.
std::vector<double> scalar_newton(double m, double u0, std::size_t iters);

// Starting points that commute with M, so X^{-1} M = M X^{-1} in exact arithmetic.
enum class NewtonInit { M, Identity };

struct NewtonConfig {
    NewtonInit init = NewtonInit::Identity;
    double tol = 1e-12;          // stop when ||M - X^2||_F <= tol * ||M||_F
    std::size_t max_iters = 100;
};

struct NewtonResult {
    SymmetricMatrix x;
    std::size_t iterations = 0;
    std::vector<SymmetricMatrix> iterates; // X_0 .. X_iterations
    std::vector<double> residuals;         // ||M - X_t^2||_F
    std::vector<double> commutators;       // ||X_t M - M X_t||_F
};

// Unstabilized matrix Newton iteration X_{t+1} = (X_t + X_t^{-1} M) / 2,
// symmetrized every step. This is the representative "Newton variant" used
// in comparisons. Throws SingularMatrix if an iterate cannot be inverted and
// ConvergenceError when max_iters is reached.
NewtonResult newton_sqrt(const SpdMatrix& m, const NewtonConfig& cfg = {});

// V diag(sqrt(lambda)) V^T from the eigendecomposition of M. Ground truth for
// every other solver.
SpdMatrix evd_sqrt(const SpdMatrix& m);

} // namespace matsqrt::baselines
