#include "matsqrt/baselines.hpp"

#include <cmath>
#include <string>

#include "matsqrt/errors.hpp"

namespace matsqrt::baselines {

std::vector<double> scalar_newton(double m, double u0, std::size_t iters) {
    if (!(m > 0.0) || !(u0 > 0.0)) throw InvalidArgument("scalar_newton: m and u0 must be positive");
    std::vector<double> seq;
    seq.reserve(iters + 1);
    seq.push_back(u0);
    for (std::size_t t = 0; t < iters; ++t) {
        const double u = seq.back();
        seq.push_back(0.5 * (u + m / u));
    }
    return seq;
}

NewtonResult newton_sqrt(const SpdMatrix& m, const NewtonConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw InvalidArgument("newton_sqrt: tol must be positive");
    const linalg::Matrix& mm = m.matrix();
    const double target = cfg.tol * linalg::frobenius_norm(mm);

    NewtonResult out{cfg.init == NewtonInit::M ? m.symmetric() : SymmetricMatrix::identity(m.size()), 0, {}, {}, {}};
    for (std::size_t t = 0;; ++t) {
        const SymmetricMatrix& x = out.x;
        const double residual = linalg::frobenius_norm(mm - linalg::square(x).matrix());
        const double commutator = linalg::frobenius_norm(linalg::matmul(x, mm) - linalg::matmul(mm, x));
        out.iterates.push_back(x);
        out.residuals.push_back(residual);
        out.commutators.push_back(commutator);
        out.iterations = t;
        if (residual <= target) return out;
        if (t >= cfg.max_iters) {
            throw ConvergenceError("newton_sqrt: residual " + std::to_string(residual) + " after " +
                                   std::to_string(t) + " iterations");
        }
        linalg::Matrix next = linalg::solve(x, mm);
        next += x.matrix();
        next *= 0.5;
        out.x = linalg::symmetrize(next);
    }
}

SpdMatrix evd_sqrt(const SpdMatrix& m) {
    const linalg::EigenDecomposition& eig = m.eig();
    const std::size_t n = m.size();
    linalg::EigenDecomposition root;
    root.eigenvalues.resize(n);
    for (std::size_t k = 0; k < n; ++k) root.eigenvalues[k] = std::sqrt(eig.eigenvalues[k]);
    root.eigenvectors = eig.eigenvectors;

    linalg::Matrix scaled(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) scaled(i, k) = eig.eigenvectors(i, k) * root.eigenvalues[k];
    SymmetricMatrix u = linalg::symmetrize(linalg::matmul(scaled, eig.eigenvectors.transposed()));
    return SpdMatrix(std::move(u), std::move(root));
}

} // namespace matsqrt::baselines
