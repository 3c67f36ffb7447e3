#include "matsqrt/random.hpp"

#include <cmath>
#include <vector>

namespace matsqrt::random {

Rng substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

linalg::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    linalg::Matrix a(rows, cols);
    for (double& v : a.data()) v = normal(rng);
    return a;
}

linalg::SymmetricMatrix gaussian_symmetric(std::size_t n, Rng& rng) {
    return linalg::SymmetricMatrix(gaussian_matrix(n, n, rng));
}

linalg::Matrix random_orthogonal(std::size_t n, Rng& rng) {
    linalg::Matrix q = gaussian_matrix(n, n, rng);
    // Modified Gram-Schmidt with one reorthogonalization pass. Column norms
    // become the (positive) diagonal of R.
    for (std::size_t j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += q(i, k) * q(i, j);
                for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += q(i, j) * q(i, j);
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= norm;
    }
    return q;
}

linalg::SymmetricMatrix with_spectrum(const linalg::Matrix& q, std::span<const double> d) {
    const std::size_t n = q.rows();
    linalg::Matrix qd(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) qd(i, j) = q(i, j) * d[j];
    return linalg::symmetrize(linalg::matmul(qd, q.transposed()));
}

} // namespace matsqrt::random
