#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "matsqrt/linalg.hpp"

namespace matsqrt::random {

using Rng = std::mt19937_64;

// Independent generator for (seed, index); results do not depend on the
// order in which indices are visited.
Rng substream(std::uint64_t seed, std::uint64_t index);

linalg::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);

// (A + A^T)/2 for Gaussian A.
linalg::SymmetricMatrix gaussian_symmetric(std::size_t n, Rng& rng);

// Q factor of a Gaussian matrix, with the sign convention diag(R) > 0 so that
// Q is a deterministic function of the generator state.
linalg::Matrix random_orthogonal(std::size_t n, Rng& rng);

// Q diag(d) Q^T, symmetrized.
linalg::SymmetricMatrix with_spectrum(const linalg::Matrix& q, std::span<const double> d);

} // namespace matsqrt::random
