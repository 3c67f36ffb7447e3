#include <doctest.h>

#include <cmath>
#include <vector>

#include "matsqrt/errors.hpp"
#include "matsqrt/linalg.hpp"
#include "matsqrt/random.hpp"
#include "oracles.hpp"

using namespace matsqrt;
using namespace matsqrt::linalg;

namespace {

SymmetricMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
    random::Rng rng(seed);
    return random::gaussian_symmetric(n, rng);
}

SpdMatrix random_spd_with(std::size_t n, double kappa, std::uint64_t seed) {
    random::Rng rng(seed);
    const Matrix q = random::random_orthogonal(n, rng);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = n == 1 ? 1.0 : std::pow(kappa, -double(i) / double(n - 1));
    return SpdMatrix(random::with_spectrum(q, d));
}

} // namespace

TEST_CASE("matrix construction and arithmetic") {
    const Matrix a{{1, 2}, {3, 4}};
    CHECK(a.rows() == 2);
    CHECK(a(1, 0) == 3);
    CHECK(a.transposed() == Matrix{{1, 3}, {2, 4}});
    CHECK(a + a == 2.0 * a);
    CHECK(a - a == Matrix(2, 2));
    CHECK(Matrix::identity(2) == Matrix::diagonal({1.0, 1.0}));
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), DimensionError);
    Matrix b(2, 3);
    CHECK_THROWS_AS(b += a, DimensionError);
    CHECK_THROWS_AS(matmul(a, b.transposed()), DimensionError);
}

TEST_CASE("symmetric matrix symmetrizes and validates") {
    const SymmetricMatrix s(Matrix{{1, 2}, {4, 3}});
    CHECK(s(0, 1) == 3);
    CHECK(s(1, 0) == 3);
    CHECK_THROWS_AS(SymmetricMatrix(Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(SymmetricMatrix(Matrix(0, 0)), DimensionError);
    CHECK_THROWS_AS(SymmetricMatrix(Matrix{{1, NAN}, {0, 1}}), InvalidArgument);
    CHECK_THROWS_AS(SymmetricMatrix(Matrix{{INFINITY}}), InvalidArgument);
}

TEST_CASE("matmul agrees with the reference product") {
    random::Rng rng(3);
    const Matrix a = random::gaussian_matrix(5, 7, rng);
    const Matrix b = random::gaussian_matrix(7, 4, rng);
    CHECK(oracle::max_abs_diff(matmul(a, b), oracle::product(a, b)) <= 1e-13);
}

TEST_CASE("square is bitwise the full product and exactly symmetric") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SymmetricMatrix u = random_symmetric(9, seed);
        const SymmetricMatrix s = square(u);
        CHECK(s.matrix() == matmul(u, u));
        CHECK(s.matrix() == s.matrix().transposed());
    }
}

TEST_CASE("products of exactly symmetric matrices are mirror images") {
    const SymmetricMatrix u = random_symmetric(8, 11);
    const SymmetricMatrix r = random_symmetric(8, 12);
    CHECK(matmul(u, r) == matmul(r, u).transposed());
}

TEST_CASE("norms") {
    const Matrix a{{3, 0}, {0, -4}};
    CHECK(frobenius_norm(a) == 5.0);
    CHECK(max_abs(a) == 4.0);
    const SymmetricMatrix s(a);
    CHECK(spectral_norm(s) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(sigma_min(s) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(linalg::lambda_min(s) == doctest::Approx(-4.0).epsilon(1e-15));
}

TEST_CASE("jacobi on a known 2x2") {
    // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors (1,1)/sqrt2, (1,-1)/sqrt2.
    const EigenDecomposition e = sym_eig(SymmetricMatrix{{2, 1}, {1, 2}});
    CHECK(e.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(std::abs(e.eigenvectors(0, 0)) - std::sqrt(0.5)) <= 1e-14);
    CHECK(std::abs(e.eigenvectors(0, 0) - e.eigenvectors(1, 0)) <= 1e-14);
}

TEST_CASE("jacobi decomposes random symmetric matrices") {
    for (std::size_t n : {1u, 2u, 5u, 16u, 40u}) {
        const SymmetricMatrix a = random_symmetric(n, 100 + n);
        const EigenDecomposition e = sym_eig(a);
        const Matrix& v = e.eigenvectors;
        // A V = V Lambda and V^T V = I, checked with the reference product.
        Matrix vl = v;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) vl(i, k) *= e.eigenvalues[k];
        const double scale = oracle::fro(a);
        CHECK(oracle::max_abs_diff(oracle::product(a, v), vl) <= 1e-12 * scale);
        CHECK(oracle::max_abs_diff(oracle::product(v.transposed(), v), Matrix::identity(n)) <= 1e-13);
        for (std::size_t k = 1; k < n; ++k) CHECK(e.eigenvalues[k - 1] >= e.eigenvalues[k]);
    }
}

TEST_CASE("warm-started jacobi matches a cold solve") {
    const SymmetricMatrix a = random_symmetric(12, 5);
    const EigenDecomposition cold = sym_eig(a);
    Matrix nudged = a.matrix();
    nudged(0, 1) += 1e-6;
    nudged(1, 0) += 1e-6;
    const SymmetricMatrix b(nudged);
    const EigenDecomposition warm = sym_eig(b, cold.eigenvectors);
    const EigenDecomposition ref = sym_eig(b);
    for (std::size_t k = 0; k < 12; ++k) CHECK(warm.eigenvalues[k] == doctest::Approx(ref.eigenvalues[k]).epsilon(1e-12));
    CHECK(warm.sweeps <= ref.sweeps);
    CHECK_THROWS_AS(sym_eig(b, Matrix::identity(3)), DimensionError);
}

TEST_CASE("spectral summary flags indefinite matrices") {
    const SpectralSummary s = spectral_summary(sym_eig(SymmetricMatrix::diagonal({1.0, -0.5})));
    CHECK(s.opnorm == 1.0);
    CHECK(s.sigma_min == 0.5);
    CHECK(s.lambda_min == -0.5);
    CHECK(s.sign_discrepancy());
    CHECK_FALSE(spectral_summary(sym_eig(SymmetricMatrix::diagonal({2.0, 0.5}))).sign_discrepancy());
}

TEST_CASE("spd matrix validation") {
    const SpdMatrix m(SymmetricMatrix::diagonal({4.0, 2.0}));
    CHECK(m.lambda_max() == 4.0);
    CHECK(m.lambda_min() == 2.0);
    CHECK(m.condition_number() == 2.0);
    CHECK_THROWS_AS(SpdMatrix(SymmetricMatrix::diagonal({1.0, -1.0})), NotPositiveDefinite);
    CHECK_THROWS_AS(SpdMatrix(SymmetricMatrix::diagonal({1.0, 0.0})), NotPositiveDefinite);
    CHECK_THROWS_AS(SpdMatrix(SymmetricMatrix::diagonal({1.0, 1e-13})), NotPositiveDefinite);
    CHECK_NOTHROW(SpdMatrix(SymmetricMatrix::diagonal({1.0, 1e-11})));
}

TEST_CASE("solve agrees with the reference inverse") {
    random::Rng rng(9);
    const Matrix a = random::gaussian_matrix(10, 10, rng);
    const Matrix b = random::gaussian_matrix(10, 3, rng);
    const Matrix x = solve(a, b);
    CHECK(oracle::max_abs_diff(x, oracle::product(oracle::inverse(a), b)) <= 1e-10 * oracle::fro(x));
    CHECK(oracle::max_abs_diff(oracle::product(a, oracle::inverse(a)), Matrix::identity(10)) <= 1e-12);
    CHECK_THROWS_AS(solve(Matrix{{1, 2}, {2, 4}}, Matrix::identity(2)), SingularMatrix);
    CHECK_THROWS_AS(solve(Matrix(2, 3), Matrix(2, 1)), DimensionError);
    CHECK_THROWS_AS(solve(Matrix::identity(2), Matrix(3, 1)), DimensionError);
}

TEST_CASE("opnorm estimate lies in [||M||, 2||M||]") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const SpdMatrix m = random_spd_with(1 + seed % 20, 1.0 + double(seed) * 25.0, seed);
        const double lambda = estimate_opnorm_bound(m, seed);
        CHECK(lambda >= m.lambda_max());
        CHECK(lambda <= 2.0 * m.lambda_max());
    }
    const SpdMatrix m = random_spd_with(6, 10.0, 1);
    CHECK(estimate_opnorm_bound(m, 7) == estimate_opnorm_bound(m, 7));
}

TEST_CASE("random orthogonal factors are orthogonal and reproducible") {
    random::Rng a(42), b(42);
    const Matrix q = random::random_orthogonal(20, a);
    CHECK(q == random::random_orthogonal(20, b));
    CHECK(oracle::max_abs_diff(oracle::product(q.transposed(), q), Matrix::identity(20)) <= 1e-14);
    random::Rng s1 = random::substream(1, 2);
    random::Rng s2 = random::substream(1, 3);
    random::Rng s3 = random::substream(1, 2);
    const auto x1 = s1(), x2 = s2(), x3 = s3();
    CHECK(x1 != x2);
    CHECK(x1 == x3);
}
