#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace matsqrt::linalg {

// Dense row-major real matrix. General storage used for products and
// intermediate results; symmetric/positive definite semantics live in the
// wrapper types below.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);
    static Matrix diagonal(std::initializer_list<double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    Matrix transposed() const;

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s) noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(double s, Matrix m);

// Real symmetric n x n matrix, n >= 1, finite entries. The constructor
// replaces its input by (A + A^T)/2, so values(i,j) == values(j,i) exactly.
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(const Matrix& a);
    SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static SymmetricMatrix identity(std::size_t n);
    static SymmetricMatrix diagonal(std::span<const double> d);
    static SymmetricMatrix diagonal(std::initializer_list<double> d);

    // Caller guarantees exact symmetry and finiteness; only checked in debug builds.
    static SymmetricMatrix from_symmetric(Matrix a);

    std::size_t size() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
    const Matrix& matrix() const noexcept { return m_; }
    operator const Matrix&() const noexcept { return m_; }

    friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

private:
    struct Trusted {};
    SymmetricMatrix(Trusted, Matrix a) : m_(std::move(a)) {}

    Matrix m_;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues; // descending
    Matrix eigenvectors;             // column k pairs with eigenvalues[k]
    int sweeps = 0;
};

// Symmetric positive definite matrix. Construction runs a full
// eigendecomposition and rejects lambda_min <= 1e-12 * ||A||_2.
class SpdMatrix {
public:
    explicit SpdMatrix(SymmetricMatrix a);
    SpdMatrix(SymmetricMatrix a, EigenDecomposition eig);

    std::size_t size() const noexcept { return a_.size(); }
    const SymmetricMatrix& symmetric() const noexcept { return a_; }
    const Matrix& matrix() const noexcept { return a_.matrix(); }
    operator const SymmetricMatrix&() const noexcept { return a_; }
    operator const Matrix&() const noexcept { return a_.matrix(); }

    const EigenDecomposition& eig() const noexcept { return eig_; }
    double lambda_max() const noexcept { return eig_.eigenvalues.front(); }
    double lambda_min() const noexcept { return eig_.eigenvalues.back(); }
    double condition_number() const noexcept { return lambda_max() / lambda_min(); }

private:
    SymmetricMatrix a_;
    EigenDecomposition eig_;
};

inline constexpr double kSpdRelativeFloor = 1e-12;

// Products and norms.
Matrix matmul(const Matrix& a, const Matrix& b);
// a * a for exactly symmetric a; result is exactly symmetric and bitwise equal
// to matmul(a, a).
SymmetricMatrix square(const SymmetricMatrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
SymmetricMatrix symmetrize(const Matrix& a);

// Cyclic Jacobi. Converges when the largest off-diagonal magnitude drops to
// 1e-12 * ||A||_F; throws ConvergenceError after 50 sweeps.
EigenDecomposition sym_eig(const SymmetricMatrix& a);
// Same, starting from an orthogonal basis that approximately diagonalizes a.
EigenDecomposition sym_eig(const SymmetricMatrix& a, const Matrix& warm_start);

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 50;

struct SpectralSummary {
    double opnorm = 0.0;     // max |lambda_i|
    double sigma_min = 0.0;  // min |lambda_i|
    double lambda_min = 0.0; // min lambda_i
    // sigma_min and lambda_min disagree, i.e. the matrix is not PSD.
    bool sign_discrepancy() const noexcept { return lambda_min < 0.0; }
};

SpectralSummary spectral_summary(const EigenDecomposition& eig);
double spectral_norm(const SymmetricMatrix& a);
double sigma_min(const SymmetricMatrix& a);
double lambda_min(const SymmetricMatrix& a);

// A^{-1} B by Gaussian elimination with partial pivoting. Throws
// SingularMatrix when a pivot falls below 1e-14 * ||A||_F.
Matrix solve(const Matrix& a, const Matrix& b);

inline constexpr double kPivotRelativeFloor = 1e-14;

// lambda with ||M||_2 <= lambda <= 2 ||M||_2: 1.5 x the power-iteration
// estimate started from a seeded Gaussian vector.
double estimate_opnorm_bound(const SpdMatrix& m, std::uint64_t seed);

} // namespace matsqrt::linalg
