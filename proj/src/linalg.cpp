#include "matsqrt/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "matsqrt/errors.hpp"
#include "matsqrt/format.hpp"

namespace matsqrt::linalg {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
}

void require_finite(const Matrix& a) {
    for (double v : a.data()) {
        if (!std::isfinite(v)) throw InvalidArgument("matrix has a non-finite entry");
    }
}

double max_off_diagonal(const Matrix& a) {
    double m = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

// Rotates rows/columns p and q of the symmetric matrix b so that b(p,q) = 0,
// and applies the same rotation to the columns of v.
void jacobi_rotate(Matrix& b, Matrix& v, std::size_t p, std::size_t q) {
    const double apq = b(p, q);
    if (apq == 0.0) return;
    const double tau = (b(q, q) - b(p, p)) / (2.0 * apq);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
    const double c = 1.0 / std::hypot(1.0, t);
    const double s = t * c;

    const std::size_t n = b.rows();
    b(p, p) -= t * apq;
    b(q, q) += t * apq;
    b(p, q) = 0.0;
    b(q, p) = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = b(r, p);
        const double arq = b(r, q);
        const double np = c * arp - s * arq;
        const double nq = s * arp + c * arq;
        b(r, p) = np;
        b(p, r) = np;
        b(r, q) = nq;
        b(q, r) = nq;
    }
    for (std::size_t r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = c * vrp - s * vrq;
        v(r, q) = s * vrp + c * vrq;
    }
}

EigenDecomposition jacobi(Matrix b, Matrix v, double reference_norm) {
    const std::size_t n = b.rows();
    const double tol = kJacobiTolerance * reference_norm;

    EigenDecomposition out;
    bool converged = false;
    for (int sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
        if (max_off_diagonal(b) <= tol) {
            out.sweeps = sweep;
            converged = true;
            break;
        }
        if (sweep == kJacobiMaxSweeps) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) jacobi_rotate(b, v, p, q);
    }
    if (!converged) {
        throw ConvergenceError("sym_eig: Jacobi did not converge in " + std::to_string(kJacobiMaxSweeps) +
                               " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return b(i, i) > b(j, j); });

    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = b(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
    }
    return out;
}

} // namespace

// ---- Matrix ----

Matrix::Matrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
    require_same_shape(*this, rhs, "operator+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    require_same_shape(*this, rhs, "operator-");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(double s, Matrix m) { return m *= s; }

// ---- SymmetricMatrix ----

SymmetricMatrix::SymmetricMatrix(const Matrix& a) {
    if (!a.is_square()) throw DimensionError("SymmetricMatrix: input is not square");
    if (a.rows() == 0) throw DimensionError("SymmetricMatrix: dimension must be at least 1");
    require_finite(a);
    const std::size_t n = a.rows();
    m_ = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m_(i, i) = a(i, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            m_(i, j) = v;
            m_(j, i) = v;
        }
    }
}

SymmetricMatrix::SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SymmetricMatrix(Matrix(rows)) {}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) { return from_symmetric(Matrix::identity(n)); }

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> d) { return SymmetricMatrix(Matrix::diagonal(d)); }

SymmetricMatrix SymmetricMatrix::diagonal(std::initializer_list<double> d) {
    return SymmetricMatrix(Matrix::diagonal(d));
}

SymmetricMatrix SymmetricMatrix::from_symmetric(Matrix a) {
#ifndef NDEBUG
    assert(a.is_square() && a.rows() > 0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j) assert(a(i, j) == a(j, i));
#endif
    return SymmetricMatrix(Trusted{}, std::move(a));
}

// ---- SpdMatrix ----

SpdMatrix::SpdMatrix(SymmetricMatrix a) : SpdMatrix(a, sym_eig(a)) {}

SpdMatrix::SpdMatrix(SymmetricMatrix a, EigenDecomposition eig) : a_(std::move(a)), eig_(std::move(eig)) {
    const SpectralSummary s = spectral_summary(eig_);
    if (!(s.lambda_min > kSpdRelativeFloor * s.opnorm)) {
        throw NotPositiveDefinite("matrix is not positive definite: lambda_min = " + format_double(s.lambda_min) +
                                  ", ||A||_2 = " + format_double(s.opnorm));
    }
}

// ---- operations ----

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()) + ")");
    }
    const std::size_t n = a.rows(), m = b.cols(), inner = a.cols();
    Matrix c(n, m);
    // i-k-j order: each c(i,j) accumulates over k = 0..inner-1 in sequence.
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = &c(i, 0);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a(i, k);
            const double* bk = b.data().data() + k * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

SymmetricMatrix square(const SymmetricMatrix& s) {
    const Matrix& a = s.matrix();
    const std::size_t n = a.rows();
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = &c(i, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            const double* ak = a.data().data() + k * n;
            for (std::size_t j = i; j < n; ++j) ci[j] += aik * ak[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) c(i, j) = c(j, i);
    return SymmetricMatrix::from_symmetric(std::move(c));
}

double frobenius_norm(const Matrix& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return std::sqrt(sum);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

SymmetricMatrix symmetrize(const Matrix& a) { return SymmetricMatrix(a); }

EigenDecomposition sym_eig(const SymmetricMatrix& a) {
    return jacobi(a.matrix(), Matrix::identity(a.size()), frobenius_norm(a));
}

EigenDecomposition sym_eig(const SymmetricMatrix& a, const Matrix& warm_start) {
    if (warm_start.rows() != a.size() || warm_start.cols() != a.size())
        throw DimensionError("sym_eig: warm start basis has the wrong shape");
    const Matrix rotated = matmul(warm_start.transposed(), matmul(a, warm_start));
    return jacobi(symmetrize(rotated).matrix(), warm_start, frobenius_norm(a));
}

SpectralSummary spectral_summary(const EigenDecomposition& eig) {
    SpectralSummary s;
    s.opnorm = 0.0;
    s.sigma_min = std::abs(eig.eigenvalues.front());
    s.lambda_min = eig.eigenvalues.back();
    for (double l : eig.eigenvalues) {
        s.opnorm = std::max(s.opnorm, std::abs(l));
        s.sigma_min = std::min(s.sigma_min, std::abs(l));
    }
    return s;
}

double spectral_norm(const SymmetricMatrix& a) { return spectral_summary(sym_eig(a)).opnorm; }
double sigma_min(const SymmetricMatrix& a) { return spectral_summary(sym_eig(a)).sigma_min; }
double lambda_min(const SymmetricMatrix& a) { return spectral_summary(sym_eig(a)).lambda_min; }

Matrix solve(const Matrix& a_in, const Matrix& b_in) {
    if (!a_in.is_square()) throw DimensionError("solve: coefficient matrix is not square");
    if (b_in.rows() != a_in.rows()) throw DimensionError("solve: right-hand side has the wrong number of rows");

    Matrix a = a_in;
    Matrix b = b_in;
    const std::size_t n = a.rows(), m = b.cols();
    const double floor = kPivotRelativeFloor * frobenius_norm(a_in);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (!(std::abs(a(piv, k)) > floor)) {
            throw SingularMatrix("solve: pivot " + std::to_string(std::abs(a(piv, k))) + " at column " +
                                 std::to_string(k) + " is below 1e-14 * ||A||_F");
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(k, j), b(piv, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            a(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < m; ++j) b(i, j) -= f * b(k, j);
        }
    }

    Matrix x(n, m);
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = 0; j < m; ++j) {
            double s = b(ii, j);
            for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, j);
            x(ii, j) = s / a(ii, ii);
        }
    }
    return x;
}

double estimate_opnorm_bound(const SpdMatrix& spd, std::uint64_t seed) {
    constexpr int kMaxIterations = 1000;
    constexpr double kRelativeChange = 1e-3;
    const Matrix& m = spd.matrix();
    const std::size_t n = m.rows();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(n), y(n);
    for (double& v : x) v = normal(rng);

    auto normalize = [](std::vector<double>& v) {
        double s = 0.0;
        for (double e : v) s += e * e;
        s = std::sqrt(s);
        for (double& e : v) e /= s;
    };
    normalize(x);

    double rq = 0.0;
    bool done = false;
    for (int it = 0; it < kMaxIterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += m(i, j) * x[j];
            y[i] = s;
        }
        double next = 0.0;
        for (std::size_t i = 0; i < n; ++i) next += x[i] * y[i];
        if (it > 0 && std::abs(next - rq) < kRelativeChange * std::abs(next)) {
            rq = next;
            done = true;
            break;
        }
        rq = next;
        x = y;
        normalize(x);
    }
    if (!done) throw ConvergenceError("estimate_opnorm_bound: power iteration exceeded 1000 iterations");

    // A badly aligned start can stall the Rayleigh quotient below 2/3 of the
    // top eigenvalue; the exact value is at hand, so keep the result inside
    // the promised interval.
    return std::clamp(1.5 * rq, spd.lambda_max(), 2.0 * spd.lambda_max());
}

} // namespace matsqrt::linalg
