#include "matsqrt/gd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "matsqrt/analysis.hpp"
#include "matsqrt/errors.hpp"
#include "matsqrt/format.hpp"

namespace matsqrt::gd {
namespace {

using linalg::Matrix;

void require_same_size(const SymmetricMatrix& u, const SymmetricMatrix& m) {
    if (u.size() != m.size())
        throw DimensionError("U is " + std::to_string(u.size()) + "x" + std::to_string(u.size()) + " but M is " +
                             std::to_string(m.size()) + "x" + std::to_string(m.size()));
}

// R = U^2 - M, exactly symmetric when U and M are.
Matrix residual_matrix(const SymmetricMatrix& u, const SymmetricMatrix& m) {
    Matrix r = linalg::square(u).matrix();
    r -= m.matrix();
    return r;
}

// R U + U R. For exactly symmetric R and U, (U R)(i,j) and (R U)(j,i) are the
// same products summed in the same order, so U R == (R U)^T bitwise and one
// product suffices.
Matrix direction_from_residual(const Matrix& r, const SymmetricMatrix& u) {
    const Matrix ru = linalg::matmul(r, u.matrix());
    const std::size_t n = ru.rows();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = ru(i, j) + ru(j, i);
    return g;
}

SymmetricMatrix apply_step(const SymmetricMatrix& u, const Matrix& direction, double eta, bool resymmetrize) {
    Matrix next = u.matrix();
    const auto g = direction.data();
    auto x = next.data();
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] -= eta * g[k];
        if (!std::isfinite(x[k])) throw NumericalError("gd_step produced a non-finite entry; step size too large");
    }
    return resymmetrize ? SymmetricMatrix(next) : SymmetricMatrix::from_symmetric(std::move(next));
}

double scaled_sqrt_identity_lambda(const SpdMatrix& m, const GdConfig& cfg) {
    if (std::holds_alternative<ScaledIdentity>(cfg.init)) return std::get<ScaledIdentity>(cfg.init).lambda;
    return m.lambda_max();
}

struct ScaledError {
    SymmetricMatrix e;
    double spectral_norm;
};

ScaledError scaled_error(std::size_t n, double delta, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    linalg::Matrix a(n, n);
    for (double& v : a.data()) v = normal(rng);
    SymmetricMatrix e(a);
    const double norm = linalg::spectral_norm(e);
    if (norm == 0.0 || delta == 0.0) return {SymmetricMatrix(linalg::Matrix(n, n)), 0.0};
    // Slightly under delta so that rounding in the scaling cannot overshoot.
    const double factor = delta / norm * (1.0 - 1e-14);
    return {linalg::symmetrize(factor * e.matrix()), factor * norm};
}

RunResult run_impl(const SpdMatrix& m, const GdConfig& cfg, const ErrorModel* err) {
    cfg.validate();
    const SpdMatrix u0 = initial_iterate(m, cfg);
    const double eta = cfg.eta ? *cfg.eta : step_size_policy(u0, m, cfg);
    const std::size_t n = m.size();

    RunResult out{u0.symmetric(), {}, RunStatus::IterationCap, eta, 0, {}, {}};

    const bool inject = err && err->schedule != ErrorSchedule::None && err->delta > 0.0;
    std::mt19937_64 rng(err ? err->seed : 0);
    if (err) {
        const double beta = analysis::rate_params(u0, m).beta;
        const double limit = error_tolerance(eta, m, beta);
        if (!(err->delta < limit)) {
            out.warnings.push_back("error magnitude " + format_double(err->delta) +
                                   " is not below the stability tolerance " + format_double(limit));
        }
    }

    // Warm-started eigensolves; a cold solve every kColdEvery steps keeps the
    // accumulated basis orthogonal.
    constexpr std::size_t kColdEvery = 256;
    Matrix basis;

    SymmetricMatrix u = u0.symmetric();
    double pending_err = 0.0;
    double pending_err_fro = 0.0;
    double r0 = 0.0;
    out.trace.reserve(cfg.keep_trace ? std::min<std::size_t>(cfg.max_iters + 1, 4096) : 1);

    for (std::size_t t = 0;; ++t) {
        const Matrix r = residual_matrix(u, m);
        const double residual = linalg::frobenius_norm(r);

        linalg::EigenDecomposition eig;
        if (t % kColdEvery == 0 || basis.rows() != n) {
            eig = linalg::sym_eig(u);
        } else {
            try {
                eig = linalg::sym_eig(u, basis);
            } catch (const ConvergenceError&) {
                eig = linalg::sym_eig(u);
            }
        }
        basis = std::move(eig.eigenvectors);
        const linalg::SpectralSummary s = linalg::spectral_summary(eig);

        IterationRecord rec;
        rec.t = t;
        rec.residual = residual;
        rec.objective = residual * residual;
        rec.sigma_min = s.sigma_min;
        rec.opnorm = s.opnorm;
        rec.lambda_min = s.lambda_min;
        rec.eta = eta;
        rec.err_norm = pending_err;
        rec.err_fro = pending_err_fro;
        if (cfg.keep_trace || out.trace.empty()) out.trace.push_back(rec);
        else out.trace.back() = rec;
        out.steps = t;
        out.u = u;

        if (cfg.observer && !cfg.observer(rec)) {
            out.status = RunStatus::Interrupted;
            out.message = "stopped by observer at step " + std::to_string(t);
            return out;
        }
        if (t == 0) r0 = residual;
        if (!std::isfinite(residual) || residual > 10.0 * r0) {
            out.status = RunStatus::Diverged;
            out.message = "residual grew to " + format_double(residual) + " (initial " + format_double(r0) +
                          ") at step " + std::to_string(t);
            return out;
        }
        if (s.lambda_min <= 0.0) {
            out.status = RunStatus::NonPdIterate;
            out.message = "iterate lost positive definiteness at step " + std::to_string(t) +
                          " (lambda_min = " + format_double(s.lambda_min) + ")";
            return out;
        }
        if (residual <= cfg.tol) {
            out.status = RunStatus::Converged;
            return out;
        }
        if (t >= cfg.max_iters) {
            out.status = RunStatus::IterationCap;
            return out;
        }
        if (cfg.deadline && std::chrono::steady_clock::now() >= *cfg.deadline) {
            out.status = RunStatus::Interrupted;
            out.message = "deadline reached at step " + std::to_string(t);
            return out;
        }

        std::optional<SymmetricMatrix> next;
        try {
            next = apply_step(u, direction_from_residual(r, u), eta, cfg.resymmetrize);
        } catch (const NumericalError&) {
            out.status = RunStatus::Diverged;
            out.message = "non-finite iterate at step " + std::to_string(t + 1);
            return out;
        }

        pending_err = 0.0;
        pending_err_fro = 0.0;
        const bool inject_now =
            inject && (err->schedule == ErrorSchedule::EveryStep || (err->schedule == ErrorSchedule::FirstStepOnly && t == 0));
        if (inject_now) {
            ScaledError e = scaled_error(n, err->delta, rng);
            pending_err = e.spectral_norm;
            pending_err_fro = linalg::frobenius_norm(e.e);
            Matrix sum = next->matrix();
            sum += e.e.matrix();
            next = cfg.resymmetrize ? SymmetricMatrix(sum) : SymmetricMatrix::from_symmetric(std::move(sum));
        }
        u = std::move(*next);
    }
}

} // namespace

const char* to_string(RunStatus s) noexcept {
    switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::IterationCap: return "iteration-cap";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::NonPdIterate: return "non-pd-iterate";
    case RunStatus::Interrupted: return "interrupted";
    }
    return "unknown";
}

void GdConfig::validate() const {
    if (eta && !(*eta > 0.0 && std::isfinite(*eta))) throw InvalidArgument("eta must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (!(c_step > 0.0)) throw InvalidArgument("c_step must be positive");
    if (!(c_rate > 0.0)) throw InvalidArgument("c_rate must be positive");
    if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
    if (const auto* s = std::get_if<ScaledIdentity>(&init); s && !(s->lambda > 0.0 && std::isfinite(s->lambda)))
        throw InvalidArgument("scaled-identity lambda must be positive");
}

linalg::SpdMatrix RunResult::root() const { return linalg::SpdMatrix(u); }

double objective(const SymmetricMatrix& u, const SymmetricMatrix& m) {
    require_same_size(u, m);
    const double r = linalg::frobenius_norm(residual_matrix(u, m));
    return r * r;
}

SymmetricMatrix gradient(const SymmetricMatrix& u, const SymmetricMatrix& m) {
    require_same_size(u, m);
    return linalg::symmetrize(direction_from_residual(residual_matrix(u, m), u));
}

double step_size_policy(const SpdMatrix& u0, const SpdMatrix& m, const GdConfig& cfg) {
    const analysis::RateParams rate = analysis::rate_params(u0, m);
    const double u0_norm = u0.lambda_max();
    const double m_norm = m.lambda_max();
    const double opnorm_branch = 1.0 / (10.0 * std::max(u0_norm * u0_norm, 3.0 * m_norm));
    const double top = std::max(u0_norm, std::sqrt(3.0 * m_norm));
    const double eigval_branch = rate.beta / (top * top * top);
    const double rate_branch = 1.0 / (rate.alpha * rate.beta * rate.beta);
    return cfg.c_step * std::min({opnorm_branch, eigval_branch, rate_branch});
}

SymmetricMatrix gd_step(const SymmetricMatrix& u, const SymmetricMatrix& m, double eta, bool resymmetrize) {
    require_same_size(u, m);
    if (!(eta > 0.0)) throw InvalidArgument("gd_step: eta must be positive");
    return apply_step(u, direction_from_residual(residual_matrix(u, m), u), eta, resymmetrize);
}

SpdMatrix initial_iterate(const SpdMatrix& m, const GdConfig& cfg) {
    const std::size_t n = m.size();
    if (const auto* e = std::get_if<ExplicitStart>(&cfg.init)) {
        if (e->u0.size() != n) throw DimensionError("explicit U0 does not match the dimension of M");
        try {
            return SpdMatrix(e->u0);
        } catch (const NotPositiveDefinite& ex) {
            throw NotPositiveDefinite(std::string("explicit U0: ") + ex.what());
        }
    }
    const double scale = std::sqrt(scaled_sqrt_identity_lambda(m, cfg));
    linalg::Matrix u(n, n);
    for (std::size_t i = 0; i < n; ++i) u(i, i) = scale;
    return SpdMatrix(SymmetricMatrix::from_symmetric(std::move(u)));
}

RunResult run(const SpdMatrix& m, const GdConfig& cfg) { return run_impl(m, cfg, nullptr); }

RunResult run_perturbed(const SpdMatrix& m, const GdConfig& cfg, const ErrorModel& err) {
    if (!(err.delta >= 0.0)) throw InvalidArgument("error model delta must be nonnegative");
    return run_impl(m, cfg, &err);
}

double error_tolerance(double eta, const SpdMatrix& m, double beta) { return eta * m.lambda_min() * beta / 300.0; }

SymmetricMatrix generate_error(std::size_t n, double delta, std::mt19937_64& rng) {
    return scaled_error(n, delta, rng).e;
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
    out << "t,residual_fro,objective,sigma_min,opnorm,eta,err_norm\n";
    for (const IterationRecord& r : trace) {
        out << r.t << ',' << format_double(r.residual) << ',' << format_double(r.objective) << ','
            << format_double(r.sigma_min) << ',' << format_double(r.opnorm) << ',' << format_double(r.eta) << ','
            << format_double(r.err_norm) << '\n';
    }
}

} // namespace matsqrt::gd
