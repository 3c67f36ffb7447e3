#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "matsqrt/linalg.hpp"

namespace matsqrt::gd {

using linalg::SpdMatrix;
using linalg::SymmetricMatrix;

// U0 = sqrt(lambda) * I. With ||M||_2 <= lambda <= 2 ||M||_2 this is the
// scaled-identity start whose iteration count depends on kappa(M)^{3/2} only.
struct ScaledIdentity {
    double lambda = 1.0;
};

// U0 = sqrt(||M||_2) * I, which commutes with M.
struct SqrtOpnormIdentity {};

struct ExplicitStart {
    SymmetricMatrix u0;
};

using Init = std::variant<SqrtOpnormIdentity, ScaledIdentity, ExplicitStart>;

struct IterationRecord;

struct GdConfig {
    std::optional<double> eta;        // empty: step_size_policy
    std::size_t max_iters = 10'000'000;
    double tol = 1e-8;                // target ||M - U^2||_F
    Init init = SqrtOpnormIdentity{};
    double c_step = 0.01;
    double c_rate = 1.0 / 50.0;
    bool resymmetrize = true;
    // Optional wall-clock limit; a run past it stops with RunStatus::Interrupted.
    std::optional<std::chrono::steady_clock::time_point> deadline;
    // false: RunResult::trace keeps only the most recent record.
    bool keep_trace = true;
    // Called with every record before the stopping tests; returning false
    // ends the run with RunStatus::Interrupted.
    std::function<bool(const IterationRecord&)> observer;

    void validate() const;
};

struct IterationRecord {
    std::size_t t = 0;
    double residual = 0.0;   // ||M - U_t^2||_F
    double objective = 0.0;  // residual^2
    double sigma_min = 0.0;  // min |lambda_i(U_t)|
    double opnorm = 0.0;     // ||U_t||_2
    double lambda_min = 0.0; // min lambda_i(U_t); differs from sigma_min only if U_t is indefinite
    double eta = 0.0;
    double err_norm = 0.0;   // ||E||_2 of the error injected to produce U_t (0 at t = 0)
    double err_fro = 0.0;    // ||E||_F of the same error
};

using IterationTrace = std::vector<IterationRecord>;

enum class RunStatus { Converged, IterationCap, Diverged, NonPdIterate, Interrupted };

const char* to_string(RunStatus s) noexcept;

struct RunResult {
    SymmetricMatrix u;
    IterationTrace trace;
    RunStatus status = RunStatus::IterationCap;
    double eta = 0.0;
    std::size_t steps = 0;     // completed gd steps
    std::string message;       // set for Diverged / NonPdIterate
    std::vector<std::string> warnings;

    bool converged() const noexcept { return status == RunStatus::Converged; }
    // Final iterate as an SPD matrix; throws NotPositiveDefinite otherwise.
    SpdMatrix root() const;
};

enum class ErrorSchedule { EveryStep, FirstStepOnly, None };

// Per-step perturbation E_t: symmetric Gaussian rescaled to ||E_t||_2 = delta.
struct ErrorModel {
    double delta = 0.0;
    std::uint64_t seed = 0;
    ErrorSchedule schedule = ErrorSchedule::EveryStep;
};

// f(U) = ||M - U^2||_F^2
double objective(const SymmetricMatrix& u, const SymmetricMatrix& m);

// Descent direction (U^2 - M) U + U (U^2 - M). This is the update direction
// of the iteration and equals one half of the Euclidean gradient of f.
SymmetricMatrix gradient(const SymmetricMatrix& u, const SymmetricMatrix& m);

// c_step * min{ 1 / (10 max(||U0||^2, 3||M||)),
//               beta / max(||U0||, sqrt(3||M||))^3,
//               1 / (alpha beta^2) }
double step_size_policy(const SpdMatrix& u0, const SpdMatrix& m, const GdConfig& cfg);

// U - eta * gradient(U, M). Throws NumericalError on a non-finite result.
SymmetricMatrix gd_step(const SymmetricMatrix& u, const SymmetricMatrix& m, double eta, bool resymmetrize = true);

SpdMatrix initial_iterate(const SpdMatrix& m, const GdConfig& cfg);

RunResult run(const SpdMatrix& m, const GdConfig& cfg);
RunResult run_perturbed(const SpdMatrix& m, const GdConfig& cfg, const ErrorModel& err);

// Largest per-step error that the stability guarantee covers:
// (1/300) eta sigma_min(M) beta.
double error_tolerance(double eta, const SpdMatrix& m, double beta);

// Symmetric Gaussian matrix scaled so that its spectral norm is at most delta.
SymmetricMatrix generate_error(std::size_t n, double delta, std::mt19937_64& rng);

// Header: t,residual_fro,objective,sigma_min,opnorm,eta,err_norm
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

} // namespace matsqrt::gd
