#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "matsqrt/gd_solver.hpp"
#include "matsqrt/linalg.hpp"

namespace matsqrt::experiments {

using linalg::SpdMatrix;

enum class Spectrum { Geometric, Linear, TwoPoint };

Spectrum parse_spectrum(std::string_view name);
const char* to_string(Spectrum s) noexcept;

struct SpdInstanceSpec {
    std::size_t n = 2;
    double kappa = 1.0;
    double opnorm = 1.0;
    Spectrum spectrum = Spectrum::Geometric;
    std::uint64_t seed = 0;
};

// Eigenvalues, descending, from opnorm down to opnorm / kappa.
std::vector<double> prescribed_spectrum(const SpdInstanceSpec& spec);

// Q diag(lambda) Q^T with Q the sign-fixed QR factor of a seeded Gaussian.
SpdMatrix random_spd(const SpdInstanceSpec& spec);

// Two-dimensional hard instances with ||M||_2 = 1 and sigma_min(M) = 1/kappa.
//   case 1 (eta >= 1/4): U0 = diag(sqrt(b), sqrt(sigma_min)), b = 1/(2 eta) + 1,
//     so the first step lands exactly on the saddle surface;
//   case 2 (eta <  1/4): U0 = diag(1, sqrt(sigma_min) / 2), which creeps
//     towards sqrt(sigma_min) at rate eta sigma_min.
struct LowerBoundInstance {
    SpdMatrix m;
    SpdMatrix u0;
    double requested_eta = 0.0;
    // Step size actually used. In case 1 this is the smallest double >= the
    // requested value for which the floating-point first step zeroes (U1)_11
    // exactly; it differs from requested_eta by a few ulps at most.
    double eta = 0.0;
    int step_case = 1;
    bool exact_saddle = true;        // case 1: (U1)_11 == 0 in floating point
    std::vector<double> alpha_trace; // case 2: alpha_0 .. alpha_steps
};

// alpha_{t+1} = alpha_t (1 + 2 eta sigma_min (1 - alpha_t^2)); (U_t)_22 = alpha_t sqrt(sigma_min).
std::vector<double> alpha_recurrence(double alpha0, double eta, double sigma_min, std::size_t steps);

LowerBoundInstance lower_bound_instance(double kappa, double eta);

struct LowerBoundRow {
    std::size_t t = 0;
    double residual = 0.0;
    double u11 = 0.0;
    double u22 = 0.0;
    double expected_u22 = 0.0; // alpha_t sqrt(sigma_min) in case 2, (U1)_22 in case 1
};

struct LowerBoundReport {
    LowerBoundInstance instance;
    std::size_t steps = 0; // ceil(kappa)
    double floor = 0.0;    // sigma_min(M) / 4
    double min_residual = 0.0;
    double max_deviation = 0.0; // against the scalar prediction, over all t
    std::vector<LowerBoundRow> rows;

    bool residual_ok() const noexcept { return min_residual >= floor - 1e-12; }
    bool iterates_ok() const noexcept { return max_deviation <= 1e-12; }
    bool pass() const noexcept { return residual_ok() && iterates_ok(); }
};

// Runs ceil(kappa) full-matrix gd steps on lower_bound_instance(kappa, eta).
LowerBoundReport run_lower_bound(double kappa, double eta);

// Header: t,residual,u11,u22,expected_u22
void write_lower_bound_csv(std::ostream& out, const LowerBoundReport& report);

struct RobustnessRow {
    double delta = 0.0;
    double floor = 0.0;
    std::size_t steps = 0;
    std::size_t bound_violations = 0; // steps with residual > stability_bound
    double max_bound_ratio = 0.0;     // max residual / stability_bound
    gd::RunStatus status = gd::RunStatus::IterationCap;
    bool plateaued = false;
    bool within_tolerance = true; // delta below the stability tolerance
};

// Residual floor for persistent errors of size delta injected every step.
// A run stops when the mean residual over consecutive windows of
// max(100, ceil(1 / (4 eta sigma_min(M)))) steps changes by less than 1%, or at
// cfg.tol / cfg.max_iters. The floor is the mean over the last window (the
// final residual for runs that reach tol).
std::vector<RobustnessRow> robustness_sweep(const SpdMatrix& m, const std::vector<double>& deltas,
                                            const gd::GdConfig& cfg, std::uint64_t seed);

std::size_t plateau_window(double eta, const SpdMatrix& m);

// Header: delta,floor,steps,bound_violations,max_bound_ratio,status,plateaued,within_tolerance
void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows);

enum class Method { Gd, Newton, Evd };

Method parse_method(std::string_view name);
// "gd", "newton-commuting-start" (the X^{-1} M Newton variant with a
// commuting start) and "evd".
const char* to_string(Method m) noexcept;

struct BenchmarkRow {
    std::size_t n = 0;
    double kappa = 0.0;
    Method method = Method::Gd;
    std::size_t iterations = 0;
    double wall_time = 0.0; // seconds
    double final_residual = 0.0;
    double predicted_iterations = 0.0; // gd only: alpha ln(r0 / tol)
    std::string status;
};

// Every (spec, method) pair, in input order. Solver failures are recorded in
// the status column.
std::vector<BenchmarkRow> convergence_benchmark(const std::vector<SpdInstanceSpec>& specs,
                                                const std::vector<Method>& methods, const gd::GdConfig& cfg);

// Header: n,kappa,method,iterations,wall_time,final_residual,predicted_iterations,status
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows, bool with_timing = true);

// f and the negative descent direction for M = diag(4, 2), U = diag(x, y).
struct LandscapePoint {
    double x = 0.0;
    double y = 0.0;
    double f = 0.0;
    double neggrad_x = 0.0;
    double neggrad_y = 0.0;
};

// (steps + 1)^2 points. The axes are scaled to the two root coordinates:
// x = 2 s_i, y = sqrt(2) s_j with s_i = grid_min + i (grid_max - grid_min) / steps,
// so for grid [0, 2] and even steps the grid passes through (0, 0), (2, 0),
// (0, sqrt 2) and (2, sqrt 2).
std::vector<LandscapePoint> landscape_grid(double grid_min, double grid_max, std::size_t steps);

// Header: x,y,f,neggrad_x,neggrad_y
void write_landscape_csv(std::ostream& out, const std::vector<LandscapePoint>& grid);

} // namespace matsqrt::experiments
