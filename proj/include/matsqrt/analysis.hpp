#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "matsqrt/gd_solver.hpp"
#include "matsqrt/linalg.hpp"

namespace matsqrt::analysis {

using linalg::SpdMatrix;

struct RateParams {
    double alpha = 1.0;         // (max(||U0||, sqrt||M||) / min(sigma_min(U0), sqrt sigma_min(M)))^3
    double beta = 1.0;          // min(sigma_min(U0), sqrt sigma_min(M))
    double corridor_low = 0.0;  // min(sigma_min(U0), sqrt(sigma_min(M)) / 10)
    double corridor_high = 0.0; // max(||U0||, sqrt(3 ||M||))
    double kappa = 1.0;         // ||M|| / sigma_min(M)
    double u0_opnorm = 0.0;
    double m_opnorm = 0.0;
};

RateParams rate_params(const SpdMatrix& u0, const SpdMatrix& m);

// exp(-c_rate * eta * beta^2 * t) * r0
double theoretical_residual_bound(double t, double eta, const RateParams& rate, double r0, double c_rate);

// Decay term plus 4 max(||U0||, sqrt(3||M||)) sum_{s<t} exp(-c_rate eta beta^2 (t-s-1)) ||E_s||_F.
// err_fro[s] is the Frobenius norm of the error injected at step s; needs err_fro.size() >= t.
double stability_bound(std::size_t t, double eta, const RateParams& rate, double r0, std::span<const double> err_fro,
                       double u0_opnorm, double m_opnorm, double c_rate);

// Bound for a single error injected at step 0 only:
// exp(-c eta beta^2 t) r0 + 6 max(||U0||^2, ||M||) exp(-c eta beta^2 (t-1)) ||E_0||_F, t >= 1.
double first_error_bound(std::size_t t, double eta, const RateParams& rate, double r0, double e0_fro,
                         double u0_opnorm, double m_opnorm, double c_rate);

// Evaluates stability_bound for t = 0, 1, 2, ... in O(1) per step.
class StabilityBoundTracker {
public:
    StabilityBoundTracker(double eta, const RateParams& rate, double r0, double c_rate);

    double bound() const noexcept { return decay_ + weight_ * sum_; }
    std::size_t t() const noexcept { return t_; }
    // Advance to t+1, given ||E_t||_F (the error that produced U_{t+1}).
    void advance(double err_fro) noexcept;

private:
    double r0_;
    double q_;      // per-step factor exp(-c eta beta^2)
    double weight_; // 4 * corridor_high
    double decay_;
    double eta_;
    RateParams rate_;
    double c_rate_;
    double sum_ = 0.0;
    std::size_t t_ = 0;
};

// Result of an empirical certificate. For sampled certificates a sample's
// margin is (bound - observed) / max(|bound|, |observed|), so it is
// dimensionless; corridor_check reports absolute margins. The certificate
// passes when worst_margin >= -1e-9.
struct CertificateReport {
    std::string property;
    std::size_t samples = 0;
    double worst_margin = 0.0;
    bool pass = true;
    std::vector<std::string> witnesses; // at most 5 failing samples
    double tightness = 0.0;             // max observed / bound over samples
};

inline constexpr double kMarginTolerance = 1e-9;
inline constexpr std::size_t kMaxWitnesses = 5;

// {"property":..,"samples":..,"worst_margin":..,"pass":..,"tightness":..,"witnesses":[..]} on one line.
std::string to_json(const CertificateReport& r);

// ||grad(U1) - grad(U2)||_F <= constant * max{Gamma, ||M||} ||U1 - U2||_F on
// {||U||_2^2 <= Gamma}. The proven constant is 8; other values exist to
// exercise the failure path.
CertificateReport smoothness_certificate(const SpdMatrix& m, double gamma_upper, std::size_t num_samples,
                                         std::uint64_t seed, double constant = 8.0);

// ||grad(U)||_F^2 >= 4 sigma_min(U)^2 f(U) >= 4 gamma f(U) for PD U with
// sigma_min(U)^2 >= gamma.
CertificateReport gradient_dominance_certificate(const SpdMatrix& m, double gamma, std::size_t num_samples,
                                                 std::uint64_t seed);

// PD samples with sigma_min(U) >= 1e-3, including points next to sqrt(M) and
// next to the singular surface: the dominance inequality holds, so a
// gradient below 1e-6 forces f(U) <= 1e-12 / (4 sigma_min(U)^2).
CertificateReport saddle_location_check(const SpdMatrix& m, std::size_t num_samples, std::uint64_t seed);

inline constexpr double kStationaryThreshold = 1e-6;
inline constexpr double kSaddleSigmaFloor = 1e-3;

// Every record within [corridor_low - 1e-9, corridor_high + 1e-9].
CertificateReport corridor_check(const gd::IterationTrace& trace, const RateParams& rate);

} // namespace matsqrt::analysis
