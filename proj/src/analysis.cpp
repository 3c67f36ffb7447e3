#include "matsqrt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "matsqrt/baselines.hpp"
#include "matsqrt/errors.hpp"
#include "matsqrt/format.hpp"
#include "matsqrt/random.hpp"

namespace matsqrt::analysis {
namespace {

using linalg::Matrix;
using linalg::SymmetricMatrix;

double decay_rate(double eta, const RateParams& rate, double c_rate) { return c_rate * eta * rate.beta * rate.beta; }

double normalized_margin(double bound, double observed) {
    const double scale = std::max(std::abs(bound), std::abs(observed));
    if (scale == 0.0) return 0.0;
    return (bound - observed) / scale;
}

// Accumulates samples into a report. Witnesses are the first failures seen.
class ReportBuilder {
public:
    explicit ReportBuilder(std::string property) { report_.property = std::move(property); report_.worst_margin = std::numeric_limits<double>::infinity(); }

    void add(double margin, double ratio, const std::string& describe) {
        ++report_.samples;
        report_.worst_margin = std::min(report_.worst_margin, margin);
        if (std::isfinite(ratio)) report_.tightness = std::max(report_.tightness, ratio);
        if (!(margin >= -kMarginTolerance)) {
            report_.pass = false;
            if (report_.witnesses.size() < kMaxWitnesses) report_.witnesses.push_back(describe);
        }
    }

    CertificateReport finish() {
        if (report_.samples == 0) report_.worst_margin = 0.0;
        return std::move(report_);
    }

private:
    CertificateReport report_;
};

// Random symmetric matrix with spectral norm exactly `radius` (up to rounding,
// kept just inside).
SymmetricMatrix symmetric_with_norm(std::size_t n, double radius, random::Rng& rng) {
    const SymmetricMatrix a = random::gaussian_symmetric(n, rng);
    const double norm = linalg::spectral_norm(a);
    if (norm == 0.0) return SymmetricMatrix(Matrix(n, n));
    return linalg::symmetrize((radius * (1.0 - 1e-12) / norm) * a.matrix());
}

double uniform(random::Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// V diag(d) V^T with d ~ uniform[lo, hi] and d[0] pinned at lo.
SymmetricMatrix pd_sample(std::size_t n, double lo, double hi, random::Rng& rng) {
    const Matrix v = random::random_orthogonal(n, rng);
    std::vector<double> d(n);
    for (double& x : d) x = uniform(rng, lo, hi);
    d[0] = lo;
    return random::with_spectrum(v, d);
}

std::string sample_tag(std::size_t k, const char* kind) { return "sample " + std::to_string(k) + " (" + kind + ")"; }

} // namespace

RateParams rate_params(const SpdMatrix& u0, const SpdMatrix& m) {
    if (u0.size() != m.size()) throw DimensionError("rate_params: U0 and M differ in size");
    RateParams r;
    r.u0_opnorm = u0.lambda_max();
    r.m_opnorm = m.lambda_max();
    const double u0_min = u0.lambda_min();
    const double root_m_min = std::sqrt(m.lambda_min());
    r.beta = std::min(u0_min, root_m_min);
    const double ratio = std::max(r.u0_opnorm, std::sqrt(r.m_opnorm)) / r.beta;
    r.alpha = ratio * ratio * ratio;
    r.corridor_low = std::min(u0_min, root_m_min / 10.0);
    r.corridor_high = std::max(r.u0_opnorm, std::sqrt(3.0 * r.m_opnorm));
    r.kappa = m.condition_number();
    return r;
}

double theoretical_residual_bound(double t, double eta, const RateParams& rate, double r0, double c_rate) {
    return std::exp(-decay_rate(eta, rate, c_rate) * t) * r0;
}

double stability_bound(std::size_t t, double eta, const RateParams& rate, double r0, std::span<const double> err_fro,
                       double u0_opnorm, double m_opnorm, double c_rate) {
    if (err_fro.size() < t) throw InvalidArgument("stability_bound: need at least t error norms");
    const double q = std::exp(-decay_rate(eta, rate, c_rate));
    double sum = 0.0;
    for (std::size_t s = 0; s < t; ++s) sum = q * sum + err_fro[s];
    const double weight = 4.0 * std::max(u0_opnorm, std::sqrt(3.0 * m_opnorm));
    return theoretical_residual_bound(static_cast<double>(t), eta, rate, r0, c_rate) + weight * sum;
}

double first_error_bound(std::size_t t, double eta, const RateParams& rate, double r0, double e0_fro,
                         double u0_opnorm, double m_opnorm, double c_rate) {
    const double decay = theoretical_residual_bound(static_cast<double>(t), eta, rate, r0, c_rate);
    if (t == 0) return decay;
    const double amp = 6.0 * std::max(u0_opnorm * u0_opnorm, m_opnorm);
    return decay + amp * theoretical_residual_bound(static_cast<double>(t - 1), eta, rate, e0_fro, c_rate);
}

StabilityBoundTracker::StabilityBoundTracker(double eta, const RateParams& rate, double r0, double c_rate)
    : r0_(r0),
      q_(std::exp(-decay_rate(eta, rate, c_rate))),
      weight_(4.0 * std::max(rate.u0_opnorm, std::sqrt(3.0 * rate.m_opnorm))),
      decay_(r0),
      eta_(eta),
      rate_(rate),
      c_rate_(c_rate) {}

void StabilityBoundTracker::advance(double err_fro) noexcept {
    sum_ = q_ * sum_ + err_fro;
    ++t_;
    decay_ = theoretical_residual_bound(static_cast<double>(t_), eta_, rate_, r0_, c_rate_);
}

std::string to_json(const CertificateReport& r) {
    nlohmann::json j;
    j["property"] = r.property;
    j["samples"] = r.samples;
    j["worst_margin"] = r.worst_margin;
    j["pass"] = r.pass;
    j["tightness"] = r.tightness;
    j["witnesses"] = r.witnesses;
    return j.dump();
}

CertificateReport smoothness_certificate(const SpdMatrix& m, double gamma_upper, std::size_t num_samples,
                                         std::uint64_t seed, double constant) {
    if (!(gamma_upper > 0.0)) throw InvalidArgument("smoothness_certificate: Gamma must be positive");
    const std::size_t n = m.size();
    const double radius = std::sqrt(gamma_upper);
    const double lipschitz = constant * std::max(gamma_upper, m.lambda_max());
    ReportBuilder out("smoothness");

    for (std::size_t k = 0; k < num_samples; ++k) {
        random::Rng rng = random::substream(seed, k);
        const char* kind = nullptr;
        SymmetricMatrix u1 = symmetric_with_norm(n, radius * uniform(rng, 0.0, 1.0), rng);
        SymmetricMatrix u2 = u1;
        switch (k % 3) {
        case 0:
            kind = "independent";
            u2 = symmetric_with_norm(n, radius * uniform(rng, 0.0, 1.0), rng);
            break;
        case 1: {
            // Both on the boundary ||U||_2^2 = Gamma, close to each other.
            kind = "near";
            u1 = symmetric_with_norm(n, radius, rng);
            const SymmetricMatrix d = symmetric_with_norm(n, radius * uniform(rng, 1e-6, 1e-2), rng);
            const SymmetricMatrix moved = linalg::symmetrize(u1.matrix() + d.matrix());
            const double norm = linalg::spectral_norm(moved);
            u2 = norm > radius * (1.0 - 1e-12) ? linalg::symmetrize((radius * (1.0 - 1e-12) / norm) * moved.matrix()) : moved;
            break;
        }
        default: {
            // U1 = sqrt(Gamma) V S V^T with S = diag(+-1) and U2 a shrunken copy:
            // here the cubic term dominates and the ratio approaches 6 Gamma.
            kind = "aligned";
            const Matrix v = random::random_orthogonal(n, rng);
            std::vector<double> s(n);
            std::bernoulli_distribution coin(0.5);
            for (double& x : s) x = (coin(rng) ? 1.0 : -1.0) * radius * (1.0 - 1e-12);
            u1 = random::with_spectrum(v, s);
            u2 = linalg::symmetrize((1.0 - uniform(rng, 1e-3, 0.5)) * u1.matrix());
            break;
        }
        }
        const double observed = linalg::frobenius_norm(gd::gradient(u1, m).matrix() - gd::gradient(u2, m).matrix());
        const double bound = lipschitz * linalg::frobenius_norm(u1.matrix() - u2.matrix());
        const double ratio = bound > 0.0 ? observed / bound : 0.0;
        out.add(normalized_margin(bound, observed), ratio,
                sample_tag(k, kind) + ": gradient gap " + format_double(observed) + " > " + format_double(bound));
    }
    return out.finish();
}

CertificateReport gradient_dominance_certificate(const SpdMatrix& m, double gamma, std::size_t num_samples,
                                                 std::uint64_t seed) {
    if (!(gamma > 0.0)) throw InvalidArgument("gradient_dominance_certificate: gamma must be positive");
    const std::size_t n = m.size();
    const double lo = std::sqrt(gamma);
    const double hi = std::max(2.0 * std::sqrt(m.lambda_max()), 2.0 * lo);
    ReportBuilder out("gradient_dominance");

    for (std::size_t k = 0; k < num_samples; ++k) {
        random::Rng rng = random::substream(seed, k);
        const SymmetricMatrix u = pd_sample(n, lo, hi, rng);
        const double sigma = linalg::sigma_min(u);
        const double f = gd::objective(u, m);
        const double g = linalg::frobenius_norm(gd::gradient(u, m).matrix());
        const double observed = 4.0 * sigma * sigma * f;
        const double lhs = g * g;
        out.add(normalized_margin(lhs, observed), lhs > 0.0 ? observed / lhs : 0.0,
                sample_tag(k, "pd") + ": |grad|^2 " + format_double(lhs) + " < 4 sigma^2 f " + format_double(observed));
    }
    return out.finish();
}

CertificateReport saddle_location_check(const SpdMatrix& m, std::size_t num_samples, std::uint64_t seed) {
    const std::size_t n = m.size();
    const SymmetricMatrix root = baselines::evd_sqrt(m).symmetric();
    const double top = 2.0 * std::sqrt(m.lambda_max());
    ReportBuilder out("saddle_location");

    for (std::size_t k = 0; k < num_samples; ++k) {
        random::Rng rng = random::substream(seed, k);
        const char* kind = nullptr;
        SymmetricMatrix u = root;
        switch (k % 3) {
        case 0:
            kind = "generic";
            u = pd_sample(n, uniform(rng, kSaddleSigmaFloor, top), top, rng);
            break;
        case 1: {
            kind = "near-root";
            const double eps = std::pow(10.0, uniform(rng, -6.0, -3.0)) * std::sqrt(m.lambda_min());
            u = linalg::symmetrize(root.matrix() + symmetric_with_norm(n, eps, rng).matrix());
            break;
        }
        default:
            kind = "near-singular";
            u = pd_sample(n, uniform(rng, kSaddleSigmaFloor, 10.0 * kSaddleSigmaFloor), top, rng);
            break;
        }
        const double sigma = linalg::sigma_min(u);
        if (!(sigma >= kSaddleSigmaFloor) || linalg::lambda_min(u) <= 0.0) continue;
        const double f = gd::objective(u, m);
        const double g = linalg::frobenius_norm(gd::gradient(u, m).matrix());
        const double dominance = 4.0 * sigma * sigma * f;
        double margin = normalized_margin(g * g, dominance);
        std::string what = "|grad|^2 " + format_double(g * g) + " < 4 sigma^2 f " + format_double(dominance);
        if (g <= kStationaryThreshold) {
            const double cap = kStationaryThreshold * kStationaryThreshold / (4.0 * sigma * sigma);
            const double m2 = normalized_margin(cap, f);
            if (m2 < margin) {
                margin = m2;
                what = "near-stationary point with f " + format_double(f) + " > " + format_double(cap);
            }
        }
        out.add(margin, g > 0.0 ? dominance / (g * g) : 0.0, sample_tag(k, kind) + ": " + what);
    }
    return out.finish();
}

CertificateReport corridor_check(const gd::IterationTrace& trace, const RateParams& rate) {
    if (trace.empty()) throw InvalidArgument("corridor_check: empty trace");
    ReportBuilder out("corridor");
    for (const gd::IterationRecord& r : trace) {
        const double low_margin = r.sigma_min - rate.corridor_low;
        const double high_margin = rate.corridor_high - r.opnorm;
        std::ostringstream what;
        what << "step " << r.t << ": sigma_min " << format_double(r.sigma_min) << ", opnorm " << format_double(r.opnorm);
        out.add(std::min(low_margin, high_margin), r.opnorm / rate.corridor_high, what.str());
    }
    return out.finish();
}

} // namespace matsqrt::analysis
