#include "matsqrt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>

#include "matsqrt/analysis.hpp"
#include "matsqrt/baselines.hpp"
#include "matsqrt/errors.hpp"
#include "matsqrt/format.hpp"
#include "matsqrt/random.hpp"

namespace matsqrt::experiments {
namespace {

using linalg::Matrix;
using linalg::SymmetricMatrix;

void validate(const SpdInstanceSpec& spec) {
    if (spec.n < 1) throw InvalidArgument("instance dimension must be at least 1");
    if (!(spec.kappa >= 1.0) || !std::isfinite(spec.kappa)) throw InvalidArgument("kappa must be a finite value >= 1");
    if (!(spec.opnorm > 0.0) || !std::isfinite(spec.opnorm)) throw InvalidArgument("opnorm must be positive");
    if (spec.n == 1 && spec.kappa != 1.0) throw InvalidArgument("a 1x1 instance must have kappa = 1");
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return linalg::max_abs(a - b); }

// Case 1: the first step should put (U1)_11 exactly on zero. With rounding
// that only happens for particular (eta, u) pairs, so walk eta upwards one ulp
// at a time and try u = fl(sqrt(b)) and its close neighbours.
struct SaddleStart {
    double eta;
    double u;
    bool exact;
};

SaddleStart find_saddle_start(double eta, double sigma_min, const SymmetricMatrix& m) {
    constexpr int kEtaUlps = 4096;
    constexpr int kUUlps = 4;
    const double u_cap = std::sqrt(3.0);
    const double root_sigma = std::sqrt(sigma_min);
    double e = eta;
    for (int k = 0; k <= kEtaUlps; ++k, e = std::nextafter(e, HUGE_VAL)) {
        const double centre = std::sqrt(1.0 / (2.0 * e) + 1.0);
        for (int d = 0; d <= 2 * kUUlps; ++d) {
            // 0, +1, -1, +2, -2, ...
            const int offset = (d % 2 == 1) ? (d + 1) / 2 : -(d / 2);
            double u = centre;
            for (int i = 0; i < std::abs(offset); ++i) u = std::nextafter(u, offset > 0 ? HUGE_VAL : 0.0);
            if (u > u_cap) continue;
            const SymmetricMatrix u0 = SymmetricMatrix::diagonal({u, root_sigma});
            if (gd::gd_step(u0, m, e)(0, 0) == 0.0) return {e, u, true};
        }
    }
    return {eta, std::min(std::sqrt(1.0 / (2.0 * eta) + 1.0), u_cap), false};
}

} // namespace

Spectrum parse_spectrum(std::string_view name) {
    if (name == "geometric") return Spectrum::Geometric;
    if (name == "linear") return Spectrum::Linear;
    if (name == "two-point") return Spectrum::TwoPoint;
    throw InvalidArgument("unknown spectrum '" + std::string(name) + "' (expected geometric, linear or two-point)");
}

const char* to_string(Spectrum s) noexcept {
    switch (s) {
    case Spectrum::Geometric: return "geometric";
    case Spectrum::Linear: return "linear";
    case Spectrum::TwoPoint: return "two-point";
    }
    return "unknown";
}

std::vector<double> prescribed_spectrum(const SpdInstanceSpec& spec) {
    validate(spec);
    const std::size_t n = spec.n;
    const double top = spec.opnorm;
    const double bottom = spec.opnorm / spec.kappa;
    std::vector<double> d(n, top);
    if (n == 1) return d;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        switch (spec.spectrum) {
        case Spectrum::Geometric: d[i] = top * std::pow(spec.kappa, -s); break;
        case Spectrum::Linear: d[i] = top - (top - bottom) * s; break;
        case Spectrum::TwoPoint: d[i] = 2 * i < n ? top : bottom; break;
        }
    }
    d.front() = top;
    d.back() = bottom;
    return d;
}

SpdMatrix random_spd(const SpdInstanceSpec& spec) {
    const std::vector<double> d = prescribed_spectrum(spec);
    random::Rng rng(spec.seed);
    const Matrix q = random::random_orthogonal(spec.n, rng);
    return SpdMatrix(random::with_spectrum(q, d));
}

std::vector<double> alpha_recurrence(double alpha0, double eta, double sigma_min, std::size_t steps) {
    std::vector<double> a;
    a.reserve(steps + 1);
    a.push_back(alpha0);
    for (std::size_t t = 0; t < steps; ++t) {
        const double x = a.back();
        a.push_back(x * (1.0 + 2.0 * eta * sigma_min * (1.0 - x * x)));
    }
    return a;
}

LowerBoundInstance lower_bound_instance(double kappa, double eta) {
    if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be a finite value >= 1");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be positive");
    const double sigma_min = 1.0 / kappa;
    const SymmetricMatrix m = SymmetricMatrix::diagonal({1.0, sigma_min});
    const std::size_t steps = static_cast<std::size_t>(std::ceil(kappa));

    if (eta >= 0.25) {
        const SaddleStart s = find_saddle_start(eta, sigma_min, m);
        return LowerBoundInstance{SpdMatrix(m), SpdMatrix(SymmetricMatrix::diagonal({s.u, std::sqrt(sigma_min)})),
                                  eta, s.eta, 1, s.exact, {}};
    }
    return LowerBoundInstance{SpdMatrix(m), SpdMatrix(SymmetricMatrix::diagonal({1.0, 0.5 * std::sqrt(sigma_min)})),
                              eta, eta, 2, true, alpha_recurrence(0.5, eta, sigma_min, steps)};
}

LowerBoundReport run_lower_bound(double kappa, double eta) {
    LowerBoundReport rep{lower_bound_instance(kappa, eta), 0, 0.0, 0.0, 0.0, {}};
    const LowerBoundInstance& inst = rep.instance;
    const double sigma_min = inst.m.lambda_min();
    const double root_sigma = std::sqrt(sigma_min);
    rep.steps = static_cast<std::size_t>(std::ceil(kappa));
    rep.floor = 0.25 * sigma_min;
    rep.min_residual = HUGE_VAL;

    const SymmetricMatrix& m = inst.m.symmetric();
    SymmetricMatrix u = inst.u0.symmetric();
    std::optional<SymmetricMatrix> u1;
    for (std::size_t t = 0; t <= rep.steps; ++t) {
        LowerBoundRow row;
        row.t = t;
        row.residual = linalg::frobenius_norm(linalg::square(u).matrix() - m.matrix());
        row.u11 = u(0, 0);
        row.u22 = u(1, 1);
        double deviation = 0.0;
        if (inst.step_case == 2) {
            row.expected_u22 = inst.alpha_trace[t] * root_sigma;
            const Matrix expected = Matrix::diagonal({1.0, row.expected_u22});
            deviation = max_abs_diff(u.matrix(), expected);
        } else if (t == 0) {
            row.expected_u22 = root_sigma;
        } else {
            if (!u1) u1 = u;
            row.expected_u22 = (*u1)(1, 1);
            deviation = max_abs_diff(u.matrix(), u1->matrix());
        }
        rep.max_deviation = std::max(rep.max_deviation, deviation);
        if (static_cast<double>(t) <= kappa) rep.min_residual = std::min(rep.min_residual, row.residual);
        rep.rows.push_back(row);
        if (t < rep.steps) u = gd::gd_step(u, m, inst.eta);
    }
    return rep;
}

void write_lower_bound_csv(std::ostream& out, const LowerBoundReport& report) {
    out << "t,residual,u11,u22,expected_u22\n";
    for (const LowerBoundRow& r : report.rows) {
        out << r.t << ',' << format_double(r.residual) << ',' << format_double(r.u11) << ',' << format_double(r.u22)
            << ',' << format_double(r.expected_u22) << '\n';
    }
}

std::size_t plateau_window(double eta, const SpdMatrix& m) {
    const double w = std::ceil(1.0 / (4.0 * eta * m.lambda_min()));
    return std::max<std::size_t>(100, std::isfinite(w) && w < 1e12 ? static_cast<std::size_t>(w) : 100);
}

std::vector<RobustnessRow> robustness_sweep(const SpdMatrix& m, const std::vector<double>& deltas,
                                            const gd::GdConfig& cfg, std::uint64_t seed) {
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] >= 0.0) || !std::isfinite(deltas[i])) throw InvalidArgument("deltas must be finite and nonnegative");
        if (i > 0 && deltas[i] > deltas[i - 1]) throw InvalidArgument("deltas must be nonincreasing");
    }
    cfg.validate();
    const SpdMatrix u0 = gd::initial_iterate(m, cfg);
    const analysis::RateParams rate = analysis::rate_params(u0, m);
    const double eta = cfg.eta ? *cfg.eta : gd::step_size_policy(u0, m, cfg);
    const double tolerance = gd::error_tolerance(eta, m, rate.beta);
    const std::size_t window = plateau_window(eta, m);

    std::vector<RobustnessRow> rows;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        RobustnessRow row;
        row.delta = deltas[i];
        row.within_tolerance = deltas[i] < tolerance;

        std::optional<analysis::StabilityBoundTracker> tracker;
        double window_sum = 0.0;
        std::size_t window_count = 0;
        std::optional<double> previous_mean;

        gd::GdConfig local = cfg;
        local.eta = eta;
        local.keep_trace = false;
        local.observer = [&](const gd::IterationRecord& rec) {
            if (rec.t == 0) tracker.emplace(eta, rate, rec.residual, cfg.c_rate);
            else tracker->advance(rec.err_fro);
            const double bound = tracker->bound();
            if (rec.residual > bound) ++row.bound_violations;
            row.max_bound_ratio = std::max(row.max_bound_ratio, rec.residual / bound);

            window_sum += rec.residual;
            if (++window_count < window) return true;
            const double mean = window_sum / static_cast<double>(window_count);
            window_sum = 0.0;
            window_count = 0;
            if (previous_mean && std::abs(mean - *previous_mean) < 0.01 * *previous_mean) {
                row.plateaued = true;
                row.floor = mean;
                return false;
            }
            previous_mean = mean;
            return true;
        };
        const gd::ErrorModel err{deltas[i], random::substream(seed, i)(), gd::ErrorSchedule::EveryStep};
        const gd::RunResult res = gd::run_perturbed(m, local, err);
        row.status = res.status;
        row.steps = res.steps;
        if (!row.plateaued) row.floor = res.trace.back().residual;
        rows.push_back(row);
    }
    return rows;
}

void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows) {
    out << "delta,floor,steps,bound_violations,max_bound_ratio,status,plateaued,within_tolerance\n";
    for (const RobustnessRow& r : rows) {
        out << format_double(r.delta) << ',' << format_double(r.floor) << ',' << r.steps << ',' << r.bound_violations
            << ',' << format_double(r.max_bound_ratio) << ',' << gd::to_string(r.status) << ','
            << (r.plateaued ? 1 : 0) << ',' << (r.within_tolerance ? 1 : 0) << '\n';
    }
}

Method parse_method(std::string_view name) {
    if (name == "gd") return Method::Gd;
    if (name == "newton" || name == "newton-commuting-start") return Method::Newton;
    if (name == "evd") return Method::Evd;
    throw InvalidArgument("unknown method '" + std::string(name) + "' (expected gd, newton or evd)");
}

const char* to_string(Method m) noexcept {
    switch (m) {
    case Method::Gd: return "gd";
    case Method::Newton: return "newton-commuting-start";
    case Method::Evd: return "evd";
    }
    return "unknown";
}

std::vector<BenchmarkRow> convergence_benchmark(const std::vector<SpdInstanceSpec>& specs,
                                                const std::vector<Method>& methods, const gd::GdConfig& cfg) {
    using clock = std::chrono::steady_clock;
    std::vector<BenchmarkRow> rows;
    for (const SpdInstanceSpec& spec : specs) {
        const SpdMatrix m = random_spd(spec);
        const double m_fro = linalg::frobenius_norm(m.matrix());
        for (Method method : methods) {
            BenchmarkRow row;
            row.n = spec.n;
            row.kappa = spec.kappa;
            row.method = method;
            const auto start = clock::now();
            try {
                switch (method) {
                case Method::Gd: {
                    gd::GdConfig local = cfg;
                    local.keep_trace = false;
                    const SpdMatrix u0 = gd::initial_iterate(m, local);
                    const double r0 = linalg::frobenius_norm(linalg::square(u0.symmetric()).matrix() - m.matrix());
                    const double alpha = analysis::rate_params(u0, m).alpha;
                    row.predicted_iterations = r0 > cfg.tol ? alpha * std::log(r0 / cfg.tol) : 0.0;
                    const gd::RunResult res = gd::run(m, local);
                    row.iterations = res.steps;
                    row.final_residual = res.trace.back().residual;
                    row.status = gd::to_string(res.status);
                    break;
                }
                case Method::Newton: {
                    baselines::NewtonConfig nc;
                    nc.tol = cfg.tol / m_fro;
                    const baselines::NewtonResult res = baselines::newton_sqrt(m, nc);
                    row.iterations = res.iterations;
                    row.final_residual = res.residuals.back();
                    row.status = "converged";
                    break;
                }
                case Method::Evd: {
                    const SpdMatrix root = baselines::evd_sqrt(m);
                    row.iterations = static_cast<std::size_t>(m.eig().sweeps);
                    row.final_residual = linalg::frobenius_norm(linalg::square(root.symmetric()).matrix() - m.matrix());
                    row.status = "converged";
                    break;
                }
                }
            } catch (const Error& e) {
                row.status = std::string("error: ") + e.what();
            }
            row.wall_time = std::chrono::duration<double>(clock::now() - start).count();
            rows.push_back(row);
        }
    }
    return rows;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows, bool with_timing) {
    out << "n,kappa,method,iterations,wall_time,final_residual,predicted_iterations,status\n";
    for (const BenchmarkRow& r : rows) {
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        out << r.n << ',' << format_double(r.kappa) << ',' << to_string(r.method) << ',' << r.iterations << ','
            << (with_timing ? format_double(r.wall_time) : std::string("NA")) << ',' << format_double(r.final_residual)
            << ',' << format_double(r.predicted_iterations) << ',' << status << '\n';
    }
}

std::vector<LandscapePoint> landscape_grid(double grid_min, double grid_max, std::size_t steps) {
    if (!(grid_min >= 0.0) || !(grid_max > grid_min) || !std::isfinite(grid_max))
        throw InvalidArgument("landscape grid needs 0 <= grid_min < grid_max");
    if (steps < 1) throw InvalidArgument("landscape grid needs at least one step");
    const double root2 = std::sqrt(2.0);
    auto coord = [&](std::size_t i) {
        return grid_min + static_cast<double>(i) * (grid_max - grid_min) / static_cast<double>(steps);
    };
    std::vector<LandscapePoint> grid;
    grid.reserve((steps + 1) * (steps + 1));
    for (std::size_t i = 0; i <= steps; ++i) {
        for (std::size_t j = 0; j <= steps; ++j) {
            LandscapePoint p;
            p.x = 2.0 * coord(i);
            p.y = root2 * coord(j);
            const double rx = p.x * p.x - 4.0;
            const double ry = p.y * p.y - 2.0;
            p.f = rx * rx + ry * ry;
            p.neggrad_x = -2.0 * rx * p.x;
            p.neggrad_y = -2.0 * ry * p.y;
            grid.push_back(p);
        }
    }
    return grid;
}

void write_landscape_csv(std::ostream& out, const std::vector<LandscapePoint>& grid) {
    out << "x,y,f,neggrad_x,neggrad_y\n";
    for (const LandscapePoint& p : grid) {
        out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.f) << ','
            << format_double(p.neggrad_x) << ',' << format_double(p.neggrad_y) << '\n';
    }
}

} // namespace matsqrt::experiments
