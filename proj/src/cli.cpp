#include "matsqrt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "matsqrt/analysis.hpp"
#include "matsqrt/baselines.hpp"
#include "matsqrt/errors.hpp"
#include "matsqrt/experiments.hpp"
#include "matsqrt/format.hpp"
#include "matsqrt/gd_solver.hpp"
#include "matsqrt/matrix_io.hpp"
#include "matsqrt/random.hpp"

namespace matsqrt::cli {
namespace {

using linalg::SpdMatrix;
using linalg::SymmetricMatrix;

struct Options {
    std::uint64_t seed = 0;
    std::string output;

    std::string matrix_path;
    std::optional<double> eta;
    double tol = 1e-8;
    std::size_t max_iters = 10'000'000;
    std::string init = "auto-lambda";
    std::string trace_path;
    std::string method = "gd";

    std::size_t samples = 1000;
    bool self_test = false;

    std::vector<std::size_t> dims{4, 16};
    std::vector<double> kappas{1, 10, 100};
    std::vector<std::string> methods{"gd", "newton", "evd"};
    std::string spectrum = "geometric";
    bool no_timing = false;

    double kappa = 0.0;
    std::vector<double> deltas;

    std::size_t steps = 100;
    double grid_min = 0.0;
    double grid_max = 2.0;
};

SpdMatrix load_spd(const std::string& path) {
    const linalg::Matrix raw = io::read_matrix_file(path);
    try {
        return SpdMatrix(SymmetricMatrix(raw));
    } catch (const NotPositiveDefinite& e) {
        throw NotPositiveDefinite(path + ": input must be symmetric positive definite (" + e.what() + ")");
    }
}

// Writes through `fn` either to the -o path or to `out`.
void emit(const Options& opt, std::ostream& out, const std::function<void(std::ostream&)>& fn) {
    if (opt.output.empty()) {
        fn(out);
        return;
    }
    std::ofstream file(opt.output);
    if (!file) throw InvalidArgument("cannot open output file " + opt.output);
    fn(file);
    if (!file) throw InvalidArgument("failed writing " + opt.output);
}

gd::GdConfig gd_config(const Options& opt, const SpdMatrix& m) {
    gd::GdConfig cfg;
    cfg.eta = opt.eta;
    cfg.tol = opt.tol;
    cfg.max_iters = opt.max_iters;
    if (opt.init == "auto-lambda") {
        cfg.init = gd::ScaledIdentity{linalg::estimate_opnorm_bound(m, opt.seed)};
    } else if (opt.init == "sqrt-opnorm") {
        cfg.init = gd::SqrtOpnormIdentity{};
    } else if (opt.init.rfind("file:", 0) == 0) {
        const linalg::Matrix u0 = io::read_matrix_file(opt.init.substr(5));
        cfg.init = gd::ExplicitStart{SymmetricMatrix(u0)};
    } else {
        throw InvalidArgument("--init must be auto-lambda, sqrt-opnorm or file:PATH (got '" + opt.init + "')");
    }
    cfg.validate();
    return cfg;
}

void echo_gd(std::ostream& err, const SpdMatrix& m, const gd::GdConfig& cfg) {
    const SpdMatrix u0 = gd::initial_iterate(m, cfg);
    const analysis::RateParams rate = analysis::rate_params(u0, m);
    const double eta = cfg.eta ? *cfg.eta : gd::step_size_policy(u0, m, cfg);
    err << "# n=" << m.size() << " kappa=" << format_double(rate.kappa) << " opnorm=" << format_double(rate.m_opnorm)
        << '\n'
        << "# eta=" << format_double(eta) << (cfg.eta ? " (given)" : " (auto)") << " alpha=" << format_double(rate.alpha)
        << " beta=" << format_double(rate.beta) << '\n'
        << "# corridor=[" << format_double(rate.corridor_low) << ", " << format_double(rate.corridor_high) << "]"
        << " tol=" << format_double(cfg.tol) << " max_iters=" << cfg.max_iters << '\n';
}

int exit_for(gd::RunStatus s) {
    switch (s) {
    case gd::RunStatus::Converged: return kExitOk;
    case gd::RunStatus::IterationCap:
    case gd::RunStatus::Interrupted: return kExitIterationCap;
    case gd::RunStatus::Diverged:
    case gd::RunStatus::NonPdIterate: return kExitDiverged;
    }
    return kExitDiverged;
}

int cmd_sqrt(const Options& opt, std::ostream& out, std::ostream& err) {
    const SpdMatrix m = load_spd(opt.matrix_path);
    const experiments::Method method = experiments::parse_method(opt.method);
    const gd::GdConfig cfg = gd_config(opt, m);
    err << "# method=" << experiments::to_string(method) << " seed=" << opt.seed << '\n';
    echo_gd(err, m, cfg);

    switch (method) {
    case experiments::Method::Evd: {
        const SpdMatrix root = baselines::evd_sqrt(m);
        emit(opt, out, [&](std::ostream& s) { io::write_matrix(s, root.matrix()); });
        return kExitOk;
    }
    case experiments::Method::Newton: {
        baselines::NewtonConfig nc;
        nc.tol = opt.tol / linalg::frobenius_norm(m.matrix());
        nc.max_iters = std::min<std::size_t>(opt.max_iters, 100);
        try {
            const baselines::NewtonResult res = baselines::newton_sqrt(m, nc);
            err << "# status=converged iterations=" << res.iterations
                << " residual=" << format_double(res.residuals.back()) << '\n';
            emit(opt, out, [&](std::ostream& s) { io::write_matrix(s, res.x.matrix()); });
            return kExitOk;
        } catch (const ConvergenceError& e) {
            err << "error: " << e.what() << '\n';
            return kExitIterationCap;
        } catch (const SingularMatrix& e) {
            err << "error: " << e.what() << '\n';
            return kExitDiverged;
        }
    }
    case experiments::Method::Gd: break;
    }

    const gd::RunResult res = gd::run(m, cfg);
    for (const std::string& w : res.warnings) err << "warning: " << w << '\n';
    err << "# status=" << gd::to_string(res.status) << " steps=" << res.steps
        << " residual=" << format_double(res.trace.back().residual) << '\n';
    if (!res.message.empty()) err << "# " << res.message << '\n';
    if (!opt.trace_path.empty()) {
        std::ofstream trace(opt.trace_path);
        if (!trace) throw InvalidArgument("cannot open trace file " + opt.trace_path);
        gd::write_trace_csv(trace, res.trace);
    }
    emit(opt, out, [&](std::ostream& s) { io::write_matrix(s, res.u.matrix()); });
    return exit_for(res.status);
}

int cmd_certify(const Options& opt, std::ostream& out, std::ostream& err) {
    const SpdMatrix m = load_spd(opt.matrix_path);
    const gd::GdConfig cfg = gd_config(opt, m);
    const double smooth_constant = opt.self_test ? 1.0 : 8.0;
    const double gamma_upper = 4.0 * m.lambda_max();
    const double gamma = m.lambda_min() / 4.0;
    err << "# samples=" << opt.samples << " seed=" << opt.seed << " Gamma=" << format_double(gamma_upper)
        << " gamma=" << format_double(gamma) << " smoothness_constant=" << format_double(smooth_constant)
        << (opt.self_test ? " (self-test)" : "") << '\n';
    echo_gd(err, m, cfg);

    std::vector<analysis::CertificateReport> reports;
    reports.push_back(analysis::smoothness_certificate(m, gamma_upper, opt.samples, random::substream(opt.seed, 0)(),
                                                       smooth_constant));
    reports.push_back(
        analysis::gradient_dominance_certificate(m, gamma, opt.samples, random::substream(opt.seed, 1)()));
    reports.push_back(analysis::saddle_location_check(m, opt.samples, random::substream(opt.seed, 2)()));

    const gd::RunResult res = gd::run(m, cfg);
    const analysis::RateParams rate = analysis::rate_params(gd::initial_iterate(m, cfg), m);
    reports.push_back(analysis::corridor_check(res.trace, rate));
    err << "# gd status=" << gd::to_string(res.status) << " steps=" << res.steps << '\n';

    emit(opt, out, [&](std::ostream& s) {
        s << "[\n";
        for (std::size_t i = 0; i < reports.size(); ++i) s << analysis::to_json(reports[i]) << (i + 1 < reports.size() ? ",\n" : "\n");
        s << "]\n";
    });
    const bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
    for (const auto& r : reports)
        if (!r.pass) err << "certificate failed: " << r.property << " worst_margin=" << format_double(r.worst_margin) << '\n';
    return ok ? kExitOk : kExitCertificate;
}

int cmd_bench(const Options& opt, std::ostream& out, std::ostream& err) {
    const experiments::Spectrum spectrum = experiments::parse_spectrum(opt.spectrum);
    std::vector<experiments::Method> methods;
    for (const std::string& name : opt.methods) methods.push_back(experiments::parse_method(name));
    std::vector<experiments::SpdInstanceSpec> specs;
    for (std::size_t n : opt.dims)
        for (double kappa : opt.kappas)
            specs.push_back({n, kappa, 1.0, spectrum, random::substream(opt.seed, specs.size())()});

    gd::GdConfig cfg;
    cfg.eta = opt.eta;
    cfg.tol = opt.tol;
    cfg.max_iters = opt.max_iters;
    cfg.validate();
    err << "# bench instances=" << specs.size() << " spectrum=" << experiments::to_string(spectrum)
        << " seed=" << opt.seed << " tol=" << format_double(cfg.tol) << " max_iters=" << cfg.max_iters << '\n';
    err << "# gd init=sqrt-opnorm eta=" << (cfg.eta ? format_double(*cfg.eta) : std::string("auto")) << '\n';

    const auto rows = experiments::convergence_benchmark(specs, methods, cfg);
    emit(opt, out, [&](std::ostream& s) { experiments::write_benchmark_csv(s, rows, !opt.no_timing); });
    return kExitOk;
}

int cmd_lowerbound(const Options& opt, std::ostream& out, std::ostream& err) {
    if (!opt.eta) throw InvalidArgument("lowerbound requires --eta");
    const experiments::LowerBoundReport rep = experiments::run_lower_bound(opt.kappa, *opt.eta);
    const experiments::LowerBoundInstance& inst = rep.instance;
    const analysis::RateParams rate = analysis::rate_params(inst.u0, inst.m);
    err << "# kappa=" << format_double(opt.kappa) << " case=" << inst.step_case
        << " eta=" << format_double(inst.eta) << " (requested " << format_double(inst.requested_eta) << ")\n"
        << "# alpha=" << format_double(rate.alpha) << " beta=" << format_double(rate.beta) << " corridor=["
        << format_double(rate.corridor_low) << ", " << format_double(rate.corridor_high) << "]\n";
    emit(opt, out, [&](std::ostream& s) { experiments::write_lower_bound_csv(s, rep); });
    err << "# steps=" << rep.steps << " floor=" << format_double(rep.floor)
        << " min_residual=" << format_double(rep.min_residual) << " max_deviation=" << format_double(rep.max_deviation)
        << '\n';
    if (inst.step_case == 1 && !inst.exact_saddle) err << "warning: no step size near eta puts (U1)_11 exactly on 0\n";
    err << (rep.pass() ? "# residual stays above sigma_min/4 for all t <= kappa\n" : "lower bound check failed\n");
    return rep.pass() ? kExitOk : kExitCertificate;
}

int cmd_robustness(const Options& opt, std::ostream& out, std::ostream& err) {
    const SpdMatrix m = load_spd(opt.matrix_path);
    if (opt.deltas.empty()) throw InvalidArgument("robustness requires --deltas");
    const gd::GdConfig cfg = gd_config(opt, m);
    echo_gd(err, m, cfg);
    const SpdMatrix u0 = gd::initial_iterate(m, cfg);
    const double eta = cfg.eta ? *cfg.eta : gd::step_size_policy(u0, m, cfg);
    err << "# error tolerance=" << format_double(gd::error_tolerance(eta, m, analysis::rate_params(u0, m).beta))
        << " window=" << experiments::plateau_window(eta, m) << " seed=" << opt.seed << '\n';

    const auto rows = experiments::robustness_sweep(m, opt.deltas, cfg, opt.seed);
    emit(opt, out, [&](std::ostream& s) { experiments::write_robustness_csv(s, rows); });
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.bound_violations == 0; });
    if (!ok) err << "stability bound violated\n";
    return ok ? kExitOk : kExitCertificate;
}

int cmd_landscape(const Options& opt, std::ostream& out, std::ostream& err) {
    err << "# M=diag(4,2) steps=" << opt.steps << " s in [" << format_double(opt.grid_min) << ", "
        << format_double(opt.grid_max) << "], x=2s, y=sqrt(2)s\n";
    const auto grid = experiments::landscape_grid(opt.grid_min, opt.grid_max, opt.steps);
    emit(opt, out, [&](std::ostream& s) { experiments::write_landscape_csv(s, grid); });
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options opt;
    if (const char* env = std::getenv("MATSQRT_SEED")) {
        try {
            opt.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "error: MATSQRT_SEED must be a nonnegative integer\n";
            return kExitInvalid;
        }
    }

    CLI::App app{"Matrix square roots by gradient descent"};
    app.name("matsqrt");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.add_option("--seed", opt.seed, "seed for every random choice (default: $MATSQRT_SEED or 0)");

    auto add_output = [&](CLI::App* sub) { sub->add_option("-o,--output", opt.output, "output file (default: stdout)"); };
    auto add_gd = [&](CLI::App* sub) {
        sub->add_option("--eta", opt.eta, "step size (default: automatic)")->check(CLI::PositiveNumber);
        sub->add_option("--tol", opt.tol, "target residual ||M - U^2||_F")->check(CLI::PositiveNumber);
        sub->add_option("--max-iters", opt.max_iters, "iteration cap")->check(CLI::PositiveNumber);
        sub->add_option("--init", opt.init, "auto-lambda, sqrt-opnorm or file:PATH");
    };

    CLI::App* sqrt = app.add_subcommand("sqrt", "square root of an SPD matrix");
    sqrt->add_option("matrix", opt.matrix_path, "input matrix file")->required();
    add_gd(sqrt);
    add_output(sqrt);
    sqrt->add_option("--trace", opt.trace_path, "write the gd trace CSV here");
    sqrt->add_option("--method", opt.method, "gd, newton or evd");

    CLI::App* certify = app.add_subcommand("certify", "run the landscape certificates and a corridor check");
    certify->add_option("matrix", opt.matrix_path, "input matrix file")->required();
    add_gd(certify);
    add_output(certify);
    certify->add_option("--samples", opt.samples, "samples per certificate")->check(CLI::PositiveNumber);
    certify->add_flag("--self-test", opt.self_test, "loosen the smoothness constant to 1 so the check must fail");

    CLI::App* bench = app.add_subcommand("bench", "iteration counts of gd, newton and evd");
    bench->add_option("--n", opt.dims, "dimensions")->delimiter(',');
    bench->add_option("--kappas", opt.kappas, "condition numbers")->delimiter(',');
    bench->add_option("--methods", opt.methods, "methods")->delimiter(',');
    bench->add_option("--spectrum", opt.spectrum, "geometric, linear or two-point");
    bench->add_option("--eta", opt.eta, "gd step size (default: automatic)")->check(CLI::PositiveNumber);
    bench->add_option("--tol", opt.tol, "target residual")->check(CLI::PositiveNumber);
    bench->add_option("--max-iters", opt.max_iters, "gd iteration cap")->check(CLI::PositiveNumber);
    bench->add_flag("--no-timing", opt.no_timing, "write NA in the wall_time column");
    add_output(bench);

    CLI::App* lowerbound = app.add_subcommand("lowerbound", "replicate the kappa-step lower bound instance");
    lowerbound->add_option("--kappa", opt.kappa, "condition number")->required()->check(CLI::Range(1.0, 1e12));
    lowerbound->add_option("--eta", opt.eta, "step size")->required()->check(CLI::PositiveNumber);
    add_output(lowerbound);

    CLI::App* robustness = app.add_subcommand("robustness", "residual floors under injected per-step errors");
    robustness->add_option("matrix", opt.matrix_path, "input matrix file")->required();
    robustness->add_option("--deltas", opt.deltas, "error magnitudes, nonincreasing")->delimiter(',')->required();
    add_gd(robustness);
    add_output(robustness);

    CLI::App* landscape = app.add_subcommand("landscape", "objective and flow grid for M = diag(4, 2)");
    landscape->add_option("--steps", opt.steps, "grid intervals per axis")->check(CLI::PositiveNumber);
    landscape->add_option("--min", opt.grid_min, "grid start (root coordinates at 1)");
    landscape->add_option("--max", opt.grid_max, "grid end");
    add_output(landscape);

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (sqrt->parsed()) return cmd_sqrt(opt, out, err);
        if (certify->parsed()) return cmd_certify(opt, out, err);
        if (bench->parsed()) return cmd_bench(opt, out, err);
        if (lowerbound->parsed()) return cmd_lowerbound(opt, out, err);
        if (robustness->parsed()) return cmd_robustness(opt, out, err);
        if (landscape->parsed()) return cmd_landscape(opt, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}

} // namespace matsqrt::cli
