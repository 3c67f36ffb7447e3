#include <doctest.h>

#include <cmath>
#include <sstream>

#include "matsqrt/errors.hpp"
#include "matsqrt/experiments.hpp"
#include "matsqrt/gd_solver.hpp"

using namespace matsqrt;
using experiments::Spectrum;
using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::SymmetricMatrix;

TEST_CASE("random spd instances") {
    const SpdMatrix one = experiments::random_spd({6, 1.0, 3.0, Spectrum::Geometric, 4});
    CHECK(linalg::max_abs(one.matrix() - 3.0 * Matrix::identity(6)) <= 1e-12 * 3.0);

    for (Spectrum s : {Spectrum::Geometric, Spectrum::Linear, Spectrum::TwoPoint}) {
        const experiments::SpdInstanceSpec spec{9, 250.0, 2.0, s, 12};
        const SpdMatrix m = experiments::random_spd(spec);
        const auto want = experiments::prescribed_spectrum(spec);
        for (std::size_t i = 0; i < 9; ++i) CHECK(m.eig().eigenvalues[i] == doctest::Approx(want[i]).epsilon(1e-10));
        CHECK(m.condition_number() == doctest::Approx(250.0).epsilon(1e-10));
        CHECK(m.lambda_max() == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(m.matrix() == experiments::random_spd(spec).matrix());
    }
    CHECK_THROWS_AS(experiments::random_spd({0, 1.0, 1.0, Spectrum::Geometric, 0}), InvalidArgument);
    CHECK_THROWS_AS(experiments::random_spd({3, 0.5, 1.0, Spectrum::Geometric, 0}), InvalidArgument);
    CHECK_THROWS_AS(experiments::random_spd({1, 4.0, 1.0, Spectrum::Geometric, 0}), InvalidArgument);
    CHECK(experiments::parse_spectrum("two-point") == Spectrum::TwoPoint);
    CHECK_THROWS_AS(experiments::parse_spectrum("flat"), InvalidArgument);
}

TEST_CASE("lower bound instance, step case 1") {
    const auto inst = experiments::lower_bound_instance(2.0, 0.5);
    CHECK(inst.step_case == 1);
    CHECK(inst.exact_saddle);
    CHECK(inst.u0.matrix()(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(inst.u0.matrix()(1, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(inst.eta >= inst.requested_eta);
    CHECK(inst.eta <= inst.requested_eta * (1 + 1e-12));
    const SymmetricMatrix u1 = gd::gd_step(inst.u0, inst.m, inst.eta);
    CHECK(u1(0, 0) == 0.0);
}

TEST_CASE("lower bound instance, step case 2") {
    const auto inst = experiments::lower_bound_instance(4.0, 0.2);
    CHECK(inst.step_case == 2);
    CHECK(inst.eta == 0.2);
    CHECK(inst.u0.matrix() == Matrix::diagonal({1.0, 0.25}));
    REQUIRE(inst.alpha_trace.size() == 5);
    // alpha_1 = 0.5 (1 + 2 * 0.2 * 0.25 * (1 - 0.25)).
    CHECK(inst.alpha_trace[1] == doctest::Approx(0.5375).epsilon(1e-15));
}

TEST_CASE("lower bound instances satisfy the hypotheses") {
    for (double kappa : {1.0, 2.0, 10.0, 1000.0, 1e6})
        for (double eta : {0.01, 0.1, 0.25, 0.5, 3.0}) {
            const auto inst = experiments::lower_bound_instance(kappa, eta);
            CHECK(inst.u0.lambda_max() <= std::sqrt(3.0));
            CHECK(inst.u0.lambda_min() >= 0.1 / std::sqrt(kappa));
            CHECK(inst.u0.matrix()(0, 1) == 0.0);
            CHECK(inst.m.lambda_max() == 1.0);
            CHECK(inst.step_case == (eta >= 0.25 ? 1 : 2));
        }
    CHECK_THROWS_AS(experiments::lower_bound_instance(0.5, 0.1), InvalidArgument);
    CHECK_THROWS_AS(experiments::lower_bound_instance(2.0, 0.0), InvalidArgument);
}

TEST_CASE("lower bound runs") {
    const auto small = experiments::run_lower_bound(2.0, 0.1);
    CHECK(small.rows[0].residual == doctest::Approx(0.75 * 0.5).epsilon(1e-15));
    CHECK(small.pass());

    const auto stuck = experiments::run_lower_bound(100.0, 0.25);
    CHECK(stuck.instance.step_case == 1);
    CHECK(stuck.rows.size() == 101);
    CHECK(stuck.min_residual >= 1.0 / 400.0);
    CHECK(stuck.pass());
    std::ostringstream out;
    experiments::write_lower_bound_csv(out, stuck);
    CHECK(out.str().rfind("t,residual,u11,u22,expected_u22\n", 0) == 0);
}

TEST_CASE("landscape grid") {
    const auto grid = experiments::landscape_grid(0.0, 2.0, 100);
    CHECK(grid.size() == 101 * 101);
    auto at = [&](std::size_t i, std::size_t j) { return grid[i * 101 + j]; };
    const auto root = at(50, 50);
    CHECK(root.x == 2.0);
    CHECK(root.y == std::sqrt(2.0));
    CHECK(root.f <= 1e-12);
    CHECK(std::abs(root.neggrad_x) <= 1e-12);
    CHECK(std::abs(root.neggrad_y) <= 1e-12);
    CHECK(at(0, 0).f == 20.0);
    CHECK(at(50, 0).neggrad_x == 0.0);
    CHECK(at(50, 0).f == doctest::Approx(4.0));
    CHECK(at(0, 50).f == doctest::Approx(16.0));
    CHECK(std::abs(at(0, 50).neggrad_y) <= 1e-12);
    CHECK_THROWS_AS(experiments::landscape_grid(2.0, 1.0, 10), InvalidArgument);
    CHECK_THROWS_AS(experiments::landscape_grid(0.0, 1.0, 0), InvalidArgument);
}

TEST_CASE("benchmark rows") {
    gd::GdConfig cfg;
    const std::vector<experiments::SpdInstanceSpec> specs{{3, 1.0, 1.0, Spectrum::Geometric, 0},
                                                          {3, 4.0, 1.0, Spectrum::Geometric, 1}};
    const auto rows = experiments::convergence_benchmark(
        specs, {experiments::Method::Gd, experiments::Method::Newton, experiments::Method::Evd}, cfg);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].iterations == 0);
    for (const auto& r : rows) CHECK(r.status == "converged");
    CHECK(rows[3].predicted_iterations > 0.0);
    std::ostringstream out;
    experiments::write_benchmark_csv(out, rows, false);
    CHECK(out.str().find(",NA,") != std::string::npos);
    CHECK(experiments::parse_method("newton") == experiments::Method::Newton);
    CHECK_THROWS_AS(experiments::parse_method("bisection"), InvalidArgument);
}

TEST_CASE("gd iteration counts grow with kappa") {
    gd::GdConfig cfg;
    std::vector<experiments::SpdInstanceSpec> specs;
    for (double kappa : {4.0, 16.0, 64.0}) specs.push_back({4, kappa, 1.0, Spectrum::Geometric, 3});
    const auto rows = experiments::convergence_benchmark(specs, {experiments::Method::Gd}, cfg);
    CHECK(rows[0].iterations < rows[1].iterations);
    CHECK(rows[1].iterations < rows[2].iterations);
}

TEST_CASE("robustness sweep without errors converges") {
    const SpdMatrix m = experiments::random_spd({4, 4.0, 1.0, Spectrum::Geometric, 2});
    gd::GdConfig cfg;
    const auto rows = experiments::robustness_sweep(m, {0.0}, cfg, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].floor <= cfg.tol);
    CHECK(rows[0].bound_violations == 0);
    CHECK_THROWS_AS(experiments::robustness_sweep(m, {0.0, 1.0}, cfg, 1), InvalidArgument);
    CHECK_THROWS_AS(experiments::robustness_sweep(m, {-1.0}, cfg, 1), InvalidArgument);
}
