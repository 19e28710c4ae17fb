#include <doctest.h>

#include <cmath>
#include <vector>

#include "lifecycle/simulate.hpp"

using namespace lifecycle;

namespace {
ModelParams baseline() { return ModelParams{}; }

SimConfig quick_cfg() {
    SimConfig cfg;
    cfg.dt = 2e-3;
    cfg.horizon = 4.0;
    cfg.n_paths = 1;
    cfg.seed = 99;
    return cfg;
}
}  // namespace

TEST_CASE("a path started at the wealth floor is absorbed there") {
    const Solver s{baseline()};
    SimConfig cfg = quick_cfg();
    const auto records = simulate_path(s, 2.5, 1.0, cfg, 0);
    REQUIRE(records.size() > 10);
    for (const auto& r : records) {
        CHECK(r.X == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(r.c == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(r.pi == 0.0);
        CHECK(r.b == 0.0);
        CHECK(r.H == 1.0);
    }
}

TEST_CASE("fixed seeds reproduce paths exactly") {
    const auto a = simulate_path(baseline(), 3.5, 1.0, quick_cfg());
    const auto b = simulate_path(baseline(), 3.5, 1.0, quick_cfg());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].X == b[i].X);
        CHECK(a[i].H == b[i].H);
        CHECK(a[i].c == b[i].c);
        CHECK(a[i].pi == b[i].pi);
    }
}

TEST_CASE("a singleton ensemble equals the single path") {
    SimConfig cfg = quick_cfg();
    cfg.record_stride = 10;
    const auto path = simulate_path(baseline(), 3.5, 1.0, cfg);
    const auto summary = simulate_ensemble(baseline(), 3.5, 1.0, cfg);
    REQUIRE(summary.t.size() == path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(summary.mean_X[i] == path[i].X);
        CHECK(summary.q05_X[i] == path[i].X);
        CHECK(summary.q95_X[i] == path[i].X);
        CHECK(summary.mean_c[i] == path[i].c);
    }
}

TEST_CASE("ensembles are deterministic under a fixed seed") {
    SimConfig cfg = quick_cfg();
    cfg.n_paths = 64;
    cfg.record_stride = 50;
    const auto a = simulate_ensemble(baseline(), 3.5, 1.0, cfg);
    const auto b = simulate_ensemble(baseline(), 3.5, 1.0, cfg);
    REQUIRE(a.t.size() == b.t.size());
    for (std::size_t i = 0; i < a.t.size(); ++i) {
        CHECK(a.mean_X[i] == b.mean_X[i]);
        CHECK(a.q05_X[i] == b.q05_X[i]);
        CHECK(a.q95_X[i] == b.q95_X[i]);
        CHECK(a.mean_p[i] == b.mean_p[i]);
    }
}

TEST_CASE("path-wise admissibility and ratchet consistency") {
    const ModelParams p = baseline();
    const Solver s{p};
    SimConfig cfg = quick_cfg();
    cfg.dt = 4e-3;
    cfg.horizon = 6.0;
    for (std::uint64_t i = 0; i < 60; ++i) {
        const auto records = simulate_path(s, 20.0, 1.0, cfg, i);  // starts near the boundary
        double prev_h = records.front().H;
        double prev_x = records.front().X;
        for (const auto& r : records) {
            CHECK(r.X >= p.nu * r.H / (p.r + p.lambda) - 1e-6 * r.H);
            CHECK(r.c >= p.nu * r.H - 1e-9 * r.H);
            CHECK(r.c <= r.H * (1.0 + 1e-9));
            CHECK(r.H >= prev_h);
            if (r.H > prev_h * (1.0 + 1e-12)) {
                // the reference moved: the wealth crossed the previous
                // boundary within this step
                CHECK(r.X >= s.boundary_curves(prev_h).x_lavs * (1.0 - 1e-6));
            }
            prev_h = r.H;
            prev_x = r.X;
        }
    }
}

TEST_CASE("without insurance and drawdown the reference grows only at the boundary") {
    ModelParams p = baseline();
    SimConfig cfg = quick_cfg();
    cfg.variant = Variant::NoInsuranceNoDrawdown;
    cfg.horizon = 6.0;
    cfg.dt = 4e-3;
    const ModelParams pv = apply_variant(p, cfg.variant);
    const Solver s{pv};
    const double x0 = s.boundary_curves(1.0).x_lavs;  // start on the ratchet boundary
    int growth_events = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto records = simulate_path(s, x0, 1.0, cfg, i);
        double prev_h = records.front().H;
        double prev_x = records.front().X;
        for (const auto& r : records) {
            if (r.H > prev_h * (1.0 + 1e-12)) {
                ++growth_events;
                CHECK(r.X >= s.boundary_curves(prev_h).x_lavs * (1.0 - 1e-6));
            }
            prev_h = r.H;
            prev_x = r.X;
        }
    }
    CHECK(growth_events > 0);
}

TEST_CASE("death sampling truncates the path at an exponential time") {
    SimConfig cfg = quick_cfg();
    cfg.sample_death = true;
    cfg.horizon = 200.0;
    cfg.dt = 0.01;
    const auto records = simulate_path(baseline(), 3.5, 1.0, cfg);
    CHECK(records.back().t < 200.0);  // survival to 200y has probability ~2e-3
    const auto again = simulate_path(baseline(), 3.5, 1.0, cfg);
    CHECK(records.size() == again.size());
    CHECK(records.back().t == again.back().t);
}

TEST_CASE("budget identity: deterministic floor stream") {
    const ModelParams p = baseline();
    SimConfig cfg;
    cfg.dt = 2e-3;
    cfg.horizon = 100.0;
    cfg.n_paths = 400;
    cfg.seed = 5;
    const BudgetEstimate est = budget_identity_mc(p, 2.5, 1.0, cfg);
    const double expect = 2.5 * (1.0 - std::exp(-0.08 * 100.0));
    CHECK(est.bequest_leg == 0.0);
    CHECK(est.estimate == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("budget identity smoke test away from the ratchet region") {
    const ModelParams p = baseline();
    SimConfig cfg;
    cfg.dt = 4e-3;
    cfg.horizon = 90.0;
    cfg.n_paths = 3000;
    cfg.seed = 17;
    const BudgetEstimate at35 = budget_identity_mc(p, 3.5, 1.0, cfg);
    CHECK(std::fabs(at35.estimate - 3.5) / 3.5 < 0.02);
    const BudgetEstimate at8 = budget_identity_mc(p, 8.0, 1.0, cfg);
    CHECK(at8.estimate > at35.estimate);  // increasing in initial wealth
}

TEST_CASE("budget identity rejects too-short horizons") {
    SimConfig cfg;
    cfg.horizon = 20.0;  // e^{-0.08*20} = 0.2 > 1e-3
    cfg.n_paths = 10;
    CHECK_THROWS_AS(budget_identity_mc(baseline(), 3.5, 1.0, cfg), validation_error);
}

TEST_CASE("config validation") {
    SimConfig cfg = quick_cfg();
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = quick_cfg();
    cfg.n_paths = 0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    CHECK_THROWS_AS(variant_from_string("bogus"), validation_error);
}
