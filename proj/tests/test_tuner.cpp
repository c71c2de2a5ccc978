#include <doctest.h>

#include <algorithm>

#include "blendloop/tuner.hpp"

using namespace blendloop;

namespace {

SimConfig short_config()
{
    SimConfig c = SimConfig::reference_defaults();
    c.horizon = 200;
    return c;
}

} // namespace

TEST_CASE("grid axis values")
{
    const auto v = GridAxis{0, 1, 0.1}.values();
    REQUIRE(v.size() == 11);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 1.0);
    CHECK(v[3] == doctest::Approx(0.3));
    CHECK(GridAxis{0.5, 0.5, 0.1}.values() == std::vector<double>{0.5});
    CHECK(GridAxis{0, 1, 0.3}.values().size() == 4);
    CHECK_THROWS_AS((GridAxis{0, 1, 0}.values()), InvalidInput);
    CHECK_THROWS_AS((GridAxis{1, 0, 0.1}.values()), InvalidInput);
}

TEST_CASE("tune spec validation")
{
    TuneSpec spec;
    spec.lambda1_grid = {0, 1.2, 0.1};
    CHECK_THROWS_AS(validate(spec), InvalidInput);
    spec.lambda1_grid = {0, 1, 0.1};
    spec.lambda2_grid = {-0.1, 1, 0.1};
    CHECK_THROWS_AS(validate(spec), InvalidInput);
    spec.lambda2_grid = {0, 1, 0.1};
    CHECK_NOTHROW(validate(spec));
    CHECK(parse_objective("variance") == Objective::Variance);
    CHECK_THROWS_AS(parse_objective("median"), InvalidInput);
}

TEST_CASE("single-point grid at (1, 1) reproduces the integral rule")
{
    TuneSpec spec;
    spec.lambda1_grid = {1, 1, 0.1};
    spec.lambda2_grid = {1, 1, 0.1};
    spec.n_reps = 5;
    spec.base_seed = 3;
    const auto c = short_config();
    const auto r = grid_search(c, spec);
    CHECK(r.best_lambda1 == 1.0);
    CHECK(r.best_lambda2 == 1.0);
    const auto integral = run_replications(c, 5, 3);
    CHECK(r.best_objective == integral.mse_z);
}

TEST_CASE("uncontrolled grid point matches the stationary variance")
{
    TuneSpec spec;
    spec.lambda1_grid = {0, 0, 1};
    spec.lambda2_grid = {0, 0, 1};
    spec.n_reps = 20;
    SimConfig c = SimConfig::reference_defaults();
    c.horizon = 5000;
    const auto r = grid_search(c, spec);
    const double expected = analytic_uncontrolled_variance(c.disturbance, c.sensor);
    CHECK(std::abs(r.best_objective / expected - 1.0) < 0.03);
}

TEST_CASE("argmin, refinement and reproducibility")
{
    const auto c = short_config();
    TuneSpec fine;
    fine.lambda1_grid = {0, 1, 0.25};
    fine.lambda2_grid = {0, 1, 0.25};
    fine.n_reps = 4;
    fine.base_seed = 9;
    TuneSpec coarse = fine;
    coarse.lambda1_grid = {0, 1, 0.5};
    coarse.lambda2_grid = {0, 1, 0.5};

    const auto rf = grid_search(c, fine);
    const auto rc = grid_search(c, coarse);
    CHECK(rf.surface.size() == 25);
    CHECK(rc.surface.size() == 9);
    for (const auto& p : rf.surface)
        CHECK(rf.best_objective <= p.objective);
    CHECK(rc.best_objective >= rf.best_objective);

    // Coarse points are evaluated on the same seeds as their fine counterparts.
    for (const auto& p : rc.surface) {
        const auto it = std::find_if(rf.surface.begin(), rf.surface.end(), [&](const SurfacePoint& q) {
            return q.lambda1 == p.lambda1 && q.lambda2 == p.lambda2;
        });
        REQUIRE(it != rf.surface.end());
        CHECK(it->objective == p.objective);
    }

    const auto again = grid_search(c, fine, 3);
    CHECK(again.best_objective == rf.best_objective);
    CHECK(again.best_lambda1 == rf.best_lambda1);
    CHECK(again.best_lambda2 == rf.best_lambda2);
    for (std::size_t k = 0; k < rf.surface.size(); ++k)
        CHECK(again.surface[k].objective == rf.surface[k].objective);
}

TEST_CASE("ties go to the smaller lambdas")
{
    SimConfig c = SimConfig::reference_defaults();
    c.disturbance.sigma_v = 0;
    c.sensor.sigma_eps = 0;
    c.horizon = 20;
    TuneSpec spec;
    spec.lambda1_grid = {0, 1, 0.5};
    spec.lambda2_grid = {0, 1, 0.5};
    spec.n_reps = 1;
    const auto r = grid_search(c, spec);
    // Every point sits at the fixed point: objective 0 everywhere.
    CHECK(r.best_objective == 0.0);
    CHECK(r.best_lambda1 == 0.0);
    CHECK(r.best_lambda2 == 0.0);
}

TEST_CASE("objectives")
{
    ReplicationSummary s;
    s.tau = 16;
    s.mean_z = 16.2;
    s.var_z = 1.1;
    s.mse_z = 1.2;
    CHECK(objective_value(s, Objective::Mse) == 1.2);
    CHECK(objective_value(s, Objective::Variance) == 1.1);
    CHECK(objective_value(s, Objective::AbsOffset) == doctest::Approx(0.2));
}
