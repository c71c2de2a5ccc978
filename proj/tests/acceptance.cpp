// Acceptance suite. Usage: acceptance [criterion-number]
// Prints one PASS/FAIL line per criterion; exits 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blendloop/charts.hpp"
#include "blendloop/cli.hpp"
#include "blendloop/csv.hpp"
#include "blendloop/random.hpp"
#include "blendloop/simulator.hpp"
#include "blendloop/timeseries.hpp"
#include "blendloop/tuner.hpp"

namespace fs = std::filesystem;
using namespace blendloop;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> check;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6)
{
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("blendloop_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(std::vector<std::string> args, std::string& out)
{
    args.insert(args.begin(), "blendloop");
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    out = o.str() + e.str();
    return code;
}

std::string trace_bytes(const SimTrace& t)
{
    std::ostringstream s;
    write_trace_csv(s, t);
    return s.str();
}

SimConfig reference()
{
    return SimConfig::reference_defaults();
}

// Pools per-seed (mean, var) pairs that each cover `count` observations.
struct Pooled {
    double mean;
    double var;
};

Pooled pool(const std::vector<ReplicationSummary>& runs, double count)
{
    double grand = 0;
    for (const auto& r : runs)
        grand += r.mean_z;
    grand /= double(runs.size());
    double m2 = 0;
    for (const auto& r : runs)
        m2 += r.var_z * (count - 1) + count * (r.mean_z - grand) * (r.mean_z - grand);
    return {grand, m2 / (count * double(runs.size()) - 1)};
}

// ---------------------------------------------------------------------------

Outcome c1_estimation()
{
    const auto start = Clock::now();
    std::string out;
    const auto dir = scratch("c1");
    const int code =
        run_cli({"estimate", (fs::path(BLENDLOOP_DATA_DIR) / "table1.csv").string(), "--out",
                 dir.string()},
                out);
    const double elapsed = seconds_since(start);
    if (code != 0)
        return {false, "estimate exited " + std::to_string(code)};
    const auto pos = out.find("phi_hat: ");
    const double phi = std::stod(out.substr(pos + 9));
    const bool pass = phi >= 0.619 && phi <= 0.719 && elapsed < 1.0;
    return {pass, "phi_hat=" + fmt(phi) + " (band [0.619, 0.719]), " + fmt(elapsed, 3) + " s"};
}

Outcome c2_chart()
{
    const auto start = Clock::now();
    std::string out;
    const auto dir = scratch("c2");
    const int code =
        run_cli({"chart", (fs::path(BLENDLOOP_DATA_DIR) / "table1.csv").string(),
                 "--residuals-of-ar1", "--out", dir.string()},
                out);
    const double elapsed = seconds_since(start);
    if (code != 0)
        return {false, "chart exited " + std::to_string(code)};
    auto signals_of = [&](const std::string& name) {
        const auto line = out.find(name + ": ");
        const auto pos = out.find("signals=", line);
        return std::stoi(out.substr(pos + 8));
    };
    const int mr = signals_of("moving_range");
    const int ind = signals_of("individuals");
    const bool pass = mr >= 1 && elapsed < 1.0;
    return {pass, "moving-range signals=" + std::to_string(mr) +
                      " (need >= 1); individuals signals=" + std::to_string(ind) + ", " +
                      fmt(elapsed, 3) + " s"};
}

Outcome c3_rule_identity()
{
    SimConfig integral = reference();
    SimConfig unit = reference();
    unit.rule = FirstOrderRule<double>{1.0, 1.0};
    std::mt19937_64 seeds(20261019);
    int identical = 0;
    for (int k = 0; k < 100; ++k) {
        const std::uint64_t seed = seeds();
        identical += trace_bytes(run_trace(integral, seed)) == trace_bytes(run_trace(unit, seed));
    }
    return {identical == 100, std::to_string(identical) + "/100 byte-identical traces"};
}

Outcome c4_fixed_points()
{
    // Off-target start: u0 = 4 while the integral fixed point is u = 6.
    SimConfig base = reference();
    base.process.u0 = 4.0;
    base.disturbance.sigma_v = 0;
    base.sensor.sigma_eps = 0;
    base.horizon = 200;

    std::vector<ControlRule<double>> rules = {IntegralRule{}};
    for (double a : {0.0, 0.25, 0.5, 0.75})
        for (double b : {0.25, 0.5, 0.75, 1.0})
            rules.push_back(FirstOrderRule<double>{a, b});

    std::string failures;
    int passed = 0;
    for (const auto& rule : rules) {
        SimConfig c = base;
        c.rule = rule;
        const auto t = run_trace(c, 0);
        const auto fp = noise_free_fixed_point(rule, c.disturbance.mu, c.process.u0, c.process.tau);
        const double dz = std::abs(t.z(199) - fp.z_star);
        const double du = std::abs(t.u(200) - fp.u_star);
        if (dz < 1e-9 && du < 1e-9) {
            ++passed;
        } else {
            failures += " " + rule_label(rule) + "(|dz|=" + fmt(dz, 3) + ")";
        }
    }
    return {passed == int(rules.size()), std::to_string(passed) + "/" +
                                             std::to_string(rules.size()) + " converged" +
                                             (failures.empty() ? "" : ";" + failures)};
}

Outcome c5_integral_error_law()
{
    const auto start = Clock::now();
    SimConfig c = reference();
    c.horizon = 100000;
    const auto t = run_trace(c, 5);
    const Series<double> e = t.z.tail(c.horizon - 1).array() - c.process.tau;
    const auto m = moments(e);
    const double expected = analytic_integral_error_variance(c.disturbance, c.sensor);
    const double rel = std::abs(m.variance / expected - 1.0);
    const double se = std::sqrt(m.variance / double(e.size()));
    const double z_mean = m.mean + c.process.tau;
    const double elapsed = seconds_since(start);
    const bool pass = rel < 0.03 && std::abs(z_mean - 16.0) <= 3 * se && elapsed < 5.0;
    return {pass, "var=" + fmt(m.variance) + " vs " + fmt(expected) + " (rel " + fmt(rel, 3) +
                      "), mean_z=" + fmt(z_mean, 8) + " (3 se=" + fmt(3 * se, 3) + "), " +
                      fmt(elapsed, 3) + " s"};
}

Outcome c6_comparison_ordering()
{
    const auto start = Clock::now();
    const std::vector<ControlRule<double>> rules = {IntegralRule{}, FirstOrderRule<double>{0.5, 0.5}};
    int var_wins = 0, mean_wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto rows = compare_rules(reference(), rules, 30, seed);
        var_wins += rows[1].summary.var_z < rows[0].summary.var_z;
        mean_wins += rows[1].abs_offset <= rows[0].abs_offset;
    }
    const double elapsed = seconds_since(start);
    const bool pass = var_wins >= 95 && mean_wins >= 80 && elapsed < 30.0;
    return {pass, "var_z(first-order) < var_z(integral) in " + std::to_string(var_wins) +
                      "/100 (need 95); |mean-16| no larger in " + std::to_string(mean_wins) +
                      "/100 (need 80), " + fmt(elapsed, 3) + " s"};
}

Outcome c7_reference_bands()
{
    SimConfig integral = reference();
    SimConfig first = reference();
    first.rule = FirstOrderRule<double>{0.5, 0.5};
    std::vector<ReplicationSummary> ri, rf;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ri.push_back(run_replications(integral, 30, seed));
        rf.push_back(run_replications(first, 30, seed));
    }
    const double count = 30.0 * double(integral.horizon - 1);
    const auto pi = pool(ri, count);
    const auto pf = pool(rf, count);
    const bool pass = pi.mean >= 15.7 && pi.mean <= 16.3 && pf.mean >= 15.8 && pf.mean <= 16.2 &&
                      pf.var >= 0.5 && pf.var <= 1.3;
    return {pass, "integral mean_z=" + fmt(pi.mean) + " (var " + fmt(pi.var) +
                      "); first-order(0.5,0.5) mean_z=" + fmt(pf.mean) + " var_z=" + fmt(pf.var)};
}

Outcome c8_uncontrolled()
{
    SimConfig c = reference();
    c.rule = FirstOrderRule<double>{0.0, 0.0};
    c.horizon = 100000;
    const auto s = run_replications(c, 1, 8);
    const double expected = analytic_uncontrolled_variance(c.disturbance, c.sensor);
    const double rel = std::abs(s.var_z / expected - 1.0);
    return {rel < 0.03, "var_z=" + fmt(s.var_z) + " vs " + fmt(expected) + " (rel " + fmt(rel, 3) + ")"};
}

Outcome c9_jarque_bera()
{
    Series<double> alt(12);
    for (Eigen::Index k = 0; k < 12; ++k)
        alt(k) = (k % 2 == 0) ? 1.0 : -1.0;
    const auto jb = jarque_bera(alt);
    const bool exact = std::abs(jb.jb_stat - 2.0) < 1e-9 && std::abs(jb.p_value - std::exp(-1.0)) < 1e-9;

    int accepted = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Series<double> s(10000);
        for (auto& v : s)
            v = normal(rng);
        accepted += jarque_bera(s).p_value > 0.01;
    }
    return {exact && accepted >= 95, "alternating jb=" + fmt(jb.jb_stat, 12) + " p=" +
                                         fmt(jb.p_value, 12) + "; N(0,1) p>0.01 in " +
                                         std::to_string(accepted) + "/100"};
}

Outcome c10_correlogram()
{
    std::mt19937_64 rng(10);
    const auto s = simulate_ar1(Ar1Model<double>{10, 0.7, 1}, 100000, rng);
    const auto c = correlogram(s, 10);
    const bool pass = std::abs(c.acf(1) - 0.70) <= 0.01 && std::abs(c.pacf(2)) <= 0.02;
    return {pass, "acf[1]=" + fmt(c.acf(1)) + " pacf[2]=" + fmt(c.pacf(2))};
}

Outcome c11_dickey_fuller()
{
    const auto start = Clock::now();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    int reject_ar = 0, reject_rw = 0;
    for (int trial = 0; trial < 200; ++trial) {
        reject_ar += dickey_fuller(simulate_ar1(Ar1Model<double>{0, 0.3, 1}, 500, rng)).reject_unit_root;
        Series<double> walk(500);
        walk(0) = 0;
        for (Eigen::Index k = 1; k < 500; ++k)
            walk(k) = walk(k - 1) + normal(rng);
        reject_rw += dickey_fuller(walk).reject_unit_root;
    }
    const double elapsed = seconds_since(start);
    const double power = reject_ar / 200.0, size = reject_rw / 200.0;
    const bool pass = power > 0.99 && size <= 0.10 && elapsed < 10.0;
    return {pass, "rejection AR(0.3)=" + fmt(power) + ", random walk=" + fmt(size) + ", " +
                      fmt(elapsed, 3) + " s"};
}

Outcome c12_tuner()
{
    SimConfig c = reference();
    c.horizon = 500;
    TuneSpec spec;
    spec.lambda1_grid = {0, 1, 0.1};
    spec.lambda2_grid = {0, 1, 0.1};
    spec.objective = Objective::Mse;
    spec.n_reps = 20;
    spec.base_seed = 1;
    const auto r = grid_search(c, spec);
    const auto again = grid_search(c, spec);

    auto at = [&](double a, double b) {
        for (const auto& p : r.surface)
            if (std::abs(p.lambda1 - a) < 1e-9 && std::abs(p.lambda2 - b) < 1e-9)
                return p.objective;
        return std::nan("");
    };
    double max_obj = -INFINITY;
    for (const auto& p : r.surface)
        max_obj = std::max(max_obj, p.objective);
    const double half = at(0.5, 0.5), unit = at(1.0, 1.0);

    std::ostringstream s1, s2;
    write_surface_csv(s1, r.surface);
    write_surface_csv(s2, again.surface);
    const bool reproducible = s1.str() == s2.str() && r.best_objective == again.best_objective &&
                              r.best_lambda1 == again.best_lambda1 &&
                              r.best_lambda2 == again.best_lambda2;
    const bool pass = r.best_objective <= half && half <= max_obj && r.best_objective < unit &&
                      reproducible;
    return {pass, "best=(" + fmt(r.best_lambda1, 3) + "," + fmt(r.best_lambda2, 3) + ") obj=" +
                      fmt(r.best_objective) + ", obj(0.5,0.5)=" + fmt(half) + ", obj(1,1)=" +
                      fmt(unit) + ", max=" + fmt(max_obj) +
                      (reproducible ? ", reproducible" : ", NOT reproducible")};
}

Outcome c13_chart_equivariance()
{
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> scale(-50.0, 50.0), shift(-1000.0, 1000.0);
    std::uniform_int_distribution<int> len(2, 100);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };

    int ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Series<double> s(len(rng));
        for (auto& v : s)
            v = normal(rng);
        if (trial % 4 == 0)
            s(s.size() / 2) += 6.0;
        double c = scale(rng);
        if (std::abs(c) < 1e-3)
            c = 2.5;
        const double k = shift(rng);

        const auto base = build_charts(s);
        const auto scaled = build_charts(Series<double>(c * s));
        const auto moved = build_charts(Series<double>(s.array() + k));

        bool good = scaled.individuals.signals == base.individuals.signals &&
                    scaled.moving_range.signals == base.moving_range.signals;
        good = good && close(scaled.individuals.center, c * base.individuals.center) &&
               close(std::abs(scaled.individuals.ucl - scaled.individuals.center),
                     std::abs(c) * (base.individuals.ucl - base.individuals.center)) &&
               close(scaled.moving_range.center, std::abs(c) * base.moving_range.center) &&
               close(scaled.moving_range.ucl, std::abs(c) * base.moving_range.ucl) &&
               ((scaled.individuals.points - c * base.individuals.points).cwiseAbs().maxCoeff() <=
                1e-9 * std::abs(c) * (1 + base.individuals.points.cwiseAbs().maxCoeff())) &&
               ((scaled.moving_range.points - std::abs(c) * base.moving_range.points)
                    .cwiseAbs()
                    .maxCoeff() <= 1e-9 * std::abs(c) * (1 + base.moving_range.points.maxCoeff()));
        good = good && close(moved.individuals.center, base.individuals.center + k) &&
               close(moved.individuals.ucl, base.individuals.ucl + k) &&
               close(moved.individuals.lcl, base.individuals.lcl + k) &&
               std::abs(moved.moving_range.center - base.moving_range.center) < 1e-9 &&
               std::abs(moved.moving_range.ucl - base.moving_range.ucl) < 1e-9 &&
               moved.moving_range.signals == base.moving_range.signals &&
               moved.individuals.signals == base.individuals.signals;
        ok += good;
    }
    return {ok == 1000, std::to_string(ok) + "/1000 series satisfy scale and translation invariants"};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria = {
        {1, "estimation regression on table1", c1_estimation},
        {2, "moving-range chart of table1 residuals signals", c2_chart},
        {3, "first-order(1,1) == integral, 100 seeds", c3_rule_identity},
        {4, "noise-free convergence to fixed points", c4_fixed_points},
        {5, "integral-rule error variance law", c5_integral_error_law},
        {6, "first-order(0.5,0.5) vs integral ordering", c6_comparison_ordering},
        {7, "loose bands for mean and variance", c7_reference_bands},
        {8, "uncontrolled baseline variance", c8_uncontrolled},
        {9, "Jarque-Bera exactness and calibration", c9_jarque_bera},
        {10, "correlogram of long AR(1)", c10_correlogram},
        {11, "Dickey-Fuller power and size", c11_dickey_fuller},
        {12, "tuner sanity and reproducibility", c12_tuner},
        {13, "chart equivariance on 1000 series", c13_chart_equivariance},
    };

    int only = 0;
    if (argc > 1)
        only = std::atoi(argv[1]);

    int failed = 0, ran = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only)
            continue;
        ++ran;
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] C%-2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.c_str());
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
