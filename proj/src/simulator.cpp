#include "blendloop/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "blendloop/random.hpp"

namespace blendloop {

SimConfig SimConfig::reference_defaults()
{
    SimConfig c;
    c.process = {100.0, 6.0, 16.0, false};
    c.disturbance = {10.0, 0.7, std::sqrt(0.5)};
    c.sensor = {std::sqrt(0.5)};
    c.rule = IntegralRule{};
    c.horizon = 50;
    c.clamp_u = false;
    return c;
}

void validate(const SimConfig& config)
{
    validate(config.process);
    validate(config.disturbance);
    validate(config.sensor);
    validate(config.rule);
    if (config.horizon < 1)
        throw InvalidInput("horizon must be >= 1");
}

void MomentAccumulator::add(double value)
{
    ++count;
    const double delta = value - mean;
    mean += delta / double(count);
    m2 += delta * (value - mean);
}

void MomentAccumulator::merge(const MomentAccumulator& other)
{
    if (other.count == 0)
        return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double n_a = double(count);
    const double n_b = double(other.count);
    const double n = n_a + n_b;
    const double delta = other.mean - mean;
    mean += delta * n_b / n;
    m2 += other.m2 + delta * delta * n_a * n_b / n;
    count += other.count;
}

double MomentAccumulator::variance() const
{
    return count < 2 ? 0.0 : m2 / double(count - 1);
}

SimTrace run_trace(const SimConfig& config, std::uint64_t seed)
{
    validate(config);
    const auto n = static_cast<Eigen::Index>(config.horizon);
    const auto& p = config.process;
    const ClampPolicy clamp = config.clamp_u ? ClampPolicy::NonNegative : ClampPolicy::None;

    auto disturbance_rng = make_stream(seed, Stream::Disturbance);
    auto sensor_rng = make_stream(seed, Stream::Sensor);
    std::normal_distribution<double> disturbance_normal(0.0, 1.0);
    std::normal_distribution<double> sensor_normal(0.0, 1.0);

    SimTrace t;
    t.x.resize(n);
    t.y.resize(n);
    t.z.resize(n);
    t.u.resize(n + 1);
    t.u(0) = p.u0;

    double x_prev = config.disturbance.mu; // X0 = mu
    for (Eigen::Index k = 0; k < n; ++k) {
        const double v = config.disturbance.sigma_v * disturbance_normal(disturbance_rng);
        const double eps = config.sensor.sigma_eps * sensor_normal(sensor_rng);
        const double x = disturbance_step(config.disturbance, x_prev, v);
        const double y = process_output(p, t.u(k), x);
        const double z = measure(y, eps);
        const auto step = rule_update(config.rule, t.u(k), p.u0, z, p.tau, clamp);
        t.x(k) = x;
        t.y(k) = y;
        t.z(k) = z;
        t.u(k + 1) = step.u;
        if (step.clamped)
            t.clamp_events.push_back(static_cast<std::size_t>(k + 1));
        x_prev = x;
    }
    return t;
}

namespace {

struct RepResult {
    MomentAccumulator pooled;
    double sum_sq_error{0};
    Series<double> z;
};

RepResult summarize_trace(const SimTrace& trace, double tau)
{
    RepResult r;
    const Eigen::Index n = trace.z.size();
    const Eigen::Index first = n > 1 ? 1 : 0;
    for (Eigen::Index k = first; k < n; ++k) {
        r.pooled.add(trace.z(k));
        const double e = trace.z(k) - tau;
        r.sum_sq_error += e * e;
    }
    r.z = trace.z;
    return r;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                fn(i);
        });
}

} // namespace

ReplicationSummary run_replications(const SimConfig& config, std::size_t n_reps,
                                    std::uint64_t base_seed, unsigned threads)
{
    validate(config);
    if (n_reps < 1)
        throw InvalidInput("n_reps must be >= 1");

    std::vector<RepResult> results(n_reps);
    parallel_for(n_reps, threads, [&](std::size_t r) {
        results[r] = summarize_trace(run_trace(config, replication_seed(base_seed, r)),
                                     config.process.tau);
    });

    // Reduction runs in replication order, independent of completion order.
    ReplicationSummary s;
    s.n_reps = n_reps;
    s.horizon = config.horizon;
    s.tau = config.process.tau;
    s.per_step_mean_z = Series<double>::Zero(static_cast<Eigen::Index>(config.horizon));
    MomentAccumulator pooled;
    double sum_sq_error = 0;
    for (const auto& r : results) {
        pooled.merge(r.pooled);
        sum_sq_error += r.sum_sq_error;
        s.per_step_mean_z += r.z;
        s.per_rep_stats.push_back({r.pooled.mean, r.pooled.variance()});
    }
    s.per_step_mean_z /= double(n_reps);
    s.mean_z = pooled.mean;
    s.var_z = pooled.variance();
    s.mse_z = sum_sq_error / double(pooled.count);
    return s;
}

std::vector<ComparisonRow> compare_rules(const SimConfig& config_base,
                                         std::span<const ControlRule<double>> rules,
                                         std::size_t n_reps, std::uint64_t base_seed,
                                         unsigned threads)
{
    if (rules.size() < 2)
        throw InvalidInput("compare_rules: need at least 2 rules");
    std::vector<ComparisonRow> rows;
    rows.reserve(rules.size());
    for (const auto& rule : rules) {
        SimConfig c = config_base;
        c.rule = rule;
        auto summary = run_replications(c, n_reps, base_seed, threads);
        const double offset = std::abs(summary.mean_z - summary.tau);
        rows.push_back({rule, std::move(summary), offset});
    }
    return rows;
}

double analytic_integral_error_variance(const Ar1Model<double>& disturbance,
                                        const SensorModel<double>& sensor)
{
    validate(disturbance);
    validate(sensor);
    const double var_v = disturbance.sigma_v * disturbance.sigma_v;
    const double var_eps = sensor.sigma_eps * sensor.sigma_eps;
    return 2.0 * var_v / (1.0 + disturbance.phi) + 2.0 * var_eps;
}

double analytic_uncontrolled_variance(const Ar1Model<double>& disturbance,
                                      const SensorModel<double>& sensor)
{
    validate(disturbance);
    validate(sensor);
    const double var_v = disturbance.sigma_v * disturbance.sigma_v;
    const double var_eps = sensor.sigma_eps * sensor.sigma_eps;
    return var_v / (1.0 - disturbance.phi * disturbance.phi) + var_eps;
}

} // namespace blendloop
