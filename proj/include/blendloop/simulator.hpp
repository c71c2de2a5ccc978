#pragma once

// Closed-loop simulation: disturbance -> plant -> sensor -> control rule,
// single seeded traces and seeded replications with common random numbers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blendloop/process.hpp"
#include "blendloop/timeseries.hpp"

namespace blendloop {

struct SimConfig {
    BlendProcess<double> process;
    Ar1Model<double> disturbance;
    SensorModel<double> sensor;
    ControlRule<double> rule{IntegralRule{}};
    std::size_t horizon{50};
    bool clamp_u{false};

    // X0 = mu = 10, u0 = 6, phi = 0.7, tau = 16, sigma_v^2 = sigma_eps^2 = 0.5,
    // horizon 50, integral rule, no clamping.
    static SimConfig reference_defaults();
};

void validate(const SimConfig& config);

// Index i = 1..horizon maps to element i - 1 of x, y, z and element i of u.
struct SimTrace {
    Series<double> x;
    Series<double> u; // horizon + 1 entries, u(0) = u0
    Series<double> y;
    Series<double> z;
    std::vector<std::size_t> clamp_events; // 1-based i where u_i was clamped
};

// Mergeable count / mean / sum of squared deviations (Chan et al.).
struct MomentAccumulator {
    std::size_t count{0};
    double mean{0};
    double m2{0};

    void add(double value);
    void merge(const MomentAccumulator& other);
    double variance() const; // n - 1 denominator, 0 for fewer than 2 values
};

struct RepStats {
    double mean;
    double var;
};

// Pooled statistics over (replication, step) pairs use steps i >= 2 only
// (all steps when horizon = 1). per_step_mean_z keeps every step.
struct ReplicationSummary {
    std::size_t n_reps{0};
    std::size_t horizon{0};
    double tau{0};
    double mean_z{0};
    double var_z{0};
    double mse_z{0}; // mean of (z - tau)^2
    Series<double> per_step_mean_z;
    std::vector<RepStats> per_rep_stats;
};

struct ComparisonRow {
    ControlRule<double> rule;
    ReplicationSummary summary;
    double abs_offset; // |mean_z - tau|
};

SimTrace run_trace(const SimConfig& config, std::uint64_t seed);

// Replication r runs run_trace with replication_seed(base_seed, r). threads = 0
// uses the hardware concurrency; the result does not depend on it.
ReplicationSummary run_replications(const SimConfig& config, std::size_t n_reps,
                                    std::uint64_t base_seed, unsigned threads = 0);

std::vector<ComparisonRow> compare_rules(const SimConfig& config_base,
                                         std::span<const ControlRule<double>> rules,
                                         std::size_t n_reps, std::uint64_t base_seed,
                                         unsigned threads = 0);

// Stationary variance of z - tau under the integral rule:
// 2 sigma_v^2 / (1 + phi) + 2 sigma_eps^2.
double analytic_integral_error_variance(const Ar1Model<double>& disturbance,
                                        const SensorModel<double>& sensor);

// Stationary variance of z with the feed held at u0:
// sigma_v^2 / (1 - phi^2) + sigma_eps^2.
double analytic_uncontrolled_variance(const Ar1Model<double>& disturbance,
                                      const SensorModel<double>& sensor);

} // namespace blendloop
