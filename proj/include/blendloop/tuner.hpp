#pragma once

// Exhaustive (lambda1, lambda2) grid search for the first-order rule.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "blendloop/simulator.hpp"

namespace blendloop {

enum class Objective { Mse, Variance, AbsOffset };

Objective parse_objective(std::string_view name);
std::string_view to_string(Objective objective);

// Values min, min + step, ... up to max (inclusive within 1e-9 step).
struct GridAxis {
    double min{0};
    double max{1};
    double step{0.1};

    std::vector<double> values() const;
};

struct TuneSpec {
    GridAxis lambda1_grid;
    GridAxis lambda2_grid;
    Objective objective{Objective::Mse};
    std::size_t n_reps{20};
    std::uint64_t base_seed{1};
};

struct SurfacePoint {
    double lambda1;
    double lambda2;
    double objective;
};

struct TuneResult {
    double best_lambda1;
    double best_lambda2;
    double best_objective;
    std::vector<SurfacePoint> surface; // lambda1-major, ascending
};

void validate(const TuneSpec& spec);

double objective_value(const ReplicationSummary& summary, Objective objective);

// Every grid point is evaluated on the same seeds. Ties go to the smaller
// lambda1, then the smaller lambda2. config_base.rule is ignored.
TuneResult grid_search(const SimConfig& config_base, const TuneSpec& spec, unsigned threads = 0);

} // namespace blendloop
