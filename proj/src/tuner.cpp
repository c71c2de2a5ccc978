#include "blendloop/tuner.hpp"

#include <cmath>
#include <string>

namespace blendloop {

Objective parse_objective(std::string_view name)
{
    if (name == "mse")
        return Objective::Mse;
    if (name == "variance")
        return Objective::Variance;
    if (name == "abs-offset")
        return Objective::AbsOffset;
    throw InvalidInput("unknown objective '" + std::string(name) + "' (mse|variance|abs-offset)");
}

std::string_view to_string(Objective objective)
{
    switch (objective) {
    case Objective::Mse:
        return "mse";
    case Objective::Variance:
        return "variance";
    case Objective::AbsOffset:
        return "abs-offset";
    }
    return "mse";
}

std::vector<double> GridAxis::values() const
{
    if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step))
        throw InvalidInput("grid bounds must be finite");
    if (!(step > 0))
        throw InvalidInput("grid step must be > 0");
    if (min > max)
        throw InvalidInput("grid min must be <= max");
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(std::min(max, min + double(k) * step));
    return out;
}

void validate(const TuneSpec& spec)
{
    const auto l1 = spec.lambda1_grid.values();
    const auto l2 = spec.lambda2_grid.values();
    if (l1.front() < 0 || l1.back() > 1)
        throw InvalidInput("lambda1 grid must lie within [0, 1]");
    if (l2.front() < 0)
        throw InvalidInput("lambda2 grid must be >= 0");
    if (spec.n_reps < 1)
        throw InvalidInput("n_reps must be >= 1");
}

double objective_value(const ReplicationSummary& summary, Objective objective)
{
    switch (objective) {
    case Objective::Mse:
        return summary.mse_z;
    case Objective::Variance:
        return summary.var_z;
    case Objective::AbsOffset:
        return std::abs(summary.mean_z - summary.tau);
    }
    return summary.mse_z;
}

TuneResult grid_search(const SimConfig& config_base, const TuneSpec& spec, unsigned threads)
{
    validate(spec);
    const auto l1 = spec.lambda1_grid.values();
    const auto l2 = spec.lambda2_grid.values();

    TuneResult result{};
    result.surface.reserve(l1.size() * l2.size());
    bool first = true;
    for (double a : l1) {
        for (double b : l2) {
            SimConfig c = config_base;
            c.rule = FirstOrderRule<double>{a, b};
            const double obj =
                objective_value(run_replications(c, spec.n_reps, spec.base_seed, threads),
                                spec.objective);
            result.surface.push_back({a, b, obj});
            // A diverging loop yields NaN; it never beats a finite objective.
            const bool better = !std::isnan(obj) && (std::isnan(result.best_objective) ||
                                                     obj < result.best_objective);
            if (first || better) {
                result.best_lambda1 = a;
                result.best_lambda2 = b;
                result.best_objective = obj;
                first = false;
            }
        }
    }
    return result;
}

} // namespace blendloop
