#pragma once

// Individuals / moving-range (X, Rm) control charts with rule-1 signals.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "blendloop/errors.hpp"
#include "blendloop/timeseries.hpp"

namespace blendloop {

// Standard factors for moving ranges of span 2.
inline constexpr double kD2 = 1.128;
inline constexpr double kE2 = 2.66; // 3 / d2
inline constexpr double kD4 = 3.267;

enum class ChartKind { Individuals, MovingRange };

template <typename Scalar = double>
struct ControlChart {
    ChartKind kind;
    Scalar center;
    Scalar ucl;
    Scalar lcl;
    Series<Scalar> points;
    std::vector<Eigen::Index> signals; // 0-based indices into points
};

template <typename Scalar = double>
struct ChartPair {
    ControlChart<Scalar> individuals;
    ControlChart<Scalar> moving_range;
};

template <typename Derived>
Series<typename Derived::Scalar> moving_ranges(const Eigen::MatrixBase<Derived>& series)
{
    validate_series(series);
    const Eigen::Index n = series.size();
    if (n < 2)
        throw InsufficientData("moving_ranges: need at least 2 observations");
    return (series.tail(n - 1) - series.head(n - 1)).cwiseAbs();
}

// Points strictly outside [lcl, ucl].
template <typename Scalar>
std::vector<Eigen::Index> detect_signals(const ControlChart<Scalar>& chart)
{
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < chart.points.size(); ++i) {
        const Scalar p = chart.points(i);
        if (p > chart.ucl || p < chart.lcl)
            out.push_back(i);
    }
    return out;
}

// Individuals chart: center = sample mean, limits = mean +- 2.66 MRbar.
// Moving-range chart: center = MRbar, ucl = 3.267 MRbar, lcl = 0.
template <typename Derived>
ChartPair<typename Derived::Scalar> build_charts(const Eigen::MatrixBase<Derived>& series)
{
    using Scalar = typename Derived::Scalar;
    Series<Scalar> mr = moving_ranges(series);
    const Scalar mr_bar = mr.mean();
    const Scalar mean = series.mean();

    ChartPair<Scalar> out;
    out.individuals = {ChartKind::Individuals, mean, mean + Scalar(kE2) * mr_bar,
                       mean - Scalar(kE2) * mr_bar, series, {}};
    out.individuals.signals = detect_signals(out.individuals);

    out.moving_range = {ChartKind::MovingRange, mr_bar, Scalar(kD4) * mr_bar, Scalar(0),
                        std::move(mr), {}};
    out.moving_range.signals = detect_signals(out.moving_range);
    return out;
}

template <typename Scalar>
bool is_degenerate(const ControlChart<Scalar>& chart)
{
    return chart.ucl == chart.lcl;
}

} // namespace blendloop
