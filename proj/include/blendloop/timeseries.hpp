#pragma once

// AR(1) simulation and conditional least-squares estimation, residuals and
// the diagnostics used before charting a disturbance series: correlogram,
// Dickey-Fuller unit-root test, Jarque-Bera normality test and moments.
//
// All functions accept any Eigen column-vector expression.

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blendloop/errors.hpp"
#include "blendloop/process.hpp"

namespace blendloop {

template <typename Scalar = double>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Fit of X_i = c + phi X_{i-1} + v_i by OLS over i = 2..n.
template <typename Scalar = double>
struct Ar1Fit {
    Scalar phi_hat;
    Scalar intercept_hat; // c
    Scalar mu_hat;        // c / (1 - phi_hat), the unconditional mean
    Scalar se_phi;
    Scalar t_phi;
    Scalar sigma_v_hat;   // residual standard deviation, n_used - 2 dof
    Eigen::Index n_used;
};

template <typename Scalar = double>
struct Correlogram {
    Series<Scalar> acf;  // acf[k] for k = 0..max_lag, acf[0] = 1
    Series<Scalar> pacf; // pacf[0] = 1 by convention, pacf[1] = acf[1]
    Scalar conf_band;    // 1.96 / sqrt(n)
};

template <typename Scalar = double>
struct DfResult {
    Scalar t_stat;
    Scalar critical_5pct;
    bool reject_unit_root;
};

template <typename Scalar = double>
struct JbResult {
    Scalar skewness;
    Scalar kurtosis; // non-excess, 3 under normality
    Scalar jb_stat;
    Scalar p_value;
};

// Skewness and kurtosis are NaN for a zero-variance sample.
template <typename Scalar = double>
struct Moments {
    Scalar mean;
    Scalar variance; // n - 1 denominator
    Scalar skewness; // m3 / m2^(3/2), biased
    Scalar kurtosis; // m4 / m2^2, biased, non-excess
};

template <typename Derived>
void validate_series(const Eigen::MatrixBase<Derived>& series)
{
    static_assert(Derived::ColsAtCompileTime == 1, "series must be a column vector");
    if (series.size() < 1)
        throw InvalidInput("series must contain at least one observation");
    if (!series.allFinite())
        throw InvalidInput("series contains non-finite values");
}

namespace detail {

template <typename Scalar>
struct SimpleRegression {
    Scalar intercept;
    Scalar slope;
    Scalar se_slope;
    Scalar ssr;
    Eigen::Index dof;
};

// OLS of y on (1, x). Throws DegenerateData when x is constant.
template <typename DerivedY, typename DerivedX>
SimpleRegression<typename DerivedY::Scalar> regress(const Eigen::MatrixBase<DerivedY>& y,
                                                    const Eigen::MatrixBase<DerivedX>& x)
{
    using Scalar = typename DerivedY::Scalar;
    const Eigen::Index n = y.size();
    if (x.maxCoeff() == x.minCoeff())
        throw DegenerateData("regressor has zero variance");

    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> design(n, 2);
    design.col(0).setOnes();
    design.col(1) = x;
    const Eigen::Matrix<Scalar, 2, 1> beta = design.colPivHouseholderQr().solve(y.derived());
    const Series<Scalar> resid = y - design * beta;
    const Scalar ssr = resid.squaredNorm();
    const Eigen::Index dof = n - 2;

    Scalar se = std::numeric_limits<Scalar>::quiet_NaN();
    if (dof > 0) {
        const Eigen::Matrix<Scalar, 2, 2> xtx_inv = (design.transpose() * design).inverse();
        se = std::sqrt(ssr / Scalar(dof) * xtx_inv(1, 1));
    }
    return {beta(0), beta(1), se, ssr, dof};
}

} // namespace detail

// X_1 = mu, X_i = mu + phi (X_{i-1} - mu) + v_i for i = 2..n.
// Draws n - 1 standard normals from rng, scaled by sigma_v.
template <typename Scalar, typename Urbg>
Series<Scalar> simulate_ar1(const Ar1Model<Scalar>& model, Eigen::Index n, Urbg& rng)
{
    validate(model);
    if (n < 1)
        throw InvalidInput("simulate_ar1: n must be >= 1");
    std::normal_distribution<Scalar> normal(Scalar(0), Scalar(1));
    Series<Scalar> out(n);
    out(0) = model.mu;
    for (Eigen::Index i = 1; i < n; ++i)
        out(i) = disturbance_step(model, out(i - 1), model.sigma_v * normal(rng));
    return out;
}

template <typename Derived>
Ar1Fit<typename Derived::Scalar> estimate_ar1(const Eigen::MatrixBase<Derived>& series)
{
    using Scalar = typename Derived::Scalar;
    validate_series(series);
    const Eigen::Index n = series.size();
    if (n < 3)
        throw InsufficientData("estimate_ar1: need at least 3 observations");

    const auto reg = detail::regress(series.tail(n - 1), series.head(n - 1));

    Ar1Fit<Scalar> fit;
    fit.phi_hat = reg.slope;
    fit.intercept_hat = reg.intercept;
    fit.mu_hat = reg.intercept / (Scalar(1) - reg.slope);
    fit.se_phi = reg.se_slope;
    fit.t_phi = reg.slope / reg.se_slope;
    fit.sigma_v_hat = reg.dof > 0 ? std::sqrt(reg.ssr / Scalar(reg.dof)) : Scalar(0);
    fit.n_used = n - 1;
    return fit;
}

// x_i = (X_i - mu_hat) - phi_hat (X_{i-1} - mu_hat), i = 2..n.
// Falls back to X_i - c - phi_hat X_{i-1} when phi_hat = 1 leaves mu_hat
// undefined; the two forms agree otherwise.
template <typename Derived>
Series<typename Derived::Scalar> ar1_residuals(const Eigen::MatrixBase<Derived>& series,
                                               const Ar1Fit<typename Derived::Scalar>& fit)
{
    validate_series(series);
    const Eigen::Index n = series.size();
    if (fit.n_used != n - 1)
        throw InvalidInput("ar1_residuals: fit was produced from a series of different length");
    const auto cur = series.tail(n - 1).array();
    const auto prev = series.head(n - 1).array();
    if (std::isfinite(fit.mu_hat))
        return ((cur - fit.mu_hat) - fit.phi_hat * (prev - fit.mu_hat)).matrix();
    return (cur - fit.intercept_hat - fit.phi_hat * prev).matrix();
}

template <typename Derived>
Correlogram<typename Derived::Scalar> correlogram(const Eigen::MatrixBase<Derived>& series,
                                                 Eigen::Index max_lag)
{
    using Scalar = typename Derived::Scalar;
    validate_series(series);
    const Eigen::Index n = series.size();
    if (max_lag < 0 || 2 * max_lag >= n)
        throw InvalidInput("correlogram: max_lag must satisfy 0 <= max_lag < n / 2");

    const Series<Scalar> centered = series.array() - series.mean();
    const Scalar c0 = centered.squaredNorm();
    if (c0 == Scalar(0))
        throw DegenerateData("correlogram: series has zero variance");

    Correlogram<Scalar> out;
    out.acf.resize(max_lag + 1);
    for (Eigen::Index k = 0; k <= max_lag; ++k)
        out.acf(k) = centered.tail(n - k).dot(centered.head(n - k)) / c0;
    out.acf(0) = Scalar(1);

    // Durbin-Levinson recursion.
    out.pacf.resize(max_lag + 1);
    out.pacf(0) = Scalar(1);
    Series<Scalar> prev = Series<Scalar>::Zero(max_lag + 1);
    Series<Scalar> cur = Series<Scalar>::Zero(max_lag + 1);
    for (Eigen::Index k = 1; k <= max_lag; ++k) {
        Scalar num = out.acf(k);
        Scalar den = Scalar(1);
        for (Eigen::Index j = 1; j < k; ++j) {
            num -= prev(j) * out.acf(k - j);
            den -= prev(j) * out.acf(j);
        }
        const Scalar phi_kk = num / den;
        cur(k) = phi_kk;
        for (Eigen::Index j = 1; j < k; ++j)
            cur(j) = prev(j) - phi_kk * prev(k - j);
        out.pacf(k) = phi_kk;
        prev = cur;
    }
    out.conf_band = Scalar(1.96) / std::sqrt(Scalar(n));
    return out;
}

// 5% critical value of the constant-only Dickey-Fuller t statistic for a
// regression on `observations` points: -2.86 asymptotically, -2.92 at 50,
// linear in 1/observations.
template <typename Scalar = double>
Scalar df_critical_5pct(Eigen::Index observations)
{
    return Scalar(-2.86) + (Scalar(-2.92) - Scalar(-2.86)) * Scalar(50) / Scalar(observations);
}

// Regress dX_i on (1, X_{i-1}); no lag augmentation, no trend.
template <typename Derived>
DfResult<typename Derived::Scalar> dickey_fuller(const Eigen::MatrixBase<Derived>& series)
{
    using Scalar = typename Derived::Scalar;
    validate_series(series);
    const Eigen::Index n = series.size();
    if (n < 10)
        throw InsufficientData("dickey_fuller: need at least 10 observations");

    const Series<Scalar> diff = series.tail(n - 1) - series.head(n - 1);
    const auto reg = detail::regress(diff, series.head(n - 1));
    if (!(reg.se_slope > Scalar(0)))
        throw DegenerateData("dickey_fuller: perfect fit, t statistic undefined");

    DfResult<Scalar> out;
    out.t_stat = reg.slope / reg.se_slope;
    out.critical_5pct = df_critical_5pct<Scalar>(n - 1);
    out.reject_unit_root = out.t_stat < out.critical_5pct;
    return out;
}

template <typename Derived>
Moments<typename Derived::Scalar> moments(const Eigen::MatrixBase<Derived>& series)
{
    using Scalar = typename Derived::Scalar;
    validate_series(series);
    const Eigen::Index n = series.size();
    if (n < 2)
        throw InsufficientData("moments: variance needs at least 2 observations");

    Moments<Scalar> m;
    m.mean = series.mean();
    const auto d = (series.array() - m.mean).eval();
    const Scalar m2 = d.square().mean();
    m.variance = d.square().sum() / Scalar(n - 1);
    if (m2 == Scalar(0)) {
        m.skewness = m.kurtosis = std::numeric_limits<Scalar>::quiet_NaN();
    } else {
        m.skewness = d.cube().mean() / std::pow(m2, Scalar(1.5));
        m.kurtosis = d.square().square().mean() / (m2 * m2);
    }
    return m;
}

// jb = n/6 (S^2 + (K - 3)^2 / 4), p = exp(-jb / 2) (chi-square with 2 dof).
template <typename Derived>
JbResult<typename Derived::Scalar> jarque_bera(const Eigen::MatrixBase<Derived>& series)
{
    using Scalar = typename Derived::Scalar;
    validate_series(series);
    const Eigen::Index n = series.size();
    if (n < 8)
        throw InsufficientData("jarque_bera: need at least 8 observations");
    const auto m = moments(series);
    if (!std::isfinite(m.skewness))
        throw DegenerateData("jarque_bera: zero variance, moments undefined");

    JbResult<Scalar> out;
    out.skewness = m.skewness;
    out.kurtosis = m.kurtosis;
    const Scalar excess = m.kurtosis - Scalar(3);
    out.jb_stat = Scalar(n) / Scalar(6) * (m.skewness * m.skewness + excess * excess / Scalar(4));
    out.p_value = std::exp(-out.jb_stat / Scalar(2));
    return out;
}

} // namespace blendloop
