#pragma once

// Plant physics, disturbance and sensor laws, the two feedback rules and
// the transfer-function helpers for the gluten-blending loop.
//
// Quantities after the plant (target, output, measurement) are expressed in
// rescaled units: protein percent multiplied by (D + u0) / D. In those units
// the simplified plant is y = u + x.

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <variant>

#include "blendloop/errors.hpp"

namespace blendloop {

namespace detail {

template <typename Scalar>
bool all_finite(Scalar v)
{
    return std::isfinite(v);
}

template <typename Scalar, typename... Rest>
bool all_finite(Scalar v, Rest... rest)
{
    return std::isfinite(v) && all_finite(rest...);
}

} // namespace detail

template <typename Scalar = double>
struct BlendProcess {
    Scalar flow_rate_d{100}; // raw flour, g/s
    Scalar u0{6};            // initial gluten feed, g/s
    Scalar tau{16};          // target, rescaled units
    bool exact_balance{false};
};

// X_i - mu = phi (X_{i-1} - mu) + v_i,  v_i ~ N(0, sigma_v^2).
// sigma_v is a standard deviation.
template <typename Scalar = double>
struct Ar1Model {
    Scalar mu{10};
    Scalar phi{0.7};
    Scalar sigma_v{Scalar(0.7071067811865476)};
};

// Z_i = Y_i + eps_i,  eps_i ~ N(0, sigma_eps^2).
template <typename Scalar = double>
struct SensorModel {
    Scalar sigma_eps{Scalar(0.7071067811865476)};
};

// u_i = u_{i-1} - (z_i - tau)
struct IntegralRule {
    friend bool operator==(const IntegralRule&, const IntegralRule&) = default;
};

// u_i - u0 = lambda1 (u_{i-1} - u0) - lambda2 (z_i - tau)
template <typename Scalar = double>
struct FirstOrderRule {
    Scalar lambda1{0.5};
    Scalar lambda2{0.5};
    friend bool operator==(const FirstOrderRule&, const FirstOrderRule&) = default;
};

template <typename Scalar = double>
using ControlRule = std::variant<IntegralRule, FirstOrderRule<Scalar>>;

// Continuous first-order lag 1 / (1 + k s).
template <typename Scalar = double>
struct FirstOrderTf {
    Scalar k{1};
};

// Closed loop (1 + k s) / ((1 + k s) + beta), beta being the sensor gain H.
template <typename Scalar = double>
struct ClosedLoopTf {
    Scalar k{1};
    Scalar beta{1};
};

enum class ClampPolicy { None, NonNegative };

template <typename Scalar = double>
struct RuleStep {
    Scalar u;
    bool clamped;
};

template <typename Scalar = double>
struct FixedPoint {
    Scalar u_star;
    Scalar z_star;
};

// u_i = a u_{i-1} + b d_i
template <typename Scalar = double>
struct Discretization {
    Scalar a;
    Scalar b;
    bool stable;
};

template <typename Scalar = double>
struct Pole {
    Scalar value;
    bool stable;
};

// ---------------------------------------------------------------------------
// Validation

template <typename Scalar>
void validate(const BlendProcess<Scalar>& p)
{
    if (!detail::all_finite(p.flow_rate_d, p.u0, p.tau))
        throw InvalidInput("process parameters must be finite");
    if (!(p.flow_rate_d > 0))
        throw InvalidInput("flow rate D must be > 0");
    if (!(p.u0 >= 0))
        throw InvalidInput("initial feed u0 must be >= 0");
    if (!(p.tau > 0))
        throw InvalidInput("target tau must be > 0");
}

// phi = 1 is a unit root; the simulator needs a stationary disturbance.
template <typename Scalar>
void validate(const Ar1Model<Scalar>& m)
{
    if (!detail::all_finite(m.mu, m.phi, m.sigma_v))
        throw InvalidInput("AR(1) parameters must be finite");
    if (!(m.phi >= 0 && m.phi < 1))
        throw InvalidInput("AR(1) phi must satisfy 0 <= phi < 1");
    if (!(m.sigma_v >= 0))
        throw InvalidInput("AR(1) sigma_v must be >= 0");
}

template <typename Scalar>
void validate(const SensorModel<Scalar>& s)
{
    if (!std::isfinite(s.sigma_eps) || !(s.sigma_eps >= 0))
        throw InvalidInput("sensor sigma_eps must be finite and >= 0");
}

inline void validate(const IntegralRule&) {}

template <typename Scalar>
void validate(const FirstOrderRule<Scalar>& r)
{
    if (!detail::all_finite(r.lambda1, r.lambda2))
        throw InvalidInput("lambda1 and lambda2 must be finite");
    if (!(r.lambda1 >= 0 && r.lambda1 <= 1))
        throw InvalidInput("lambda1 must satisfy 0 <= lambda1 <= 1");
    if (!(r.lambda2 >= 0))
        throw InvalidInput("lambda2 must be >= 0");
}

template <typename Scalar>
void validate(const ControlRule<Scalar>& rule)
{
    std::visit([](const auto& r) { validate(r); }, rule);
}

// ---------------------------------------------------------------------------
// Plant

// Exact mass balance, percent units:
//   Y = (u + x D / 100) * 100 / (D + u)
template <typename Scalar>
Scalar mass_balance_exact(Scalar u_prev, Scalar x, Scalar d)
{
    if (!detail::all_finite(u_prev, x, d))
        throw InvalidInput("mass_balance_exact: non-finite input");
    if (!(d > 0))
        throw InvalidInput("mass_balance_exact: flow rate must be > 0");
    if (!(u_prev >= 0))
        throw InvalidInput("mass_balance_exact: feed rate must be >= 0");
    if (!(x >= 0 && x <= 100))
        throw InvalidInput("mass_balance_exact: protein level must lie in [0, 100]");
    return (u_prev + x * d / Scalar(100)) * Scalar(100) / (d + u_prev);
}

// (D + u0) / D: converts percent to rescaled quantity units.
template <typename Scalar>
Scalar rescale_factor(const BlendProcess<Scalar>& process)
{
    if (!(process.flow_rate_d > 0))
        throw InvalidInput("rescale_factor: flow rate must be > 0");
    return (process.flow_rate_d + process.u0) / process.flow_rate_d;
}

// Simplified plant, rescaled units.
template <typename Scalar>
Scalar process_output(Scalar u_prev, Scalar x)
{
    return u_prev + x;
}

// With exact_balance the mass balance is evaluated and brought to rescaled
// units, so both branches share the units of tau.
template <typename Scalar>
Scalar process_output(const BlendProcess<Scalar>& process, Scalar u_prev, Scalar x)
{
    if (process.exact_balance)
        return mass_balance_exact(u_prev, x, process.flow_rate_d) * rescale_factor(process);
    return process_output(u_prev, x);
}

template <typename Scalar>
Scalar disturbance_step(const Ar1Model<Scalar>& model, Scalar x_prev, Scalar v)
{
    return model.mu + model.phi * (x_prev - model.mu) + v;
}

template <typename Scalar>
Scalar measure(Scalar y, Scalar eps)
{
    return y + eps;
}

// ---------------------------------------------------------------------------
// Control rules

template <typename Scalar>
RuleStep<Scalar> rule_update(const ControlRule<Scalar>& rule, Scalar u_prev, Scalar u0, Scalar z,
                             Scalar tau, ClampPolicy clamp = ClampPolicy::None)
{
    const Scalar error = z - tau;
    Scalar u = std::visit(
        [&](const auto& r) -> Scalar {
            if constexpr (std::is_same_v<std::decay_t<decltype(r)>, IntegralRule>)
                return u_prev - error;
            else // evaluated so that lambda1 = lambda2 = 1 is bit-identical to the integral rule
                return (r.lambda1 * u_prev + (Scalar(1) - r.lambda1) * u0) - r.lambda2 * error;
        },
        rule);
    if (clamp == ClampPolicy::NonNegative && u < 0)
        return {Scalar(0), true};
    return {u, false};
}

// Deterministic fixed point of the loop with x == mu and no sensor noise.
template <typename Scalar>
FixedPoint<Scalar> noise_free_fixed_point(const ControlRule<Scalar>& rule, Scalar mu, Scalar u0,
                                          Scalar tau)
{
    if (const auto* fo = std::get_if<FirstOrderRule<Scalar>>(&rule)) {
        const Scalar denom = (Scalar(1) - fo->lambda1) + fo->lambda2;
        if (denom == Scalar(0))
            throw NoFixedPoint("first-order rule with lambda1 = 1, lambda2 = 0 has no fixed point");
        const Scalar u_star = u0 + fo->lambda2 * (tau - mu - u0) / denom;
        return {u_star, u_star + mu};
    }
    return {tau - mu, tau};
}

// ---------------------------------------------------------------------------
// Transfer functions

// Left (backward) difference of k du/dt + u = d:
//   k (u_i - u_{i-1}) + u_{i-1} = d_i  =>  u_i = (k - 1)/k u_{i-1} + 1/k d_i
template <typename Scalar>
Discretization<Scalar> discretize_first_order(const FirstOrderTf<Scalar>& tf)
{
    if (!std::isfinite(tf.k) || !(tf.k > 0))
        throw InvalidInput("discretize_first_order: time constant k must be > 0");
    const Scalar a = (tf.k - Scalar(1)) / tf.k;
    const Scalar b = Scalar(1) / tf.k;
    return {a, b, std::abs(a) < Scalar(1)};
}

template <typename Scalar>
std::complex<Scalar> closed_loop_eval(const ClosedLoopTf<Scalar>& tf, std::complex<Scalar> s)
{
    if (!(tf.k > 0))
        throw InvalidInput("closed_loop_eval: time constant k must be > 0");
    const std::complex<Scalar> num = Scalar(1) + tf.k * s;
    const std::complex<Scalar> den = num + tf.beta;
    if (den == std::complex<Scalar>(0))
        throw DivisionByZero("closed_loop_eval: s is the closed-loop pole");
    return num / den;
}

template <typename Scalar>
Pole<Scalar> closed_loop_pole(const ClosedLoopTf<Scalar>& tf)
{
    if (!(tf.k > 0))
        throw InvalidInput("closed_loop_pole: time constant k must be > 0");
    const Scalar p = -(Scalar(1) + tf.beta) / tf.k;
    return {p, p < Scalar(0)};
}

// ---------------------------------------------------------------------------

// "integral" or "first-order:<l1>:<l2>"; the same syntax the CLI accepts.
template <typename Scalar>
std::string rule_label(const ControlRule<Scalar>& rule)
{
    if (const auto* fo = std::get_if<FirstOrderRule<Scalar>>(&rule)) {
        auto fmt = [](Scalar v) {
            std::string s = std::to_string(static_cast<double>(v));
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.')
                s.pop_back();
            return s;
        };
        return "first-order:" + fmt(fo->lambda1) + ":" + fmt(fo->lambda2);
    }
    return "integral";
}

} // namespace blendloop
