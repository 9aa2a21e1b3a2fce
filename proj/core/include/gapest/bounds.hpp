#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gapest/profile.hpp"
#include "gapest/quad.hpp"

namespace gapest {

enum class Direction { Lower, Upper };

/// What a bound is a bound of: the gap λ₁, the exterior eigenvalue λᶜ(r),
/// or the ball Neumann eigenvalue λ(R).
enum class Quantity { Lambda1, LambdaC, LambdaR };

const char* to_string(Direction d);
const char* to_string(Quantity q);

struct Diagnostics {
    double error_estimate = 0.0;
    std::vector<std::string> flags;
    /// Parameters the method or optimizer settled on (θ*, t*, ε*, R*, ...).
    std::vector<std::pair<std::string, double>> parameters;
    std::string test_function;
    /// Optimizer trace as (argument, objective) pairs in evaluation order.
    std::vector<std::pair<double, double>> trace;
    std::string reason;

    void flag(std::string f) { flags.push_back(std::move(f)); }
    void set(std::string key, double value) { parameters.emplace_back(std::move(key), value); }
    double get(const std::string& key, double fallback = 0.0) const;
};

struct BoundResult {
    Direction direction = Direction::Lower;
    /// Nonnegative; +inf only for vacuous upper bounds.
    double value = 0.0;
    std::string method;
    std::string citation;
    Quantity quantity = Quantity::Lambda1;
    /// r for λᶜ(r), R for λ(R); unused for λ₁.
    double radius = 0.0;
    Diagnostics diagnostics;
};

enum class Outcome { GapExists, NoGap, Inconclusive };

const char* to_string(Outcome o);

struct Verdict {
    Outcome outcome = Outcome::Inconclusive;
    std::string reason;
    std::string method;
    std::vector<BoundResult> support;
    Diagnostics diagnostics;
};

/// inf_{t ≥ r0} f(t) / F(t) with F the nested integral of (C, f, α).
/// A vacuous result has value 0 and the cause in diagnostics.reason.
BoundResult lower_radial(const CumulativeC& C, const RadialFunction& alpha, const RadialFunction& f, double r0,
                         const QuadratureSettings& settings = {}, const std::string& method = "thm12");

/// inf_{t ≥ 0} f'(t) exp[C(t)] / ∫_t^∞ exp[C(s)] f(s) ds for increasing f on the half-line.
BoundResult lower_1d_eq16(const CumulativeC& C, const RadialFunction& f, const QuadratureSettings& settings = {});

struct TestFamily {
    enum class Kind { Exponential, Sqrt, User };
    Kind kind = Kind::Exponential;
    double theta_min = 0.01;
    double theta_max = 4.0;
    RadialFunction user;
};

TestFamily::Kind test_family_from_name(const std::string& name);
const char* to_string(TestFamily::Kind k);

/// Maximizes lower_radial over the family: f_θ = exp(θ t) by a log-spaced θ
/// scan followed by Brent refinement in log θ; sqrt and user run once.
BoundResult search_test_function(const CumulativeC& C, const RadialFunction& alpha, double r0,
                                 const TestFamily& family, int budget = 48,
                                 const QuadratureSettings& settings = {}, const std::string& method = "thm12");

/// sup_t exp[-C(t)] ∫_t^∞ exp[C(s)] ds < ∞ ⇒ gap.
Verdict criterion_cor13a(const CumulativeC& C, const QuadratureSettings& settings = {});

/// ∫_{r0}^∞ (γ + ε)^+ < ∞ ⇒ gap.
Verdict criterion_cor13b(const RadialFunction& gamma, double eps, double r0, double horizon,
                         const QuadratureSettings& settings = {});

/// limsup γ < 0 ⇒ gap; with a pole at the origin, liminf γ_inf ≥ 0 ⇒ no gap.
Verdict verdict_cor14(const RadialFunction& gamma, const RadialFunction& gamma_inf, bool pole_assumption,
                      double horizon);

/// λᶜ(r) ≥ β(r)²/4 with β(r) = inf_{s ≥ r} (-γ(s))^+.
BoundResult lower_eq28(const RadialFunction& gamma, double r, double horizon);

/// λ(R) ≥ (π²/8) K / (exp(K R²/2) - 1); π²/(4R²) as K → 0.
BoundResult lambda_R_eq27(double K, double R);

/// λ₁ lower bound from λᶜ(r), λ(R) and μ(B_R) at one R > r; negative values clamp to 0.
BoundResult combine_eq13(double lambda_c, double lambda_R, double mu_BR, double r, double R);

/// λ₁ ≤ λᶜ(r) / μ(B_r).
BoundResult upper_eq12(double lambda_c, double mu_Br, double r = 0.0);

/// λ₁ ≤ ε*²/4 with ε* = sup{ε : ∫ e^{ε r} μ(dr) < ∞}.
BoundResult upper_eq17(const RadializedCoefficients& coeffs, const QuadratureSettings& settings = {});

/// As upper_eq17 with the weight exp[ε ∫_0^r β^{-1/2}].
BoundResult upper_thm32(const RadialFunction& beta, const RadializedCoefficients& coeffs,
                        const QuadratureSettings& settings = {});

}  // namespace gapest
