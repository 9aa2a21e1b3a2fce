#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gapest/expr.hpp"

namespace gapest {

/// Error raised for invalid problem data: out-of-domain evaluation, missing
/// derivatives, ellipticity or normalizability violations.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Smoothness { Continuous, C1, C2 };

/// Built-in parametric families with closed-form value, derivative and log.
enum class Family {
    Constant,   // p0
    Linear,     // p0 + p1 r
    Quadratic,  // p0 + p1 r + p2 r^2
    Exp,        // p0 exp(p1 r)
    PowR,       // p0 r^p1
    Power1p2,   // p0 (1 + r^2)^p1
    Log1p2,     // p0 log(1 + r^2)
    Inv1p,      // p0 (1 + r)^(-p1)
    Log1p,      // p0 log(1 + r)
    Sqrt,       // p0 sqrt(r)
    Sin,        // p0 sin(r)
};

const char* family_name(Family f);
Family family_from_name(const std::string& name);
std::size_t family_arity(Family f);

/// A scalar function of the radius, defined on [domain_start, domain_end].
///
/// Sources: a parsed expression, a built-in family, a piecewise-linear table,
/// or an arbitrary callable (used for derived profiles such as gamma). Copies
/// share the immutable source.
class RadialFunction {
public:
    using Fn = std::function<double(double)>;

    RadialFunction();

    static RadialFunction from_expression(expr::Expression e, double domain_start = 0.0,
                                          Smoothness s = Smoothness::C2);
    static RadialFunction from_text(const std::string& text, double domain_start = 0.0);
    static RadialFunction family(Family f, std::vector<double> params, double domain_start = 0.0);
    static RadialFunction constant(double c);
    /// Strictly increasing abscissae; values at nodes are returned exactly.
    /// A C1 or C2 hint enables central-difference derivatives.
    static RadialFunction table(std::vector<double> r, std::vector<double> values,
                                Smoothness hint = Smoothness::Continuous);
    static RadialFunction custom(std::string description, Fn value, Fn derivative = {},
                                 Fn log_value = {}, double domain_start = 0.0,
                                 Smoothness s = Smoothness::C2,
                                 double domain_end = std::numeric_limits<double>::infinity());

    double operator()(double r) const;
    /// First derivative: analytic for families, forward-mode for expressions,
    /// central differences with step max(1e-6, 1e-6 r) for tables and callables
    /// without one.
    double derivative(double r) const;
    /// log of the value, evaluated in log space where the source allows it.
    double log_value(double r) const;

    double domain_start() const;
    double domain_end() const;
    Smoothness smoothness() const;
    std::string describe() const;

    bool is_expression() const;
    bool is_family() const;
    bool is_table() const;
    const expr::Expression* expression() const;
    /// Family id and parameters, if family-backed.
    const std::pair<Family, std::vector<double>>* family_source() const;

    /// True when the function is identically `c` (family constants and
    /// constant literals only; no sampling).
    bool is_constant(double c) const;

private:
    struct Impl;
    explicit RadialFunction(std::shared_ptr<const Impl> impl);
    void check_domain(double r) const;
    std::shared_ptr<const Impl> impl_;
};

double central_difference(const std::function<double(double)>& f, double r);

}  // namespace gapest
