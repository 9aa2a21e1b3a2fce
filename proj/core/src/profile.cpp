#include "gapest/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gapest {

namespace {

double max_domain_start(std::initializer_list<const RadialFunction*> fs) {
    double s = 0.0;
    for (const auto* f : fs) s = std::max(s, f->domain_start());
    return s;
}

double min_domain_end(std::initializer_list<const RadialFunction*> fs) {
    double e = std::numeric_limits<double>::infinity();
    for (const auto* f : fs) e = std::min(e, f->domain_end());
    return e;
}

Smoothness derived_smoothness(std::initializer_list<const RadialFunction*> fs) {
    for (const auto* f : fs)
        if (f->smoothness() != Smoothness::C2) return Smoothness::Continuous;
    return Smoothness::C1;
}

void check_ellipticity(const RadialFunction& a, double r_max, const char* name) {
    constexpr int kSamples = 1000;
    const double lo = a.domain_start();
    for (int i = 0; i <= kSamples; ++i) {
        const double r = lo + (r_max - lo) * i / kSamples;
        const double v = a(r);
        if (!(v > 0.0) || !std::isfinite(v)) {
            std::ostringstream os;
            os << "ellipticity violated: " << name << "(" << r << ") = " << v << " is not positive";
            throw ModelError(os.str());
        }
    }
}

// exp(V) for a potential V, with log_value = V so that huge |V| stays representable.
RadialFunction exp_of(const RadialFunction& V) {
    return RadialFunction::custom(
        "exp(" + V.describe() + ")", [V](double r) { return std::exp(V(r)); }, {},
        [V](double r) { return V(r); }, V.domain_start(), V.smoothness(), V.domain_end());
}

// exp(V) r^{d-1}
RadialFunction radial_density(const RadialFunction& V, int d) {
    if (d == 1) return exp_of(V);
    const double k = d - 1;
    const auto log_fn = [V, k](double r) { return V(r) + k * std::log(r); };
    return RadialFunction::custom(
        "exp(" + V.describe() + ")*r^" + std::to_string(d - 1),
        [V, k](double r) { return std::exp(V(r)) * std::pow(r, k); }, {}, log_fn, V.domain_start(),
        V.smoothness(), V.domain_end());
}

double log_density(const RadializedCoefficients& c, double r) { return c.mu_density.log_value(r); }

// Scale exp(shift) so that the truncated density peaks near 1.
double density_shift(const RadializedCoefficients& c) {
    constexpr int kSamples = 4096;
    const double lo = c.mu_density.domain_start();
    double shift = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kSamples; ++i) {
        const double r = lo + (c.r_max - lo) * i / kSamples;
        shift = std::max(shift, log_density(c, r));
    }
    if (!std::isfinite(shift)) throw ModelError("mu density is not normalizable on [0, R_max]");
    return shift;
}

double scaled_mass(const RadializedCoefficients& c, double a, double b, double shift,
                   const QuadratureSettings& settings) {
    if (b <= a) return 0.0;
    QuadratureSettings local = settings;
    local.abs_tol = std::numeric_limits<double>::min();
    const auto g = [&](double r) { return std::exp(log_density(c, r) - shift); };
    const auto pts = base_partition(a, b);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) total += integrate(g, pts[k], pts[k + 1], local).value;
    return total;
}

}  // namespace

int Problem::dimension() const {
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, HalfLine>) return 1;
            else return v.d;
        },
        variant);
}

void Problem::validate() const {
    const int d = dimension();
    if (d < 1) throw ModelError("dimension d must be at least 1");
    if (r0 < 0.0) throw ModelError("base radius r0 must be nonnegative");
    if (!(r0 < r_max)) throw ModelError("base radius r0 must be below R_max");
    if (d > 1 && r0 == 0.0) throw ModelError("base radius r0 must be positive when d > 1");
}

RadialFunction drift_from_potential(const Problem& problem) {
    const auto* iso = std::get_if<IsotropicEuclidean>(&problem.variant);
    if (!iso) throw ModelError("drift_from_potential needs an isotropic Euclidean problem");
    const RadialFunction s = iso->a_scalar;
    const RadialFunction V = iso->V;
    if (s.smoothness() == Smoothness::Continuous || V.smoothness() == Smoothness::Continuous)
        throw ModelError("drift requires C¹ coefficients");
    // ⟨b, x⟩ = Σ_ij x_i (s δ_ij ∂_j V + ∂_j (s δ_ij)) = r (s V' + s')
    return RadialFunction::custom(
        "<b,x>", [s, V](double r) { return r * (s(r) * V.derivative(r) + s.derivative(r)); }, {}, {},
        max_domain_start({&s, &V}), derived_smoothness({&s, &V}), min_domain_end({&s, &V}));
}

RadializedCoefficients radialize(const Problem& problem) {
    problem.validate();
    RadializedCoefficients out;
    out.d = problem.dimension();
    out.r0 = problem.r0;
    out.r_max = problem.r_max;

    if (const auto* direct = std::get_if<DirectRadial>(&problem.variant)) {
        out.gamma = direct->gamma;
        out.alpha = direct->alpha;
        out.beta = direct->beta;
        out.mu_density = direct->mu_density;
        out.unit_diffusion = direct->alpha.is_constant(1.0) && direct->beta.is_constant(1.0);
        return out;
    }

    if (const auto* half = std::get_if<HalfLine>(&problem.variant)) {
        const RadialFunction a = half->a;
        const RadialFunction V = half->V;
        if (a.smoothness() == Smoothness::Continuous || V.smoothness() == Smoothness::Continuous)
            throw ModelError("drift requires C¹ coefficients");
        check_ellipticity(a, problem.r_max, "a");
        // L = a (d² + (V' + a'/a) d)
        out.gamma = RadialFunction::custom(
            "V' + a'/a", [a, V](double r) { return V.derivative(r) + a.derivative(r) / a(r); }, {}, {},
            max_domain_start({&a, &V}), derived_smoothness({&a, &V}), min_domain_end({&a, &V}));
        out.alpha = a;
        out.beta = a;
        out.mu_density = exp_of(V);
        out.unit_diffusion = a.is_constant(1.0);
        return out;
    }

    const auto& iso = std::get<IsotropicEuclidean>(problem.variant);
    check_ellipticity(iso.a_scalar, problem.r_max, "a_scalar");
    const RadialFunction s = iso.a_scalar;
    const RadialFunction drift = drift_from_potential(problem);
    const int d = iso.d;
    out.gamma = RadialFunction::custom(
        "r(d a + <b,x>)/(r^2 a) - 1/r",
        [s, drift, d](double r) { return r * (d * s(r) + drift(r)) / (r * r * s(r)) - 1.0 / r; }, {}, {},
        drift.domain_start(), drift.smoothness(), drift.domain_end());
    out.alpha = s;
    out.beta = s;
    out.mu_density = radial_density(iso.V, d);
    out.unit_diffusion = s.is_constant(1.0);
    return out;
}

double mu_total(const RadializedCoefficients& coeffs, const QuadratureSettings& settings) {
    const double shift = density_shift(coeffs);
    const double m = scaled_mass(coeffs, coeffs.mu_density.domain_start(), coeffs.r_max, shift, settings);
    if (!(m > 0.0) || !std::isfinite(m)) throw ModelError("mu density is not normalizable on [0, R_max]");
    return std::exp(shift) * m;
}

double mu_ball(const RadializedCoefficients& coeffs, double r, const QuadratureSettings& settings) {
    if (r > coeffs.r_max * (1.0 + 1e-12)) throw ModelError("mu_ball radius exceeds R_max");
    const double lo = coeffs.mu_density.domain_start();
    if (r <= lo) return 0.0;
    const double shift = density_shift(coeffs);
    const double total = scaled_mass(coeffs, lo, coeffs.r_max, shift, settings);
    if (!(total > 0.0) || !std::isfinite(total)) throw ModelError("mu density is not normalizable on [0, R_max]");
    const double part = scaled_mass(coeffs, lo, std::min(r, coeffs.r_max), shift, settings);
    return std::clamp(part / total, 0.0, 1.0);
}

double truncation_tail(const RadializedCoefficients& coeffs, const QuadratureSettings& settings) {
    const double shift = density_shift(coeffs);
    const double lo = coeffs.mu_density.domain_start();
    const double total = scaled_mass(coeffs, lo, coeffs.r_max, shift, settings);
    const double R = coeffs.r_max;
    const double h = std::max(1e-6, 1e-6 * R);
    const double slope = (log_density(coeffs, R) - log_density(coeffs, R - h)) / h;
    const double decay_length = 1.0 / std::max(std::fabs(slope), 1.0 / R);
    return std::exp(log_density(coeffs, R) - shift) * decay_length / total;
}

}  // namespace gapest
