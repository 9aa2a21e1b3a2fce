#pragma once

#include <variant>

#include "gapest/quad.hpp"
#include "gapest/radial_function.hpp"

namespace gapest {

/// L = a(r) d²/dr² + (a V' + a') d/dr on [0, ∞), reflecting at 0.
struct HalfLine {
    RadialFunction a;
    RadialFunction V;
};

/// L on R^d with a(x) = a_scalar(|x|) I, b_i = Σ_j (a_ij ∂_j V + ∂_j a_ij) and V = V(|x|).
struct IsotropicEuclidean {
    int d = 1;
    RadialFunction a_scalar;
    RadialFunction V;
};

/// Radial data given directly (gamma is the sphere supremum of the radial drift).
struct DirectRadial {
    RadialFunction gamma;
    RadialFunction alpha;
    RadialFunction beta;
    RadialFunction mu_density;
    int d = 1;
};

struct Problem {
    std::variant<HalfLine, IsotropicEuclidean, DirectRadial> variant;
    double r0 = 0.0;      ///< base radius of C(r)
    double r_max = 60.0;  ///< truncation radius

    int dimension() const;
    bool is_half_line() const { return std::holds_alternative<HalfLine>(variant); }
    /// Throws ModelError when d < 1, r0 >= r_max or r0 < 0.
    void validate() const;
};

/// The inputs to every bound formula. mu_density is unnormalized.
struct RadializedCoefficients {
    RadialFunction gamma;
    RadialFunction alpha;
    RadialFunction beta;
    RadialFunction mu_density;
    int d = 1;
    double r0 = 0.0;
    double r_max = 60.0;
    /// alpha ≡ beta ≡ 1: the Laplacian-plus-drift form where the manifold
    /// criteria apply.
    bool unit_diffusion = false;
};

/// r ↦ ⟨b(x), x⟩ for |x| = r. Requires an IsotropicEuclidean problem.
RadialFunction drift_from_potential(const Problem& problem);

RadializedCoefficients radialize(const Problem& problem);

/// μ(B_r) = ∫_0^r mu_density / ∫_0^{r_max} mu_density.
double mu_ball(const RadializedCoefficients& coeffs, double r,
               const QuadratureSettings& settings = {});

/// ∫_0^{r_max} mu_density (the truncated normalizing constant).
double mu_total(const RadializedCoefficients& coeffs, const QuadratureSettings& settings = {});

/// mu_density(r_max) times its local decay length, relative to the
/// truncated normalizing constant. Small values mean the truncation is benign.
double truncation_tail(const RadializedCoefficients& coeffs, const QuadratureSettings& settings = {});

}  // namespace gapest
