#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gapest/bounds.hpp"
#include "gapest/oracle.hpp"
#include "problems.hpp"

using namespace gapest;
using testing_support::constant_drift;
using testing_support::half_line;

namespace {

constexpr double kPi = std::numbers::pi;

// g'' - c g' = -λ g on [0, L] with Neumann ends: g = e^{ct/2}(A cos kt + B sin kt)
// forces sin(kL) = 0, so λ₁ = c²/4 + π²/L².
double neumann_drift_lambda1(double c, double L) { return c * c / 4 + kPi * kPi / (L * L); }

// Same operator on [r, L], Dirichlet at r and Neumann at L: g = e^{ct/2} sin(k(t-r))
// with tan(k x) = -2k/c, x = L - r, smallest root in (π/(2x), π/x); λ = c²/4 + k².
double exterior_drift_lambda(double c, double r, double L) {
    const double x = L - r;
    double lo = kPi / (2 * x) * (1 + 1e-12), hi = kPi / x * (1 - 1e-12);
    const auto h = [&](double k) { return std::tan(k * x) + 2 * k / c; };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0 ? lo : hi) = mid;
    }
    const double k = 0.5 * (lo + hi);
    return c * c / 4 + k * k;
}

RadializedCoefficients flat(double r_max) { return radialize(half_line("1", "0", r_max)); }

// Rayleigh quotient of a grid function straight from the finite-volume data.
double rayleigh_from_operator(const DiscreteOperator& op, const std::vector<double>& g) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < op.size(); ++i) {
        const double d = g[i + 1] - g[i];
        num += std::exp(op.log_conductance[i]) * d * d;
    }
    for (std::size_t i = 0; i < op.size(); ++i) den += std::exp(op.log_mass(i)) * g[i] * g[i];
    return num / den;
}

}  // namespace

TEST(Oracle, IntervalFirstEigenvalue) {
    const auto op = discretize(flat(kPi), kPi, 4096);
    EXPECT_NEAR(lambda1_discrete(op), 1.0, 1e-5);
}

TEST(Oracle, ConstantDriftMatchesClosedForm) {
    for (double c : {1.0, 2.0, 4.0}) {
        const auto op = discretize(constant_drift(-c), 60.0, 6000);
        const double ref = neumann_drift_lambda1(c, 60.0);
        EXPECT_NEAR(lambda1_discrete(op), ref, 2e-3 * ref) << c;
        EXPECT_NEAR(lambda1_discrete(op), c * c / 4, 0.02 * c * c / 4) << c;
    }
}

TEST(Oracle, EigenvectorRayleighFromOperatorData) {
    const auto op = discretize(constant_drift(-2.0), 60.0, 6000);
    const auto T = neumann_matrix(op);
    const double lambda = eigenvalue(T, 1);
    const auto v = eigenvector(T, lambda);
    std::vector<double> g(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) g[i] = v[i] / T.sqrt_mass[i];
    EXPECT_NEAR(rayleigh_from_operator(op, g), lambda, 1e-8 * lambda);
    EXPECT_NEAR(rayleigh_quotient(T, v), lambda, 1e-8 * lambda);
}

TEST(Oracle, SecondOrderConvergence) {
    const auto coeffs = constant_drift(-2.0, 20.0);
    const double ref = neumann_drift_lambda1(2.0, 20.0);
    const double e1 = std::fabs(lambda1_discrete(discretize(coeffs, 20.0, 500)) - ref);
    const double e2 = std::fabs(lambda1_discrete(discretize(coeffs, 20.0, 1000)) - ref);
    const double e3 = std::fabs(lambda1_discrete(discretize(coeffs, 20.0, 2000)) - ref);
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);
    EXPECT_GE(e2 / e3, 3.5);
    EXPECT_LE(e2 / e3, 4.5);
}

TEST(Oracle, RichardsonRatioWithoutReference) {
    const auto coeffs = radialize(half_line("1", "-r-log(1+r)", 20.0));
    const double a = lambda1_discrete(discretize(coeffs, 20.0, 400));
    const double b = lambda1_discrete(discretize(coeffs, 20.0, 800));
    const double c = lambda1_discrete(discretize(coeffs, 20.0, 1600));
    const double ratio = (a - b) / (b - c);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(Oracle, ExteriorEigenvalue) {
    const auto op = discretize(constant_drift(-2.0), 60.0, 6000);
    const double lc = lambda_c_discrete(op, 1.0);
    EXPECT_NEAR(lc, exterior_drift_lambda(2.0, 1.0, 60.0), 2e-3);
    EXPECT_NEAR(lc, 1.0, 0.03);
}

TEST(Oracle, ExteriorOfInterval) {
    // Dirichlet at π/2, Neumann at π: sin(t - π/2), λ = 1.
    const auto op = discretize(flat(kPi), kPi, 4096);
    EXPECT_NEAR(lambda_c_discrete(op, kPi / 2), 1.0, 1e-4);
}

TEST(Oracle, BallEigenvalue) {
    const auto op = discretize(flat(4.0), 4.0, 4000);
    EXPECT_NEAR(lambda_R_discrete(op, 1.0), kPi * kPi, 1e-3);
    EXPECT_NEAR(lambda_R_discrete(op, 2.0), kPi * kPi / 4, 1e-3);
}

TEST(Oracle, LargeBallApproachesLambda1) {
    const auto op = discretize(constant_drift(-2.0), 60.0, 6000);
    const double l1 = lambda1_discrete(op);
    EXPECT_NEAR(lambda_R_discrete(op, 40.0), neumann_drift_lambda1(2.0, 40.0), 2e-3);
    EXPECT_NEAR(lambda_R_discrete(op, 60.0), l1, 1e-9 * l1);
}

TEST(Oracle, SpectrumIsNonnegativeWithZeroGroundState) {
    for (const auto& coeffs : {constant_drift(-2.0), radialize(half_line("1", "-r^2", 20.0)),
                               radialize(testing_support::euclidean(3, "(1+r^2)^2", "-2*log(1+r^2)", 1.0, 60.0))}) {
        const auto op = discretize(coeffs, coeffs.r_max, 2000);
        const auto T = neumann_matrix(op);
        const double l0 = eigenvalue(T, 0);
        EXPECT_GE(l0, -1e-10);
        EXPECT_LT(std::fabs(l0), 1e-10);
        EXPECT_EQ(sturm_count(T, -1e-10), 0u);
        EXPECT_GT(eigenvalue(T, 1), l0);
    }
}

TEST(Oracle, NeumannKernelIsConstant) {
    const auto T = neumann_matrix(discretize(flat(10.0), 10.0, 1000));
    const auto v = eigenvector(T, eigenvalue(T, 0));
    const double g0 = v[0] / T.sqrt_mass[0];
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i] / T.sqrt_mass[i], g0, 1e-12 * std::fabs(g0)) << i;
}

TEST(Oracle, MatrixIsSymmetricScaling) {
    // M^{-1/2} K M^{-1/2} applied to sqrt(M) g equals M^{-1/2} K g.
    const auto op = discretize(radialize(half_line("2+r/(1+r)", "-r", 30.0)), 30.0, 300);
    const auto T = neumann_matrix(op);
    ASSERT_EQ(T.off.size() + 1, T.size());
    for (std::size_t i = 0; i + 1 < T.size(); ++i) {
        const double k = std::exp(op.log_conductance[i]);
        EXPECT_NEAR(T.off[i], -k / (T.sqrt_mass[i] * T.sqrt_mass[i + 1]), 1e-12 * std::fabs(T.off[i])) << i;
    }
}

TEST(Oracle, RayleighConsistency) {
    for (const auto& coeffs : {constant_drift(-1.0), radialize(half_line("1", "-r^2/2-r", 30.0))}) {
        const auto T = neumann_matrix(discretize(coeffs, coeffs.r_max, 3000));
        for (std::size_t k : {1u, 2u, 5u}) {
            const double lambda = eigenvalue(T, k);
            EXPECT_LT(std::fabs(rayleigh_quotient(T, eigenvector(T, lambda)) - lambda), 1e-8 * lambda) << k;
        }
    }
}

TEST(Oracle, ExteriorEigenvalueMonotoneInRadius) {
    const auto op = discretize(radialize(half_line("1", "-r-log(1+r)")), 60.0, 6000);
    double prev = 0.0;
    for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double lc = lambda_c_discrete(op, r);
        EXPECT_GE(lc, prev * (1 - 1e-12)) << r;
        prev = lc;
    }
}

TEST(Oracle, MuBallDiscreteMatchesContinuous) {
    const auto coeffs = constant_drift(-2.0);
    const auto op = discretize(coeffs, 60.0, 6000);
    // Nodes with r_i <= r carry their whole cell, so the discrete ball ends
    // half a cell past the last such node.
    const double h = 60.0 / 6000;
    for (double node : {0.5, 1.0, 3.0})
        EXPECT_NEAR(mu_ball_discrete(op, node + 0.3 * h), mu_ball(coeffs, node + 0.5 * h), 1e-9) << node;
}

TEST(Oracle, DiscreteEq12AndEq13Consistency) {
    const auto coeffs = constant_drift(-2.0);
    const auto op = discretize(coeffs, 60.0, 6000);
    const double l1 = lambda1_discrete(op);
    const double r = 1.0;
    const double lc = lambda_c_discrete(op, r);
    EXPECT_GE(upper_eq12(lc, mu_ball_discrete(op, r), r).value, l1 - 1e-6);
    double best = 0.0;
    for (double R = 1.5; R <= 12.0; R += 0.25)
        best = std::max(best, combine_eq13(lc, lambda_R_discrete(op, R), mu_ball_discrete(op, R), r, R).value);
    EXPECT_GT(best, 0.0);
    EXPECT_LE(best, l1 + 1e-6);
}

TEST(Oracle, DoublingCheck) {
    const auto d = doubling_check(constant_drift(-2.0), 60.0, 3000);
    EXPECT_TRUE(d.passed);
    EXPECT_LT(d.drift, 0.01);
    EXPECT_NEAR(d.lambda1, d.lambda1_doubled, 0.01 * d.lambda1);
}

TEST(Oracle, GeometricGridAgrees) {
    const auto coeffs = radialize(half_line("1", "-r^2", 20.0));
    const double u = lambda1_discrete(discretize(coeffs, 20.0, 4000));
    const double g = lambda1_discrete(discretize(coeffs, 20.0, 4000, GridKind::Geometric));
    EXPECT_NEAR(u, g, 1e-3 * u);
    // V = -r² on the half-line: λ₁ = 4 (second Hermite level of the half-line OU operator).
    EXPECT_NEAR(u, 4.0, 4e-3);
}
