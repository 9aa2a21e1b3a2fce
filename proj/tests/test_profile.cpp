#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gapest/profile.hpp"
#include "problems.hpp"

using namespace gapest;
using testing_support::euclidean;
using testing_support::half_line;

namespace {

// Composite Simpson rule with n (even) intervals.
double simpson(double (*f)(double), double a, double b, long n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (long i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double growing_diffusion_density(double r) { return r * r / ((1 + r * r) * (1 + r * r)); }

}  // namespace

TEST(Profile, DriftVanishesForGrowingDiffusion) {
    const auto p = euclidean(3, "(1+r^2)^2", "-2*log(1+r^2)", 1.0, 60.0);
    const auto b = drift_from_potential(p);
    for (double r : {1.0, 1.7, 3.0, 10.0, 42.0}) EXPECT_NEAR(b(r), 0.0, 1e-10 * (1 + r * r * r)) << r;
}

TEST(Profile, DriftOfDegenerateDiffusion) {
    for (int d : {2, 3, 5}) {
        const auto p = euclidean(d, "1/(1+r)", "-r^2", 1.0, 20.0);
        const auto b = drift_from_potential(p);
        for (double r : {1.0, 2.5, 7.0, 19.0})
            EXPECT_NEAR(b(r), -r / ((1 + r) * (1 + r)) - 2 * r * r / (1 + r), 1e-12 * (1 + r * r)) << r;
    }
}

TEST(Profile, DriftVanishesForFlatProblem) {
    const auto b = drift_from_potential(euclidean(2, "1", "0", 1.0, 10.0));
    for (double r : {1.0, 5.0, 9.0}) EXPECT_EQ(b(r), 0.0);
}

TEST(Profile, DriftNeedsEuclideanProblem) {
    EXPECT_THROW(drift_from_potential(half_line("1", "-r")), ModelError);
}

TEST(Profile, RadializeGrowingDiffusion) {
    const auto c = radialize(euclidean(3, "(1+r^2)^2", "-2*log(1+r^2)", 1.0, 60.0));
    for (double r : {1.0, 2.0, 5.0, 30.0}) {
        EXPECT_NEAR(c.gamma(r), 2.0 / r, 1e-12) << r;
        EXPECT_NEAR(c.alpha(r), (1 + r * r) * (1 + r * r), 1e-9 * std::pow(r, 4)) << r;
    }
    EXPECT_FALSE(c.unit_diffusion);
}

TEST(Profile, RadializeDegenerateDiffusion) {
    const int d = 3;
    const auto c = radialize(euclidean(d, "1/(1+r)", "-r^2", 1.0, 20.0));
    for (double r : {1.0, 2.0, 5.0, 19.0}) {
        EXPECT_NEAR(c.gamma(r), (d - 1) / r - 1 / (1 + r) - 2 * r, 1e-12 * (1 + r)) << r;
        EXPECT_NEAR(c.alpha(r), 1 / (1 + r), 1e-15) << r;
    }
}

TEST(Profile, RadializeConstantDriftHalfLine) {
    const auto c = radialize(half_line("1", "-2*r"));
    for (double r : {0.0, 1.0, 30.0}) {
        EXPECT_NEAR(c.gamma(r), -2.0, 1e-14);
        EXPECT_EQ(c.alpha(r), 1.0);
    }
    EXPECT_TRUE(c.unit_diffusion);
}

TEST(Profile, RadializeIsIdempotentOnDirectRadial) {
    const auto first = radialize(euclidean(3, "1/(1+r)", "-r^2", 1.0, 20.0));
    Problem p;
    p.variant = DirectRadial{first.gamma, first.alpha, first.beta, first.mu_density, first.d};
    p.r0 = 1.0;
    p.r_max = 20.0;
    const auto second = radialize(p);
    for (double r = 1.0; r <= 20.0; r += 0.37) {
        EXPECT_EQ(second.gamma(r), first.gamma(r));
        EXPECT_EQ(second.alpha(r), first.alpha(r));
        EXPECT_EQ(second.beta(r), first.beta(r));
        EXPECT_EQ(second.mu_density.log_value(r), first.mu_density.log_value(r));
    }
    EXPECT_EQ(second.unit_diffusion, first.unit_diffusion);
}

TEST(Profile, UnitDiffusionGammaIsLaplacianPlusDrift) {
    // V = p0 log(1 + r^2) has V' = 2 p0 r / (1 + r^2) in closed form.
    for (int d : {1, 2, 4}) {
        for (double p0 : {-3.0, -0.5}) {
            Problem p;
            p.variant = IsotropicEuclidean{d, RadialFunction::constant(1.0), RadialFunction::family(Family::Log1p2, {p0})};
            p.r0 = 0.5;
            p.r_max = 40.0;
            const auto c = radialize(p);
            for (double r : {0.5, 1.0, 3.0, 25.0})
                EXPECT_NEAR(c.gamma(r), (d - 1) / r + 2 * p0 * r / (1 + r * r), 1e-12) << d << " " << r;
        }
    }
}

TEST(Profile, MuBallOfExponentialDensity) {
    const auto c = radialize(half_line("1", "-2*r"));
    EXPECT_NEAR(mu_ball(c, 1.0), 1 - std::exp(-2.0), 1e-12);
    EXPECT_EQ(mu_ball(c, 0.0), 0.0);
    EXPECT_LT(truncation_tail(c), 1e-40);
}

TEST(Profile, MuBallOfGrowingDiffusionMatchesSimpson) {
    const auto c = radialize(euclidean(3, "(1+r^2)^2", "-2*log(1+r^2)", 1.0, 50.0));
    const double inside = simpson(growing_diffusion_density, 0.0, 1.0, 1000000);
    const double total = simpson(growing_diffusion_density, 0.0, 50.0, 1000000);
    EXPECT_NEAR(mu_ball(c, 1.0), inside / total, 1e-10);
}

TEST(Profile, MuBallMonotoneAndNormalized) {
    for (const auto& p : {half_line("1", "-r"), half_line("1/(1+r)", "-r^2", 20.0),
                          euclidean(3, "(1+r^2)^2", "-2*log(1+r^2)", 1.0, 60.0)}) {
        const auto c = radialize(p);
        double prev = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double m = mu_ball(c, p.r_max * i / 200);
            EXPECT_GE(m, prev - 1e-15);
            EXPECT_LE(m, 1.0);
            prev = m;
        }
        EXPECT_NEAR(mu_ball(c, p.r_max), 1.0, 1e-14);
    }
}

TEST(Profile, MuBallBeyondTruncationThrows) {
    EXPECT_THROW(mu_ball(radialize(half_line("1", "-r")), 61.0), ModelError);
}

TEST(Profile, AlphaBelowBetaOnGrid) {
    std::vector<Problem> problems = {half_line("1", "-r"), half_line("2+r/(1+r)", "-r"),
                                     euclidean(3, "(1+r^2)^2", "-2*log(1+r^2)", 1.0, 60.0),
                                     euclidean(2, "1/(1+r)", "-r^2", 1.0, 20.0)};
    Problem direct;
    direct.variant = DirectRadial{RadialFunction::from_text("-1"), RadialFunction::from_text("1"),
                                  RadialFunction::from_text("1+r^2"), RadialFunction::from_text("exp(-r)"), 1};
    direct.r0 = 0.0;
    problems.push_back(direct);
    for (const auto& p : problems) {
        const auto c = radialize(p);
        const double lo = std::max(p.r0, c.alpha.domain_start());
        for (int i = 0; i < 1000; ++i) {
            const double r = lo + (p.r_max - lo) * i / 999;
            EXPECT_LE(c.alpha(r), c.beta(r));
        }
    }
}

TEST(Profile, ValidationErrors) {
    EXPECT_THROW(radialize(euclidean(3, "1", "-r", 0.0, 10.0)), ModelError);
    EXPECT_THROW(radialize(euclidean(0, "1", "-r", 1.0, 10.0)), ModelError);
    auto p = half_line("1", "-r", 10.0);
    p.r0 = 10.0;
    EXPECT_THROW(radialize(p), ModelError);
}

TEST(Profile, EllipticityViolation) { EXPECT_THROW(radialize(half_line("r-1", "-r")), ModelError); }

TEST(Profile, TableNeedsDifferentiabilityHint) {
    std::vector<double> r, v;
    for (int i = 0; i <= 600; ++i) {
        r.push_back(i * 0.1);
        v.push_back(-r.back());
    }
    Problem p;
    p.variant = HalfLine{RadialFunction::constant(1.0), RadialFunction::table(r, v)};
    EXPECT_THROW(radialize(p), ModelError);

    p.variant = HalfLine{RadialFunction::constant(1.0), RadialFunction::table(r, v, Smoothness::C1)};
    const auto c = radialize(p);
    EXPECT_NEAR(c.gamma(12.34), -1.0, 1e-8);
}
