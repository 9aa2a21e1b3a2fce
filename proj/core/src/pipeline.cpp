#include "gapest/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gapest {

namespace {

constexpr double kOrderingSlack = 1.03;
constexpr double kDiscreteSlack = 1e-6;
constexpr int kRadiusGrid = 64;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string inapplicable_reason(const std::string& m, const RunConfig& cfg, const RadializedCoefficients& c) {
    const bool half = cfg.problem.is_half_line();
    if (m == "thm12" && !half) return "thm12 applies to half-line problems; use thm31";
    if (m == "thm31" && half) return "thm31 applies to Euclidean and radial problems; use thm12";
    if (m == "eq16" && !half) return "eq16 applies to half-line problems only";
    if (m == "thm32" && c.unit_diffusion) return "thm32 reduces to eq17 when beta = 1";
    if ((m == "eq13" || m == "eq27") && !cfg.K) return m + " needs the curvature constant K";
    if (!c.unit_diffusion && (m == "eq16" || m == "eq28" || m == "cor13a" || m == "cor13b" || m == "cor14" ||
                              m == "eq13" || m == "eq17"))
        return m + " needs alpha = beta = 1";
    return {};
}

RadialFunction test_function_of(const BoundResult& thm, const TestFamily& family) {
    switch (family.kind) {
        case TestFamily::Kind::Sqrt: return RadialFunction::family(Family::Sqrt, {1.0});
        case TestFamily::Kind::User: return family.user;
        case TestFamily::Kind::Exponential: break;
    }
    return RadialFunction::family(Family::Exp, {1.0, thm.diagnostics.get("theta", family.theta_min)});
}

// eq16 over exponential test functions: a log θ grid plus the θ the main
// search settled on.
BoundResult eq16_search(const CumulativeC& C0, const RunConfig& cfg, const std::optional<double>& theta_hint) {
    const auto& q = cfg.quadrature;
    if (cfg.test_family.kind == TestFamily::Kind::User) return lower_1d_eq16(C0, cfg.test_family.user, q);
    std::vector<double> thetas;
    const int n = std::max(4, cfg.budget / 4);
    const double lmin = std::log(cfg.test_family.theta_min), lmax = std::log(cfg.test_family.theta_max);
    for (int i = 0; i < n; ++i) thetas.push_back(std::exp(lmin + (lmax - lmin) * i / (n - 1)));
    if (theta_hint) thetas.push_back(*theta_hint);
    BoundResult best;
    bool first = true;
    for (double th : thetas) {
        auto r = lower_1d_eq16(C0, RadialFunction::family(Family::Exp, {1.0, th}), q);
        r.diagnostics.trace.clear();
        r.diagnostics.set("theta", th);
        if (first || r.value > best.value) best = std::move(r);
        first = false;
    }
    return best;
}

void add_check(Report& rep, std::string name, bool passed, std::string detail) {
    rep.checks.push_back({std::move(name), passed, std::move(detail)});
}

}  // namespace

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Estimate: return "estimate";
        case Mode::Bounds: return "bounds";
        case Mode::Oracle: return "oracle";
        case Mode::Check: return "check";
    }
    return "?";
}

bool Report::all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const OrderingCheck& c) { return c.passed; });
}

std::vector<std::string> applicable_methods(const RunConfig& cfg, const RadializedCoefficients& coeffs) {
    std::vector<std::string> out;
    for (const auto& m : known_methods())
        if (inapplicable_reason(m, cfg, coeffs).empty()) out.push_back(m);
    return out;
}

Verdict decide(const std::vector<BoundResult>& bounds, const std::vector<Verdict>& criteria) {
    const BoundResult* best_lower = nullptr;
    const BoundResult* zero_upper = nullptr;
    for (const auto& b : bounds) {
        if (b.direction == Direction::Lower && b.quantity != Quantity::LambdaR && b.value > 0.0 &&
            (!best_lower || b.value > best_lower->value))
            best_lower = &b;
        if (b.direction == Direction::Upper && b.value == 0.0 && !zero_upper) zero_upper = &b;
    }
    const Verdict* gap_criterion = nullptr;
    const Verdict* no_gap_criterion = nullptr;
    for (const auto& c : criteria) {
        if (c.outcome == Outcome::GapExists && !gap_criterion) gap_criterion = &c;
        if (c.outcome == Outcome::NoGap && !no_gap_criterion) no_gap_criterion = &c;
    }
    const bool gap = best_lower || gap_criterion;
    const bool no_gap = zero_upper || no_gap_criterion;

    Verdict v;
    if (gap && no_gap) {
        v.outcome = Outcome::Inconclusive;
        v.reason = "conflicting evidence: a positive lower bound or criterion and a no-gap indication";
        return v;
    }
    if (gap) {
        v.outcome = Outcome::GapExists;
        if (best_lower) {
            v.method = best_lower->method;
            v.reason = best_lower->method + " lower bound " + fmt(best_lower->value) + " > 0";
            v.support.push_back(*best_lower);
        } else {
            v.method = gap_criterion->method;
            v.reason = gap_criterion->reason;
        }
        return v;
    }
    if (no_gap) {
        v.outcome = Outcome::NoGap;
        if (no_gap_criterion) {
            v.method = no_gap_criterion->method;
            v.reason = no_gap_criterion->reason;
        } else {
            v.method = zero_upper->method;
            v.reason = zero_upper->method + " upper bound is 0";
            v.support.push_back(*zero_upper);
        }
        return v;
    }
    v.reason = "no positive lower bound and no criterion satisfied";
    return v;
}

Report run_pipeline(const RunConfig& cfg, Mode mode) {
    Report rep;
    rep.mode = mode;
    rep.digest = cfg.digest();
    rep.canonical_config = cfg.canonical();

    const RadializedCoefficients coeffs = radialize(cfg.problem);
    const auto& q = cfg.quadrature;
    const double r0 = cfg.problem.r0;
    const double H = q.horizon_or(cfg.problem.r_max);
    const bool half = cfg.problem.is_half_line();
    const bool run_bounds = mode != Mode::Oracle;
    const bool run_oracle = mode != Mode::Bounds;

    std::vector<std::string> selected;
    if (cfg.methods.empty()) {
        selected = applicable_methods(cfg, coeffs);
    } else {
        for (const auto& m : cfg.methods) {
            const auto why = inapplicable_reason(m, cfg, coeffs);
            if (why.empty()) selected.push_back(m);
            else rep.notes.push_back(why);
        }
    }
    const auto want = [&](const std::string& m) { return contains(selected, m); };

    std::optional<CumulativeC> C;
    std::optional<BoundResult> thm;
    std::optional<BoundResult> eq28;
    if (run_bounds) {
        C = cumulative_C(coeffs.gamma, r0, H, q);
        const std::string tag = half ? "thm12" : "thm31";
        if (want(tag)) {
            thm = search_test_function(*C, coeffs.alpha, r0, cfg.test_family, cfg.budget, q, tag);
            rep.bounds.push_back(*thm);
        }
        if (want("eq16")) {
            const CumulativeC C0 = r0 == 0.0 ? *C : cumulative_C(coeffs.gamma, 0.0, H, q);
            std::optional<double> hint;
            if (thm && cfg.test_family.kind == TestFamily::Kind::Exponential) hint = thm->diagnostics.get("theta");
            try {
                rep.bounds.push_back(eq16_search(C0, cfg, hint));
            } catch (const ModelError& e) {
                rep.notes.push_back(std::string("eq16 skipped: ") + e.what());
            }
        }
        if (want("eq28") || want("eq13")) eq28 = lower_eq28(coeffs.gamma, r0, H);
        if (want("eq28")) rep.bounds.push_back(*eq28);
        if (want("cor13a")) rep.criteria.push_back(criterion_cor13a(*C, q));
        if (want("cor13b")) rep.criteria.push_back(criterion_cor13b(coeffs.gamma, cfg.eps, r0, H, q));
        if (want("cor14")) rep.criteria.push_back(verdict_cor14(coeffs.gamma, coeffs.gamma, cfg.pole, H));
        if (want("eq13") || want("eq27")) {
            double lambda_c = eq28 ? eq28->value : 0.0;
            if (thm && thm->quantity == Quantity::LambdaC) lambda_c = std::max(lambda_c, thm->value);
            std::optional<BoundResult> best, best_R;
            for (int k = 1; k <= kRadiusGrid; ++k) {
                const double R = r0 + (cfg.problem.r_max - r0) * k / kRadiusGrid;
                const auto lr = lambda_R_eq27(*cfg.K, R);
                if (!(lambda_c > 0.0) || !(lr.value > 0.0)) {
                    if (!best_R || lr.value > best_R->value) best_R = lr;
                    continue;
                }
                const double mu = mu_ball(coeffs, R, q);
                if (!(mu > 0.0)) continue;
                auto b = combine_eq13(lambda_c, lr.value, mu, r0, R);
                if (!best || b.value > best->value) {
                    best = std::move(b);
                    best_R = lr;
                }
            }
            if (want("eq13")) {
                if (best) rep.bounds.push_back(*best);
                else rep.notes.push_back("eq13 needs a positive lambda_c(r0) lower bound");
            }
            if (want("eq27") && best_R) rep.bounds.push_back(*best_R);
        }
        if (want("eq17")) rep.bounds.push_back(upper_eq17(coeffs, q));
        if (want("thm32")) rep.bounds.push_back(upper_thm32(coeffs.beta, coeffs, q));

        if (thm) {
            const RadialFunction f = test_function_of(*thm, cfg.test_family);
            std::optional<NestedIntegral> N;
            try {
                N.emplace(*C, f, coeffs.alpha, r0, q);
            } catch (const ModelError&) {
            }
            const double end = r0 + 0.5 * (H - r0);
            for (int i = 0; i < 512; ++i) {
                const double r = r0 + (end - r0) * i / 511;
                const double ratio = N ? N->ratio(r) : std::numeric_limits<double>::quiet_NaN();
                rep.plot.push_back({r, coeffs.gamma(r), (*C)(r), ratio});
            }
        }
    }

    std::optional<DiscreteOperator> op;
    if (run_oracle) {
        auto& o = rep.oracle;
        o.n = cfg.oracle.n;
        o.r_max = cfg.oracle.r_max > 0.0 ? cfg.oracle.r_max : cfg.problem.r_max;
        o.r0 = r0;
        op = discretize(coeffs, o.r_max, o.n, cfg.oracle.grid);
        o.lambda1 = lambda1_discrete(*op);
        o.lambda_c_r0 = lambda_c_discrete(*op, r0);
        o.computed = true;
        if (cfg.oracle.doubling_check) o.doubling = doubling_check(coeffs, o.r_max, o.n, cfg.oracle.grid);

        if (want("eq12") && mode != Mode::Oracle) {
            std::optional<BoundResult> best;
            for (double level : {0.25, 0.5, 0.75, 0.9}) {
                double r = -1.0;
                for (std::size_t i = 0; i + 1 < op->size(); ++i) {
                    if (mu_ball_discrete(*op, op->nodes[i]) >= level) {
                        r = op->nodes[i];
                        break;
                    }
                }
                if (r < 0.0) continue;
                auto b = upper_eq12(lambda_c_discrete(*op, r), mu_ball_discrete(*op, r), r);
                b.diagnostics.set("mu_level", level);
                b.diagnostics.flag("lambda_c and mu(B_r) from the oracle");
                if (!best || b.value < best->value) best = std::move(b);
            }
            if (best) rep.bounds.push_back(*best);
        }
    } else if (want("eq12")) {
        rep.notes.push_back("eq12 needs oracle values; not run in bounds mode");
    }

    if (run_bounds && run_oracle) {
        const double l1 = rep.oracle.lambda1;
        for (const auto& b : rep.bounds) {
            if (b.direction == Direction::Lower) {
                if (!(b.value > 0.0)) continue;
                double ref = l1;
                std::string what = "lambda1";
                if (b.quantity == Quantity::LambdaC && !(half && b.radius == 0.0)) {
                    ref = b.radius == r0 ? rep.oracle.lambda_c_r0 : lambda_c_discrete(*op, b.radius);
                    what = "lambda_c(" + fmt(b.radius) + ")";
                } else if (b.quantity == Quantity::LambdaR) {
                    if (!(b.radius < op->nodes.back())) continue;
                    ref = lambda_R_discrete(*op, b.radius);
                    what = "lambda(" + fmt(b.radius) + ")";
                }
                add_check(rep, b.method + " <= oracle " + what, b.value <= ref * kOrderingSlack,
                          fmt(b.value) + " vs " + fmt(ref));
            } else if (half && std::isfinite(b.value)) {
                if (b.method == "eq12")
                    add_check(rep, "oracle lambda1 <= eq12", l1 <= b.value + kDiscreteSlack,
                              fmt(l1) + " vs " + fmt(b.value));
                else
                    add_check(rep, "oracle lambda1 <= " + b.method, l1 <= b.value * kOrderingSlack,
                              fmt(l1) + " vs " + fmt(b.value));
            }
        }
        if (half && rep.oracle.lambda_c_r0 > 0.0) {
            // eq13 fed with oracle λᶜ(r0), λ(R) and μ(B_R) cannot exceed λ₁.
            double best = 0.0;
            for (int k = 1; k <= kRadiusGrid; ++k) {
                const double R = r0 + (rep.oracle.r_max - r0) * k / kRadiusGrid;
                if (!(R < op->nodes.back())) break;
                double lr = 0.0;
                try {
                    lr = lambda_R_discrete(*op, R);
                } catch (const ModelError&) {
                    continue;
                }
                const double mu = mu_ball_discrete(*op, R);
                if (!(lr > 0.0) || !(mu > 0.0) || !(R > r0)) continue;
                best = std::max(best, combine_eq13(rep.oracle.lambda_c_r0, lr, mu, r0, R).value);
            }
            add_check(rep, "eq13 with oracle inputs <= oracle lambda1", best <= l1 + kDiscreteSlack,
                      fmt(best) + " vs " + fmt(l1));
        }
        if (rep.oracle.doubling)
            add_check(rep, "oracle truncation (R_max doubled)", rep.oracle.doubling->passed,
                      "relative drift " + fmt(rep.oracle.doubling->drift));
    }

    if (run_bounds) {
        rep.verdict = decide(rep.bounds, rep.criteria);
    } else {
        rep.verdict.reason = "oracle only; no bounds computed";
    }
    return rep;
}

}  // namespace gapest
