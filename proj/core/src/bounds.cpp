#include "gapest/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <boost/math/tools/minima.hpp>

namespace gapest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kScanPoints = 64;
// Brent refinement of the scan optimum; 20 bits is about 1e-6 relative.
constexpr int kRefineBits = 20;

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct SupScan {
    double sup = 0.0;
    double t_star = 0.0;
    bool unbounded = false;
    double extrapolated = 0.0;
};

// sup of g over (r0, r0 + span]: log-spaced scan, Brent refinement around the
// best scan point, then an end-trend guard on the second half of the span. A
// tail still growing is extrapolated to its limit, geometric or power-law
// depending on how the increments shrink; one that does not settle is
// declared unbounded.
SupScan scan_sup(const std::function<double(double)>& g, double r0, double span, Diagnostics& diag) {
    SupScan out;
    std::vector<double> ts(kScanPoints), vs(kScanPoints);
    int best = 0;
    for (int k = 0; k < kScanPoints; ++k) {
        ts[k] = r0 + span * std::pow(10.0, -4.0 + 4.0 * k / (kScanPoints - 1));
        vs[k] = g(ts[k]);
        diag.trace.emplace_back(ts[k], vs[k]);
        if (!std::isfinite(vs[k])) {
            out.unbounded = true;
            out.t_star = ts[k];
            return out;
        }
        if (vs[k] > vs[best]) best = k;
    }
    out.sup = vs[best];
    out.t_star = ts[best];

    const double lo = best > 0 ? ts[best - 1] : r0 + 0.5 * (ts[0] - r0);
    const double hi = best + 1 < kScanPoints ? ts[best + 1] : ts[best];
    if (hi > lo) {
        std::uintmax_t iters = 60;
        const auto [t, neg] =
            boost::math::tools::brent_find_minima([&](double t) { return -g(t); }, lo, hi, kRefineBits, iters);
        if (-neg > out.sup) {
            out.sup = -neg;
            out.t_star = t;
        }
    }

    // Five equally spaced samples over the second half of the window.
    double ts_end[5], rho[5];
    for (int k = 0; k < 5; ++k) {
        ts_end[k] = r0 + span * (0.5 + 0.125 * k);
        rho[k] = g(ts_end[k]);
        out.sup = std::max(out.sup, rho[k]);
    }
    const double rise = rho[4] - rho[0];
    if (!(rise > 1e-12 * std::fabs(rho[4]))) {
        if (rise > 0.0) out.sup = std::max(out.sup, rho[4] + rise);
        return out;
    }
    double e[4], q[3];
    for (int k = 0; k < 4; ++k) e[k] = rho[k + 1] - rho[k];
    if (*std::min_element(e, e + 4) <= 0.0) {
        out.extrapolated = rho[4] + rise;
    } else {
        for (int k = 0; k < 3; ++k) q[k] = e[k + 1] / e[k];
        const double q_max = *std::max_element(q, q + 3);
        if (q_max >= 0.95) {
            out.unbounded = true;
            diag.flag("ratio still growing at the scan end");
            return out;
        }
        if (q[2] <= q[0] * (1.0 + 1e-3)) {
            // geometric settling: Aitken on the equally spaced samples
            out.extrapolated = rho[4] + e[3] * q_max / (1.0 - q_max);
        } else {
            // power-law settling L - A t^-p through three samples
            const double t1 = ts_end[0], t2 = ts_end[2], t3 = ts_end[4];
            const double R = (rho[2] - rho[0]) / (rho[4] - rho[2]);
            const auto shape = [&](double p) {
                return (std::pow(t1, -p) - std::pow(t2, -p)) / (std::pow(t2, -p) - std::pow(t3, -p));
            };
            double lo = 1e-3, hi = 50.0;
            if (!(t1 > 0.0) || !(R > shape(lo))) {
                out.unbounded = true;
                diag.flag("ratio grows like a logarithm or faster at the scan end");
                return out;
            }
            if (R >= shape(hi)) {
                lo = hi;
            } else {
                for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (shape(mid) < R ? lo : hi) = mid;
                }
            }
            // Corrections in 1/t and 1/t² fit as one exponent above 1, which
            // places the limit too low; a smaller exponent only raises it.
            const double pw = std::min(lo, 1.0);
            out.extrapolated =
                rho[4] + (rho[4] - rho[2]) * std::pow(t3, -pw) / (std::pow(t2, -pw) - std::pow(t3, -pw));
            if (lo >= 0.9) {
                // L - A/(t + τ) through the same samples absorbs an origin shift
                const double tau = (t3 - R * t1) / (R - 1.0);
                if (std::isfinite(tau) && t1 + tau > 0.5 * t1) {
                    const double A = (rho[4] - rho[2]) * (t2 + tau) * (t3 + tau) / (t3 - t2);
                    out.extrapolated = std::max(out.extrapolated, rho[4] + A / (t3 + tau));
                }
            }
            diag.set("tail_exponent", lo);
        }
    }
    out.sup = std::max(out.sup, out.extrapolated);
    diag.flag("tail trend extrapolated");
    diag.set("extrapolated_sup", out.extrapolated);
    return out;
}

// Limit at infinity of g from samples at end/4, end/2 and end, assuming the
// increments shrink geometrically (exact for 1/r). Falls back to equally
// spaced samples when end/4 is below `start`. nullopt when they do not shrink.
std::optional<double> tail_limit(const std::function<double(double)>& g, double start, double end) {
    const double a = 0.25 * end >= start ? 0.25 * end : start;
    const double b = 0.25 * end >= start ? 0.5 * end : 0.5 * (start + end);
    const double ga = g(a), gb = g(b), gc = g(end);
    const double d1 = gb - ga, d2 = gc - gb;
    if (d2 == 0.0) return gc;
    if (d1 * d2 <= 0.0 || std::fabs(d2) >= std::fabs(d1)) return std::nullopt;
    const double q = d2 / d1;
    return gc + d2 * q / (1.0 - q);
}

double increasing_tol(double scale) { return 1e-9 * std::max(1.0, std::fabs(scale)); }

// sup{ε ≥ 0 : ∫ exp(log_weight(ε, r)) dr < ∞} over [start, end] by bisection;
// +inf when ε_max is already integrable. Truncated tails count as infinite.
double moment_threshold(const std::function<double(double, double)>& log_weight, double start, double end,
                        const QuadratureSettings& settings, Diagnostics& diag) {
    constexpr double kEpsMax = 100.0;
    constexpr double kEpsTiny = 1e-6;
    const auto finite = [&](double eps) {
        const auto t = tail_integral_log([&](double r) { return log_weight(eps, r); }, start, end, settings);
        diag.trace.emplace_back(eps, t.status == TailStatus::Converged ? 1.0 : 0.0);
        return t.status == TailStatus::Converged;
    };
    if (finite(kEpsMax)) {
        diag.reason = "all tested exponential moments are finite";
        return kInf;
    }
    if (!finite(kEpsTiny)) {
        diag.set("eps_hi", kEpsTiny);
        return 0.0;
    }
    double lo = kEpsTiny, hi = kEpsMax;
    while (hi - lo > std::max(1e-3 * lo, 1e-9)) {
        const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        (finite(mid) ? lo : hi) = mid;
    }
    diag.set("eps_lo", lo);
    diag.set("eps_hi", hi);

    // The threshold is the limit of the decay rate -d log mu / dh. Three
    // radii near the horizon and an Aitken step tell a vanishing rate (power
    // tails, where any finite horizon still looks integrable) from a
    // positive one.
    const auto rate = [&](double r) {
        const double dr = 1e-4 * r;
        const double l0 = log_weight(0.0, r), l0m = log_weight(0.0, r - dr);
        const double dh = (log_weight(1.0, r) - l0) - (log_weight(1.0, r - dr) - l0m);
        return -(l0 - l0m) / dh;
    };
    if (end / 4 - 1e-4 * end / 4 > start) {
        const double r1 = rate(end / 4), r2 = rate(end / 2), r3 = rate(end);
        if (std::isfinite(r1) && std::isfinite(r2) && std::isfinite(r3) && r3 > 0.0) {
            const double d1 = r2 - r1, d2 = r3 - r2;
            double limit = r3;
            if (d1 * d2 > 0.0 && std::fabs(d2) < std::fabs(d1)) limit = r3 - d2 * d2 / (d2 - d1);
            diag.set("rate_limit", limit);
            if (limit <= 1e-2 * r3) {
                diag.flag("decay rate of mu vanishes at infinity");
                return 0.0;
            }
            // A limit below lo contradicts a moment observed to be finite.
            if (std::fabs(hi - limit) <= 1e-2 * limit && limit >= lo) {
                diag.flag("threshold refined to the asymptotic decay rate");
                return limit;
            }
        }
    }
    return hi;
}

}  // namespace

const char* to_string(Direction d) { return d == Direction::Lower ? "lower" : "upper"; }

const char* to_string(Quantity q) {
    switch (q) {
        case Quantity::Lambda1: return "lambda1";
        case Quantity::LambdaC: return "lambda_c";
        case Quantity::LambdaR: return "lambda_R";
    }
    return "?";
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::GapExists: return "gap_exists";
        case Outcome::NoGap: return "no_gap";
        case Outcome::Inconclusive: return "inconclusive";
    }
    return "?";
}

double Diagnostics::get(const std::string& key, double fallback) const {
    for (const auto& [k, v] : parameters)
        if (k == key) return v;
    return fallback;
}

TestFamily::Kind test_family_from_name(const std::string& name) {
    if (name == "exponential") return TestFamily::Kind::Exponential;
    if (name == "sqrt") return TestFamily::Kind::Sqrt;
    if (name == "user") return TestFamily::Kind::User;
    throw ModelError("unknown test function family '" + name + "'");
}

const char* to_string(TestFamily::Kind k) {
    switch (k) {
        case TestFamily::Kind::Exponential: return "exponential";
        case TestFamily::Kind::Sqrt: return "sqrt";
        case TestFamily::Kind::User: return "user";
    }
    return "?";
}

BoundResult lower_radial(const CumulativeC& C, const RadialFunction& alpha, const RadialFunction& f, double r0,
                         const QuadratureSettings& settings, const std::string& method) {
    BoundResult res;
    res.direction = Direction::Lower;
    res.method = method;
    res.citation = alpha.is_constant(1.0)
                       ? "lambda_c(r0) >= inf_t f(t) / int_r0^t exp[-C(r)] dr int_r^inf exp[C(s)] f(s) ds"
                       : "lambda_c(r0) >= inf_t f(t) / int_r0^t exp[-C(r)] dr int_r^inf exp[C(s)] f(s)/alpha(s) ds";
    res.quantity = Quantity::LambdaC;
    res.radius = r0;
    res.diagnostics.test_function = f.describe();
    res.diagnostics.error_estimate = C.error_estimate();

    const NestedIntegral N(C, f, alpha, r0, settings);
    res.diagnostics.set("panels", static_cast<double>(N.panel_count()));
    if (N.inner_status() != TailStatus::Converged) {
        res.diagnostics.reason = std::string("inner tail integral ") + to_string(N.inner_status());
        res.diagnostics.flag(res.diagnostics.reason);
        return res;
    }
    const auto scan = scan_sup([&N](double t) { return N.ratio(t); }, r0, 0.5 * (N.horizon() - r0), res.diagnostics);
    if (scan.unbounded || !(scan.sup > 0.0)) {
        res.diagnostics.reason = "F(t)/f(t) is unbounded";
        return res;
    }
    res.value = 1.0 / scan.sup;
    res.diagnostics.set("t_star", scan.t_star);
    res.diagnostics.set("sup_ratio", scan.sup);
    return res;
}

BoundResult lower_1d_eq16(const CumulativeC& C, const RadialFunction& f, const QuadratureSettings& settings) {
    BoundResult res;
    res.direction = Direction::Lower;
    res.method = "eq16";
    res.citation = "lambda1 >= inf_t f'(t) exp[C(t)] / int_t^inf exp[C(s)] f(s) ds, f' > 0";
    res.quantity = Quantity::Lambda1;
    res.diagnostics.test_function = f.describe();
    res.diagnostics.error_estimate = C.error_estimate();

    const double r0 = C.base();
    const double span = 0.5 * (C.horizon() - r0);
    for (int k = 0; k <= 256; ++k) {
        const double t = r0 + span * 2.0 * k / 256;
        if (!(f.derivative(t) > 0.0))
            throw ModelError("the 1D bound needs a strictly increasing test function (f' <= 0 at t = " +
                             format_double(t) + ")");
    }
    const NestedIntegral N(C, f, RadialFunction::constant(1.0), r0, settings);
    if (N.inner_status() != TailStatus::Converged) {
        res.diagnostics.reason = std::string("inner tail integral ") + to_string(N.inner_status());
        res.diagnostics.flag(res.diagnostics.reason);
        return res;
    }
    // scaled_inner(t) = exp[-C(t)] ∫_t^∞ exp[C] f / f(t); the bound is inf f'/(f · scaled_inner).
    const auto g = [&](double t) { return f(t) * N.scaled_inner(t) / f.derivative(t); };
    const auto scan = scan_sup(g, r0, span, res.diagnostics);
    if (scan.unbounded || !(scan.sup > 0.0)) {
        res.diagnostics.reason = "inner integral ratio is unbounded";
        return res;
    }
    res.value = 1.0 / scan.sup;
    res.diagnostics.set("t_star", scan.t_star);
    return res;
}

BoundResult search_test_function(const CumulativeC& C, const RadialFunction& alpha, double r0,
                                 const TestFamily& family, int budget, const QuadratureSettings& settings,
                                 const std::string& method) {
    if (budget < 8) throw ModelError("test-function search budget must be at least 8");
    if (family.kind == TestFamily::Kind::Sqrt) {
        auto res = lower_radial(C, alpha, RadialFunction::family(Family::Sqrt, {1.0}), r0, settings, method);
        res.diagnostics.set("evaluations", 1);
        return res;
    }
    if (family.kind == TestFamily::Kind::User) {
        auto res = lower_radial(C, alpha, family.user, r0, settings, method);
        res.diagnostics.set("evaluations", 1);
        return res;
    }
    if (!(family.theta_min > 0.0) || !(family.theta_max > family.theta_min))
        throw ModelError("exponential family needs 0 < theta_min < theta_max");

    BoundResult best;
    double best_theta = family.theta_min;
    std::vector<std::pair<double, double>> trace;
    int evaluations = 0;
    const auto eval = [&](double theta) {
        ++evaluations;
        auto res = lower_radial(C, alpha, RadialFunction::family(Family::Exp, {1.0, theta}), r0, settings, method);
        trace.emplace_back(theta, res.value);
        if (evaluations == 1 || res.value > best.value) {
            best = std::move(res);
            best_theta = theta;
        }
        return trace.back().second;
    };

    const int n_scan = std::max(4, budget / 4);
    const double lmin = std::log(family.theta_min), lmax = std::log(family.theta_max);
    std::vector<double> grid(n_scan), values(n_scan);
    int top = 0;
    for (int i = 0; i < n_scan; ++i) {
        grid[i] = lmin + (lmax - lmin) * i / (n_scan - 1);
        values[i] = eval(std::exp(grid[i]));
        if (values[i] > values[top]) top = i;
    }
    const int remaining = budget - n_scan;
    if (remaining > 1 && values[top] > 0.0) {
        const double lo = grid[std::max(0, top - 1)], hi = grid[std::min(n_scan - 1, top + 1)];
        // Brent evaluates once before its first iteration.
        std::uintmax_t iters = static_cast<std::uintmax_t>(remaining - 1);
        boost::math::tools::brent_find_minima([&](double lt) { return -eval(std::exp(lt)); }, lo, hi, 30, iters);
    }

    best.diagnostics.trace = std::move(trace);
    best.diagnostics.set("theta", best_theta);
    best.diagnostics.set("evaluations", evaluations);
    best.diagnostics.test_function = "exp(" + format_double(best_theta) + "*t)";
    return best;
}

Verdict criterion_cor13a(const CumulativeC& C, const QuadratureSettings& settings) {
    Verdict v;
    v.method = "cor13a";
    const double r0 = C.base();
    const RadialFunction one = RadialFunction::constant(1.0);
    const NestedIntegral N(C, one, one, r0, settings);
    if (N.inner_status() != TailStatus::Converged) {
        v.reason = std::string("inner tail integral ") + to_string(N.inner_status());
        return v;
    }
    const double span = 0.5 * (N.horizon() - r0);
    std::vector<double> values(kScanPoints);
    double sup = 0.0;
    for (int k = 0; k < kScanPoints; ++k) {
        const double t = r0 + span * std::pow(10.0, -4.0 + 4.0 * k / (kScanPoints - 1));
        values[k] = N.scaled_inner(t);
        v.diagnostics.trace.emplace_back(t, values[k]);
        sup = std::max(sup, values[k]);
    }
    v.diagnostics.set("sup", sup);
    const double quarter_start = values[3 * kScanPoints / 4];
    if (!std::isfinite(sup) || values.back() > 1.01 * quarter_start) {
        v.reason = "exp[-C(t)] int_t^inf exp[C] trends upward over the last quarter of the grid";
        return v;
    }
    v.outcome = Outcome::GapExists;
    v.reason = "sup_t exp[-C(t)] int_t^inf exp[C(s)] ds = " + format_double(sup) + " < inf";
    return v;
}

Verdict criterion_cor13b(const RadialFunction& gamma, double eps, double r0, double horizon,
                         const QuadratureSettings& settings) {
    if (!(eps > 0.0)) throw ModelError("eps must be positive");
    Verdict v;
    v.method = "cor13b";
    v.diagnostics.set("eps", eps);
    const auto tail =
        tail_integral([&](double s) { return std::max(gamma(s) + eps, 0.0); }, r0, settings, horizon);
    v.diagnostics.set("integral", tail.value);
    v.diagnostics.set("last_ratio", tail.last_ratio);
    if (tail.status == TailStatus::Converged) {
        v.outcome = Outcome::GapExists;
        v.reason = "int (gamma + eps)^+ = " + format_double(tail.value) + " < inf";
    } else {
        v.reason = std::string("int (gamma + eps)^+ is ") + to_string(tail.status);
    }
    return v;
}

Verdict verdict_cor14(const RadialFunction& gamma, const RadialFunction& gamma_inf, bool pole_assumption,
                      double horizon) {
    Verdict v;
    v.method = "cor14";
    constexpr int kSamples = 1024;
    const double lo = 0.5 * horizon;
    double sup = -kInf, inf = kInf, scale = 0.0;
    for (int i = 0; i < kSamples; ++i) {
        const double r = lo + (horizon - lo) * i / (kSamples - 1);
        const double g = gamma(r), gi = gamma_inf(r);
        sup = std::max(sup, g);
        inf = std::min(inf, gi);
        scale = std::max({scale, std::fabs(g), std::fabs(gi)});
    }
    // A monotone trend at the end of the window is extrapolated so that the
    // finite window does not stand in for the limit.
    if (gamma(horizon) > gamma(lo)) {
        const auto lim = tail_limit(gamma, gamma.domain_start(), horizon);
        sup = std::max(sup, lim ? *lim : kInf);
    }
    if (gamma_inf(horizon) < gamma_inf(lo)) {
        const auto lim = tail_limit(gamma_inf, gamma_inf.domain_start(), horizon);
        inf = std::min(inf, lim ? *lim : -kInf);
    }
    v.diagnostics.set("limsup", sup);
    v.diagnostics.set("liminf", inf);
    const double tol = increasing_tol(scale);
    if (sup < -tol) {
        v.outcome = Outcome::GapExists;
        v.reason = "limsup gamma = " + format_double(sup) + " < 0";
    } else if (pole_assumption && inf >= -tol) {
        v.outcome = Outcome::NoGap;
        v.reason = "origin is a pole and liminf gamma = " + format_double(inf) + " >= 0";
    } else {
        v.reason = pole_assumption ? "limsup gamma >= 0 and liminf gamma < 0"
                                   : "limsup gamma >= 0 and no pole assumption";
    }
    return v;
}

BoundResult lower_eq28(const RadialFunction& gamma, double r, double horizon) {
    BoundResult res;
    res.direction = Direction::Lower;
    res.method = "eq28";
    res.citation = "lambda_c(r) >= beta(r)^2/4, beta(r) = inf_{s>=r} (-gamma(s))^+";
    res.quantity = Quantity::LambdaC;
    res.radius = r;
    if (!(horizon > r)) throw ModelError("eq28 needs horizon > r");
    constexpr int kSamples = 4096;
    double beta = kInf;
    for (int i = 0; i <= kSamples; ++i) {
        const double s = r + (horizon - r) * i / kSamples;
        beta = std::min(beta, std::max(-gamma(s), 0.0));
    }
    if (gamma(horizon) > gamma(0.5 * (r + horizon))) {
        const auto lim = tail_limit(gamma, gamma.domain_start(), horizon);
        beta = std::min(beta, lim ? std::max(-*lim, 0.0) : 0.0);
        if (!lim) res.diagnostics.flag("gamma still rising at the horizon");
    }
    res.value = 0.25 * beta * beta;
    res.diagnostics.set("beta", beta);
    res.diagnostics.test_function = "exp(" + format_double(0.5 * beta) + "*t)";
    if (beta == 0.0) res.diagnostics.reason = "beta(r) = 0";
    return res;
}

BoundResult lambda_R_eq27(double K, double R) {
    if (K < 0.0 || !(R > 0.0)) throw ModelError("eq27 needs K >= 0 and R > 0");
    BoundResult res;
    res.direction = Direction::Lower;
    res.method = "eq27";
    res.citation = "lambda(R) >= (pi^2/8) K / (exp[K R^2/2] - 1)";
    res.quantity = Quantity::LambdaR;
    res.radius = R;
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    res.value = K < 1e-10 ? pi2 / (4.0 * R * R) : pi2 / 8.0 * K / std::expm1(0.5 * K * R * R);
    res.diagnostics.set("K", K);
    return res;
}

BoundResult combine_eq13(double lambda_c, double lambda_R, double mu_BR, double r, double R) {
    if (!(mu_BR > 0.0)) throw ModelError("mu(B_R) must be positive");
    if (!(lambda_c > 0.0) || !(lambda_R > 0.0)) throw ModelError("eq13 needs lambda_c > 0 and lambda(R) > 0");
    if (!(R > r)) throw ModelError("eq13 needs R > r");
    BoundResult res;
    res.direction = Direction::Lower;
    res.method = "eq13";
    res.citation =
        "lambda1 >= [lc lR mu (R-r)^2 - 2 lR (1-mu)] / [2 lR (R-r)^2 + lc (R-r)^2 mu + 2 mu], mu = mu(B_R)";
    res.quantity = Quantity::Lambda1;
    const double w = (R - r) * (R - r);
    const double num = lambda_c * lambda_R * mu_BR * w - 2.0 * lambda_R * (1.0 - mu_BR);
    const double den = 2.0 * lambda_R * w + lambda_c * w * mu_BR + 2.0 * mu_BR;
    res.diagnostics.set("r", r);
    res.diagnostics.set("R", R);
    res.diagnostics.set("lambda_c", lambda_c);
    res.diagnostics.set("lambda_R", lambda_R);
    res.diagnostics.set("mu_BR", mu_BR);
    if (num < 0.0) {
        res.diagnostics.flag("negative numerator clamped to 0");
        res.diagnostics.reason = "numerator " + format_double(num) + " < 0 at this R";
        return res;
    }
    res.value = num / den;
    return res;
}

BoundResult upper_eq12(double lambda_c, double mu_Br, double r) {
    if (!(mu_Br > 0.0)) throw ModelError("mu(B_r) must be positive");
    BoundResult res;
    res.direction = Direction::Upper;
    res.method = "eq12";
    res.citation = "lambda1 <= lambda_c(r) / mu(B_r)";
    res.quantity = Quantity::Lambda1;
    res.radius = r;
    res.value = lambda_c / mu_Br;
    res.diagnostics.set("lambda_c", lambda_c);
    res.diagnostics.set("mu_Br", mu_Br);
    return res;
}

BoundResult upper_eq17(const RadializedCoefficients& coeffs, const QuadratureSettings& settings) {
    BoundResult res;
    res.direction = Direction::Upper;
    res.method = "eq17";
    res.citation = "lambda1 <= (1/4) sup{eps^2 : mu(exp[eps r]) < inf}";
    res.quantity = Quantity::Lambda1;
    const RadialFunction& m = coeffs.mu_density;
    const double start = m.domain_start();
    double end = settings.moment_horizon;
    if (m.domain_end() < end) {
        end = m.domain_end();
        res.diagnostics.flag("moment horizon clipped to the density domain");
    }
    const double eps = moment_threshold([&m](double e, double r) { return e * r + m.log_value(r); }, start, end,
                                        settings, res.diagnostics);
    res.diagnostics.set("eps_star", eps);
    res.value = std::isinf(eps) ? kInf : 0.25 * eps * eps;
    return res;
}

BoundResult upper_thm32(const RadialFunction& beta, const RadializedCoefficients& coeffs,
                        const QuadratureSettings& settings) {
    BoundResult res;
    res.direction = Direction::Upper;
    res.method = "thm32";
    res.citation = "lambda1 <= (1/4) sup{eps^2 : mu(exp[eps int_0^|x| beta^{-1/2}]) < inf}";
    res.quantity = Quantity::Lambda1;
    const RadialFunction& m = coeffs.mu_density;
    const double start = std::max(beta.domain_start(), m.domain_start());
    double end = settings.moment_horizon;
    if (std::min(beta.domain_end(), m.domain_end()) < end) {
        end = std::min(beta.domain_end(), m.domain_end());
        res.diagnostics.flag("moment horizon clipped to the coefficient domain");
    }
    const auto inv_sqrt = RadialFunction::custom(
        "beta^(-1/2)",
        [beta](double r) {
            const double b = beta(r);
            if (!(b > 0.0)) throw ModelError("beta must be positive");
            return 1.0 / std::sqrt(b);
        },
        {}, {}, start, Smoothness::C2, end);
    const CumulativeIntegral h(inv_sqrt, start, end, settings);
    res.diagnostics.set("h_end", h(end));
    const double eps = moment_threshold([&](double e, double r) { return e * h(r) + m.log_value(r); }, start, end,
                                        settings, res.diagnostics);
    res.diagnostics.set("eps_star", eps);
    res.value = std::isinf(eps) ? kInf : 0.25 * eps * eps;
    return res;
}

}  // namespace gapest
