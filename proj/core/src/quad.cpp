#include "gapest/quad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <sstream>

namespace gapest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Mass ratio of the last two doubling panels: at or below this the tail is
// taken as geometrically decaying, at or above kDivergentRatio as divergent.
constexpr double kConvergedRatio = 0.9;
constexpr double kDivergentRatio = 0.999;

constexpr int kPanelNodes = 16;

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Gk15 {
    double value;
    double error;
    double abs_value;
};

Gk15 gk15(const ScalarFn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = kWgk[7] * fc;
    double g = kWg[3] * fc;
    double kabs = std::fabs(k);
    for (int i = 0; i < 7; ++i) {
        const double x = h * kXgk[i];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        k += kWgk[i] * (f1 + f2);
        kabs += kWgk[i] * (std::fabs(f1) + std::fabs(f2));
        if (i % 2 == 1) g += kWg[i / 2] * (f1 + f2);
    }
    const double value = k * h;
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "integrand is not finite on [" << a << ", " << b << "]";
        throw ModelError(os.str());
    }
    return {value, std::fabs((k - g) * h), kabs * std::fabs(h)};
}

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

double log_of_nonneg(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// Doubling panels [r, r+w], [r+w, r+2w], [r+2w, r+4w], ... ending exactly at the horizon.
std::vector<double> doubling_breakpoints(double r, double horizon) {
    const double span = horizon - r;
    const double w0 = std::max(std::fabs(r), 1.0);
    const int levels = std::clamp(static_cast<int>(std::lround(std::log2(span / w0))), 2, 60);
    const double w = span / std::ldexp(1.0, levels);
    std::vector<double> pts{r, r + w};
    for (int k = 1; k <= levels; ++k) pts.push_back(k == levels ? horizon : r + std::ldexp(w, k));
    return pts;
}

struct Classification {
    TailStatus status;
    double ratio;
    double remainder;
};

// Remainder beyond H from the log-slope σ = -(log g)' at H/2 and H, fitted
// as σ(s) = a + p/s (g ~ s^-p e^{-a s}). With a > 0 the model tail is
// integrated; otherwise g(H)/(σ(H) - 1/H), exact for power tails. +inf when
// the slope gives no usable estimate.
double log_slope_remainder(const ScalarFn& log_g, double r, double H) {
    const double h = 1e-4 * std::min(std::max(1.0, H), H - r);
    const double lh = log_g(H), lm = log_g(H - h);
    if (lh == kNegInf) return kNegInf;
    if (!std::isfinite(lh) || !std::isfinite(lm)) return std::numeric_limits<double>::infinity();
    const double sigma = (lm - lh) / h;
    const double half = 0.5 * H;
    if (half - h > r) {
        const double l1 = log_g(half), l1m = log_g(half - h);
        const double sigma1 = (l1m - l1) / h;
        const double p = H * (sigma1 - sigma);
        const double a = sigma - p / H;
        if (std::isfinite(p) && a > 1e-3 * std::fabs(sigma) && a * H > 1.0) {
            const double span = (50.0 + std::max(0.0, -p) * std::log(2.0 + 50.0 / (a * H))) / a;
            const auto model = [&](double u) { return std::exp(-a * u - p * std::log1p(u / H)); };
            QuadratureSettings q;
            q.rel_tol = 1e-12;
            try {
                const double v = integrate(model, 0.0, span, q).value;
                if (v > 0.0 && std::isfinite(v)) return lh + std::log(v);
            } catch (const QuadratureError&) {
            }
        }
    }
    const double excess = sigma - 1.0 / H;
    if (!(excess > 0.0)) return std::numeric_limits<double>::infinity();
    return lh - std::log(excess);
}

// Shared decision rule on the last two doubling-panel masses (linear scale).
// The remainder is the smaller of the geometric continuation of the panel
// masses and the local-slope estimate.
Classification classify_tail(double prev, double last, double negligible, double slope_remainder) {
    const double ratio = prev > 0.0 ? last / prev : (last > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const double geometric = ratio < 1.0 ? last * ratio / (1.0 - ratio) : last;
    const double remainder = std::min(geometric, slope_remainder);
    if (last <= negligible || last <= 0.0) return {TailStatus::Converged, ratio, last > 0.0 ? remainder : 0.0};
    if (ratio >= kDivergentRatio) return {TailStatus::Divergent, ratio, 0.0};
    if (ratio <= kConvergedRatio) return {TailStatus::Converged, ratio, remainder};
    return {TailStatus::Truncated, ratio, remainder};
}

struct Barycentric {
    std::vector<double> lambda;
};

const Barycentric& barycentric16() {
    static const Barycentric b = [] {
        const auto& gl = gauss_legendre(kPanelNodes);
        Barycentric out;
        out.lambda.resize(kPanelNodes);
        for (int j = 0; j < kPanelNodes; ++j) {
            double p = 1.0;
            for (int k = 0; k < kPanelNodes; ++k)
                if (k != j) p *= gl.nodes[j] - gl.nodes[k];
            out.lambda[j] = 1.0 / p;
        }
        return out;
    }();
    return b;
}

// Lagrange basis values ℓ_i(x) on the 16 Gauss–Legendre nodes.
void lagrange_basis(double x, double* out) {
    const auto& gl = gauss_legendre(kPanelNodes);
    const auto& bc = barycentric16();
    for (int i = 0; i < kPanelNodes; ++i) {
        if (x == gl.nodes[i]) {
            std::fill(out, out + kPanelNodes, 0.0);
            out[i] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (int i = 0; i < kPanelNodes; ++i) {
        out[i] = bc.lambda[i] / (x - gl.nodes[i]);
        denom += out[i];
    }
    for (int i = 0; i < kPanelNodes; ++i) out[i] /= denom;
}

// row_i = ∫_lo^hi ℓ_i(x) dx for [lo, hi] ⊂ [-1, 1]; exact for the degree-15 basis.
void integration_row(double lo, double hi, double* row) {
    const auto& gl = gauss_legendre(kPanelNodes);
    std::fill(row, row + kPanelNodes, 0.0);
    if (hi <= lo) return;
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double basis[kPanelNodes];
    for (int k = 0; k < kPanelNodes; ++k) {
        lagrange_basis(c + h * gl.nodes[k], basis);
        for (int i = 0; i < kPanelNodes; ++i) row[i] += gl.weights[k] * h * basis[i];
    }
}

struct SpectralMatrices {
    // backward[j][i] = ∫_{u_j}^{1} ℓ_i, forward[j][i] = ∫_{-1}^{u_j} ℓ_i
    double backward[kPanelNodes][kPanelNodes];
    double forward[kPanelNodes][kPanelNodes];
};

const SpectralMatrices& spectral_matrices() {
    static const SpectralMatrices m = [] {
        SpectralMatrices out{};
        const auto& gl = gauss_legendre(kPanelNodes);
        for (int j = 0; j < kPanelNodes; ++j) {
            integration_row(gl.nodes[j], 1.0, out.backward[j]);
            integration_row(-1.0, gl.nodes[j], out.forward[j]);
        }
        return out;
    }();
    return m;
}

// log( hw * Σ row_i exp(v_i - vmax) ) + vmax
double log_weighted(const double* row, const std::vector<double>& v, double vmax, double hw) {
    if (vmax == kNegInf) return kNegInf;
    double s = 0.0;
    for (int i = 0; i < kPanelNodes; ++i) s += row[i] * std::exp(v[i] - vmax);
    return vmax + log_of_nonneg(hw * s);
}

}  // namespace

void QuadratureSettings::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ModelError("quadrature tolerances must be positive");
    if (max_subdivisions < 16) throw ModelError("max_subdivisions must be at least 16");
    if (tail_horizon < 0.0) throw ModelError("tail_horizon must be nonnegative");
    if (!(divergence_threshold > 0.0)) throw ModelError("divergence_threshold must be positive");
    if (!(moment_horizon > 0.0)) throw ModelError("moment_horizon must be positive");
}

const char* to_string(TailStatus s) {
    switch (s) {
        case TailStatus::Converged: return "converged";
        case TailStatus::Divergent: return "divergent";
        case TailStatus::Truncated: return "truncated";
    }
    return "?";
}

const GaussLegendre& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        gl.nodes[i] = -z;
        gl.nodes[n - 1 - i] = z;
        gl.weights[i] = gl.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return cache.emplace(n, std::move(gl)).first->second;
}

double kronrod15(const ScalarFn& f, double a, double b) { return gk15(f, a, b).value; }

IntegrationResult integrate(const ScalarFn& f, double a, double b, const QuadratureSettings& settings) {
    if (b < a) throw ModelError("integrate: lower limit exceeds upper limit");
    if (a == b) return {0.0, 0.0, 0};
    struct Piece {
        double a, b, value, error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    std::priority_queue<Piece> heap;
    const Gk15 first = gk15(f, a, b);
    heap.push({a, b, first.value, first.error});
    double total = first.value, error = first.error;
    int intervals = 1;
    while (error > std::max(settings.abs_tol, settings.rel_tol * std::fabs(total))) {
        if (intervals >= settings.max_subdivisions)
            throw QuadratureError("subdivision budget exhausted", total, error);
        const Piece p = heap.top();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) break;  // interval at machine resolution
        heap.pop();
        const Gk15 l = gk15(f, p.a, mid), r = gk15(f, mid, p.b);
        heap.push({p.a, mid, l.value, l.error});
        heap.push({mid, p.b, r.value, r.error});
        total += l.value + r.value - p.value;
        error += l.error + r.error - p.error;
        ++intervals;
    }
    // Resum to shed accumulated cancellation in the running totals.
    total = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {total, error, intervals};
}

double integrate_log(const ScalarFn& log_f, double a, double b, const QuadratureSettings& settings) {
    if (a == b) return kNegInf;
    // Pieces are split until log_f varies by at most kMaxRange over their
    // samples; pieces far below the running maximum are dropped.
    constexpr int kSamples = 17;
    constexpr double kMaxRange = 30.0;
    constexpr double kNegligible = 60.0;
    struct Piece {
        double a, b;
        int depth;
    };
    double peak = kNegInf, total = kNegInf;
    QuadratureSettings local = settings;
    local.abs_tol = std::numeric_limits<double>::min();
    std::vector<Piece> stack{{a, b, 0}};
    while (!stack.empty()) {
        const Piece p = stack.back();
        stack.pop_back();
        double pmax = kNegInf, pmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kSamples; ++i) {
            const double v = log_f(p.a + (p.b - p.a) * i / (kSamples - 1));
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
                throw ModelError("log-integrand is not finite");
            pmax = std::max(pmax, v);
            pmin = std::min(pmin, v);
        }
        peak = std::max(peak, pmax);
        if (pmax == kNegInf || pmax < peak - kNegligible) continue;
        const double mid = 0.5 * (p.a + p.b);
        if (pmax - pmin > kMaxRange && p.depth < 64 && mid > p.a && mid < p.b) {
            stack.push_back({mid, p.b, p.depth + 1});
            stack.push_back({p.a, mid, p.depth + 1});
            continue;
        }
        const auto res = integrate([&](double x) { return std::exp(log_f(x) - pmax); }, p.a, p.b, local);
        total = log_add(total, pmax + log_of_nonneg(res.value));
    }
    return total;
}

std::vector<double> base_partition(double a, double b) {
    std::vector<double> pts{a};
    double x = a;
    while (x < b) {
        const double step = std::max(0.5, 0.25 * std::fabs(x));
        x = (x + step >= b - 1e-12 * std::max(1.0, std::fabs(b))) ? b : x + step;
        pts.push_back(x);
    }
    return pts;
}

CumulativeIntegral::CumulativeIntegral(RadialFunction integrand, double base, double horizon,
                                       const QuadratureSettings& settings)
    : integrand_(std::move(integrand)) {
    if (!(horizon > base)) throw ModelError("cumulative integral needs base < horizon");
    const RadialFunction& g = integrand_;
    const ScalarFn fn = [&g](double x) { return g(x); };
    nodes_.push_back(base);
    values_.push_back(0.0);
    int budget = settings.max_subdivisions;
    const auto& gl = gauss_legendre(kPanelNodes);
    const auto& sm = spectral_matrices();

    struct Pending {
        double a, b;
        Gk15 est;
        int depth;
    };
    const auto pts = base_partition(base, horizon);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        std::vector<Pending> stack{{pts[k], pts[k + 1], gk15(fn, pts[k], pts[k + 1]), 0}};
        while (!stack.empty()) {
            Pending p = stack.back();
            stack.pop_back();
            const double mid = 0.5 * (p.a + p.b);
            const bool ok = p.est.error <= std::max(settings.abs_tol, settings.rel_tol * p.est.abs_value);
            if (ok || p.depth > 50 || !(mid > p.a && mid < p.b)) {
                const double c = 0.5 * (p.a + p.b), h = 0.5 * (p.b - p.a);
                double gv[kPanelNodes];
                for (int i = 0; i < kPanelNodes; ++i) gv[i] = g(c + h * gl.nodes[i]);
                for (int j = 0; j < kPanelNodes; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < kPanelNodes; ++i) s += sm.forward[j][i] * gv[i];
                    interior_.push_back(values_.back() + h * s);
                }
                nodes_.push_back(p.b);
                values_.push_back(values_.back() + p.est.value);
                error_ += p.est.error;
                continue;
            }
            if (--budget <= 0)
                throw QuadratureError("cumulative integral: subdivision budget exhausted", values_.back(), error_);
            // Right half first so the left half is processed next (nodes stay sorted).
            stack.push_back({mid, p.b, gk15(fn, mid, p.b), p.depth + 1});
            stack.push_back({p.a, mid, gk15(fn, p.a, mid), p.depth + 1});
        }
    }
}

double CumulativeIntegral::operator()(double r) const {
    if (r < nodes_.front() || r > nodes_.back()) {
        std::ostringstream os;
        os << "cumulative integral queried at r = " << r << " outside [" << nodes_.front() << ", "
           << nodes_.back() << "]";
        throw ModelError(os.str());
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    const auto i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    if (nodes_[i] == r) return values_[i];
    const double x = (2.0 * r - nodes_[i] - nodes_[i + 1]) / (nodes_[i + 1] - nodes_[i]);
    double basis[kPanelNodes];
    lagrange_basis(x, basis);
    double v = 0.0;
    for (int k = 0; k < kPanelNodes; ++k) v += basis[k] * interior_[i * kPanelNodes + k];
    return v;
}

CumulativeC cumulative_C(const RadialFunction& gamma, double r0, double horizon,
                         const QuadratureSettings& settings) {
    return CumulativeIntegral(gamma, r0, horizon, settings);
}

TailResult tail_integral(const ScalarFn& g, double r, const QuadratureSettings& settings, double horizon) {
    const double h = horizon > 0.0 ? horizon : settings.tail_horizon;
    if (!(h > r)) throw ModelError("tail_integral: horizon must exceed the lower limit");
    const auto pts = doubling_breakpoints(r, h);
    TailResult out;
    double prev = 0.0, last = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const auto piece = integrate(g, pts[k], pts[k + 1], settings);
        out.value += piece.value;
        out.error += piece.error;
        ++out.panels;
        prev = last;
        last = piece.value;
        if (out.value > settings.divergence_threshold) {
            out.status = TailStatus::Divergent;
            out.last_ratio = prev > 0.0 ? last / prev : std::numeric_limits<double>::infinity();
            return out;
        }
    }
    const auto log_g = [&g](double x) {
        const double v = g(x);
        return v > 0.0 ? std::log(v) : kNegInf;
    };
    const auto c = classify_tail(prev, last, std::max(settings.abs_tol, settings.rel_tol * std::fabs(out.value)),
                                 std::exp(log_slope_remainder(log_g, r, h)));
    out.status = c.status;
    out.last_ratio = c.ratio;
    if (c.status != TailStatus::Divergent) {
        out.remainder = c.remainder;
        out.value += c.remainder;
    }
    return out;
}

LogTailResult tail_integral_log(const ScalarFn& log_g, double r, double horizon,
                                const QuadratureSettings& settings) {
    if (!(horizon > r)) throw ModelError("tail_integral_log: horizon must exceed the lower limit");
    const auto pts = doubling_breakpoints(r, horizon);
    LogTailResult out;
    double log_prev = kNegInf, log_last = kNegInf;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        log_prev = log_last;
        log_last = integrate_log(log_g, pts[k], pts[k + 1], settings);
        out.log_value = log_add(out.log_value, log_last);
        ++out.panels;
    }
    // Classify on masses rescaled by the total so that nothing overflows.
    const double scale = out.log_value;
    if (scale == kNegInf) {
        out.status = TailStatus::Converged;
        return out;
    }
    const double prev = std::exp(log_prev - scale), last = std::exp(log_last - scale);
    const auto c = classify_tail(prev, last, settings.rel_tol,
                                 std::exp(log_slope_remainder(log_g, r, horizon) - scale));
    out.status = c.status;
    out.last_ratio = c.ratio;
    if (c.status != TailStatus::Divergent) {
        out.log_remainder = c.remainder > 0.0 ? scale + std::log(c.remainder) : kNegInf;
        out.log_value = log_add(out.log_value, out.log_remainder);
    }
    return out;
}

NestedIntegral::NestedIntegral(const CumulativeC& C, const RadialFunction& f, const RadialFunction& alpha,
                               double r0, const QuadratureSettings& settings)
    : C_(C), f_(f), alpha_(alpha), r0_(r0), horizon_(C.horizon()), settings_(settings) {
    if (r0 < C.base() || !(r0 < horizon_)) throw ModelError("nested integral: r0 outside the C grid");
    build_panels();
}

void NestedIntegral::build_panels() {
    const auto& gl = gauss_legendre(kPanelNodes);
    const auto psi_at = [this](double s) { return C_(s) + f_.log_value(s) - alpha_.log_value(s); };

    struct Sample {
        std::vector<double> psi, c;
    };
    const auto sample = [&](double a, double b, Sample& out) {
        out.psi.resize(kPanelNodes);
        out.c.resize(kPanelNodes);
        double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
        double pmin = lmin, pmax = -lmin, cmin = lmin, cmax = -lmin;
        for (int i = 0; i < kPanelNodes; ++i) {
            const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
            const double c = C_(s);
            const double lf = f_.log_value(s);
            const double la = alpha_.log_value(s);
            if (!std::isfinite(lf)) throw ModelError("test function must be positive and finite in log space");
            if (!std::isfinite(la)) throw ModelError("alpha must be positive");
            out.c[i] = c;
            out.psi[i] = c + lf - la;
            lmin = std::min(lmin, lf), lmax = std::max(lmax, lf);
            pmin = std::min(pmin, out.psi[i]), pmax = std::max(pmax, out.psi[i]);
            cmin = std::min(cmin, c), cmax = std::max(cmax, c);
        }
        return std::max({lmax - lmin, pmax - pmin, cmax - cmin});
    };

    constexpr double kMaxRange = 4.0;
    const auto pts = base_partition(r0_, horizon_);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        struct Pending {
            double a, b;
            int depth;
        };
        std::vector<Pending> stack{{pts[k], pts[k + 1], 0}};
        while (!stack.empty()) {
            const Pending p = stack.back();
            stack.pop_back();
            Sample smp;
            const double range = sample(p.a, p.b, smp);
            const double mid = 0.5 * (p.a + p.b);
            if (range > kMaxRange && p.depth < 48 && mid > p.a && mid < p.b) {
                if (static_cast<int>(panels_.size() + stack.size()) >= settings_.max_subdivisions)
                    throw QuadratureError("nested integral: panel budget exhausted", 0.0, 0.0);
                stack.push_back({mid, p.b, p.depth + 1});
                stack.push_back({p.a, mid, p.depth + 1});
                continue;
            }
            Panel panel;
            panel.a = p.a;
            panel.b = p.b;
            panel.psi = std::move(smp.psi);
            panel.phi = std::move(smp.c);  // holds C until the backward pass
            panel.psi_max = *std::max_element(panel.psi.begin(), panel.psi.end());
            panels_.push_back(std::move(panel));
        }
    }

    tail_ = tail_integral_log(psi_at, r0_, horizon_, settings_);
    if (tail_.status == TailStatus::Divergent) return;

    const auto& sm = spectral_matrices();
    double log_k_right = tail_.log_remainder;
    for (auto it = panels_.rbegin(); it != panels_.rend(); ++it) {
        Panel& p = *it;
        const double hw = 0.5 * (p.b - p.a);
        p.log_k_b = log_k_right;
        p.log_k.resize(kPanelNodes);
        for (int j = 0; j < kPanelNodes; ++j)
            p.log_k[j] = log_add(log_k_right, log_weighted(sm.backward[j], p.psi, p.psi_max, hw));
        for (int j = 0; j < kPanelNodes; ++j) p.phi[j] = p.log_k[j] - p.phi[j];
        p.phi_max = *std::max_element(p.phi.begin(), p.phi.end());
        log_k_right = log_add(log_k_right, log_weighted(gl.weights.data(), p.psi, p.psi_max, hw));
    }
    double log_g = kNegInf;
    for (Panel& p : panels_) {
        p.log_g_a = log_g;
        log_g = log_add(log_g, log_weighted(gl.weights.data(), p.phi, p.phi_max, 0.5 * (p.b - p.a)));
    }
}

NestedIntegral::PointValues NestedIntegral::at(double t) const {
    if (t < r0_ || t > horizon_) {
        std::ostringstream os;
        os << "nested integral queried at t = " << t << " outside [" << r0_ << ", " << horizon_ << "]";
        throw ModelError(os.str());
    }
    auto it = std::upper_bound(panels_.begin(), panels_.end(), t,
                               [](double x, const Panel& p) { return x < p.a; });
    const Panel& p = *std::prev(it);
    const double hw = 0.5 * (p.b - p.a);
    const double u = std::clamp((2.0 * t - p.a - p.b) / (p.b - p.a), -1.0, 1.0);
    double back[kPanelNodes], fwd[kPanelNodes];
    integration_row(u, 1.0, back);
    integration_row(-1.0, u, fwd);
    PointValues v;
    v.log_k = log_add(p.log_k_b, log_weighted(back, p.psi, p.psi_max, hw));
    v.log_g = log_add(p.log_g_a, log_weighted(fwd, p.phi, p.phi_max, hw));
    v.c = C_(t);
    return v;
}

double NestedIntegral::log_F(double t) const {
    if (tail_.status == TailStatus::Divergent) return std::numeric_limits<double>::infinity();
    if (t == r0_) return kNegInf;
    return at(t).log_g;
}

double NestedIntegral::F(double t) const { return std::exp(log_F(t)); }

double NestedIntegral::ratio(double t) const {
    if (tail_.status == TailStatus::Divergent) return std::numeric_limits<double>::infinity();
    if (t == r0_) return 0.0;
    return std::exp(at(t).log_g - f_.log_value(t));
}

double NestedIntegral::scaled_inner(double t) const {
    if (tail_.status == TailStatus::Divergent) return std::numeric_limits<double>::infinity();
    const auto v = at(t);
    return std::exp(v.log_k - v.c - f_.log_value(t));
}

double nested_F(const CumulativeC& C, const RadialFunction& f, const RadialFunction& alpha, double r0,
                double t, const QuadratureSettings& settings) {
    return NestedIntegral(C, f, alpha, r0, settings).F(t);
}

}  // namespace gapest
