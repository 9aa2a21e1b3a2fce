#pragma once

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapest/radial_function.hpp"

namespace gapest {

struct QuadratureSettings {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_subdivisions = 1 << 16;
    /// Upper end of improper integrals; 0 means "use the problem's r_max".
    double tail_horizon = 0.0;
    double divergence_threshold = 1e12;
    /// Horizon for exponential-moment finiteness tests.
    double moment_horizon = 1e4;

    void validate() const;
    /// tail_horizon if set, otherwise `fallback`.
    double horizon_or(double fallback) const { return tail_horizon > 0.0 ? tail_horizon : fallback; }
};

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

/// Subdivision budget exhausted; carries the best estimate so far.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best_estimate, double error)
        : std::runtime_error(what), best_estimate_(best_estimate), error_(error) {}
    double best_estimate() const noexcept { return best_estimate_; }
    double error() const noexcept { return error_; }

private:
    double best_estimate_;
    double error_;
};

using ScalarFn = std::function<double(double)>;

/// Globally adaptive Gauss–Kronrod (7, 15) quadrature on [a, b].
IntegrationResult integrate(const ScalarFn& f, double a, double b, const QuadratureSettings& settings = {});

/// log ∫_a^b exp(log_f); overflow-free for integrands with huge dynamic range.
double integrate_log(const ScalarFn& log_f, double a, double b, const QuadratureSettings& settings = {});

/// Fixed 15-point Kronrod estimate of ∫_a^b f.
double kronrod15(const ScalarFn& f, double a, double b);

/// Breakpoints a = x_0 < ... < x_n = b with x_{k+1} - x_k <= max(0.5, x_k / 4).
std::vector<double> base_partition(double a, double b);

/// n-point Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int n);

/// r ↦ ∫_base^r g(s) ds for r in [base, horizon], stored as accumulated
/// values on an adaptive grid plus spectral values at 16 Gauss–Legendre nodes
/// per cell, so a query is one barycentric interpolation. Immutable after
/// construction.
class CumulativeIntegral {
public:
    CumulativeIntegral(RadialFunction integrand, double base, double horizon,
                       const QuadratureSettings& settings = {});

    double operator()(double r) const;
    double base() const { return nodes_.front(); }
    double horizon() const { return nodes_.back(); }
    double error_estimate() const { return error_; }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> values() const { return values_; }
    const RadialFunction& integrand() const { return integrand_; }

private:
    RadialFunction integrand_;
    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<double> interior_;  // 16 per cell
    double error_ = 0.0;
};

/// C(r) = ∫_{r0}^r γ(s) ds.
using CumulativeC = CumulativeIntegral;

CumulativeC cumulative_C(const RadialFunction& gamma, double r0, double horizon,
                         const QuadratureSettings& settings = {});

enum class TailStatus { Converged, Divergent, Truncated };

const char* to_string(TailStatus s);

struct TailResult {
    TailStatus status = TailStatus::Converged;
    double value = 0.0;       ///< integral over [r, horizon] plus extrapolated remainder
    double remainder = 0.0;   ///< extrapolated contribution beyond the horizon
    double last_ratio = 0.0;  ///< mass ratio of the last two doubling panels
    double error = 0.0;
    int panels = 0;
};

/// ∫_r^∞ g over doubling panels ending at the horizon. The ratio of the last
/// two panel masses decides Converged (geometric decay, remainder
/// extrapolated), Divergent (no decay, or the running value exceeds the
/// divergence threshold) or Truncated (undecided at this horizon).
TailResult tail_integral(const ScalarFn& g, double r, const QuadratureSettings& settings,
                         double horizon = 0.0);

struct LogTailResult {
    TailStatus status = TailStatus::Converged;
    double log_value = -std::numeric_limits<double>::infinity();
    double log_remainder = -std::numeric_limits<double>::infinity();
    double last_ratio = 0.0;
    int panels = 0;
};

/// tail_integral for exp(log_g), in log space. No divergence threshold is
/// applied since magnitudes are unbounded by construction.
LogTailResult tail_integral_log(const ScalarFn& log_g, double r, double horizon,
                                const QuadratureSettings& settings);

/// The nested double integral
///
///   F(t) = ∫_{r0}^t exp[-C(r)] dr ∫_r^∞ exp[C(s)] f(s)/α(s) ds
///
/// held in log space on a panel grid over [r0, horizon]. The inner integral is
/// computed once per panel grid by backward spectral integration and
/// interpolated at arbitrary points, so queries cost O(log #panels).
class NestedIntegral {
public:
    NestedIntegral(const CumulativeC& C, const RadialFunction& f, const RadialFunction& alpha,
                   double r0, const QuadratureSettings& settings = {});

    TailStatus inner_status() const { return tail_.status; }
    const LogTailResult& inner_tail() const { return tail_; }
    double r0() const { return r0_; }
    double horizon() const { return horizon_; }
    std::size_t panel_count() const { return panels_.size(); }

    /// F(t); +inf when the inner tail diverges.
    double F(double t) const;
    double log_F(double t) const;
    /// F(t) / f(t), overflow-free.
    double ratio(double t) const;
    /// exp[-C(t)] ∫_t^∞ exp[C(s)] f(s)/α(s) ds / f(t).
    double scaled_inner(double t) const;

private:
    struct Panel {
        double a = 0.0, b = 0.0;
        std::vector<double> psi;      // C + log f - log α at the nodes
        std::vector<double> log_k;    // log ∫_s^∞ exp(psi) at the nodes
        std::vector<double> phi;      // log_k - C
        double psi_max = 0.0, phi_max = 0.0;
        double log_k_b = 0.0;         // at b
        double log_g_a = 0.0;         // log ∫_{r0}^a exp(phi)
    };
    struct PointValues {
        double log_k;
        double log_g;
        double c;
    };

    void build_panels();
    PointValues at(double t) const;

    CumulativeC C_;
    RadialFunction f_;
    RadialFunction alpha_;
    double r0_;
    double horizon_;
    QuadratureSettings settings_;
    LogTailResult tail_;
    std::vector<Panel> panels_;
};

/// F(t) of the nested integral (convenience wrapper around NestedIntegral).
double nested_F(const CumulativeC& C, const RadialFunction& f, const RadialFunction& alpha, double r0,
                double t, const QuadratureSettings& settings = {});

}  // namespace gapest
