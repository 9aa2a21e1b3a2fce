#include "gapest/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gapest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

double log_half_mass(const RadialFunction& mu, double a, double b) {
    if (!(b > a)) return kNegInf;
    const auto& gl = gauss_legendre(8);
    double lv[8];
    double shift = kNegInf;
    for (int k = 0; k < 8; ++k) {
        lv[k] = mu.log_value(0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[k]);
        if (std::isnan(lv[k]) || lv[k] == std::numeric_limits<double>::infinity())
            throw ModelError("mu density is not finite on the oracle grid");
        shift = std::max(shift, lv[k]);
    }
    if (shift == kNegInf) return kNegInf;
    double s = 0.0;
    for (int k = 0; k < 8; ++k) s += gl.weights[k] * std::exp(lv[k] - shift);
    return shift + std::log(0.5 * (b - a) * s);
}

// Assemble the mass-scaled matrix for nodes [first, last] with the given log
// masses; `dirichlet_face` adds the face conductance below `first` to the diagonal.
Tridiagonal assemble(const DiscreteOperator& op, std::size_t first, std::size_t last,
                     const std::vector<double>& log_m, bool dirichlet_face) {
    const std::size_t n = last - first + 1;
    Tridiagonal t;
    t.diag.assign(n, 0.0);
    t.off.assign(n > 0 ? n - 1 : 0, 0.0);
    t.sqrt_mass.resize(n);
    for (std::size_t j = 0; j < n; ++j) t.sqrt_mass[j] = std::exp(0.5 * log_m[j]);
    t.right_rate.assign(n, 0.0);
    t.left_rate.assign(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double lk = op.log_conductance[first + j];
        t.right_rate[j] = std::exp(lk - log_m[j]);
        t.left_rate[j + 1] = std::exp(lk - log_m[j + 1]);
        t.off[j] = -std::exp(lk - 0.5 * (log_m[j] + log_m[j + 1]));
    }
    if (dirichlet_face) t.left_rate[0] = std::exp(op.log_conductance[first - 1] - log_m[0]);
    for (std::size_t j = 0; j < n; ++j) t.diag[j] = t.right_rate[j] + t.left_rate[j];
    return t;
}

}  // namespace

double DiscreteOperator::log_mass(std::size_t i) const { return log_add(log_mass_left[i], log_mass_right[i]); }

DiscreteOperator discretize(const RadializedCoefficients& coeffs, double r_max, int n, GridKind grid) {
    if (n < 32) throw ModelError("oracle grid needs n >= 32");
    const RadialFunction& mu = coeffs.mu_density;
    const RadialFunction& A = coeffs.alpha;
    const double start = std::max(mu.domain_start(), A.domain_start());
    if (!(r_max > start)) throw ModelError("oracle R_max must exceed the domain start");

    DiscreteOperator op;
    op.nodes.resize(n + 1);
    if (grid == GridKind::Uniform) {
        for (int i = 0; i <= n; ++i) op.nodes[i] = start + (r_max - start) * i / n;
    } else {
        // Cell widths grow geometrically with last/first = 100.
        const double q = std::pow(100.0, 1.0 / (n - 1));
        const double denom = std::expm1(n * std::log(q));
        for (int i = 0; i <= n; ++i) op.nodes[i] = start + (r_max - start) * std::expm1(i * std::log(q)) / denom;
    }
    op.nodes[n] = r_max;

    op.log_mass_left.assign(n + 1, kNegInf);
    op.log_mass_right.assign(n + 1, kNegInf);
    op.log_conductance.resize(n);
    for (int i = 0; i < n; ++i) {
        const double a = op.nodes[i], b = op.nodes[i + 1], f = 0.5 * (a + b);
        op.log_mass_right[i] = log_half_mass(mu, a, f);
        op.log_mass_left[i + 1] = log_half_mass(mu, f, b);
        const double af = A(f);
        if (!(af > 0.0) || !std::isfinite(af)) {
            std::ostringstream os;
            os << "alpha(" << f << ") = " << af << " is not positive on the oracle grid";
            throw ModelError(os.str());
        }
        op.log_conductance[i] = std::log(af) + mu.log_value(f) - std::log(b - a);
    }
    double shift = kNegInf;
    for (int i = 0; i <= n; ++i) {
        const double lm = op.log_mass(i);
        if (lm == kNegInf) throw ModelError("oracle cell mass vanishes; refine the grid or check mu density");
        shift = std::max(shift, lm);
    }
    for (int i = 0; i <= n; ++i) {
        op.log_mass_left[i] -= shift;
        op.log_mass_right[i] -= shift;
    }
    for (auto& c : op.log_conductance) {
        c -= shift;
        if (!std::isfinite(c)) throw ModelError("oracle conductance is not finite");
    }
    return op;
}

Tridiagonal neumann_matrix(const DiscreteOperator& op) {
    std::vector<double> lm(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) lm[i] = op.log_mass(i);
    return assemble(op, 0, op.size() - 1, lm, false);
}

Tridiagonal exterior_matrix(const DiscreteOperator& op, double r) {
    const auto it = std::upper_bound(op.nodes.begin(), op.nodes.end(), r);
    if (it == op.nodes.end() || r >= op.nodes.back()) throw ModelError("lambda_c radius must be below R_max");
    if (it == op.nodes.begin()) throw ModelError("lambda_c radius lies below the grid");
    const auto first = static_cast<std::size_t>(it - op.nodes.begin());
    std::vector<double> lm;
    for (std::size_t i = first; i < op.size(); ++i) lm.push_back(op.log_mass(i));
    return assemble(op, first, op.size() - 1, lm, true);
}

Tridiagonal ball_matrix(const DiscreteOperator& op, double R) {
    const auto it = std::upper_bound(op.nodes.begin(), op.nodes.end(), R * (1.0 + 1e-12));
    const auto count = static_cast<std::size_t>(it - op.nodes.begin());
    if (count < 10) throw ModelError("ball eigenvalue needs at least 8 interior nodes");
    const std::size_t last = count - 1;
    std::vector<double> lm;
    for (std::size_t i = 0; i < last; ++i) lm.push_back(op.log_mass(i));
    lm.push_back(op.log_mass_left[last]);
    return assemble(op, 0, last, lm, false);
}

std::size_t sturm_count(const Tridiagonal& t, double x) {
    constexpr double kTiny = 1e-300;
    std::size_t count = 0;
    if (t.right_rate.size() == t.size() && t.left_rate.size() == t.size()) {
        // pivot = right_rate + e with e = left_rate · e_prev / pivot_prev - x
        double e = t.left_rate[0] - x;
        for (std::size_t i = 0;; ++i) {
            double d = t.right_rate[i] + e;
            if (d == 0.0) d = -kTiny;
            if (d < 0.0) ++count;
            if (i + 1 == t.size()) break;
            e = t.left_rate[i + 1] * (e / d) - x;
        }
        return count;
    }
    double d = t.diag[0] - x;
    for (std::size_t i = 0;; ++i) {
        if (d == 0.0) d = -kTiny;
        if (d < 0.0) ++count;
        if (i + 1 == t.size()) break;
        d = t.diag[i + 1] - x - t.off[i] * t.off[i] / d;
    }
    return count;
}

double eigenvalue(const Tridiagonal& t, std::size_t k) {
    if (k >= t.size()) throw ModelError("eigenvalue index exceeds the matrix size");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = (i > 0 ? std::fabs(t.off[i - 1]) : 0.0) + (i + 1 < t.size() ? std::fabs(t.off[i]) : 0.0);
        lo = std::min(lo, t.diag[i] - r);
        hi = std::max(hi, t.diag[i] + r);
    }
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi) || hi - lo <= 1e-13 * std::max(std::fabs(lo), std::fabs(hi))) break;
        if (sturm_count(t, mid) > k) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> eigenvector(const Tridiagonal& t, double lambda) {
    const std::size_t n = t.size();
    const double tiny = 1e-14 * std::max(1.0, std::fabs(lambda));
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), c(n), d(n);
    for (int iter = 0; iter < 4; ++iter) {
        // Thomas solve of (T - λ) y = x with zero pivots nudged.
        // Pivots from the rates when available, as in sturm_count.
        const bool rates = t.right_rate.size() == n && t.left_rate.size() == n;
        double e = rates ? t.left_rate[0] - lambda : 0.0;
        d[0] = rates ? t.right_rate[0] + e : t.diag[0] - lambda;
        if (std::fabs(d[0]) < tiny) {
            d[0] = tiny;
            e = tiny - (rates ? t.right_rate[0] : 0.0);
        }
        std::vector<double> y(x);
        for (std::size_t i = 1; i < n; ++i) {
            c[i - 1] = t.off[i - 1] / d[i - 1];
            if (rates) {
                e = t.left_rate[i] * (e / d[i - 1]) - lambda;
                d[i] = t.right_rate[i] + e;
            } else {
                d[i] = t.diag[i] - lambda - c[i - 1] * t.off[i - 1];
            }
            if (std::fabs(d[i]) < tiny) {
                d[i] = tiny;
                e = tiny - (rates ? t.right_rate[i] : 0.0);
            }
            y[i] -= c[i - 1] * y[i - 1];
        }
        y[n - 1] /= d[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) y[i] = (y[i] - t.off[i] * y[i + 1]) / d[i];
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    }
    return x;
}

double rayleigh_quotient(const Tridiagonal& t, const std::vector<double>& v) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double tv = t.diag[i] * v[i];
        if (i > 0) tv += t.off[i - 1] * v[i - 1];
        if (i + 1 < t.size()) tv += t.off[i] * v[i + 1];
        num += v[i] * tv;
        den += v[i] * v[i];
    }
    return num / den;
}

double lambda1_discrete(const DiscreteOperator& op) { return eigenvalue(neumann_matrix(op), 1); }

double lambda_c_discrete(const DiscreteOperator& op, double r) { return eigenvalue(exterior_matrix(op, r), 0); }

double lambda_R_discrete(const DiscreteOperator& op, double R) { return eigenvalue(ball_matrix(op, R), 1); }

double mu_ball_discrete(const DiscreteOperator& op, double r) {
    double inside = kNegInf, total = kNegInf;
    for (std::size_t i = 0; i < op.size(); ++i) {
        const double lm = op.log_mass(i);
        total = log_add(total, lm);
        if (op.nodes[i] <= r) inside = log_add(inside, lm);
    }
    return std::exp(inside - total);
}

DoublingCheck doubling_check(const RadializedCoefficients& coeffs, double r_max, int n, GridKind grid) {
    DoublingCheck out;
    out.lambda1 = lambda1_discrete(discretize(coeffs, r_max, n, grid));
    out.lambda1_doubled = lambda1_discrete(discretize(coeffs, 2.0 * r_max, 2 * n, grid));
    out.drift = std::fabs(out.lambda1_doubled - out.lambda1) / std::fabs(out.lambda1_doubled);
    out.passed = out.drift < 0.01;
    return out;
}

}  // namespace gapest
