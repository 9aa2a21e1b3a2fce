#include "gapest/radial_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <variant>

namespace gapest {

const char* family_name(Family f) {
    switch (f) {
        case Family::Constant: return "const";
        case Family::Linear: return "linear";
        case Family::Quadratic: return "quadratic";
        case Family::Exp: return "exp";
        case Family::PowR: return "powr";
        case Family::Power1p2: return "power1p2";
        case Family::Log1p2: return "log1p2";
        case Family::Inv1p: return "inv1p";
        case Family::Log1p: return "log1p";
        case Family::Sqrt: return "sqrt";
        case Family::Sin: return "sin";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::Constant, Family::Linear, Family::Quadratic, Family::Exp, Family::PowR,
                     Family::Power1p2, Family::Log1p2, Family::Inv1p, Family::Log1p, Family::Sqrt,
                     Family::Sin}) {
        if (name == family_name(f)) return f;
    }
    throw ModelError("unknown function family '" + name + "'");
}

std::size_t family_arity(Family f) {
    switch (f) {
        case Family::Constant:
        case Family::Log1p2:
        case Family::Log1p:
        case Family::Sqrt:
        case Family::Sin: return 1;
        case Family::Quadratic: return 3;
        default: return 2;
    }
}

double central_difference(const std::function<double(double)>& f, double r) {
    const double h = std::max(1e-6, 1e-6 * std::fabs(r));
    return (f(r + h) - f(r - h)) / (2.0 * h);
}

namespace {

struct FamilySource {
    Family family;
    std::vector<double> p;
    std::pair<Family, std::vector<double>> id;

    double value(double r) const {
        switch (family) {
            case Family::Constant: return p[0];
            case Family::Linear: return p[0] + p[1] * r;
            case Family::Quadratic: return p[0] + r * (p[1] + p[2] * r);
            case Family::Exp: return p[0] * std::exp(p[1] * r);
            case Family::PowR: return p[0] * std::pow(r, p[1]);
            case Family::Power1p2: return p[0] * std::pow(1.0 + r * r, p[1]);
            case Family::Log1p2: return p[0] * std::log1p(r * r);
            case Family::Inv1p: return p[0] * std::pow(1.0 + r, -p[1]);
            case Family::Log1p: return p[0] * std::log1p(r);
            case Family::Sqrt: return p[0] * std::sqrt(r);
            case Family::Sin: return p[0] * std::sin(r);
        }
        return 0.0;
    }

    double derivative(double r) const {
        switch (family) {
            case Family::Constant: return 0.0;
            case Family::Linear: return p[1];
            case Family::Quadratic: return p[1] + 2.0 * p[2] * r;
            case Family::Exp: return p[0] * p[1] * std::exp(p[1] * r);
            case Family::PowR: return p[1] == 0.0 ? 0.0 : p[0] * p[1] * std::pow(r, p[1] - 1.0);
            case Family::Power1p2: return p[0] * p[1] * 2.0 * r * std::pow(1.0 + r * r, p[1] - 1.0);
            case Family::Log1p2: return p[0] * 2.0 * r / (1.0 + r * r);
            case Family::Inv1p: return -p[0] * p[1] * std::pow(1.0 + r, -p[1] - 1.0);
            case Family::Log1p: return p[0] / (1.0 + r);
            case Family::Sqrt: return 0.5 * p[0] / std::sqrt(r);
            case Family::Sin: return p[0] * std::cos(r);
        }
        return 0.0;
    }

    double log_value(double r) const {
        const double lk = p[0] > 0.0 ? std::log(p[0]) : std::log(value(r));
        if (!(p[0] > 0.0)) return lk;
        switch (family) {
            case Family::Exp: return lk + p[1] * r;
            case Family::PowR: return lk + p[1] * std::log(r);
            case Family::Power1p2: return lk + p[1] * std::log1p(r * r);
            case Family::Inv1p: return lk - p[1] * std::log1p(r);
            case Family::Sqrt: return lk + 0.5 * std::log(r);
            default: return std::log(value(r));
        }
    }
};

struct ExpressionSource {
    expr::Expression e;
};

struct TableSource {
    std::vector<double> r;
    std::vector<double> v;

    double value(double x) const {
        auto it = std::lower_bound(r.begin(), r.end(), x);
        const auto i = static_cast<std::size_t>(it - r.begin());
        if (i < r.size() && r[i] == x) return v[i];
        const double t = (x - r[i - 1]) / (r[i] - r[i - 1]);
        return v[i - 1] + t * (v[i] - v[i - 1]);
    }
};

struct CustomSource {
    std::string description;
    RadialFunction::Fn value;
    RadialFunction::Fn derivative;
    RadialFunction::Fn log_value;
};

}  // namespace

struct RadialFunction::Impl {
    std::variant<ExpressionSource, FamilySource, TableSource, CustomSource> source;
    double domain_start = 0.0;
    double domain_end = std::numeric_limits<double>::infinity();
    Smoothness smoothness = Smoothness::C2;
};

RadialFunction::RadialFunction() : RadialFunction(constant(0.0)) {}

RadialFunction::RadialFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

RadialFunction RadialFunction::from_expression(expr::Expression e, double domain_start, Smoothness s) {
    auto impl = std::make_shared<Impl>();
    impl->source = ExpressionSource{std::move(e)};
    impl->domain_start = domain_start;
    impl->smoothness = s;
    return RadialFunction(std::move(impl));
}

RadialFunction RadialFunction::from_text(const std::string& text, double domain_start) {
    return from_expression(expr::parse(text), domain_start);
}

RadialFunction RadialFunction::family(Family f, std::vector<double> params, double domain_start) {
    if (params.size() != family_arity(f))
        throw ModelError(std::string("family '") + family_name(f) + "' expects " +
                         std::to_string(family_arity(f)) + " parameters");
    auto impl = std::make_shared<Impl>();
    impl->source = FamilySource{f, params, {f, params}};
    impl->domain_start = domain_start;
    return RadialFunction(std::move(impl));
}

RadialFunction RadialFunction::constant(double c) { return family(Family::Constant, {c}); }

RadialFunction RadialFunction::table(std::vector<double> r, std::vector<double> values, Smoothness hint) {
    if (r.size() != values.size() || r.size() < 2)
        throw ModelError("table needs at least two (r, value) pairs");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1])) throw ModelError("table abscissae must be strictly increasing");
    if (r.front() < 0.0) throw ModelError("table abscissae must be nonnegative");
    auto impl = std::make_shared<Impl>();
    impl->domain_start = r.front();
    impl->domain_end = r.back();
    impl->smoothness = hint;
    impl->source = TableSource{std::move(r), std::move(values)};
    return RadialFunction(std::move(impl));
}

RadialFunction RadialFunction::custom(std::string description, Fn value, Fn derivative, Fn log_value,
                                      double domain_start, Smoothness s, double domain_end) {
    auto impl = std::make_shared<Impl>();
    impl->source = CustomSource{std::move(description), std::move(value), std::move(derivative),
                                std::move(log_value)};
    impl->domain_start = domain_start;
    impl->domain_end = domain_end;
    impl->smoothness = s;
    return RadialFunction(std::move(impl));
}

void RadialFunction::check_domain(double r) const {
    if (r < impl_->domain_start || r > impl_->domain_end) {
        std::ostringstream os;
        os << "evaluation at r = " << r << " outside domain [" << impl_->domain_start << ", "
           << impl_->domain_end << "] of " << describe();
        throw ModelError(os.str());
    }
}

double RadialFunction::operator()(double r) const {
    check_domain(r);
    return std::visit(
        [r](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ExpressionSource>) return expr::evaluate(s.e, r);
            else if constexpr (std::is_same_v<T, CustomSource>) return s.value(r);
            else return s.value(r);
        },
        impl_->source);
}

double RadialFunction::derivative(double r) const {
    check_domain(r);
    if (impl_->smoothness == Smoothness::Continuous)
        throw ModelError("drift requires C¹ coefficients (" + describe() + " is only continuous)");
    if (const auto* f = std::get_if<FamilySource>(&impl_->source)) return f->derivative(r);
    if (const auto* c = std::get_if<CustomSource>(&impl_->source); c && c->derivative)
        return c->derivative(r);
    if (const auto* e = std::get_if<ExpressionSource>(&impl_->source)) {
        const double d = expr::evaluate_derivative(e->e.root(), r);
        if (std::isfinite(d)) return d;
    }
    // One-sided near the lower domain boundary.
    const double h = std::max(1e-6, 1e-6 * std::fabs(r));
    const RadialFunction& self = *this;
    if (r - h < impl_->domain_start) return (self(r + h) - self(r)) / h;
    return central_difference([&self](double x) { return self(x); }, r);
}

double RadialFunction::log_value(double r) const {
    check_domain(r);
    return std::visit(
        [r](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ExpressionSource>) return expr::evaluate_log(s.e.root(), r);
            else if constexpr (std::is_same_v<T, FamilySource>) return s.log_value(r);
            else if constexpr (std::is_same_v<T, CustomSource>)
                return s.log_value ? s.log_value(r) : std::log(s.value(r));
            else return std::log(s.value(r));
        },
        impl_->source);
}

double RadialFunction::domain_start() const { return impl_->domain_start; }
double RadialFunction::domain_end() const { return impl_->domain_end; }
Smoothness RadialFunction::smoothness() const { return impl_->smoothness; }

std::string RadialFunction::describe() const {
    const Smoothness smooth = impl_->smoothness;
    return std::visit(
        [smooth](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ExpressionSource>) return "\"" + expr::unparse(s.e) + "\"";
            else if constexpr (std::is_same_v<T, FamilySource>) {
                std::ostringstream os;
                os.precision(17);
                os << '@' << family_name(s.family) << '(';
                for (std::size_t i = 0; i < s.p.size(); ++i) os << (i ? ", " : "") << s.p[i];
                os << ')';
                return os.str();
            } else if constexpr (std::is_same_v<T, TableSource>) {
                // FNV-1a over the node data so that equal descriptions mean equal tables.
                std::uint64_t h = 1469598103934665603ull;
                for (const auto* vec : {&s.r, &s.v}) {
                    for (double x : *vec) {
                        unsigned char bytes[sizeof(double)];
                        std::memcpy(bytes, &x, sizeof(double));
                        for (unsigned char b : bytes) h = (h ^ b) * 1099511628211ull;
                    }
                }
                std::ostringstream os;
                os << "table[" << s.r.size() << " nodes, " << std::hex << h
                   << (smooth == Smoothness::Continuous ? "" : smooth == Smoothness::C1 ? ", c1" : ", c2") << "]";
                return os.str();
            } else {
                return s.description;
            }
        },
        impl_->source);
}

bool RadialFunction::is_expression() const {
    return std::holds_alternative<ExpressionSource>(impl_->source);
}
bool RadialFunction::is_family() const { return std::holds_alternative<FamilySource>(impl_->source); }
bool RadialFunction::is_table() const { return std::holds_alternative<TableSource>(impl_->source); }

const expr::Expression* RadialFunction::expression() const {
    const auto* s = std::get_if<ExpressionSource>(&impl_->source);
    return s ? &s->e : nullptr;
}

const std::pair<Family, std::vector<double>>* RadialFunction::family_source() const {
    const auto* s = std::get_if<FamilySource>(&impl_->source);
    return s ? &s->id : nullptr;
}

bool RadialFunction::is_constant(double c) const {
    if (const auto* f = std::get_if<FamilySource>(&impl_->source)) {
        if (f->family == Family::Constant) return f->p[0] == c;
        return false;
    }
    if (const auto* e = std::get_if<ExpressionSource>(&impl_->source)) {
        const auto& root = e->e.root();
        return (root.kind == expr::NodeKind::Literal || root.kind == expr::NodeKind::Constant) &&
               root.value == c;
    }
    return false;
}

}  // namespace gapest
