#include "gapest/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace gapest::expr {

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

Expression::Expression(NodePtr root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

double Expression::operator()(double r) const { return evaluate(*root_, r); }

const char* function_name(Function f) {
    switch (f) {
        case Function::Exp: return "exp";
        case Function::Log: return "log";
        case Function::Sqrt: return "sqrt";
        case Function::Abs: return "abs";
        case Function::Min: return "min";
        case Function::Max: return "max";
        case Function::Pow: return "pow";
    }
    return "?";
}

namespace {

int arity(Function f) {
    switch (f) {
        case Function::Min:
        case Function::Max:
        case Function::Pow: return 2;
        default: return 1;
    }
}

NodePtr make_binary(NodeKind kind, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->children = {std::move(lhs), std::move(rhs)};
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse_all() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        NodePtr n = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
        return n;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            skip_ws();
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept('+')) lhs = make_binary(NodeKind::Add, lhs, parse_product());
            else if (accept('-')) lhs = make_binary(NodeKind::Sub, lhs, parse_product());
            else return lhs;
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = make_binary(NodeKind::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = make_binary(NodeKind::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Neg;
            n->children = {parse_unary()};
            return n;
        }
        return parse_power();
    }

    // ^ binds tighter than unary minus and is right-associative; its exponent
    // may carry a sign (2^-r).
    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_binary(NodeKind::Pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError("malformed number", start);
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // "2e" is 2 followed by the constant e
        }
        double v = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Literal;
        n->value = v;
        return n;
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string id(text_.substr(start, pos_ - start));
        auto n = std::make_shared<Node>();
        if (id == "r") {
            n->kind = NodeKind::Variable;
            return n;
        }
        if (id == "pi" || id == "e") {
            n->kind = NodeKind::Constant;
            n->name = id;
            n->value = id == "pi" ? std::numbers::pi : std::numbers::e;
            return n;
        }
        static constexpr std::array<std::pair<const char*, Function>, 7> table{{
            {"exp", Function::Exp}, {"log", Function::Log}, {"sqrt", Function::Sqrt},
            {"abs", Function::Abs}, {"min", Function::Min}, {"max", Function::Max},
            {"pow", Function::Pow},
        }};
        for (const auto& [fname, f] : table) {
            if (id != fname) continue;
            n->kind = NodeKind::Call;
            n->function = f;
            expect('(');
            n->children.push_back(parse_sum());
            for (int i = 1; i < arity(f); ++i) {
                expect(',');
                n->children.push_back(parse_sum());
            }
            expect(')');
            return n;
        }
        throw ParseError("unknown identifier '" + id + "'", start);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

double checked_pow(double base, double exponent) {
    const double v = std::pow(base, exponent);
    if (std::isnan(v)) throw EvalError("pow domain error");
    if (base == 0.0 && exponent < 0.0) throw EvalError("division by zero in pow");
    return v;
}

double checked_log(double x) {
    if (!(x > 0.0)) throw EvalError("log of nonpositive value");
    return std::log(x);
}

// Signed logarithm: value = sign * exp(mag).
struct SignedLog {
    int sign = 0;
    double mag = -std::numeric_limits<double>::infinity();
};

SignedLog from_value(double v) {
    if (v == 0.0) return {};
    return {v > 0.0 ? 1 : -1, std::log(std::fabs(v))};
}

SignedLog add_signed(SignedLog a, SignedLog b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.mag < b.mag) std::swap(a, b);
    const double d = b.mag - a.mag;
    if (a.sign == b.sign) return {a.sign, a.mag + std::log1p(std::exp(d))};
    if (d == 0.0) return {};
    return {a.sign, a.mag + std::log1p(-std::exp(d))};
}

SignedLog eval_signed(const Node& n, double r) {
    switch (n.kind) {
        case NodeKind::Literal:
        case NodeKind::Constant: return from_value(n.value);
        case NodeKind::Variable: return from_value(r);
        case NodeKind::Neg: {
            SignedLog s = eval_signed(*n.children[0], r);
            s.sign = -s.sign;
            return s;
        }
        case NodeKind::Add:
            return add_signed(eval_signed(*n.children[0], r), eval_signed(*n.children[1], r));
        case NodeKind::Sub: {
            SignedLog b = eval_signed(*n.children[1], r);
            b.sign = -b.sign;
            return add_signed(eval_signed(*n.children[0], r), b);
        }
        case NodeKind::Mul: {
            const SignedLog a = eval_signed(*n.children[0], r);
            const SignedLog b = eval_signed(*n.children[1], r);
            if (a.sign == 0 || b.sign == 0) return {};
            return {a.sign * b.sign, a.mag + b.mag};
        }
        case NodeKind::Div: {
            const SignedLog a = eval_signed(*n.children[0], r);
            const SignedLog b = eval_signed(*n.children[1], r);
            if (b.sign == 0) throw EvalError("division by zero");
            if (a.sign == 0) return {};
            return {a.sign * b.sign, a.mag - b.mag};
        }
        case NodeKind::Pow: {
            const SignedLog base = eval_signed(*n.children[0], r);
            if (base.sign > 0) {
                const double p = evaluate(*n.children[1], r);
                return {1, p * base.mag};
            }
            return from_value(evaluate(n, r));
        }
        case NodeKind::Call:
            switch (n.function) {
                case Function::Exp: return {1, evaluate(*n.children[0], r)};
                case Function::Sqrt: {
                    const SignedLog a = eval_signed(*n.children[0], r);
                    if (a.sign < 0) throw EvalError("sqrt of negative value");
                    if (a.sign == 0) return {};
                    return {1, 0.5 * a.mag};
                }
                case Function::Abs: {
                    SignedLog a = eval_signed(*n.children[0], r);
                    if (a.sign != 0) a.sign = 1;
                    return a;
                }
                case Function::Pow: {
                    const SignedLog base = eval_signed(*n.children[0], r);
                    if (base.sign > 0) return {1, evaluate(*n.children[1], r) * base.mag};
                    return from_value(evaluate(n, r));
                }
                case Function::Log: {
                    const SignedLog a = eval_signed(*n.children[0], r);
                    if (a.sign <= 0) throw EvalError("log of nonpositive value");
                    return from_value(a.mag);
                }
                default: return from_value(evaluate(n, r));
            }
    }
    return from_value(evaluate(n, r));
}

enum Precedence { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return kSum;
        case NodeKind::Mul:
        case NodeKind::Div: return kProduct;
        case NodeKind::Neg: return kUnary;
        case NodeKind::Pow: return kPower;
        default: return kAtom;
    }
}

void unparse_into(const Node& n, std::string& out);

void child_into(const Node& child, bool parenthesize, std::string& out) {
    if (parenthesize) out += '(';
    unparse_into(child, out);
    if (parenthesize) out += ')';
}

void unparse_into(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Literal: {
            char buf[64];
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
            out.append(buf, ptr);
            return;
        }
        case NodeKind::Variable: out += 'r'; return;
        case NodeKind::Constant: out += n.name; return;
        case NodeKind::Neg:
            out += '-';
            child_into(*n.children[0], precedence(*n.children[0]) < kUnary, out);
            return;
        case NodeKind::Pow:
            // (-r)^2 and (a^b)^c need parentheses; the exponent only when it is a sum or product.
            child_into(*n.children[0], precedence(*n.children[0]) <= kPower, out);
            out += '^';
            child_into(*n.children[1], precedence(*n.children[1]) < kUnary, out);
            return;
        case NodeKind::Call:
            out += function_name(n.function);
            out += '(';
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += ", ";
                unparse_into(*n.children[i], out);
            }
            out += ')';
            return;
        default: break;
    }
    const int p = precedence(n);
    const char* op = n.kind == NodeKind::Add   ? " + "
                     : n.kind == NodeKind::Sub ? " - "
                     : n.kind == NodeKind::Mul ? "*"
                                               : "/";
    child_into(*n.children[0], precedence(*n.children[0]) < p, out);
    out += op;
    child_into(*n.children[1], precedence(*n.children[1]) <= p, out);
}

}  // namespace

Expression parse(std::string_view text) {
    Parser p(text);
    return Expression(p.parse_all(), std::string(text));
}

double evaluate(const Expression& e, double r) { return evaluate(e.root(), r); }

double evaluate(const Node& n, double r) {
    switch (n.kind) {
        case NodeKind::Literal:
        case NodeKind::Constant: return n.value;
        case NodeKind::Variable: return r;
        case NodeKind::Neg: return -evaluate(*n.children[0], r);
        case NodeKind::Add: return evaluate(*n.children[0], r) + evaluate(*n.children[1], r);
        case NodeKind::Sub: return evaluate(*n.children[0], r) - evaluate(*n.children[1], r);
        case NodeKind::Mul: return evaluate(*n.children[0], r) * evaluate(*n.children[1], r);
        case NodeKind::Div: {
            const double den = evaluate(*n.children[1], r);
            if (den == 0.0) throw EvalError("division by zero");
            return evaluate(*n.children[0], r) / den;
        }
        case NodeKind::Pow:
            return checked_pow(evaluate(*n.children[0], r), evaluate(*n.children[1], r));
        case NodeKind::Call: {
            const double a = evaluate(*n.children[0], r);
            switch (n.function) {
                case Function::Exp: return std::exp(a);
                case Function::Log: return checked_log(a);
                case Function::Sqrt:
                    if (a < 0.0) throw EvalError("sqrt of negative value");
                    return std::sqrt(a);
                case Function::Abs: return std::fabs(a);
                case Function::Min: return std::min(a, evaluate(*n.children[1], r));
                case Function::Max: return std::max(a, evaluate(*n.children[1], r));
                case Function::Pow: return checked_pow(a, evaluate(*n.children[1], r));
            }
        }
    }
    throw EvalError("corrupt expression tree");
}

namespace {

struct Dual {
    double v;
    double d;
};

Dual eval_dual(const Node& n, double r) {
    switch (n.kind) {
        case NodeKind::Literal:
        case NodeKind::Constant: return {n.value, 0.0};
        case NodeKind::Variable: return {r, 1.0};
        case NodeKind::Neg: {
            const Dual a = eval_dual(*n.children[0], r);
            return {-a.v, -a.d};
        }
        case NodeKind::Call:
            if (n.function != Function::Pow) break;
            [[fallthrough]];
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Pow: {
            const Dual a = eval_dual(*n.children[0], r), b = eval_dual(*n.children[1], r);
            switch (n.kind) {
                case NodeKind::Add: return {a.v + b.v, a.d + b.d};
                case NodeKind::Sub: return {a.v - b.v, a.d - b.d};
                case NodeKind::Mul: return {a.v * b.v, a.d * b.v + a.v * b.d};
                case NodeKind::Div:
                    if (b.v == 0.0) throw EvalError("division by zero");
                    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
                default: break;
            }
            const double v = checked_pow(a.v, b.v);
            if (b.d == 0.0) {
                if (a.d == 0.0) return {v, 0.0};
                return {v, b.v * checked_pow(a.v, b.v - 1.0) * a.d};
            }
            if (!(a.v > 0.0)) return {v, std::numeric_limits<double>::quiet_NaN()};
            return {v, v * (b.d * std::log(a.v) + b.v * a.d / a.v)};
        }
        default: break;
    }
    const Dual a = eval_dual(*n.children[0], r);
    switch (n.function) {
        case Function::Exp: {
            const double v = std::exp(a.v);
            return {v, v * a.d};
        }
        case Function::Log: return {checked_log(a.v), a.d / a.v};
        case Function::Sqrt: {
            if (a.v < 0.0) throw EvalError("sqrt of negative value");
            const double v = std::sqrt(a.v);
            if (a.d == 0.0) return {v, 0.0};
            return {v, v > 0.0 ? a.d / (2.0 * v) : std::numeric_limits<double>::quiet_NaN()};
        }
        case Function::Abs: return {std::fabs(a.v), a.v > 0.0 ? a.d : a.v < 0.0 ? -a.d : 0.0};
        case Function::Min:
        case Function::Max: {
            const Dual b = eval_dual(*n.children[1], r);
            const bool take_a = n.function == Function::Min ? a.v <= b.v : a.v >= b.v;
            return take_a ? a : b;
        }
        case Function::Pow: break;
    }
    throw EvalError("corrupt expression tree");
}

}  // namespace

double evaluate_derivative(const Node& node, double r) { return eval_dual(node, r).d; }

double evaluate_log(const Node& node, double r) {
    const SignedLog s = eval_signed(node, r);
    if (s.sign < 0) throw EvalError("log of negative value");
    return s.mag;
}

std::string unparse(const Expression& e) { return unparse(e.root()); }

std::string unparse(const Node& node) {
    std::string out;
    unparse_into(node, out);
    return out;
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    switch (a.kind) {
        case NodeKind::Literal:
            if (a.value != b.value) return false;
            break;
        case NodeKind::Constant:
            if (a.name != b.name) return false;
            break;
        case NodeKind::Call:
            if (a.function != b.function) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(*a.children[i], *b.children[i])) return false;
    return true;
}

}  // namespace gapest::expr
