#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gapest::expr {

/// Raised by parse(); offset is the byte position of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Raised by evaluate() for domain violations (division by zero, log of a
/// nonpositive number, sqrt of a negative number, NaN-producing pow).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NodeKind { Literal, Variable, Constant, Add, Sub, Mul, Div, Pow, Neg, Call };

enum class Function { Exp, Log, Sqrt, Abs, Min, Max, Pow };

struct Node {
    NodeKind kind = NodeKind::Literal;
    double value = 0.0;        // Literal value, or the value of a named Constant
    std::string name;          // Constant name ("pi", "e")
    Function function = Function::Exp;
    std::vector<std::shared_ptr<const Node>> children;
};

using NodePtr = std::shared_ptr<const Node>;

/// Immutable parsed expression in the single variable r.
class Expression {
public:
    Expression() = default;
    explicit Expression(NodePtr root, std::string source = {});

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }
    const std::string& source() const { return source_; }
    bool empty() const { return root_ == nullptr; }

    double operator()(double r) const;

private:
    NodePtr root_;
    std::string source_;
};

Expression parse(std::string_view text);

double evaluate(const Expression& e, double r);
double evaluate(const Node& node, double r);

/// log(evaluate(node, r)) computed without forming the value when the tree is
/// a product/quotient/power of exponentials, so that e.g. exp(4*r^2) at r = 20
/// stays finite in log space. Returns -inf for a zero value; throws EvalError
/// for a negative value.
double evaluate_log(const Node& node, double r);

/// d/dr by forward-mode differentiation of the tree. Throws EvalError where
/// the value itself is undefined; NaN where only the derivative is (sqrt at 0).
double evaluate_derivative(const Node& node, double r);

/// Canonical text form. parse(unparse(e)) is structurally identical to e.
std::string unparse(const Expression& e);
std::string unparse(const Node& node);

bool structurally_equal(const Node& a, const Node& b);

const char* function_name(Function f);

}  // namespace gapest::expr
