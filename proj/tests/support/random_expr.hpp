#pragma once

#include <charconv>
#include <random>
#include <string>

namespace testing_support {

// Random well-formed expression text over the full grammar.
class ExpressionGenerator {
public:
    explicit ExpressionGenerator(unsigned seed) : rng_(seed) {}

    std::string next(int max_depth = 5) { return node(max_depth); }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    std::string literal() {
        const double v = std::uniform_real_distribution<double>(0.0, 20.0)(rng_);
        char buf[32];
        switch (pick(3)) {
            case 0: return std::to_string(pick(10));
            case 1: {
                auto res = std::to_chars(buf, buf + sizeof buf, v);
                return std::string(buf, res.ptr);
            }
            default: {
                auto res = std::to_chars(buf, buf + sizeof buf, v * 1e-3, std::chars_format::scientific);
                return std::string(buf, res.ptr);
            }
        }
    }

    std::string leaf() {
        switch (pick(4)) {
            case 0:
            case 1: return "r";
            case 2: return pick(2) ? "pi" : "e";
            default: return literal();
        }
    }

    std::string node(int depth) {
        if (depth <= 0 || pick(4) == 0) return leaf();
        static const char* unary[] = {"exp", "log", "sqrt", "abs"};
        static const char* binary_fn[] = {"min", "max", "pow"};
        static const char* ops[] = {"+", "-", "*", "/", "^"};
        switch (pick(5)) {
            case 0: return "-" + node(depth - 1);
            case 1: return std::string(unary[pick(4)]) + "(" + node(depth - 1) + ")";
            case 2: return std::string(binary_fn[pick(3)]) + "(" + node(depth - 1) + ", " + node(depth - 1) + ")";
            case 3: return "(" + node(depth - 1) + ")";
            default: return node(depth - 1) + " " + ops[pick(5)] + " " + node(depth - 1);
        }
    }

    std::mt19937 rng_;
};

}  // namespace testing_support
