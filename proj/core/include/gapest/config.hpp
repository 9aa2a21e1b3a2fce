#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapest/bounds.hpp"
#include "gapest/oracle.hpp"
#include "gapest/profile.hpp"
#include "gapest/quad.hpp"

namespace gapest {

/// Invalid configuration. line() is 0 for semantic errors not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, std::string field = {})
        : std::runtime_error(what), line_(line), field_(std::move(field)) {}
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

enum class Variant { HalfLine, Euclidean, Radial };

struct OracleSettings {
    int n = 4000;
    /// 0 means the problem's R_max.
    double r_max = 0.0;
    bool doubling_check = false;
    GridKind grid = GridKind::Uniform;
};

struct RunConfig {
    Variant variant = Variant::HalfLine;
    Problem problem;
    QuadratureSettings quadrature;
    /// Methods to run; empty means every method applicable to the problem.
    std::vector<std::string> methods;
    TestFamily test_family;
    int budget = 48;
    std::optional<double> K;
    bool pole = false;
    double eps = 0.01;
    OracleSettings oracle;
    std::string format = "text";
    std::string out_dir;

    /// Canonical `key = value` text of every semantic field, sections in
    /// fixed order and keys sorted; [output] is excluded.
    std::string canonical() const;
    /// FNV-1a 64-bit digest of canonical(), as 16 hex digits.
    std::string digest() const;
};

const std::vector<std::string>& known_methods();

/// Parses a function-valued field: "expr", @family(p, ...) or @table("path").
/// Relative table paths resolve against base_dir.
RadialFunction parse_function_field(const std::string& value, const std::string& base_dir = ".",
                                    double domain_start = 0.0);

RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace gapest
