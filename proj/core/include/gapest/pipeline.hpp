#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gapest/bounds.hpp"
#include "gapest/config.hpp"
#include "gapest/oracle.hpp"

namespace gapest {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Mode { Estimate, Bounds, Oracle, Check };

const char* to_string(Mode m);

struct OracleValues {
    bool computed = false;
    int n = 0;
    double r_max = 0.0;
    double lambda1 = 0.0;
    double r0 = 0.0;
    double lambda_c_r0 = 0.0;
    std::optional<DoublingCheck> doubling;
};

struct OrderingCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct PlotRow {
    double r, gamma, C, ratio;
};

struct Report {
    Mode mode = Mode::Estimate;
    Verdict verdict;
    std::vector<BoundResult> bounds;
    std::vector<Verdict> criteria;
    OracleValues oracle;
    std::vector<OrderingCheck> checks;
    /// Methods that were requested but do not apply, with the reason.
    std::vector<std::string> notes;
    std::vector<PlotRow> plot;
    std::string digest;
    std::string canonical_config;
    std::string version = kToolVersion;

    bool all_checks_passed() const;
};

/// Methods that apply to the radialized problem (before any user selection).
std::vector<std::string> applicable_methods(const RunConfig& cfg, const RadializedCoefficients& coeffs);

/// radialize → bounds → oracle → ordering checks. Vacuous bounds are data;
/// only configuration and evaluation errors throw.
Report run_pipeline(const RunConfig& cfg, Mode mode = Mode::Estimate);

/// The verdict implied by a set of bounds and criterion verdicts.
Verdict decide(const std::vector<BoundResult>& bounds, const std::vector<Verdict>& criteria);

}  // namespace gapest
