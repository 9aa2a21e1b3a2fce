#pragma once

#include <string>

#include "gapest/pipeline.hpp"

namespace gapest {

/// Human-readable report; the first line is the verdict.
std::string emit_text(const Report& report);
/// One row per BoundResult: method,direction,value,citation,error_estimate,flags.
std::string emit_csv(const Report& report);
/// Whitespace-separated columns r, gamma(r), C(r), ratio(r).
std::string emit_plotdata(const Report& report);

/// Dispatch on "text", "csv" or "plotdata".
std::string emit_report(const Report& report, const std::string& format);
/// File name used when writing `format` into an output directory.
std::string report_file_name(const std::string& format);

}  // namespace gapest
