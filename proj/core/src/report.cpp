#include "gapest/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace gapest {

namespace {

std::string g17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string joined_flags(const Diagnostics& d) {
    std::string out;
    for (const auto& f : d.flags) out += (out.empty() ? "" : ";") + f;
    return out;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' '); }

}  // namespace

std::string emit_text(const Report& report) {
    std::ostringstream os;
    os << "Verdict: " << to_string(report.verdict.outcome);
    if (!report.verdict.method.empty()) os << " [" << report.verdict.method << "]";
    os << " - " << report.verdict.reason << "\n\n";

    if (!report.bounds.empty()) {
        os << pad("method", 8) << pad("dir", 7) << pad("quantity", 14) << pad("value", 18) << "details\n";
        for (const auto& b : report.bounds) {
            std::string details = b.diagnostics.test_function.empty() ? "" : "f = " + b.diagnostics.test_function;
            if (!b.diagnostics.reason.empty()) details += (details.empty() ? "" : "; ") + b.diagnostics.reason;
            std::string q = to_string(b.quantity);
            if (b.quantity != Quantity::Lambda1) q += "(" + short_num(b.radius) + ")";
            os << pad(b.method, 8) << pad(to_string(b.direction), 7) << pad(q, 14) << pad(short_num(b.value), 18)
               << details << "\n";
            os << "        " << b.citation << "\n";
        }
        os << "\n";
    }
    if (!report.criteria.empty()) {
        os << "Criteria:\n";
        for (const auto& c : report.criteria)
            os << "  " << pad(c.method, 8) << pad(to_string(c.outcome), 14) << c.reason << "\n";
        os << "\n";
    }
    if (report.oracle.computed) {
        const auto& o = report.oracle;
        os << "Oracle (n = " << o.n << ", R_max = " << short_num(o.r_max) << "):\n";
        os << "  " << pad("lambda1", 16) << " = " << short_num(o.lambda1) << "\n";
        os << "  " << pad("lambda_c(" + short_num(o.r0) + ")", 16) << " = " << short_num(o.lambda_c_r0) << "\n";
        if (o.doubling)
            os << "  doubled R_max    = " << short_num(o.doubling->lambda1_doubled) << " (drift "
               << short_num(o.doubling->drift) << ")\n";
        os << "\n";
    }
    if (!report.checks.empty()) {
        os << "Ordering checks:\n";
        for (const auto& c : report.checks)
            os << "  " << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        os << "\n";
    }
    for (const auto& n : report.notes) os << "note: " << n << "\n";
    if (!report.notes.empty()) os << "\n";
    os << "config digest " << report.digest << ", mode " << to_string(report.mode) << ", gapest "
       << report.version << "\n";
    return os.str();
}

std::string emit_csv(const Report& report) {
    std::ostringstream os;
    os << "method,direction,value,citation,error_estimate,flags\n";
    for (const auto& b : report.bounds) {
        os << b.method << ',' << to_string(b.direction) << ',' << g17(b.value) << ',' << csv_field(b.citation) << ','
           << g17(b.diagnostics.error_estimate) << ',' << csv_field(joined_flags(b.diagnostics)) << "\n";
    }
    return os.str();
}

std::string emit_plotdata(const Report& report) {
    std::ostringstream os;
    os << "# r gamma C ratio\n";
    for (const auto& row : report.plot)
        os << g17(row.r) << ' ' << g17(row.gamma) << ' ' << g17(row.C) << ' ' << g17(row.ratio) << "\n";
    return os.str();
}

std::string emit_report(const Report& report, const std::string& format) {
    if (format == "text") return emit_text(report);
    if (format == "csv") return emit_csv(report);
    if (format == "plotdata") return emit_plotdata(report);
    throw std::invalid_argument("unknown report format '" + format + "'");
}

std::string report_file_name(const std::string& format) {
    if (format == "csv") return "report.csv";
    if (format == "plotdata") return "plot.dat";
    return "report.txt";
}

}  // namespace gapest
