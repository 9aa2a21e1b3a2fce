#include "gapest/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace gapest {

namespace {

struct Entry {
    std::string value;
    int line;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"problem", {"variant", "a", "V", "d", "gamma", "alpha", "beta", "mu_density", "r0", "R_max"}},
        {"quadrature",
         {"rel_tol", "abs_tol", "max_subdivisions", "tail_horizon", "divergence_threshold", "moment_horizon"}},
        {"bounds", {"methods", "test_function", "f", "theta_min", "theta_max", "budget", "K", "pole", "eps"}},
        {"oracle", {"n", "R_max", "doubling_check", "grid"}},
        {"output", {"format", "dir"}},
    };
    return s;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number(const std::string& text, const std::string& field, int line) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError("field '" + field + "': expected a number, got '" + text + "'", line, field);
    return v;
}

int parse_int(const std::string& text, const std::string& field, int line) {
    int v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError("field '" + field + "': expected an integer, got '" + text + "'", line, field);
    return v;
}

bool parse_bool(const std::string& text, const std::string& field, int line) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ConfigError("field '" + field + "': expected true or false, got '" + text + "'", line, field);
}

std::vector<std::string> parse_list(std::string text) {
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']') throw std::invalid_argument("unterminated list");
        text = text.substr(1, text.size() - 2);
    }
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string unquote(const std::string& text) {
    if (text.size() < 2 || text.front() != '"' || text.back() != '"')
        throw std::invalid_argument("expected a quoted string");
    return text.substr(1, text.size() - 2);
}

RadialFunction load_table(const std::string& path, Smoothness hint) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open table '" + path + "'");
    std::vector<double> r, v;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a = 0.0, b = 0.0;
        if (!(ls >> a >> b)) throw ModelError("malformed row in table '" + path + "': " + line);
        r.push_back(a);
        v.push_back(b);
    }
    return RadialFunction::table(std::move(r), std::move(v), hint);
}

class Reader {
public:
    Reader(std::map<std::string, Section> sections, std::string base_dir)
        : sections_(std::move(sections)), base_dir_(std::move(base_dir)) {}

    const Entry* get(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        const auto e = s->second.find(key);
        return e == s->second.end() ? nullptr : &e->second;
    }

    double number(const std::string& section, const std::string& key, double fallback) const {
        const Entry* e = get(section, key);
        return e ? parse_number(e->value, key, e->line) : fallback;
    }

    int integer(const std::string& section, const std::string& key, int fallback) const {
        const Entry* e = get(section, key);
        return e ? parse_int(e->value, key, e->line) : fallback;
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback) const {
        const Entry* e = get(section, key);
        return e ? parse_bool(e->value, key, e->line) : fallback;
    }

    std::string word(const std::string& section, const std::string& key, const std::string& fallback) const {
        const Entry* e = get(section, key);
        if (!e) return fallback;
        if (!e->value.empty() && e->value.front() == '"') {
            try {
                return unquote(e->value);
            } catch (const std::exception& ex) {
                throw ConfigError("field '" + key + "': " + ex.what(), e->line, key);
            }
        }
        return e->value;
    }

    std::optional<RadialFunction> function(const std::string& section, const std::string& key,
                                           double domain_start = 0.0) const {
        const Entry* e = get(section, key);
        if (!e) return std::nullopt;
        try {
            return parse_function_field(e->value, base_dir_, domain_start);
        } catch (const std::exception& ex) {
            throw ConfigError("field '" + key + "': " + ex.what(), e->line, key);
        }
    }

    RadialFunction required_function(const std::string& section, const std::string& key) const {
        auto f = function(section, key);
        if (!f) throw ConfigError("missing required field '" + key + "' in [" + section + "]", 0, key);
        return *f;
    }

private:
    std::map<std::string, Section> sections_;
    std::string base_dir_;
};

Variant variant_from(const std::string& s, int line) {
    if (s == "halfline") return Variant::HalfLine;
    if (s == "euclidean") return Variant::Euclidean;
    if (s == "radial") return Variant::Radial;
    throw ConfigError("field 'variant': expected halfline, euclidean or radial, got '" + s + "'", line, "variant");
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::HalfLine: return "halfline";
        case Variant::Euclidean: return "euclidean";
        case Variant::Radial: return "radial";
    }
    return "?";
}

}  // namespace

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> m = {"thm12", "thm31", "eq16",  "eq13",  "eq27",   "eq28",
                                               "eq12",  "eq17",  "thm32", "cor13a", "cor13b", "cor14"};
    return m;
}

RadialFunction parse_function_field(const std::string& value, const std::string& base_dir, double domain_start) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        return RadialFunction::from_expression(expr::parse(unquote(value)), domain_start);
    if (value.empty() || value.front() != '@')
        throw std::invalid_argument("expected a quoted expression, @family(...) or @table(\"path\")");
    const auto open = value.find('(');
    if (open == std::string::npos || value.back() != ')') throw std::invalid_argument("malformed @family(...) call");
    const std::string name = trim(std::string_view(value).substr(1, open - 1));
    const std::string args = value.substr(open + 1, value.size() - open - 2);
    if (name == "table") {
        // @table("path") is only continuous; @table("path", c1) declares the
        // tabulated profile differentiable (central differences).
        const auto parts = parse_list(args);
        if (parts.empty() || parts.size() > 2) throw std::invalid_argument("@table expects \"path\" [, c1]");
        std::filesystem::path path = unquote(trim(parts[0]));
        if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
        Smoothness hint = Smoothness::Continuous;
        if (parts.size() == 2) {
            const std::string h = trim(parts[1]);
            if (h == "c1") hint = Smoothness::C1;
            else if (h == "c2") hint = Smoothness::C2;
            else if (h != "continuous") throw std::invalid_argument("unknown smoothness hint '" + h + "'");
        }
        return load_table(path.string(), hint);
    }
    std::vector<double> params;
    for (const auto& a : parse_list(args)) params.push_back(parse_number(a, name, 0));
    return RadialFunction::family(family_from_name(name), std::move(params), domain_start);
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    std::map<std::string, Section> sections;
    std::string current;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!schema().count(current)) throw ConfigError("unknown section [" + current + "]", line_no);
            if (sections.count(current)) throw ConfigError("duplicate section [" + current + "]", line_no);
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        if (current.empty()) throw ConfigError("key outside of any section", line_no);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!schema().at(current).count(key))
            throw ConfigError("unknown key '" + key + "' in [" + current + "]", line_no, key);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no, key);
        if (!sections[current].emplace(key, Entry{value, line_no}).second)
            throw ConfigError("duplicate key '" + key + "'", line_no, key);
    }

    const Reader rd(std::move(sections), base_dir);
    RunConfig cfg;
    const Entry* variant_entry = rd.get("problem", "variant");
    cfg.variant = variant_from(rd.word("problem", "variant", "halfline"), variant_entry ? variant_entry->line : 0);

    const RadialFunction one = RadialFunction::constant(1.0);
    switch (cfg.variant) {
        case Variant::HalfLine:
            cfg.problem.variant = HalfLine{rd.function("problem", "a").value_or(one), rd.required_function("problem", "V")};
            cfg.problem.r0 = rd.number("problem", "r0", 0.0);
            break;
        case Variant::Euclidean:
            cfg.problem.variant = IsotropicEuclidean{rd.integer("problem", "d", 1), rd.function("problem", "a").value_or(one),
                                                     rd.required_function("problem", "V")};
            cfg.problem.r0 = rd.number("problem", "r0", 1.0);
            break;
        case Variant::Radial:
            cfg.problem.variant = DirectRadial{rd.required_function("problem", "gamma"),
                                               rd.function("problem", "alpha").value_or(one),
                                               rd.function("problem", "beta").value_or(one),
                                               rd.required_function("problem", "mu_density"), rd.integer("problem", "d", 1)};
            cfg.problem.r0 = rd.number("problem", "r0", 1.0);
            break;
    }
    cfg.problem.r_max = rd.number("problem", "R_max", 60.0);
    try {
        cfg.problem.validate();
    } catch (const ModelError& e) {
        throw ConfigError(e.what(), 0, "problem");
    }

    auto& q = cfg.quadrature;
    q.rel_tol = rd.number("quadrature", "rel_tol", q.rel_tol);
    q.abs_tol = rd.number("quadrature", "abs_tol", q.abs_tol);
    q.max_subdivisions = rd.integer("quadrature", "max_subdivisions", q.max_subdivisions);
    q.tail_horizon = rd.number("quadrature", "tail_horizon", q.tail_horizon);
    q.divergence_threshold = rd.number("quadrature", "divergence_threshold", q.divergence_threshold);
    q.moment_horizon = rd.number("quadrature", "moment_horizon", q.moment_horizon);
    try {
        q.validate();
    } catch (const ModelError& e) {
        throw ConfigError(e.what(), 0, "quadrature");
    }

    if (const Entry* e = rd.get("bounds", "methods")) {
        try {
            cfg.methods = parse_list(e->value);
        } catch (const std::exception& ex) {
            throw ConfigError(std::string("field 'methods': ") + ex.what(), e->line, "methods");
        }
        for (const auto& m : cfg.methods)
            if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
                throw ConfigError("field 'methods': unknown method '" + m + "'", e->line, "methods");
    }
    {
        const Entry* e = rd.get("bounds", "test_function");
        try {
            cfg.test_family.kind = test_family_from_name(rd.word("bounds", "test_function", "exponential"));
        } catch (const ModelError& ex) {
            throw ConfigError(std::string("field 'test_function': ") + ex.what(), e ? e->line : 0, "test_function");
        }
    }
    cfg.test_family.theta_min = rd.number("bounds", "theta_min", cfg.test_family.theta_min);
    cfg.test_family.theta_max = rd.number("bounds", "theta_max", cfg.test_family.theta_max);
    if (!(cfg.test_family.theta_min > 0.0) || !(cfg.test_family.theta_max > cfg.test_family.theta_min))
        throw ConfigError("theta range must satisfy 0 < theta_min < theta_max", 0, "theta_min");
    if (auto f = rd.function("bounds", "f")) {
        cfg.test_family.user = *f;
        // An explicit f without a family name means "use this f".
        if (!rd.get("bounds", "test_function")) cfg.test_family.kind = TestFamily::Kind::User;
    } else if (cfg.test_family.kind == TestFamily::Kind::User)
        throw ConfigError("test_function = user needs a test function f", 0, "f");
    cfg.budget = rd.integer("bounds", "budget", cfg.budget);
    if (cfg.budget < 8) throw ConfigError("field 'budget' must be at least 8", 0, "budget");
    if (rd.get("bounds", "K")) {
        cfg.K = rd.number("bounds", "K", 0.0);
        if (*cfg.K < 0.0) throw ConfigError("field 'K' must be nonnegative", rd.get("bounds", "K")->line, "K");
    }
    cfg.pole = rd.boolean("bounds", "pole", false);
    cfg.eps = rd.number("bounds", "eps", cfg.eps);
    if (!(cfg.eps > 0.0)) throw ConfigError("field 'eps' must be positive", 0, "eps");

    cfg.oracle.n = rd.integer("oracle", "n", cfg.oracle.n);
    if (cfg.oracle.n < 32) throw ConfigError("field 'n' must be at least 32", 0, "n");
    cfg.oracle.r_max = rd.number("oracle", "R_max", 0.0);
    if (cfg.oracle.r_max < 0.0) throw ConfigError("oracle R_max must be nonnegative", 0, "R_max");
    cfg.oracle.doubling_check = rd.boolean("oracle", "doubling_check", false);
    {
        const std::string g = rd.word("oracle", "grid", "uniform");
        if (g == "uniform") cfg.oracle.grid = GridKind::Uniform;
        else if (g == "geometric") cfg.oracle.grid = GridKind::Geometric;
        else throw ConfigError("field 'grid': expected uniform or geometric", rd.get("oracle", "grid")->line, "grid");
    }

    cfg.format = rd.word("output", "format", "text");
    if (cfg.format != "text" && cfg.format != "csv" && cfg.format != "plotdata")
        throw ConfigError("field 'format': expected text, csv or plotdata", rd.get("output", "format")->line, "format");
    cfg.out_dir = rd.word("output", "dir", "");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << "[problem]\n";
    std::map<std::string, std::string> p;
    p["variant"] = variant_name(variant);
    std::visit(
        [&p](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, HalfLine>) {
                p["a"] = v.a.describe();
                p["V"] = v.V.describe();
            } else if constexpr (std::is_same_v<T, IsotropicEuclidean>) {
                p["a"] = v.a_scalar.describe();
                p["V"] = v.V.describe();
                p["d"] = std::to_string(v.d);
            } else {
                p["gamma"] = v.gamma.describe();
                p["alpha"] = v.alpha.describe();
                p["beta"] = v.beta.describe();
                p["mu_density"] = v.mu_density.describe();
                p["d"] = std::to_string(v.d);
            }
        },
        problem.variant);
    p["r0"] = fmt(problem.r0);
    p["R_max"] = fmt(problem.r_max);
    for (const auto& [k, v] : p) os << k << " = " << v << "\n";

    os << "[quadrature]\n";
    std::map<std::string, std::string> q{{"rel_tol", fmt(quadrature.rel_tol)},
                                         {"abs_tol", fmt(quadrature.abs_tol)},
                                         {"max_subdivisions", std::to_string(quadrature.max_subdivisions)},
                                         {"tail_horizon", fmt(quadrature.tail_horizon)},
                                         {"divergence_threshold", fmt(quadrature.divergence_threshold)},
                                         {"moment_horizon", fmt(quadrature.moment_horizon)}};
    for (const auto& [k, v] : q) os << k << " = " << v << "\n";

    os << "[bounds]\n";
    std::map<std::string, std::string> b;
    std::string ms;
    for (const auto& m : methods) ms += (ms.empty() ? "" : ", ") + m;
    b["methods"] = "[" + ms + "]";
    b["test_function"] = to_string(test_family.kind);
    b["theta_min"] = fmt(test_family.theta_min);
    b["theta_max"] = fmt(test_family.theta_max);
    if (test_family.kind == TestFamily::Kind::User) b["f"] = test_family.user.describe();
    b["budget"] = std::to_string(budget);
    b["K"] = K ? fmt(*K) : "none";
    b["pole"] = pole ? "true" : "false";
    b["eps"] = fmt(eps);
    for (const auto& [k, v] : b) os << k << " = " << v << "\n";

    os << "[oracle]\n";
    std::map<std::string, std::string> o{{"n", std::to_string(oracle.n)},
                                         {"R_max", fmt(oracle.r_max > 0.0 ? oracle.r_max : problem.r_max)},
                                         {"doubling_check", oracle.doubling_check ? "true" : "false"},
                                         {"grid", oracle.grid == GridKind::Uniform ? "uniform" : "geometric"}};
    for (const auto& [k, v] : o) os << k << " = " << v << "\n";
    return os.str();
}

std::string RunConfig::digest() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) h = (h ^ c) * 1099511628211ull;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gapest
