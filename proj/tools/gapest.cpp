#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gapest/config.hpp"
#include "gapest/pipeline.hpp"
#include "gapest/report.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Options {
    std::string config;
    std::string format;
    std::string out;
    double tol = 0.0;
    long seed = 0;  // accepted for interface stability; the pipeline is deterministic
};

int run(const Options& opt, gapest::Mode mode) {
    gapest::RunConfig cfg;
    try {
        cfg = gapest::load_config(opt.config);
        if (opt.tol > 0.0) cfg.quadrature.rel_tol = opt.tol;
        if (!opt.format.empty()) cfg.format = opt.format;
        if (!opt.out.empty()) cfg.out_dir = opt.out;
    } catch (const gapest::ConfigError& e) {
        std::cerr << opt.config;
        if (e.line() > 0) std::cerr << ":" << e.line();
        std::cerr << ": error: " << e.what() << "\n";
        return kExitConfig;
    }

    gapest::Report report;
    try {
        report = gapest::run_pipeline(cfg, mode);
    } catch (const gapest::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const gapest::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const gapest::expr::EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    if (mode == gapest::Mode::Check) {
        // Only the ordering invariants; a failing check is still a completed run.
        report.bounds.clear();
        report.criteria.clear();
    }
    const std::string text = gapest::emit_report(report, cfg.format);
    if (cfg.out_dir.empty()) {
        std::cout << text;
        return 0;
    }
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    const auto path = std::filesystem::path(cfg.out_dir) / gapest::report_file_name(cfg.format);
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "cannot write " << path.string() << "\n";
        return kExitNumerical;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral gap bounds for elliptic operators, checked against a finite-volume oracle"};
    app.require_subcommand(1);
    Options opt;
    struct Sub {
        const char* name;
        const char* help;
        gapest::Mode mode;
    };
    const Sub subs[] = {
        {"estimate", "Full pipeline: bounds, oracle and ordering checks", gapest::Mode::Estimate},
        {"bounds", "Bounds and criteria only (no oracle)", gapest::Mode::Bounds},
        {"oracle", "Finite-volume oracle only", gapest::Mode::Oracle},
        {"check", "Ordering invariants between bounds and oracle", gapest::Mode::Check},
    };
    int exit_code = 0;
    for (const auto& s : subs) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        cmd->add_option("config", opt.config, "Configuration file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"text", "csv", "plotdata"}));
        cmd->add_option("--out", opt.out, "Output directory (default: stdout)");
        cmd->add_option("--tol", opt.tol, "Relative quadrature tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", opt.seed, "Reserved; the pipeline is deterministic");
        const auto mode = s.mode;
        cmd->callback([&exit_code, &opt, mode] { exit_code = run(opt, mode); });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    return exit_code;
}
