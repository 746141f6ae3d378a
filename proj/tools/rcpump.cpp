// rcpump.cpp — Command line front end: run a scenario, print the RC map, compare runs

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rcpump/scenario.hpp"

using namespace rcpump;

namespace {

struct Flags {
    std::string out;
    int threads{1};
    bool verbose{false};
    bool timing{true};
};

CsvTable table_for(const std::string& path, const Flags& f) {
    if (std::filesystem::path(path).extension() == ".csv") return read_csv(path);
    const Scenario s = load_scenario(path);
    const SweepResult r = run_scenario(s, f.threads, f.verbose);
    std::stringstream buf;
    write_csv(buf, s, r, false);
    return read_csv(buf, path);
}

int cmd_run(const std::string& cfg, const Flags& f) {
    const Scenario s = load_scenario(cfg);
    const std::string out = !f.out.empty() ? f.out : !s.output.empty() ? s.output : s.name + ".csv";
    if (f.verbose)
        std::fprintf(stderr, "%s: %s regime, %d points, %d thread(s) -> %s\n", s.name.c_str(), regime_name(s.regime),
                     s.points(), f.threads, out.c_str());
    const SweepResult r = run_scenario(s, f.threads, f.verbose);
    write_csv_atomic(out, s, r, f.timing);
    const int failed = r.failures();
    if (failed > 0) {
        std::fprintf(stderr, "%d of %d points failed (see the status column of %s)\n", failed, s.points(),
                     out.c_str());
        return 2;
    }
    return 0;
}

int cmd_rc_info(const std::string& cfg) {
    const Scenario s = load_scenario(cfg);
    const Physics& p = s.physics;
    const TQDParams t = p.tqd();
    std::printf("scenario   %s\n", s.name.c_str());
    std::printf("mapping    lambda = sqrt(Gamma delta / 2), residual J = 2 delta (flat)\n");
    std::printf("width      delta = %.6g\n", p.width);
    std::printf("RC energy  eps_L = %.6g, eps_R = %.6g (bias %.6g)\n", t.rc_left.energy, t.rc_right.energy, p.bias);
    std::printf("coupling   Gamma = %.6g -> lambda = %.6g\n", gamma_for_coupling(p.coupling(), p.width), p.coupling());
    std::printf("residual   J = %.6g\n", t.rc_left.residual(0.0));
    if (!s.gamma_list.empty()) {
        std::printf("\n%12s %12s %12s\n", "Gamma", "lambda", "residual");
        for (double g : s.gamma_list) {
            const RCParameters rc = rc_map_lorentzian(SpectralDensity::lorentzian(g, p.width, p.dot_energy));
            std::printf("%12.6g %12.6g %12.6g\n", g, rc.coupling, rc.residual(0.0));
        }
    }
    return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& column, double tolerance,
                const Flags& f) {
    const Comparison c = compare_tables(table_for(a, f), table_for(b, f), column);
    std::printf("%14s %14s %16s %16s %12s %12s\n", "axis1", "axis2", "a", "b", "abs", "rel");
    for (const auto& d : c.points)
        std::printf("%14.8g %14.8g %16.10g %16.10g %12.4g %12.4g\n", d.axis1, d.axis2, d.a, d.b, d.absolute,
                    d.relative);
    std::printf("\ncolumn %s: %zu points, max abs %.4g, max rel %.4g, mean rel %.4g", c.column.c_str(),
                c.points.size(), c.max_absolute, c.max_relative, c.mean_relative);
    if (c.missing > 0) std::printf(", %d one-sided nan", c.missing);
    std::printf("\n");
    if (tolerance > 0.0)
        std::printf("%s (tolerance %.4g on the relative difference)\n",
                    c.max_relative > tolerance || c.missing > 0 ? "DIFFERENT" : "AGREE", tolerance);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven triple-dot charge pump: Floquet, adiabatic and exact sweeps"};
    app.set_version_flag("--version", RCPUMP_VERSION);
    app.require_subcommand(1);

    Flags f;
    app.add_option("-o,--out", f.out, "CSV output path (overrides [output] path)");
    app.add_option("-j,--threads", f.threads, "Worker threads over grid points")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", f.verbose, "Per-point progress on stderr");
    app.add_flag("!--no-timing", f.timing, "Write wall_ms as 0 so reruns are byte-identical apart from the header");

    std::string cfg, a, b, column = "Q";
    double tolerance = 0.0;
    auto* run = app.add_subcommand("run", "Run a scenario and write its CSV");
    run->add_option("config", cfg, "Scenario file")->required()->check(CLI::ExistingFile);
    run->fallthrough();
    auto* info = app.add_subcommand("rc-info", "Print the reaction-coordinate map of a scenario");
    info->add_option("config", cfg, "Scenario file")->required()->check(CLI::ExistingFile);
    info->fallthrough();
    auto* cmp = app.add_subcommand("compare", "Point-by-point comparison of two runs (CSV files or scenario files)");
    cmp->add_option("a", a, "First run")->required()->check(CLI::ExistingFile);
    cmp->add_option("b", b, "Second run")->required()->check(CLI::ExistingFile);
    cmp->add_option("--column", column, "Column to compare");
    cmp->add_option("--tolerance", tolerance, "Flag relative differences above this value");
    cmp->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(cfg, f);
        if (*info) return cmd_rc_info(cfg);
        return cmd_compare(a, b, column, tolerance, f);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
