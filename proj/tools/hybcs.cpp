#include <CLI11.hpp>

#include <hybcs/cli.hpp>

int main(int argc, char** argv) {
    using namespace hybcs;
    CLI::App app{"hybrid Lindblad / non-Hermitian BCS dynamics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    cli::RunOptions run;
    std::string run_out;
    auto* r = app.add_subcommand("run", "integrate one protocol and write CSV + JSON sidecar");
    r->add_option("--config", run.config, "JSON config (or a run sidecar)")->required();
    r->add_option("--output", run_out, "override output.path");
    r->add_option("--threads", run.threads, "threads for the per-mode loop")->check(CLI::PositiveNumber);

    cli::ScanOptions scan;
    std::string values, out_dir;
    scan.workers = env_workers();
    auto* s = app.add_subcommand("scan", "one run per value along an axis");
    s->add_option("--config", scan.config)->required();
    s->add_option("--axis", scan.axis)->required()->check(CLI::IsMember({"alpha", "gamma", "pump"}));
    s->add_option("--values", values, "comma-separated list")->required();
    s->add_option("--out-dir", out_dir);
    s->add_option("--workers", scan.workers, "concurrent runs (default $HYBCS_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    s->add_option("--threads", scan.threads)->check(CLI::PositiveNumber);

    cli::FitOptions fit;
    std::string window;
    std::string fit_json;
    auto* f = app.add_subcommand("fit", "power-law fit of one CSV column");
    f->add_option("--input", fit.input)->required();
    f->add_option("--column", fit.column)->required();
    f->add_option("--window", window, "t_lo,t_hi in units of 1/W")->required();
    f->add_option("--json", fit_json, "also write the report here");

    cli::OracleCliOptions orc;
    orc.workers = env_workers();
    auto* o = app.add_subcommand("oracle", "exact small-cluster checks of the equations of motion");
    o->add_option("--seeds", orc.seeds)->check(CLI::PositiveNumber);
    o->add_option("--sites", orc.sites);
    o->add_option("--inject-fault", orc.inject_fault)->group("");  // negative control for tests

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : cli::kConfigError;
    }

    if (*r) {
        if (!run_out.empty()) run.output = run_out;
        return cli::cmd_run(run);
    }
    if (*s) {
        try {
            scan.values = cli::parse_list(values);
        } catch (const ConfigError& e) {
            std::cerr << "config error: --values: " << e.what() << '\n';
            return cli::kConfigError;
        }
        if (!out_dir.empty()) scan.out_dir = out_dir;
        return cli::cmd_scan(scan);
    }
    if (*f) {
        std::vector<double> w;
        try {
            w = cli::parse_list(window);
        } catch (const ConfigError& e) {
            std::cerr << "config error: --window: " << e.what() << '\n';
            return cli::kConfigError;
        }
        if (w.size() != 2) {
            std::cerr << "config error: --window needs t_lo,t_hi\n";
            return cli::kConfigError;
        }
        fit.t_lo = w[0];
        fit.t_hi = w[1];
        if (!fit_json.empty()) fit.json_out = fit_json;
        return cli::cmd_fit(fit);
    }
    return cli::cmd_oracle(orc);
}
