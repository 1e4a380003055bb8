#include "ecofair/cli.hpp"

#include "ecofair/error.hpp"
#include "ecofair/harness.hpp"
#include "ecofair/sweep.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace ecofair::cli {

namespace {

using nlohmann::json;

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    const json j = io::read_json_file(config_path);
    const SynthSpec spec =
        harness::parse_synth_spec(j.contains("synth") ? j.at("synth") : j);
    const Dataset d = synth_generate(spec);
    const auto files = io::write_dataset_files(out_dir, d);
    std::cout << "wrote " << files.size() << " files for " << d.size() << " samples to "
              << out_dir << '\n';
    return 0;
}

int cmd_calibrate(const std::string& metadata_path, const std::string& taxonomy_path,
                  const std::string& out_path) {
    const ClassTaxonomy taxonomy = io::read_taxonomy_json(taxonomy_path);
    const std::vector<Sample> samples = io::read_metadata_csv(metadata_path, taxonomy);
    const risk::RiskModel model = risk::calibrate(samples, taxonomy);
    io::write_risk_model_json(out_path, model);
    std::cout << "calibrated risk model from " << samples.size() << " rows ("
              << model.mal_rate.size() << " localizations, age range ["
              << io::format_sig6(model.a_min) << ", " << io::format_sig6(model.a_max)
              << "]) -> " << out_path << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    harness::RunConfig cfg = harness::parse_run_config(io::read_json_file(config_path));
    if (!out_override.empty()) cfg.output_dir = out_override;
    const harness::RunReport report = harness::run_cv(cfg);
    print_warnings(report.warnings);
    std::cout << "run complete: " << report.rows.size() << " report rows -> " << cfg.output_dir
              << '\n';
    for (const harness::MetricsRow& row : report.rows) {
        if (row.fold_label != "mean") continue;
        std::cout << "  " << to_string(row.arm) << " macro_f1=";
        std::cout << (row.macro_f1 ? io::format_sig6(*row.macro_f1) : "n/a");
        if (row.e_per_sample_j)
            std::cout << " e_per_sample_j=" << io::format_sig6(*row.e_per_sample_j);
        if (row.tpr_worst) std::cout << " wg_tpr=" << io::format_sig6(*row.tpr_worst);
        std::cout << '\n';
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
    const json j = io::read_json_file(config_path);
    harness::RunConfig cfg = harness::parse_run_config(j);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const sweep::SweepGrid grid =
        j.contains("grid") ? sweep::parse_sweep_grid(j.at("grid")) : sweep::SweepGrid{};

    std::vector<std::string> warnings;
    const Dataset dataset = harness::prepare_dataset(cfg, &warnings);
    print_warnings(warnings);
    const auto folds = harness::prepare_folds(dataset, cfg);
    const auto points = sweep::grid_sweep(dataset, folds, cfg, grid);

    const std::filesystem::path out_dir = cfg.output_dir;
    std::filesystem::create_directories(out_dir);
    sweep::write_points_csv(out_dir / "points.csv", points);

    json meta{{"config", harness::run_config_to_json(cfg)},
              {"grid", sweep::sweep_grid_to_json(grid)},
              {"n_points", points.size()},
              {"n_frontier", sweep::pareto_front(points).size()}};
    io::write_json_file(out_dir / "sweep.json", meta);
    std::cout << "sweep complete: " << points.size() << " operating points ("
              << meta["n_frontier"] << " on the frontier) -> " << (out_dir / "points.csv")
              << '\n';
    return 0;
}

int cmd_report(const std::string& dir) {
    const std::filesystem::path report_csv = std::filesystem::path(dir) / "report.csv";
    const auto rows = harness::reaggregate_report_csv(report_csv);
    std::cout << "re-aggregated " << report_csv << '\n';
    for (const auto& row : rows) {
        if (row.size() > 3 && row[1] == "mean")
            std::cout << "  " << row[0] << " macro_f1=" << (row[3].empty() ? "n/a" : row[3])
                      << '\n';
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Lightweight-first routed inference simulator: energy, performance and "
                 "fairness accounting for lite/heavy encoder pairs"};
    app.require_subcommand(1);

    std::string config_path, out_path, metadata_path, taxonomy_path;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset export");
    synth->add_option("--config", config_path, "Synthetic spec JSON")->required();
    synth->add_option("--out", out_path, "Output directory")->required();

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Calibrate a risk model from a metadata CSV");
    calibrate->add_option("--metadata", metadata_path, "Training metadata CSV")->required();
    calibrate->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON")->required();
    calibrate->add_option("--out", out_path, "Risk model JSON output path")->required();

    CLI::App* run = app.add_subcommand("run", "Run the cross-validation protocol");
    run->add_option("--config", config_path, "Run config JSON")->required();
    run->add_option("--out", out_path, "Override the configured output directory");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Threshold grid sweep + Pareto frontier");
    sweep_cmd->add_option("--config", config_path, "Sweep config JSON (run config + grid)")
        ->required();
    sweep_cmd->add_option("--out", out_path, "Override the configured output directory");

    CLI::App* report = app.add_subcommand("report", "Re-aggregate an existing report.csv");
    report->add_option("--dir", out_path, "Run output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(config_path, out_path);
        if (calibrate->parsed()) return cmd_calibrate(metadata_path, taxonomy_path, out_path);
        if (run->parsed()) return cmd_run(config_path, out_path);
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, out_path);
        if (report->parsed()) return cmd_report(out_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

} // namespace ecofair::cli
