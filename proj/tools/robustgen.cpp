#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robustgen/commands.hpp"
#include "robustgen/manifest.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Trains hyperparameter sweeps, computes generalization measures, and "
                 "evaluates them under worst-case coupled environments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(robustgen::kToolVersion));

    std::string config_path;
    std::string store_path;
    const auto add_common = [&](CLI::App* sub, bool store_flag = true) {
        sub->add_option("--config", config_path, "manifest JSON path")->required();
        if (store_flag)
            sub->add_option("--store", store_path, "record store path (default: manifest paths.store)");
    };

    auto* generate = app.add_subcommand("generate", "train every missing (config, seed) cell");
    bool verbose = false;
    add_common(generate);
    generate->add_flag("--verbose", verbose, "progress lines every 50 runs");

    auto* measure = app.add_subcommand("measure", "attach measure vectors to trained records");
    add_common(measure);

    auto* evaluate =
        app.add_subcommand("evaluate", "sign-error per coupled environment and family");
    add_common(evaluate);
    std::vector<std::string> axes;
    double n_eff_min = -1.0;
    bool no_noise_filter = false, weak = false, inject_oracles = false;
    std::string subset, out_dir = ".";
    evaluate->add_option("--axes", axes, "restrict to these axes (e.g. train_size depth)");
    evaluate->add_option("--n-eff-min", n_eff_min,
                         "effective sample size below which an environment is discarded");
    evaluate->add_flag("--no-noise-filter", no_noise_filter,
                       "weight every pair 0.5 instead of by gap-noise confidence");
    evaluate->add_flag("--weak", weak, "merge environments over contexts per value pair");
    evaluate->add_option("--subset", subset, "keep only records of this dataset id");
    evaluate->add_option("--out", out_dir, "directory for environments.csv and summary.csv");
    evaluate->add_flag("--inject-oracles", inject_oracles,
                       "add oracle.gap / oracle.neg.gap / oracle.const before evaluating");

    auto* regress = app.add_subcommand("regress", "minimax affine fit of each measure to the gap");
    add_common(regress);
    std::string family = "per_config";
    regress->add_option("--family", family,
                        "environment family: per_config, single_axis, all_but_one");
    regress->add_option("--subset", subset, "keep only records of this dataset id");
    regress->add_option("--out", out_dir, "directory for the regression csv");

    auto* report = app.add_subcommand("report", "render summary CSVs to SVG and markdown");
    std::vector<std::string> inputs;
    report->add_option("inputs", inputs, "summary.csv files from evaluate")->required();
    report->add_option("--out", out_dir, "directory for the rendered files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : robustgen::kExitConfig;
    }

    if (generate->parsed()) {
        robustgen::GenerateArgs args{config_path, store_path, verbose};
        return robustgen::cmd_generate(args, std::cout, std::cerr);
    }
    if (measure->parsed()) {
        robustgen::MeasureArgs args{config_path, store_path};
        return robustgen::cmd_measure(args, std::cout, std::cerr);
    }
    if (evaluate->parsed()) {
        robustgen::EvaluateArgs args;
        args.config_path = config_path;
        args.store_path = store_path;
        args.axes = axes;
        args.n_eff_min = n_eff_min;
        args.no_noise_filter = no_noise_filter;
        args.weak = weak;
        args.subset = subset;
        args.out_dir = out_dir;
        args.inject_oracles = inject_oracles;
        return robustgen::cmd_evaluate(args, std::cout, std::cerr);
    }
    if (regress->parsed()) {
        robustgen::RegressArgs args{config_path, store_path, family, subset, out_dir};
        return robustgen::cmd_regress(args, std::cout, std::cerr);
    }
    robustgen::ReportArgs args{inputs, out_dir};
    return robustgen::cmd_report(args, std::cout, std::cerr);
}
