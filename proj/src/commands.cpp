#include "robustgen/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "robustgen/checkpoint.hpp"
#include "robustgen/csv.hpp"
#include "robustgen/errors.hpp"
#include "robustgen/manifest.hpp"
#include "robustgen/measures.hpp"
#include "robustgen/report.hpp"
#include "robustgen/robust_eval.hpp"
#include "robustgen/robust_regress.hpp"
#include "robustgen/rng.hpp"
#include "robustgen/store.hpp"
#include "robustgen/sweep.hpp"
#include "robustgen/text.hpp"

namespace robustgen {

namespace {

template <typename F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const EmptyDataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitEmptyData;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const VersionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const IngestionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

std::string resolve_store_path(const RunManifest& manifest, const std::string& override_path) {
    return override_path.empty() ? manifest.store_path : override_path;
}

// Every record must come from the manifest in hand, or measures would be
// computed against the wrong data and evaluations tagged with the wrong
// settings. ROBUSTGEN_SEED is part of the hash, so forgetting to set it on a
// later stage is caught here too.
void verify_store_hash(const std::vector<ExperimentRecord>& records, const RunManifest& manifest,
                       const std::string& store_path) {
    const std::string expect = manifest.hash();
    for (const auto& r : records) {
        if (r.manifest_hash != expect) {
            throw ParseError("store '" + store_path + "' was generated under manifest " +
                             r.manifest_hash + " but the current settings hash to " + expect +
                             " (check the manifest file and ROBUSTGEN_SEED)");
        }
    }
}

std::vector<ExperimentRecord> converged_subset(const RecordStore& store,
                                               const std::string& subset,
                                               const std::string& store_path) {
    if (store.records().empty())
        throw EmptyDataError("store '" + store_path + "' holds no records; run generate first");
    std::vector<ExperimentRecord> records = filter_converged(store.records());
    if (!subset.empty()) {
        std::erase_if(records,
                      [&](const ExperimentRecord& r) { return r.config.dataset_id != subset; });
    }
    if (records.empty())
        throw EmptyDataError(subset.empty()
                                 ? "store '" + store_path + "' holds no converged records"
                                 : "no converged records for dataset '" + subset + "'");
    return records;
}

// Canonical measure names first (in their fixed order), then any extra names
// found in the records (injected oracles, external additions) alphabetically.
std::vector<std::string> ordered_measure_names(const std::vector<ExperimentRecord>& records) {
    std::set<std::string> present;
    for (const auto& r : records)
        for (const auto& [name, value] : r.measures) {
            (void)value;
            present.insert(name);
        }
    std::vector<std::string> names;
    for (measures::MeasureId id : measures::all_measures()) {
        std::string n{measures::measure_name(id)};
        if (present.erase(n) > 0) names.push_back(std::move(n));
    }
    names.insert(names.end(), present.begin(), present.end());
    return names;
}

std::string opt_cell(bool defined, double v) { return defined ? format_double(v) : ""; }

}  // namespace

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        const RunManifest manifest = load_manifest(args.config_path);
        const std::string store_path = resolve_store_path(manifest, args.store_path);
        RecordStore store(store_path);
        verify_store_hash(store.records(), manifest, store_path);

        SweepOptions opts = manifest.sweep_options();
        opts.verbose = args.verbose;
        const std::vector<HyperparameterConfig> grid = manifest.grid.configs();
        const SweepSummary s = run_grid(grid, opts, store);

        out << "trained " << s.trained << " runs, skipped " << s.skipped
            << " already in the store\n";
        out << s.converged << " runs converged; " << s.failed
            << " runs failed to meet the cross-entropy criterion\n";
        out << "store " << store_path << " now holds " << store.records().size()
            << " records under manifest " << manifest.hash() << "\n";
        return kExitOk;
    });
}

int cmd_measure(const MeasureArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        const RunManifest manifest = load_manifest(args.config_path);
        const std::string store_path = resolve_store_path(manifest, args.store_path);
        RecordStore store(store_path);
        if (store.records().empty())
            throw EmptyDataError("store '" + store_path +
                                 "' holds no records; run generate first");
        verify_store_hash(store.records(), manifest, store_path);

        std::vector<ExperimentRecord> records = store.records();
        int measured = 0, already = 0, not_converged = 0, skipped = 0;
        std::size_t undefined_cells = 0;
        for (ExperimentRecord& rec : records) {
            if (rec.status != RunStatus::converged) {
                ++not_converged;
                continue;
            }
            if (!rec.measures.empty()) {
                ++already;
                continue;
            }
            try {
                if (rec.checkpoint_path.empty()) throw Error("no checkpoint was written");
                const nn::Checkpoint ck = nn::load_checkpoint(rec.checkpoint_path);
                if (ck.config_id != rec.config.key())
                    throw Error("checkpoint belongs to config " + ck.config_id);
                const auto spec_it = manifest.datasets.find(rec.config.dataset_id);
                if (spec_it == manifest.datasets.end())
                    throw Error("no dataset spec for id '" + rec.config.dataset_id + "'");

                // Same derivation the sweep used, so the training set is
                // rebuilt bit-exactly.
                const std::string data_label = "data|" + rec.config.dataset_id +
                                               "|m=" + std::to_string(rec.config.train_size);
                const std::uint64_t data_seed =
                    derive_seed(manifest.sweep.master_seed, data_label, rec.seed);
                const auto [train_set, test_set] = make_dataset(
                    spec_it->second, rec.config.train_size, manifest.sweep.test_size, data_seed);
                (void)test_set;

                // Seeded from checkpoint content alone: identical weights
                // produce bitwise-identical vectors whenever this runs.
                const std::uint64_t sigma_seed_base =
                    derive_seed(ck.seed, "measure|" + ck.config_id);
                const measures::MeasureContext ctx =
                    measures::make_context(ck.net, train_set, manifest.measure, sigma_seed_base);
                rec.measures = measures::compute_all(ctx).to_named();
                for (const auto& [name, value] : rec.measures)
                    if (!value.has_value()) ++undefined_cells;
                ++measured;
            } catch (const std::exception& e) {
                ++skipped;
                err << "warning: skipping " << rec.config.key() << " seed " << rec.seed << ": "
                    << e.what() << "\n";
            }
        }
        if (measured > 0) store.rewrite(records);

        out << "measured " << measured << " records (" << already << " already measured, "
            << not_converged << " not converged, " << skipped << " skipped)\n";
        if (measured > 0)
            out << undefined_cells << " of " << measured * measures::kMeasureCount
                << " measure cells are undefined\n";
        return kExitOk;
    });
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        const RunManifest manifest = load_manifest(args.config_path);
        const std::string store_path = resolve_store_path(manifest, args.store_path);
        RecordStore store(store_path);
        verify_store_hash(store.records(), manifest, store_path);
        std::vector<ExperimentRecord> records =
            converged_subset(store, args.subset, store_path);

        if (args.inject_oracles) {
            for (ExperimentRecord& r : records) {
                r.measures["oracle.gap"] = r.gap;
                r.measures["oracle.neg.gap"] = -r.gap;
                r.measures["oracle.const"] = 1.0;
            }
        }
        const std::vector<std::string> names = ordered_measure_names(records);
        if (names.empty())
            throw EmptyDataError("no measures present in the store; run measure first");

        std::vector<eval::CoupledEnvironment> envs = eval::build_coupled_environments(records);
        if (args.weak) envs = eval::build_weak_environments(envs);
        if (!args.axes.empty()) {
            std::vector<Axis> axes;
            for (const std::string& name : args.axes) {
                const auto a = axis_from_name(name);
                if (!a.has_value()) throw ConfigError("unknown axis '" + name + "'");
                axes.push_back(*a);
            }
            envs = eval::filter_by_axes(envs, axes);
        }
        if (envs.empty()) throw EmptyDataError("no coupled environments in the selection");

        eval::EvalOptions opts = manifest.evaluation;
        if (args.n_eff_min >= 0.0) opts.n_eff_min = args.n_eff_min;
        if (args.no_noise_filter) opts.noise_filter = false;

        // Axis families present, in canonical order, preceded by "All".
        std::vector<Axis> present;
        for (Axis a : kAllAxes)
            if (std::any_of(envs.begin(), envs.end(),
                            [&](const auto& e) { return e.axis == a; }))
                present.push_back(a);

        CsvTable env_table;
        env_table.manifest_hash = manifest.hash();
        env_table.header = {"measure",       "axis",      "value_a", "value_b",
                            "context",       "weak",      "pairs_used", "pairs_skipped",
                            "kappa_sum",     "n_eff",     "sign_error"};
        CsvTable summary_table;
        summary_table.manifest_hash = manifest.hash();
        summary_table.header = {"measure", "family", "envs_used", "envs_skipped",
                                "max",     "p90",    "median",    "mean"};

        std::size_t robust_one = 0, with_all = 0;
        for (const std::string& name : names) {
            const eval::MeasureEvaluation all = eval::evaluate_measure(envs, name, opts);
            for (std::size_t i = 0; i < envs.size(); ++i) {
                const eval::CoupledEnvironment& e = envs[i];
                const eval::SignErrorResult& r = all.per_env[i];
                env_table.rows.push_back({name, axis_name(e.axis), e.value_a, e.value_b,
                                          e.context_key, e.weak ? "1" : "0",
                                          std::to_string(r.pairs_used),
                                          std::to_string(r.pairs_skipped),
                                          format_double(r.kappa_sum), format_double(r.n_eff),
                                          opt_cell(r.defined, r.value)});
            }
            const auto push_summary = [&](const eval::FamilySummary& s) {
                summary_table.rows.push_back(
                    {s.measure, s.family, std::to_string(s.envs_used),
                     std::to_string(s.envs_skipped), opt_cell(s.defined, s.max_value),
                     opt_cell(s.defined, s.p90_value), opt_cell(s.defined, s.median_value),
                     opt_cell(s.defined, s.mean_value)});
            };
            const eval::FamilySummary all_summary = eval::summarize_family(all, "All");
            push_summary(all_summary);
            if (all_summary.defined) {
                ++with_all;
                if (all_summary.max_value == 1.0) ++robust_one;
            }
            for (Axis a : present) {
                const auto family_envs = eval::filter_by_axes(envs, {a});
                push_summary(eval::summarize_family(
                    eval::evaluate_measure(family_envs, name, opts), axis_name(a)));
            }
        }

        std::filesystem::create_directories(args.out_dir);
        const std::string env_path = args.out_dir + "/environments.csv";
        const std::string summary_path = args.out_dir + "/summary.csv";
        write_csv_file(env_path, env_table);
        write_csv_file(summary_path, summary_table);

        out << envs.size() << (args.weak ? " weak" : " strict") << " environments (";
        for (std::size_t i = 0; i < present.size(); ++i) {
            const Axis a = present[i];
            const auto n = std::count_if(envs.begin(), envs.end(),
                                         [&](const auto& e) { return e.axis == a; });
            out << (i ? ", " : "") << axis_name(a) << " " << n;
        }
        out << "), " << names.size() << " measures\n";
        if (robust_one > 0) {
            out << robust_one << " of " << with_all
                << " measures attain worst-case sign-error 1.0 over the All family\n";
        } else {
            out << "no measure attains worst-case sign-error 1.0 over the All family at this "
                   "scale\n";
        }
        out << "wrote " << env_path << " and " << summary_path << "\n";
        return kExitOk;
    });
}

int cmd_regress(const RegressArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        const RunManifest manifest = load_manifest(args.config_path);
        const auto kind = regress::family_kind_from_name(args.family);
        if (!kind.has_value())
            throw ConfigError("unknown regression family '" + args.family +
                              "' (per_config, single_axis, all_but_one)");
        const std::string store_path = resolve_store_path(manifest, args.store_path);
        RecordStore store(store_path);
        verify_store_hash(store.records(), manifest, store_path);
        const std::vector<ExperimentRecord> records =
            converged_subset(store, args.subset, store_path);
        const std::vector<std::string> names = ordered_measure_names(records);
        if (names.empty())
            throw EmptyDataError("no measures present in the store; run measure first");

        const std::vector<regress::RegressionRow> rows =
            regress::regression_report(records, *kind, names);

        CsvTable table;
        table.manifest_hash = manifest.hash();
        table.header = {"measure",   "envs_used", "envs_dropped", "records_dropped",
                        "slope",     "intercept", "degenerate",   "robust_rmse",
                        "mean_rmse"};
        for (const auto& r : rows) {
            table.rows.push_back({r.measure, std::to_string(r.envs_used),
                                  std::to_string(r.envs_dropped),
                                  std::to_string(r.records_dropped), format_double(r.fit.slope),
                                  format_double(r.fit.intercept), r.fit.degenerate ? "1" : "0",
                                  format_double(r.robust_rmse), format_double(r.mean_rmse)});
        }
        std::filesystem::create_directories(args.out_dir);
        const std::string path = args.out_dir + "/regression_" + args.family + ".csv";
        write_csv_file(path, table);

        const regress::RegressionRow* best = nullptr;
        for (const auto& r : rows)
            if (r.measure != "baseline" && (best == nullptr || r.robust_rmse < best->robust_rmse))
                best = &r;
        out << rows.size() << " rows over family " << args.family << "\n";
        if (best != nullptr) {
            out << "lowest robust rmse: " << best->measure << " at "
                << format_double(best->robust_rmse) << " (baseline "
                << format_double(rows.back().robust_rmse) << ")\n";
        }
        out << "wrote " << path << "\n";
        return kExitOk;
    });
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        if (args.inputs.empty()) throw ConfigError("report needs at least one summary csv");

        const std::vector<std::string> expect_header = {"measure", "family", "envs_used",
                                                        "envs_skipped", "max", "p90",
                                                        "median", "mean"};
        std::string hash;
        std::vector<std::pair<std::string, std::vector<eval::FamilySummary>>> inputs;
        for (const std::string& path : args.inputs) {
            const CsvTable table = read_csv_file(path);
            if (table.header != expect_header)
                throw ParseError(path + ": not a summary csv (unexpected header)");
            if (hash.empty()) hash = table.manifest_hash;
            if (table.manifest_hash != hash)
                throw ParseError(path + ": manifest hash " + table.manifest_hash +
                                 " does not match " + hash + " from the first input");
            std::vector<eval::FamilySummary> cells;
            for (const auto& row : table.rows) {
                eval::FamilySummary s;
                s.measure = row[0];
                s.family = row[1];
                s.envs_used = static_cast<std::size_t>(parse_int(row[2]));
                s.envs_skipped = static_cast<std::size_t>(parse_int(row[3]));
                s.defined = !row[4].empty();
                if (s.defined) {
                    s.max_value = parse_double(row[4]);
                    s.p90_value = parse_double(row[5]);
                    s.median_value = parse_double(row[6]);
                    s.mean_value = parse_double(row[7]);
                }
                cells.push_back(std::move(s));
            }
            inputs.emplace_back(path, std::move(cells));
        }

        std::filesystem::create_directories(args.out_dir);
        for (const auto& [path, cells] : inputs) {
            const std::string stem = std::filesystem::path(path).stem().string();
            const std::string svg_path = args.out_dir + "/" + stem + ".svg";
            const std::string md_path = args.out_dir + "/" + stem + ".md";
            std::ofstream svg(svg_path, std::ios::binary | std::ios::trunc);
            if (!svg) throw IngestionError("cannot write '" + svg_path + "'");
            svg << report::render_svg(cells, hash);
            std::ofstream md(md_path, std::ios::binary | std::ios::trunc);
            if (!md) throw IngestionError("cannot write '" + md_path + "'");
            md << report::render_markdown(cells, hash);
            out << "wrote " << svg_path << " and " << md_path << "\n";
        }
        return kExitOk;
    });
}

}  // namespace robustgen
