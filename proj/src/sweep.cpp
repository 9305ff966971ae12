#include "robustgen/sweep.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>

#include "robustgen/checkpoint.hpp"
#include "robustgen/errors.hpp"
#include "robustgen/rng.hpp"
#include "robustgen/trainer.hpp"

namespace robustgen {

std::string run_slug(const HyperparameterConfig& config, int seed_index) {
    std::string slug = config.key();
    for (char& c : slug) {
        if (c == ';') c = '_';
        if (c == '=') c = '-';
    }
    return slug + "__s" + std::to_string(seed_index);
}

namespace {

const DatasetSpec& dataset_spec_for(const SweepOptions& opts, const std::string& id) {
    auto it = opts.datasets.find(id);
    if (it == opts.datasets.end()) {
        throw Error("run_grid: config references unknown dataset id '" + id + "'");
    }
    return it->second;
}

}  // namespace

SweepSummary run_grid(const std::vector<HyperparameterConfig>& grid, const SweepOptions& opts,
                      RecordStore& store) {
    SweepSummary summary;
    if (!opts.checkpoint_dir.empty()) {
        std::filesystem::create_directories(opts.checkpoint_dir);
    }

    for (const auto& config : grid) {
        const DatasetSpec& ds_spec = dataset_spec_for(opts, config.dataset_id);
        for (int seed = 0; seed < opts.num_seeds; ++seed) {
            if (store.has(config, seed)) {
                ++summary.skipped;
                continue;
            }

            // Data depends only on (dataset, train size, seed index) so
            // configs that differ in architecture or learning rate see the
            // same sample; init and batch order depend on the full config.
            const std::string data_label =
                "data|" + config.dataset_id + "|m=" + std::to_string(config.train_size);
            const std::uint64_t data_seed =
                derive_seed(opts.master_seed, data_label, static_cast<std::uint64_t>(seed));
            const std::uint64_t init_seed = derive_seed(
                opts.master_seed, "init|" + config.key(), static_cast<std::uint64_t>(seed));
            const std::uint64_t sgd_seed = derive_seed(
                opts.master_seed, "sgd|" + config.key(), static_cast<std::uint64_t>(seed));

            auto [train_set, test_set] =
                make_dataset(ds_spec, config.train_size, opts.test_size, data_seed);
            nn::Network net =
                build_network(config, ds_spec.input_dim, ds_spec.num_classes, init_seed);

            TrainOptions topt;
            topt.learning_rate = config.learning_rate;
            topt.momentum = opts.momentum;
            topt.ce_target = opts.ce_target;
            topt.max_epochs = opts.max_epochs;
            topt.batch_size = opts.batch_size;
            topt.seed = sgd_seed;
            const TrainResult result = train(net, train_set, topt);

            ExperimentRecord rec;
            rec.config = config;
            rec.seed = seed;
            rec.status = result.status;
            rec.diverged = result.diverged;
            rec.train_error = result.train_error;
            rec.final_cross_entropy = result.final_cross_entropy;
            rec.epochs_run = result.epochs_run;
            rec.train_set_size = static_cast<int>(train_set.labels.size());
            rec.test_set_size = static_cast<int>(test_set.labels.size());
            rec.manifest_hash = opts.manifest_hash;
            if (result.diverged) {
                rec.test_error = std::numeric_limits<double>::quiet_NaN();
                rec.gap = std::numeric_limits<double>::quiet_NaN();
            } else {
                rec.test_error = evaluate_error(net, test_set);
                rec.gap = rec.test_error - rec.train_error;
            }

            if (!opts.checkpoint_dir.empty() && !result.diverged) {
                const std::string path =
                    opts.checkpoint_dir + "/" + run_slug(config, seed) + ".json";
                try {
                    nn::Checkpoint ckpt;
                    ckpt.config_id = config.key();
                    ckpt.seed = seed;
                    ckpt.net = net;
                    nn::save_checkpoint(ckpt, path);
                    rec.checkpoint_path = path;
                } catch (const std::exception& e) {
                    // Keep the record; a missing checkpoint only blocks the
                    // measure stage for this one run.
                    std::cerr << "warning: checkpoint write failed for "
                              << run_slug(config, seed) << ": " << e.what() << "\n";
                }
            }

            store.append(rec);
            ++summary.trained;
            if (result.status == RunStatus::converged) {
                ++summary.converged;
            } else {
                ++summary.failed;
            }
            if (opts.verbose && summary.trained % 50 == 0) {
                std::cerr << "progress: " << summary.trained << " trained, " << summary.skipped
                          << " skipped\n";
            }
        }
    }
    return summary;
}

}  // namespace robustgen
