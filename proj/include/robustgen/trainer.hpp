#pragma once

#include <cstdint>
#include <string>

#include "robustgen/config.hpp"
#include "robustgen/dataset.hpp"
#include "robustgen/network.hpp"

namespace robustgen {

struct TrainOptions {
    double learning_rate = 0.01;
    double momentum = 0.9;
    double ce_target = 0.01;  // full-train-set cross-entropy stopping threshold
    int max_epochs = 2000;
    int batch_size = 32;
    std::uint64_t seed = 0;   // drives minibatch shuffling only
};

enum class RunStatus { converged, failed };

std::string run_status_name(RunStatus s);
RunStatus run_status_from_name(const std::string& s);

struct TrainResult {
    RunStatus status = RunStatus::failed;
    double final_cross_entropy = 0.0;  // last full-train-set value observed
    double train_error = 0.0;          // at stopping time; NaN if diverged
    int epochs_run = 0;                // update epochs actually executed
    bool diverged = false;             // loss or weights went non-finite
};

// Builds the model for one grid cell: a dense ReLU stack
// input_dim -> width x (depth-1) -> num_classes with He fan-in init.
// depth counts weight layers, so depth 1 is a linear softmax model.
nn::Network build_network(const HyperparameterConfig& config, int input_dim,
                          int num_classes, std::uint64_t init_seed);

// Minibatch SGD with classical momentum (v = mu*v - lr*g; w += v) on softmax
// cross-entropy. The stopping criterion is checked against the full training
// set before each update epoch, so a net that already meets the target trains
// for zero epochs. Converged means: cross-entropy <= ce_target AND training
// accuracy >= 0.99. Hitting max_epochs or diverging yields status failed.
// The network is modified in place.
TrainResult train(nn::Network& net, const Dataset& train_set, const TrainOptions& opts);

// Classification error (argmax with lowest-index tie break). Throws
// EmptyDataError on an empty set.
double evaluate_error(const nn::Network& net, const Dataset& ds);

// Mean softmax cross-entropy over the set (natural log, numerically stable).
double cross_entropy(const nn::Network& net, const Dataset& ds);

}  // namespace robustgen
