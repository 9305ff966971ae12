#include "robustgen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robustgen/errors.hpp"
#include "robustgen/rng.hpp"

namespace robustgen {

namespace {

using nn::Layer;
using nn::LayerKind;
using nn::Network;

// y[b, out] = x[b, in] * W^T (+ bias). Plain loops; the j-inner dot product
// is contiguous in both operands, which is what the optimizer wants.
void dense_forward(const Layer& l, const double* x, double* y, std::size_t b) {
    const std::size_t fi = l.spec.fan_in, fo = l.spec.fan_out;
    const double* W = l.weights.data.data();
    for (std::size_t i = 0; i < b; ++i) {
        const double* xi = x + i * fi;
        double* yi = y + i * fo;
        for (std::size_t j = 0; j < fo; ++j) {
            const double* wj = W + j * fi;
            double acc = l.spec.has_bias ? l.bias.data[j] : 0.0;
            for (std::size_t k = 0; k < fi; ++k) acc += wj[k] * xi[k];
            yi[j] = acc;
        }
    }
}

void require_dense(const Network& net) {
    for (const auto& l : net.layers)
        if (l.spec.kind != LayerKind::dense)
            throw DimensionError("trainer only drives dense stacks");
}

// Logits for rows [from, from+b) of the dataset, written to `out`.
// `scratch` must hold 2 * b * widest_layer doubles.
void logits_block(const Network& net, const Dataset& ds, std::size_t from, std::size_t b,
                  double* out, std::vector<double>& scratch) {
    const std::size_t d = ds.features.dim(1);
    double* cur = scratch.data();
    double* nxt = scratch.data() + scratch.size() / 2;
    std::copy(ds.features.data.begin() + from * d, ds.features.data.begin() + (from + b) * d,
              cur);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const Layer& l = net.layers[li];
        const bool last = li + 1 == net.layers.size();
        double* dst = last ? out : nxt;
        dense_forward(l, cur, dst, b);
        if (!last) {
            const std::size_t count = b * l.spec.fan_out;
            for (std::size_t i = 0; i < count; ++i) dst[i] = dst[i] > 0.0 ? dst[i] : 0.0;
            std::swap(cur, nxt);  // cur now holds this layer's activations
        }
    }
}

std::size_t widest(const Network& net) {
    std::size_t w = net.layers.front().spec.fan_in;
    for (const auto& l : net.layers) w = std::max(w, l.spec.fan_out);
    return w;
}

constexpr std::size_t kEvalBlock = 256;

}  // namespace

std::string run_status_name(RunStatus s) {
    return s == RunStatus::converged ? "converged" : "failed";
}

RunStatus run_status_from_name(const std::string& s) {
    if (s == "converged") return RunStatus::converged;
    if (s == "failed") return RunStatus::failed;
    throw ParseError("unknown run status '" + s + "'");
}

nn::Network build_network(const HyperparameterConfig& config, int input_dim,
                          int num_classes, std::uint64_t init_seed) {
    if (config.depth < 1) throw DimensionError("depth must be at least 1");
    if (config.width < 1) throw DimensionError("width must be at least 1");
    std::vector<std::size_t> dims;
    dims.push_back(static_cast<std::size_t>(input_dim));
    for (int i = 0; i < config.depth - 1; ++i)
        dims.push_back(static_cast<std::size_t>(config.width));
    dims.push_back(static_cast<std::size_t>(num_classes));
    return nn::make_dense_network(dims, true, init_seed);
}

double evaluate_error(const nn::Network& net, const Dataset& ds) {
    require_dense(net);
    if (ds.size() == 0) throw EmptyDataError("evaluate_error on an empty dataset");
    const std::size_t n = ds.size();
    const std::size_t out_dim = net.layers.back().spec.fan_out;
    std::vector<double> logits(kEvalBlock * out_dim);
    std::vector<double> scratch(2 * kEvalBlock * widest(net));
    std::size_t wrong = 0;
    for (std::size_t from = 0; from < n; from += kEvalBlock) {
        const std::size_t b = std::min(kEvalBlock, n - from);
        logits_block(net, ds, from, b, logits.data(), scratch);
        for (std::size_t i = 0; i < b; ++i) {
            const double* row = logits.data() + i * out_dim;
            std::size_t best = 0;
            for (std::size_t j = 1; j < out_dim; ++j)
                if (row[j] > row[best]) best = j;  // strict >, so ties keep the lowest index
            if (static_cast<int>(best) != ds.labels[from + i]) ++wrong;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(n);
}

double cross_entropy(const nn::Network& net, const Dataset& ds) {
    require_dense(net);
    if (ds.size() == 0) throw EmptyDataError("cross_entropy on an empty dataset");
    const std::size_t n = ds.size();
    const std::size_t out_dim = net.layers.back().spec.fan_out;
    std::vector<double> logits(kEvalBlock * out_dim);
    std::vector<double> scratch(2 * kEvalBlock * widest(net));
    double total = 0.0;
    for (std::size_t from = 0; from < n; from += kEvalBlock) {
        const std::size_t b = std::min(kEvalBlock, n - from);
        logits_block(net, ds, from, b, logits.data(), scratch);
        for (std::size_t i = 0; i < b; ++i) {
            const double* row = logits.data() + i * out_dim;
            double zmax = row[0];
            for (std::size_t j = 1; j < out_dim; ++j) zmax = std::max(zmax, row[j]);
            double lse = 0.0;
            for (std::size_t j = 0; j < out_dim; ++j) lse += std::exp(row[j] - zmax);
            total += std::log(lse) + zmax - row[ds.labels[from + i]];
        }
    }
    return total / static_cast<double>(n);
}

TrainResult train(nn::Network& net, const Dataset& train_set, const TrainOptions& opts) {
    require_dense(net);
    net.validate();
    if (train_set.size() == 0) throw EmptyDataError("training on an empty dataset");
    const std::size_t n = train_set.size();
    const std::size_t d = train_set.features.dim(1);
    const std::size_t out_dim = net.layers.back().spec.fan_out;
    for (int y : train_set.labels)
        if (y < 0 || static_cast<std::size_t>(y) >= out_dim)
            throw DimensionError("training label out of range of the network output");
    const std::size_t B = static_cast<std::size_t>(std::max(1, opts.batch_size));
    const std::size_t L = net.layers.size();

    // Momentum state and gradient accumulators, one span per layer.
    std::vector<std::vector<double>> vel_w(L), vel_b(L), gw(L), gb(L);
    for (std::size_t l = 0; l < L; ++l) {
        vel_w[l].assign(net.layers[l].weights.size(), 0.0);
        gw[l].assign(net.layers[l].weights.size(), 0.0);
        vel_b[l].assign(net.layers[l].bias.size(), 0.0);
        gb[l].assign(net.layers[l].bias.size(), 0.0);
    }
    // Batch workspaces: activations per layer boundary and deltas per layer.
    std::vector<std::vector<double>> acts(L + 1), deltas(L);
    acts[0].assign(B * d, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        acts[l + 1].assign(B * net.layers[l].spec.fan_out, 0.0);
        deltas[l].assign(B * net.layers[l].spec.fan_out, 0.0);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainResult res;
    for (int epoch = 0;; ++epoch) {
        // Stopping criterion on the entire training set, before any updates
        // this epoch; a net that is born converged trains for zero epochs.
        const double ce = cross_entropy(net, train_set);
        res.final_cross_entropy = ce;
        if (!std::isfinite(ce)) {
            res.diverged = true;
            res.status = RunStatus::failed;
            res.train_error = std::numeric_limits<double>::quiet_NaN();
            return res;
        }
        if (ce <= opts.ce_target) {
            res.train_error = evaluate_error(net, train_set);
            res.status =
                (1.0 - res.train_error >= 0.99) ? RunStatus::converged : RunStatus::failed;
            return res;
        }
        if (epoch >= opts.max_epochs) {
            res.train_error = evaluate_error(net, train_set);
            res.status = RunStatus::failed;
            return res;
        }

        Rng rng(derive_seed(opts.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        for (std::size_t start = 0; start < n; start += B) {
            const std::size_t b = std::min(B, n - start);
            // Gather the batch.
            for (std::size_t i = 0; i < b; ++i)
                std::copy(train_set.features.data.begin() + order[start + i] * d,
                          train_set.features.data.begin() + (order[start + i] + 1) * d,
                          acts[0].begin() + i * d);
            // Forward, keeping post-ReLU activations per boundary.
            for (std::size_t l = 0; l < L; ++l) {
                dense_forward(net.layers[l], acts[l].data(), acts[l + 1].data(), b);
                if (l + 1 < L) {
                    double* a = acts[l + 1].data();
                    const std::size_t count = b * net.layers[l].spec.fan_out;
                    for (std::size_t i = 0; i < count; ++i) a[i] = a[i] > 0.0 ? a[i] : 0.0;
                }
            }
            // Softmax gradient at the logits, scaled for the batch mean.
            {
                double* z = acts[L].data();
                double* dl = deltas[L - 1].data();
                const double inv_b = 1.0 / static_cast<double>(b);
                for (std::size_t i = 0; i < b; ++i) {
                    const double* row = z + i * out_dim;
                    double zmax = row[0];
                    for (std::size_t j = 1; j < out_dim; ++j) zmax = std::max(zmax, row[j]);
                    double lse = 0.0;
                    for (std::size_t j = 0; j < out_dim; ++j) lse += std::exp(row[j] - zmax);
                    const int y = train_set.labels[order[start + i]];
                    for (std::size_t j = 0; j < out_dim; ++j) {
                        const double p = std::exp(row[j] - zmax) / lse;
                        dl[i * out_dim + j] =
                            (p - (static_cast<int>(j) == y ? 1.0 : 0.0)) * inv_b;
                    }
                }
            }
            // Backward and parameter update, output layer inward.
            for (std::size_t l = L; l-- > 0;) {
                const Layer& layer = net.layers[l];
                const std::size_t fi = layer.spec.fan_in, fo = layer.spec.fan_out;
                std::fill(gw[l].begin(), gw[l].end(), 0.0);
                std::fill(gb[l].begin(), gb[l].end(), 0.0);
                const double* dl = deltas[l].data();
                const double* a_in = acts[l].data();
                for (std::size_t i = 0; i < b; ++i) {
                    const double* di = dl + i * fo;
                    const double* ai = a_in + i * fi;
                    for (std::size_t j = 0; j < fo; ++j) {
                        const double dj = di[j];
                        if (dj == 0.0) continue;
                        double* gwj = gw[l].data() + j * fi;
                        for (std::size_t k = 0; k < fi; ++k) gwj[k] += dj * ai[k];
                        gb[l][j] += dj;
                    }
                }
                if (l > 0) {
                    // delta_{l-1} = (delta_l @ W_l) masked by ReLU slope.
                    double* dprev = deltas[l - 1].data();
                    const double* W = layer.weights.data.data();
                    for (std::size_t i = 0; i < b; ++i) {
                        double* dp = dprev + i * fi;
                        std::fill(dp, dp + fi, 0.0);
                        const double* di = dl + i * fo;
                        for (std::size_t j = 0; j < fo; ++j) {
                            const double dj = di[j];
                            if (dj == 0.0) continue;
                            const double* wj = W + j * fi;
                            for (std::size_t k = 0; k < fi; ++k) dp[k] += dj * wj[k];
                        }
                        const double* ai = acts[l].data() + i * fi;
                        for (std::size_t k = 0; k < fi; ++k)
                            if (ai[k] <= 0.0) dp[k] = 0.0;
                    }
                }
                // Classical momentum.
                double* W = net.layers[l].weights.data.data();
                for (std::size_t k = 0; k < gw[l].size(); ++k) {
                    vel_w[l][k] = opts.momentum * vel_w[l][k] - opts.learning_rate * gw[l][k];
                    W[k] += vel_w[l][k];
                }
                double* bias = net.layers[l].bias.data.data();
                for (std::size_t k = 0; k < gb[l].size(); ++k) {
                    vel_b[l][k] = opts.momentum * vel_b[l][k] - opts.learning_rate * gb[l][k];
                    bias[k] += vel_b[l][k];
                }
            }
        }
        ++res.epochs_run;
    }
}

}  // namespace robustgen
