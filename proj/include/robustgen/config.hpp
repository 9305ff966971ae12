#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace robustgen {

// The five hyperparameter axes a sweep can vary. Coupled environments and
// regression environment families are both defined in terms of these.
enum class Axis { learning_rate, depth, width, dataset, train_size };

inline constexpr std::array<Axis, 5> kAllAxes = {
    Axis::learning_rate, Axis::depth, Axis::width, Axis::dataset, Axis::train_size};

std::string axis_name(Axis a);
std::optional<Axis> axis_from_name(const std::string& name);

// One cell of the sweep grid. depth counts weight layers; width is the hidden
// layer size; train_size is the number of training examples drawn.
struct HyperparameterConfig {
    double learning_rate = 0.0;
    int depth = 0;
    int width = 0;
    std::string dataset_id;
    int train_size = 0;

    bool operator==(const HyperparameterConfig&) const = default;

    // Canonical id, e.g. "lr=0.01;depth=2;width=16;ds=teacher;m=64".
    // Field order is fixed; floats use shortest round-trip form. No commas,
    // so the key embeds safely in CSV.
    std::string key() const;
};

// The value a config takes on one axis, as canonical text / as a sort key.
// Dataset ids sort lexicographically; the numeric key is NaN for them.
std::string axis_value_string(const HyperparameterConfig& c, Axis a);
double axis_value_number(const HyperparameterConfig& c, Axis a);

// Orders two values of one axis ascending (numeric axes by value, dataset ids
// lexicographically). Used to canonicalize environment direction.
bool axis_value_less(Axis a, const std::string& va, const std::string& vb);

// Number of axes on which a and b differ; when exactly one, *only_axis names
// it. This is what decides whether two configs form a coupled pair.
int count_differing_axes(const HyperparameterConfig& a, const HyperparameterConfig& b,
                         Axis* only_axis = nullptr);

// Cartesian grid over per-axis value lists. configs() enumerates in a fixed
// canonical order (dataset, train_size, depth, width, learning_rate innermost).
struct GridSpec {
    std::vector<double> learning_rates;
    std::vector<int> depths;
    std::vector<int> widths;
    std::vector<std::string> dataset_ids;
    std::vector<int> train_sizes;

    std::vector<HyperparameterConfig> configs() const;
};

}  // namespace robustgen
