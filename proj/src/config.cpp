#include "robustgen/config.hpp"

#include <cmath>
#include <limits>

#include "robustgen/errors.hpp"
#include "robustgen/text.hpp"

namespace robustgen {

std::string axis_name(Axis a) {
    switch (a) {
        case Axis::learning_rate: return "learning_rate";
        case Axis::depth: return "depth";
        case Axis::width: return "width";
        case Axis::dataset: return "dataset";
        case Axis::train_size: return "train_size";
    }
    throw Error("unreachable axis");
}

std::optional<Axis> axis_from_name(const std::string& name) {
    for (Axis a : kAllAxes)
        if (axis_name(a) == name) return a;
    return std::nullopt;
}

std::string HyperparameterConfig::key() const {
    return "lr=" + format_double(learning_rate) + ";depth=" + std::to_string(depth) +
           ";width=" + std::to_string(width) + ";ds=" + dataset_id +
           ";m=" + std::to_string(train_size);
}

std::string axis_value_string(const HyperparameterConfig& c, Axis a) {
    switch (a) {
        case Axis::learning_rate: return format_double(c.learning_rate);
        case Axis::depth: return std::to_string(c.depth);
        case Axis::width: return std::to_string(c.width);
        case Axis::dataset: return c.dataset_id;
        case Axis::train_size: return std::to_string(c.train_size);
    }
    throw Error("unreachable axis");
}

double axis_value_number(const HyperparameterConfig& c, Axis a) {
    switch (a) {
        case Axis::learning_rate: return c.learning_rate;
        case Axis::depth: return c.depth;
        case Axis::width: return c.width;
        case Axis::dataset: return std::numeric_limits<double>::quiet_NaN();
        case Axis::train_size: return c.train_size;
    }
    throw Error("unreachable axis");
}

bool axis_value_less(Axis a, const std::string& va, const std::string& vb) {
    if (a == Axis::dataset) return va < vb;
    return parse_double(va) < parse_double(vb);
}

int count_differing_axes(const HyperparameterConfig& a, const HyperparameterConfig& b,
                         Axis* only_axis) {
    int n = 0;
    Axis last = Axis::learning_rate;
    for (Axis ax : kAllAxes) {
        if (axis_value_string(a, ax) != axis_value_string(b, ax)) {
            ++n;
            last = ax;
        }
    }
    if (n == 1 && only_axis) *only_axis = last;
    return n;
}

std::vector<HyperparameterConfig> GridSpec::configs() const {
    std::vector<HyperparameterConfig> out;
    for (const auto& ds : dataset_ids)
        for (int m : train_sizes)
            for (int d : depths)
                for (int w : widths)
                    for (double lr : learning_rates)
                        out.push_back(HyperparameterConfig{lr, d, w, ds, m});
    return out;
}

}  // namespace robustgen
