#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "robustgen/errors.hpp"

namespace robustgen {

// Order statistics used by the margin and summary code. Both percentile
// variants are rank-based (no interpolation) so results are always members of
// the input sample; they differ in which end of the sorted sample the rank is
// counted from.

// p-th percentile counted from below: the k-th smallest value with
// k = clamp(floor(n*p/100), 1, n). For n = 10, p = 10 this is the minimum.
inline double percentile_from_below(std::vector<double> values, double p) {
    if (values.empty()) throw EmptyDataError("percentile of empty sample");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    auto k = static_cast<std::size_t>(std::floor(n * p / 100.0));
    k = std::clamp<std::size_t>(k, 1, values.size());
    return values[k - 1];
}

// p-th percentile counted from above: the j-th largest value with
// j = clamp(floor(n*(100-p)/100), 1, n). For n = 10, p = 90 this is the
// maximum; it answers "the lowest value still inside the top (100-p)%".
inline double percentile_from_above(std::vector<double> values, double p) {
    if (values.empty()) throw EmptyDataError("percentile of empty sample");
    std::sort(values.begin(), values.end(), std::greater<double>());
    const double n = static_cast<double>(values.size());
    auto j = static_cast<std::size_t>(std::floor(n * (100.0 - p) / 100.0));
    j = std::clamp<std::size_t>(j, 1, values.size());
    return values[j - 1];
}

inline double mean_of(const std::vector<double>& values) {
    if (values.empty()) throw EmptyDataError("mean of empty sample");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

// Conventional median: middle element, or the average of the two middle
// elements for even sizes.
inline double median_of(std::vector<double> values) {
    if (values.empty()) throw EmptyDataError("median of empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline double max_of(const std::vector<double>& values) {
    if (values.empty()) throw EmptyDataError("max of empty sample");
    return *std::max_element(values.begin(), values.end());
}

}  // namespace robustgen
