#pragma once

#include <string>
#include <vector>

#include "robustgen/robust_eval.hpp"

namespace robustgen::report {

// Display order of environment families: "All" first, then the axis families
// in their canonical axis order, then anything else alphabetically.
std::vector<std::string> family_order(const std::vector<eval::FamilySummary>& cells);

// Display order of measures: ascending mean sign-error over the "All" family
// (best predictor first), ties and measures without a defined All summary by
// name at the end.
std::vector<std::string> measure_order(const std::vector<eval::FamilySummary>& cells);

// Static SVG: one row per measure, one column per family, each cell a [0, 1]
// track with the median-to-max span shaded and markers at max, p90, and
// mean. A family with no surviving environments renders as a red X. Byte
// output is a pure function of the input.
std::string render_svg(const std::vector<eval::FamilySummary>& cells,
                       const std::string& manifest_hash);

// Markdown companion: the robustness headline (how many measures hit
// worst-case sign-error 1.0 over All environments) and a per-family
// max/mean table in the same display order.
std::string render_markdown(const std::vector<eval::FamilySummary>& cells,
                            const std::string& manifest_hash);

}  // namespace robustgen::report
