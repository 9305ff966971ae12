#include "robustgen/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "robustgen/config.hpp"

namespace robustgen::report {

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

const eval::FamilySummary* find_cell(const std::vector<eval::FamilySummary>& cells,
                                     const std::string& measure, const std::string& family) {
    for (const auto& c : cells)
        if (c.measure == measure && c.family == family) return &c;
    return nullptr;
}

}  // namespace

std::vector<std::string> family_order(const std::vector<eval::FamilySummary>& cells) {
    std::set<std::string> seen;
    for (const auto& c : cells) seen.insert(c.family);
    std::vector<std::string> order;
    if (seen.erase("All")) order.push_back("All");
    for (Axis a : kAllAxes)
        if (seen.erase(axis_name(a))) order.push_back(axis_name(a));
    order.insert(order.end(), seen.begin(), seen.end());
    return order;
}

std::vector<std::string> measure_order(const std::vector<eval::FamilySummary>& cells) {
    std::set<std::string> names;
    std::map<std::string, double> all_mean;
    for (const auto& c : cells) {
        names.insert(c.measure);
        if (c.family == "All" && c.defined) all_mean[c.measure] = c.mean_value;
    }
    std::vector<std::string> order(names.begin(), names.end());
    std::stable_sort(order.begin(), order.end(), [&](const std::string& x, const std::string& y) {
        const auto ix = all_mean.find(x);
        const auto iy = all_mean.find(y);
        if (ix == all_mean.end() || iy == all_mean.end())
            return iy == all_mean.end() && ix != all_mean.end();
        if (ix->second != iy->second) return ix->second < iy->second;
        return false;  // equal keys keep name order from the set
    });
    return order;
}

std::string render_svg(const std::vector<eval::FamilySummary>& cells,
                       const std::string& manifest_hash) {
    const std::vector<std::string> families = family_order(cells);
    const std::vector<std::string> measures = measure_order(cells);

    const double cell_w = 110.0, cell_h = 20.0, col_pad = 14.0;
    const double left = 232.0, top = 56.0, footer = 30.0;
    const double width = left + static_cast<double>(families.size()) * (cell_w + col_pad) + 10.0;
    const double height = top + static_cast<double>(measures.size()) * cell_h + footer;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(width) + "\" height=\"" +
         fmt2(height) + "\" viewBox=\"0 0 " + fmt2(width) + " " + fmt2(height) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + fmt2(width) + "\" height=\"" + fmt2(height) +
         "\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"16\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" fill=\"#222222\">"
         "Sign-error distribution by environment family (median to max shaded; markers: max, "
         "p90, mean)</text>\n";

    for (std::size_t f = 0; f < families.size(); ++f) {
        const double cx = left + static_cast<double>(f) * (cell_w + col_pad);
        s += "<text x=\"" + fmt2(cx + cell_w / 2.0) +
             "\" y=\"46\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\" "
             "text-anchor=\"middle\">" +
             families[f] + "</text>\n";
        // Chance-level reference at 0.5 for the whole column.
        const double half = cx + 0.5 * cell_w;
        s += "<line x1=\"" + fmt2(half) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(half) +
             "\" y2=\"" + fmt2(top + static_cast<double>(measures.size()) * cell_h) +
             "\" stroke=\"#bbbbbb\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n";
    }

    for (std::size_t r = 0; r < measures.size(); ++r) {
        const double cy = top + static_cast<double>(r) * cell_h;
        s += "<text x=\"" + fmt2(left - 10.0) + "\" y=\"" + fmt2(cy + 14.0) +
             "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\" "
             "text-anchor=\"end\">" +
             measures[r] + "</text>\n";
        for (std::size_t f = 0; f < families.size(); ++f) {
            const double cx = left + static_cast<double>(f) * (cell_w + col_pad);
            s += "<rect x=\"" + fmt2(cx) + "\" y=\"" + fmt2(cy + 6.0) + "\" width=\"" +
                 fmt2(cell_w) + "\" height=\"8\" fill=\"#eeeeee\"/>\n";
            const eval::FamilySummary* c = find_cell(cells, measures[r], families[f]);
            if (c == nullptr || !c->defined) {
                // No environments remained for this (measure, family).
                const double mx = cx + cell_w / 2.0, my = cy + 10.0;
                s += "<line x1=\"" + fmt2(mx - 4.0) + "\" y1=\"" + fmt2(my - 4.0) + "\" x2=\"" +
                     fmt2(mx + 4.0) + "\" y2=\"" + fmt2(my + 4.0) +
                     "\" stroke=\"#cc0000\" stroke-width=\"2\"/>\n";
                s += "<line x1=\"" + fmt2(mx - 4.0) + "\" y1=\"" + fmt2(my + 4.0) + "\" x2=\"" +
                     fmt2(mx + 4.0) + "\" y2=\"" + fmt2(my - 4.0) +
                     "\" stroke=\"#cc0000\" stroke-width=\"2\"/>\n";
                continue;
            }
            const double x_med = cx + c->median_value * cell_w;
            const double x_max = cx + c->max_value * cell_w;
            const double x_p90 = cx + c->p90_value * cell_w;
            const double x_mean = cx + c->mean_value * cell_w;
            s += "<rect x=\"" + fmt2(x_med) + "\" y=\"" + fmt2(cy + 6.0) + "\" width=\"" +
                 fmt2(std::max(0.5, x_max - x_med)) + "\" height=\"8\" fill=\"#9dbcd9\"/>\n";
            s += "<line x1=\"" + fmt2(x_max) + "\" y1=\"" + fmt2(cy + 3.0) + "\" x2=\"" +
                 fmt2(x_max) + "\" y2=\"" + fmt2(cy + 17.0) +
                 "\" stroke=\"#b30000\" stroke-width=\"2\"/>\n";
            s += "<line x1=\"" + fmt2(x_p90) + "\" y1=\"" + fmt2(cy + 4.0) + "\" x2=\"" +
                 fmt2(x_p90) + "\" y2=\"" + fmt2(cy + 16.0) +
                 "\" stroke=\"#e07a00\" stroke-width=\"1.5\"/>\n";
            s += "<circle cx=\"" + fmt2(x_mean) + "\" cy=\"" + fmt2(cy + 10.0) +
                 "\" r=\"2.5\" fill=\"#1f4e8c\"/>\n";
        }
    }

    s += "<text x=\"16\" y=\"" + fmt2(height - 10.0) +
         "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#888888\">manifest " +
         manifest_hash + "</text>\n";
    s += "</svg>\n";
    return s;
}

std::string render_markdown(const std::vector<eval::FamilySummary>& cells,
                            const std::string& manifest_hash) {
    const std::vector<std::string> families = family_order(cells);
    const std::vector<std::string> measures = measure_order(cells);

    std::size_t robust_one = 0;
    std::size_t with_all = 0;
    for (const std::string& m : measures) {
        const eval::FamilySummary* c = find_cell(cells, m, "All");
        if (c != nullptr && c->defined) {
            ++with_all;
            if (c->max_value == 1.0) ++robust_one;
        }
    }

    std::string s = "# Sign-error summary\n\nManifest `" + manifest_hash + "`.\n\n";
    if (robust_one > 0) {
        s += std::to_string(robust_one) + " of " + std::to_string(with_all) +
             " measures attain worst-case sign-error 1.0 over the All family: some environment "
             "orders the gap against them on every confident pair.\n\n";
    } else {
        s += "No measure attains worst-case sign-error 1.0 over the All family at this scale "
             "(" + std::to_string(with_all) + " measures evaluated).\n\n";
    }

    s += "Rows are ordered by mean sign-error over All environments; x marks a family with no "
         "surviving environments.\n\n";
    s += "| measure |";
    for (const auto& f : families) s += " " + f + " max | " + f + " mean |";
    s += "\n|---|";
    for (std::size_t f = 0; f < families.size(); ++f) s += "---|---|";
    s += "\n";
    for (const std::string& m : measures) {
        s += "| " + m + " |";
        for (const auto& f : families) {
            const eval::FamilySummary* c = find_cell(cells, m, f);
            if (c == nullptr || !c->defined)
                s += " x | x |";
            else
                s += " " + fmt3(c->max_value) + " | " + fmt3(c->mean_value) + " |";
        }
        s += "\n";
    }
    return s;
}

}  // namespace robustgen::report
