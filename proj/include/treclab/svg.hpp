#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treclab/trec.hpp"

namespace treclab {

struct SvgOptions {
    int width = 720;
    int height = 440;
    std::string title;
    std::string x_label = "t/T";
    std::string y_label = "value";
    // shaded vertical band in t_hat units, e.g. a data placement window
    std::optional<std::pair<double, double>> shade;
};

// Each series is (legend label, curve). Keeps to plain shapes and text so the
// output opens anywhere; no external renderer involved.
std::string render_curve_svg(const std::vector<std::pair<std::string, const Trec*>>& series,
                             const SvgOptions& options);
std::string render_curve_svg(const Trec& curve, const SvgOptions& options);

}  // namespace treclab
