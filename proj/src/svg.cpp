#include "treclab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "treclab/errors.hpp"

namespace treclab {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 48;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string render_curve_svg(const std::vector<std::pair<std::string, const Trec*>>& series,
                             const SvgOptions& options) {
    if (series.empty()) throw ValidationError("no curves to plot");
    double x_min = 1.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    bool have_y = false;
    for (const auto& [label, curve] : series) {
        if (curve == nullptr || curve->points.empty()) {
            throw ValidationError("cannot plot an empty curve");
        }
        for (const auto& p : curve->points) {
            x_min = std::min(x_min, p.t_hat);
            x_max = std::max(x_max, p.t_hat);
            if (!have_y) {
                y_min = y_max = p.value;
                have_y = true;
            } else {
                y_min = std::min(y_min, p.value);
                y_max = std::max(y_max, p.value);
            }
        }
    }
    if (x_max <= x_min) x_max = x_min + 1e-9;
    if (y_max <= y_min) y_max = y_min + 1e-9;
    // a little headroom so the line does not sit on the frame
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double plot_w = options.width - kMarginLeft - kMarginRight;
    const double plot_h = options.height - kMarginTop - kMarginBottom;
    auto sx = [&](double t) { return kMarginLeft + plot_w * (t - x_min) / (x_max - x_min); };
    auto sy = [&](double v) { return kMarginTop + plot_h * (1.0 - (v - y_min) / (y_max - y_min)); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) +
           "\" height=\"" + std::to_string(options.height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (options.shade) {
        double lo = std::clamp(options.shade->first, x_min, x_max);
        double hi = std::clamp(options.shade->second, x_min, x_max);
        if (hi > lo) {
            out += "<rect x=\"" + num(sx(lo)) + "\" y=\"" + std::to_string(kMarginTop) +
                   "\" width=\"" + num(sx(hi) - sx(lo)) + "\" height=\"" + num(plot_h) +
                   "\" fill=\"#ffbb55\" fill-opacity=\"0.35\"/>\n";
        }
    }

    // frame
    out += "<rect x=\"" + std::to_string(kMarginLeft) + "\" y=\"" + std::to_string(kMarginTop) +
           "\" width=\"" + num(plot_w) + "\" height=\"" + num(plot_h) +
           "\" fill=\"none\" stroke=\"#333\"/>\n";

    // tick labels at the corners of both axes
    out += "<text x=\"" + std::to_string(kMarginLeft) + "\" y=\"" +
           std::to_string(options.height - kMarginBottom + 18) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + num(x_min) + "</text>\n";
    out += "<text x=\"" + num(kMarginLeft + plot_w) + "\" y=\"" +
           std::to_string(options.height - kMarginBottom + 18) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + num(x_max) + "</text>\n";
    out += "<text x=\"" + std::to_string(kMarginLeft - 6) + "\" y=\"" + num(kMarginTop + plot_h) +
           "\" font-size=\"12\" text-anchor=\"end\">" + num(y_min) + "</text>\n";
    out += "<text x=\"" + std::to_string(kMarginLeft - 6) + "\" y=\"" +
           std::to_string(kMarginTop + 12) + "\" font-size=\"12\" text-anchor=\"end\">" +
           num(y_max) + "</text>\n";

    if (!options.title.empty()) {
        out += "<text x=\"" + std::to_string(options.width / 2) + "\" y=\"" +
               std::to_string(kMarginTop - 12) +
               "\" font-size=\"14\" text-anchor=\"middle\">" + escape_text(options.title) +
               "</text>\n";
    }
    out += "<text x=\"" + std::to_string(options.width / 2) + "\" y=\"" +
           std::to_string(options.height - 10) + "\" font-size=\"12\" text-anchor=\"middle\">" +
           escape_text(options.x_label) + "</text>\n";

    const std::size_t n_colors = sizeof(kPalette) / sizeof(kPalette[0]);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const Trec& curve = *series[s].second;
        std::string points;
        for (const auto& p : curve.points) {
            points += num(sx(p.t_hat));
            points += ',';
            points += num(sy(p.value));
            points += ' ';
        }
        if (!points.empty()) points.pop_back();
        out += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[s % n_colors]) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        if (!series[s].first.empty()) {
            int ly = kMarginTop + 16 + static_cast<int>(s) * 16;
            out += "<rect x=\"" + std::to_string(kMarginLeft + 8) + "\" y=\"" +
                   std::to_string(ly - 9) + "\" width=\"18\" height=\"4\" fill=\"" +
                   kPalette[s % n_colors] + "\"/>\n";
            out += "<text x=\"" + std::to_string(kMarginLeft + 32) + "\" y=\"" +
                   std::to_string(ly) + "\" font-size=\"12\">" + escape_text(series[s].first) +
                   "</text>\n";
        }
    }

    out += "</svg>\n";
    return out;
}

std::string render_curve_svg(const Trec& curve, const SvgOptions& options) {
    return render_curve_svg({{std::string(), &curve}}, options);
}

}  // namespace treclab
