#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace treclab {

struct LossEntry {
    std::int64_t step = 0;
    double loss = 0.0;
    std::string tag;  // optional blend label, e.g. "general" / "hq"
};

struct LossLog {
    std::vector<LossEntry> entries;
    std::int64_t total_steps = 0;
};

enum class CurveKind { Measured, Predicted };

struct TrecPoint {
    double t_hat = 0.0;
    double value = 0.0;
};

// A re-evaluation curve: values indexed by training fraction t_hat in (0, 1].
struct Trec {
    std::vector<TrecPoint> points;
    std::vector<std::string> tags;  // empty, or exactly one per point
    std::optional<int> smoothed_window;
    bool normalized = false;
    CurveKind kind = CurveKind::Measured;
};

// Orders the log by step and maps step -> t_hat = step / total_steps.
// Duplicate steps, steps outside [1, total_steps], and non-finite or negative
// losses are rejected.
Trec build_trec(const LossLog& log);

// Centered moving average of up to `window` points, truncated at the curve
// ends (shorter averages near the boundary, never reflected or padded).
Trec smooth(const Trec& curve, int window);

// Min-max normalization onto [0, 1]. A flat curve has no shape to keep and is
// rejected as degenerate.
Trec normalize(const Trec& curve);

// Linear resampling onto `grid_size` uniformly spaced t_hat values covering
// [first, last] of the input. Tags do not survive interpolation.
Trec resample(const Trec& curve, int grid_size);

// Clamped linear interpolation of the curve at arbitrary t_hat positions.
std::vector<double> values_at(const Trec& curve, std::span<const double> t_hats);

// Pearson correlation; the scale- and shift-invariant shape score used for
// all curve comparisons. Requires equal sizes and non-zero variance.
double pearson(std::span<const double> a, std::span<const double> b);
double pearson(const Trec& a, const Trec& b);

// R^2 in log space: 1 - sum (log y - log yhat)^2 / sum (log y - mean log y)^2.
// All values must be positive.
double log_r2(std::span<const double> truth, std::span<const double> predicted);

// The standard preparation applied before any curve comparison:
// smooth -> resample -> normalize.
Trec comparison_protocol(const Trec& curve, int window = 100, int grid_size = 1000);

// pearson of the two curves after running both through comparison_protocol.
double shape_agreement(const Trec& a, const Trec& b, int window = 100, int grid_size = 1000);

}  // namespace treclab
