#include "treclab/trec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treclab/errors.hpp"

namespace treclab {

Trec build_trec(const LossLog& log) {
    if (log.total_steps < 1)
        throw ValidationError("total_steps: must be >= 1");
    if (log.entries.empty())
        throw ValidationError("loss log is empty");

    std::vector<size_t> order(log.entries.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return log.entries[a].step < log.entries[b].step;
    });

    bool any_tag = false;
    for (const auto& e : log.entries)
        if (!e.tag.empty()) any_tag = true;

    Trec curve;
    curve.kind = CurveKind::Measured;
    curve.points.reserve(log.entries.size());
    if (any_tag) curve.tags.reserve(log.entries.size());

    std::int64_t prev_step = 0;
    for (size_t idx : order) {
        const LossEntry& e = log.entries[idx];
        if (e.step < 1 || e.step > log.total_steps)
            throw ValidationError("step " + std::to_string(e.step) + " outside [1, " +
                                  std::to_string(log.total_steps) + "]");
        if (e.step == prev_step)
            throw ValidationError("duplicate step " + std::to_string(e.step) + " in loss log");
        if (!std::isfinite(e.loss) || e.loss < 0.0)
            throw ValidationError("loss at step " + std::to_string(e.step) + " must be finite and non-negative");
        prev_step = e.step;
        curve.points.push_back({double(e.step) / double(log.total_steps), e.loss});
        if (any_tag) curve.tags.push_back(e.tag);
    }
    return curve;
}

Trec smooth(const Trec& curve, int window) {
    if (window < 1)
        throw ValidationError("window: must be >= 1, got " + std::to_string(window));
    if (curve.points.empty())
        throw ValidationError("cannot smooth an empty curve");

    const int n = int(curve.points.size());
    const int left = (window - 1) / 2;
    const int right = window / 2;

    Trec out = curve;
    out.smoothed_window = window;
    out.normalized = false;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - left);
        const int hi = std::min(n - 1, i + right);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += curve.points[size_t(j)].value;
        out.points[size_t(i)].value = sum / double(hi - lo + 1);
    }
    return out;
}

Trec normalize(const Trec& curve) {
    if (curve.points.empty())
        throw ValidationError("cannot normalize an empty curve");
    double lo = curve.points.front().value;
    double hi = lo;
    for (const auto& p : curve.points) {
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
    }
    if (!(hi > lo))
        throw ValidationError("degenerate normalization: curve is flat");

    Trec out = curve;
    out.normalized = true;
    const double span = hi - lo;
    for (auto& p : out.points) p.value = (p.value - lo) / span;
    return out;
}

namespace {

double interp_at(const Trec& curve, double t) {
    const auto& pts = curve.points;
    if (t <= pts.front().t_hat) return pts.front().value;
    if (t >= pts.back().t_hat) return pts.back().value;
    // first point with t_hat >= t
    auto it = std::lower_bound(pts.begin(), pts.end(), t,
                               [](const TrecPoint& p, double x) { return p.t_hat < x; });
    if (it->t_hat == t) return it->value;
    const TrecPoint& b = *it;
    const TrecPoint& a = *(it - 1);
    return a.value + (b.value - a.value) * ((t - a.t_hat) / (b.t_hat - a.t_hat));
}

}  // namespace

Trec resample(const Trec& curve, int grid_size) {
    if (grid_size < 2)
        throw ValidationError("grid_size: must be at least 2");
    if (curve.points.size() < 2)
        throw ValidationError("resampling needs at least two points");

    const double lo = curve.points.front().t_hat;
    const double hi = curve.points.back().t_hat;
    Trec out;
    out.kind = curve.kind;
    out.smoothed_window = curve.smoothed_window;
    out.normalized = false;
    out.points.resize(size_t(grid_size));
    for (int k = 0; k < grid_size; ++k) {
        const double t = lo + (hi - lo) * (double(k) / double(grid_size - 1));
        out.points[size_t(k)] = {t, interp_at(curve, t)};
    }
    return out;
}

std::vector<double> values_at(const Trec& curve, std::span<const double> t_hats) {
    if (curve.points.empty())
        throw ValidationError("cannot sample an empty curve");
    std::vector<double> out(t_hats.size());
    for (size_t i = 0; i < t_hats.size(); ++i) out[i] = interp_at(curve, t_hats[i]);
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ValidationError("correlation inputs differ in length");
    const size_t n = a.size();
    if (n < 2)
        throw ValidationError("correlation needs at least two points");

    long double mean_a = 0.0L, mean_b = 0.0L;
    for (size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;

    long double sab = 0.0L, saa = 0.0L, sbb = 0.0L;
    for (size_t i = 0; i < n; ++i) {
        const long double da = a[i] - mean_a;
        const long double db = b[i] - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0L) || !(sbb > 0.0L))
        throw ValidationError("undefined correlation: an input has zero variance");
    return double(sab / sqrtl(saa * sbb));
}

double pearson(const Trec& a, const Trec& b) {
    if (a.points.size() != b.points.size())
        throw ValidationError("correlation inputs differ in length; resample to a common grid first");
    std::vector<double> va(a.points.size()), vb(b.points.size());
    for (size_t i = 0; i < va.size(); ++i) {
        va[i] = a.points[i].value;
        vb[i] = b.points[i].value;
    }
    return pearson(va, vb);
}

double log_r2(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size())
        throw ValidationError("log_r2 inputs differ in length");
    const size_t n = truth.size();
    if (n < 2)
        throw ValidationError("log_r2 needs at least two points");

    long double mean_log = 0.0L;
    for (size_t i = 0; i < n; ++i) {
        if (!(truth[i] > 0.0) || !(predicted[i] > 0.0))
            throw ValidationError("log_r2 requires strictly positive values");
        mean_log += logl(truth[i]);
    }
    mean_log /= n;

    long double ss_res = 0.0L, ss_tot = 0.0L;
    for (size_t i = 0; i < n; ++i) {
        const long double r = logl(truth[i]) - logl(predicted[i]);
        const long double d = logl(truth[i]) - mean_log;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (!(ss_tot > 0.0L))
        throw ValidationError("log_r2 undefined: all true values are equal");
    return double(1.0L - ss_res / ss_tot);
}

Trec comparison_protocol(const Trec& curve, int window, int grid_size) {
    return normalize(resample(smooth(curve, window), grid_size));
}

double shape_agreement(const Trec& a, const Trec& b, int window, int grid_size) {
    return pearson(comparison_protocol(a, window, grid_size),
                   comparison_protocol(b, window, grid_size));
}

}  // namespace treclab
