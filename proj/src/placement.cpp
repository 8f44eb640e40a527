#include "treclab/placement.hpp"

#include <algorithm>
#include <cmath>

#include "treclab/ema.hpp"
#include "treclab/errors.hpp"

namespace treclab {

namespace {

double grid_spacing(const Trec& curve) {
    const auto& pts = curve.points;
    if (pts.size() < 2)
        throw ValidationError("curve needs at least two points");
    const double dt = (pts.back().t_hat - pts.front().t_hat) / double(pts.size() - 1);
    if (!(dt > 0.0))
        throw ValidationError("curve t_hat values must be increasing");
    for (size_t i = 1; i < pts.size(); ++i) {
        if (std::fabs(pts[i].t_hat - pts[i - 1].t_hat - dt) > 1e-9 * std::max(1.0, dt))
            throw ValidationError("curve is not on a uniform grid");
    }
    return dt;
}

double window_mean(const Trec& curve, size_t s, size_t w) {
    double sum = 0.0;
    for (size_t j = s; j < s + w; ++j) sum += curve.points[j].value;
    return sum / double(w);
}

// Each grid point is treated as a cell ending at its t_hat, so a window of w
// points starting at index s spans (t_hat[s] - dt, t_hat[s + w - 1]].
WindowStat window_stat(const Trec& curve, double dt, size_t s, size_t w) {
    WindowStat out;
    out.start_fraction = std::max(0.0, curve.points[s].t_hat - dt);
    out.end_fraction = curve.points[s + w - 1].t_hat;
    out.mean_value = window_mean(curve, s, w);
    return out;
}

}  // namespace

std::vector<WindowStat> segment_means(const Trec& curve, int k) {
    if (k < 1)
        throw ValidationError("k: must be >= 1");
    const double dt = grid_spacing(curve);
    const size_t n = curve.points.size();
    if (size_t(k) > n)
        throw ValidationError("k exceeds the number of grid points");

    std::vector<WindowStat> out;
    out.reserve(size_t(k));
    for (int i = 0; i < k; ++i) {
        const size_t lo = size_t(std::llround(double(n) * i / double(k)));
        const size_t hi = size_t(std::llround(double(n) * (i + 1) / double(k)));
        if (hi <= lo)
            throw ValidationError("segment " + std::to_string(i) + " contains no grid points");
        out.push_back(window_stat(curve, dt, lo, hi - lo));
    }
    return out;
}

PlacementPlan recommend(const Trec& curve, double hq_fraction) {
    if (!(hq_fraction > 0.0) || !std::isfinite(hq_fraction))
        throw ValidationError("hq_fraction: must be positive");
    if (hq_fraction >= 1.0)
        throw ValidationError("hq_fraction: window covers the whole run, nothing to place");
    const double dt = grid_spacing(curve);
    const size_t n = curve.points.size();

    size_t w = size_t(std::max<std::int64_t>(1, std::llround(hq_fraction / dt)));
    if (w > n)
        throw ValidationError("hq_fraction: window covers the whole run, nothing to place");

    const size_t candidates = n - w + 1;
    std::vector<double> means(candidates);
    size_t best = 0;
    for (size_t s = 0; s < candidates; ++s) {
        means[s] = window_mean(curve, s, w);
        if (means[s] <= means[best]) best = s;  // <= pushes ties to the later window
    }

    PlacementPlan plan;
    const WindowStat chosen = window_stat(curve, dt, best, w);
    plan.start_fraction = chosen.start_fraction;
    plan.end_fraction = chosen.end_fraction;
    plan.expected_mean_trec = chosen.mean_value;
    plan.source_kind = curve.kind;
    plan.source_points = int(n);
    for (size_t s = 0; s < candidates; ++s)
        if (s != best && means[s] == means[best]) plan.tie = true;

    std::vector<size_t> order(candidates);
    for (size_t s = 0; s < candidates; ++s) order[s] = s;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (means[a] != means[b]) return means[a] < means[b];
        return a > b;  // equal means: later window first
    });
    plan.segment_rank.reserve(candidates);
    for (size_t s : order) plan.segment_rank.push_back(window_stat(curve, dt, s, w));
    return plan;
}

std::vector<CurriculumEntry> emit_curriculum(const PlacementPlan& plan, std::int64_t total_steps) {
    if (total_steps < 1)
        throw ValidationError("total_steps: must be >= 1");
    if (!(plan.start_fraction >= 0.0 && plan.start_fraction < plan.end_fraction && plan.end_fraction <= 1.0))
        throw ValidationError("plan window fractions must satisfy 0 <= start < end <= 1");

    const std::int64_t lo = std::llround(plan.start_fraction * double(total_steps));
    const std::int64_t hi = std::llround(plan.end_fraction * double(total_steps));
    if (hi <= lo)
        throw ValidationError("plan window contains no steps at this resolution");

    std::vector<CurriculumEntry> out;
    out.reserve(size_t(total_steps));
    for (std::int64_t t = 1; t <= total_steps; ++t)
        out.push_back({t, (t > lo && t <= hi) ? "hq" : "general"});
    return out;
}

WindowAudit audit_window(const Trec& curve, double window_start, double window_end, double margin) {
    if (!(window_start >= 0.0 && window_start < window_end && window_end <= 1.0))
        throw ValidationError("audit window fractions must satisfy 0 <= start < end <= 1");
    if (!(margin >= 0.0))
        throw ValidationError("margin: must be non-negative");
    const double dt = grid_spacing(curve);
    const size_t n = curve.points.size();

    // Cells with window_start < t_hat <= window_end; a window narrower than
    // one cell collapses to its containing cell.
    const double t0 = curve.points.front().t_hat - dt;
    std::int64_t lo = std::llround((window_start - t0) / dt);
    std::int64_t hi = std::llround((window_end - t0) / dt);
    lo = std::clamp<std::int64_t>(lo, 0, std::int64_t(n) - 1);
    hi = std::clamp<std::int64_t>(hi, 0, std::int64_t(n));
    if (hi <= lo) hi = lo + 1;
    const size_t w = size_t(hi - lo);

    WindowAudit audit;
    audit.n_windows = int(n - w + 1);
    audit.window_mean = window_mean(curve, size_t(lo), w);

    audit.best_mean = audit.window_mean;
    int better = 0;
    for (size_t s = 0; s + w <= n; ++s) {
        const double mean = window_mean(curve, s, w);
        if (mean < audit.window_mean) ++better;
        audit.best_mean = std::min(audit.best_mean, mean);
    }
    audit.window_rank = better + 1;
    audit.suboptimal = audit.window_mean - audit.best_mean > margin;
    audit.recommended = recommend(curve, double(w) * dt);
    return audit;
}

AuditReport audit_recipe(const ScheduleSpec& spec, double tpp, const PowerLawFit& fit,
                         double window_start, double window_end, double margin, int grid_size) {
    AuditReport report;
    report.margin = margin;
    report.predicted = full_prediction(spec, tpp, fit, grid_size);
    report.window = audit_window(report.predicted, window_start, window_end, margin);

    const EmaCoefficients coeffs = ema_coefficients(lr_array(spec), spec.weight_decay);
    const std::int64_t T = spec.total_steps;
    const std::int64_t lo = std::llround(window_start * double(T));
    const std::int64_t hi = std::llround(window_end * double(T));
    double total = 0.0, in_window = 0.0;
    for (std::int64_t i = 0; i < T; ++i) {
        total += coeffs.c[size_t(i)];
        if (i + 1 > lo && i + 1 <= hi) in_window += coeffs.c[size_t(i)];
    }
    if (!(total > 0.0))
        throw ValidationError("schedule carries no update mass");
    report.window_mass_fraction = in_window / total;
    report.near_zero_retention = report.window_mass_fraction < kNearZeroRetentionMass;
    return report;
}

}  // namespace treclab
