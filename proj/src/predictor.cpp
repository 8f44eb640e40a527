#include "treclab/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "treclab/errors.hpp"

namespace treclab {

namespace {

void check_params(const PredictionParams& params) {
    if (!(params.p > 0.0) || !std::isfinite(params.p))
        throw ValidationError("p: must be positive and finite");
    if (!(params.m > 0.0) || !std::isfinite(params.m))
        throw ValidationError("m: must be positive and finite");
}

}  // namespace

std::vector<double> predict_trec_values(std::span<const CoeffPoint> c_curve, const PredictionParams& params) {
    check_params(params);
    if (c_curve.empty())
        throw ValidationError("coefficient curve is empty");

    std::vector<double> out(c_curve.size());
    for (size_t i = 0; i < c_curve.size(); ++i) {
        const auto& pt = c_curve[i];
        if (!(pt.t_hat > 0.0 && pt.t_hat <= 1.0))
            throw ValidationError("coefficient curve t_hat outside (0, 1]");
        if (!(pt.c >= 0.0) || !std::isfinite(pt.c))
            throw ValidationError("coefficient curve has a negative or non-finite value");
        out[i] = 1.0 - std::pow(pt.c, params.p) * std::pow(pt.t_hat, params.m);
    }
    return out;
}

Trec predict_trec(std::span<const CoeffPoint> c_curve, const PredictionParams& params) {
    const std::vector<double> raw = predict_trec_values(c_curve, params);
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    if (!(*hi > *lo))
        throw ValidationError("baseline-flat prediction: coefficients are identically zero");

    Trec curve;
    curve.kind = CurveKind::Predicted;
    curve.points.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
        curve.points[i] = {c_curve[i].t_hat, raw[i]};
    return normalize(curve);
}

namespace {

double pearson_at_m(std::span<const CoeffPoint> c_curve, std::span<const double> truth, double p, double m,
                    std::vector<double>& scratch) {
    for (size_t i = 0; i < c_curve.size(); ++i)
        scratch[i] = 1.0 - std::pow(c_curve[i].c, p) * std::pow(c_curve[i].t_hat, m);
    return pearson(scratch, truth);
}

}  // namespace

FitMResult fit_m(std::span<const CoeffPoint> c_curve, const Trec& true_curve, double p, int grid_points) {
    if (grid_points < 4)
        throw ValidationError("grid_points: must be at least 4");
    if (c_curve.size() != true_curve.points.size())
        throw ValidationError("fit_m inputs must share a grid (lengths differ)");
    if (c_curve.size() < 3)
        throw ValidationError("fit_m needs at least 3 points");
    bool any_positive = false;
    for (const auto& pt : c_curve)
        if (pt.c > 0.0) any_positive = true;
    if (!any_positive)
        throw ValidationError("baseline-flat prediction: coefficients are identically zero");

    std::vector<double> truth(true_curve.points.size());
    for (size_t i = 0; i < truth.size(); ++i) truth[i] = true_curve.points[i].value;
    std::vector<double> scratch(c_curve.size());

    constexpr double kLogLo = -2.0;  // m = 1e-2
    constexpr double kLogHi = 3.0;   // m = 1e3

    std::vector<double> r(static_cast<size_t>(grid_points));
    int best = 0;
    for (int j = 0; j < grid_points; ++j) {
        const double lg = kLogLo + (kLogHi - kLogLo) * double(j) / double(grid_points - 1);
        r[size_t(j)] = pearson_at_m(c_curve, truth, p, std::pow(10.0, lg), scratch);
        if (r[size_t(j)] > r[size_t(best)]) best = j;
    }

    int maxima = 0;
    for (int j = 0; j < grid_points; ++j) {
        const bool left_ok = (j == 0) || r[size_t(j)] > r[size_t(j - 1)];
        const bool right_ok = (j == grid_points - 1) || r[size_t(j)] > r[size_t(j + 1)];
        if (left_ok && right_ok) ++maxima;
    }

    // Golden-section refinement on log10(m) inside the bracketing neighbors.
    const double step = (kLogHi - kLogLo) / double(grid_points - 1);
    double lo = kLogLo + step * double(std::max(0, best - 1));
    double hi = kLogLo + step * double(std::min(grid_points - 1, best + 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = pearson_at_m(c_curve, truth, p, std::pow(10.0, x1), scratch);
    double f2 = pearson_at_m(c_curve, truth, p, std::pow(10.0, x2), scratch);
    // |hi - lo| on log10(m) below this bound pins m to ~1e-3 relative
    const double tol = 1e-3 / std::numbers::ln10;
    while (hi - lo > tol) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = pearson_at_m(c_curve, truth, p, std::pow(10.0, x1), scratch);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = pearson_at_m(c_curve, truth, p, std::pow(10.0, x2), scratch);
        }
    }

    FitMResult result;
    result.m_star = std::pow(10.0, 0.5 * (lo + hi));
    result.r_p = pearson_at_m(c_curve, truth, p, result.m_star, scratch);
    result.multimodal = maxima > 1;
    result.low_quality = result.r_p < 0.9;
    return result;
}

PowerLawFit fit_power_law(const std::vector<FitRecord>& records, const PowerLawOptions& opts) {
    std::vector<const FitRecord*> used;
    for (const auto& rec : records) {
        if (opts.schedule_kind && rec.schedule_kind != *opts.schedule_kind) continue;
        if (!(rec.tau >= opts.tau_min && rec.tau <= opts.tau_max)) continue;
        if (!(rec.tpp > 0.0) || !(rec.m_star > 0.0))
            throw ValidationError("power-law fit requires positive tpp and m_star");
        used.push_back(&rec);
    }
    if (used.size() < 3)
        throw ValidationError("power-law fit needs at least 3 records after filtering, got " +
                              std::to_string(used.size()));

    // Normal equations for y = b0 + b1 * log tpp + b2 * log tau.
    long double A[3][3] = {};
    long double b[3] = {};
    for (const FitRecord* rec : used) {
        const long double x[3] = {1.0L, logl(rec->tpp), logl(rec->tau)};
        const long double y = logl(rec->m_star);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) A[i][j] += x[i] * x[j];
            b[i] += x[i] * y;
        }
    }

    // Gaussian elimination with partial pivoting on the 3x3 system.
    long double scale = 0.0L;
    for (auto& row : A)
        for (long double v : row) scale = std::max(scale, fabsl(v));
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (fabsl(A[perm[row]][col]) > fabsl(A[perm[piv]][col])) piv = row;
        std::swap(perm[col], perm[piv]);
        if (fabsl(A[perm[col]][col]) < 1e-13L * scale)
            throw ValidationError("degenerate fit: records do not span tpp and tau");
        for (int row = col + 1; row < 3; ++row) {
            const long double f = A[perm[row]][col] / A[perm[col]][col];
            for (int j = col; j < 3; ++j) A[perm[row]][j] -= f * A[perm[col]][j];
            b[perm[row]] -= f * b[perm[col]];
        }
    }
    long double beta[3];
    for (int col = 2; col >= 0; --col) {
        long double v = b[perm[col]];
        for (int j = col + 1; j < 3; ++j) v -= A[perm[col]][j] * beta[j];
        beta[col] = v / A[perm[col]][col];
    }

    PowerLawFit fit;
    fit.C = double(expl(beta[0]));
    fit.mu1 = double(beta[1]);
    fit.mu2 = double(beta[2]);
    fit.n_points = int(used.size());
    fit.schedule_kind = opts.schedule_kind;

    std::vector<double> truth(used.size()), predicted(used.size());
    for (size_t i = 0; i < used.size(); ++i) {
        truth[i] = used[i]->m_star;
        predicted[i] = predict_m(fit, used[i]->tpp, used[i]->tau);
    }
    fit.r2_log = log_r2(truth, predicted);
    return fit;
}

double predict_m(const PowerLawFit& fit, double tpp, double tau) {
    if (!(tpp > 0.0) || !std::isfinite(tpp))
        throw ValidationError("tpp: must be positive and finite");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("tau: must be positive and finite");
    if (!(fit.C > 0.0))
        throw ValidationError("power-law fit has non-positive C");
    return fit.C * std::pow(tpp, fit.mu1) * std::pow(tau, fit.mu2);
}

double effective_tpp(double tpp, double experts, double experts_per_token) {
    if (!(tpp > 0.0))
        throw ValidationError("tpp: must be positive");
    if (!(experts > 0.0) || !(experts_per_token > 0.0))
        throw ValidationError("experts and experts_per_token must be positive");
    if (experts_per_token > experts)
        throw ValidationError("experts_per_token exceeds experts");
    return tpp * experts_per_token / experts;
}

Trec predict_from_spec(const ScheduleSpec& spec, const PredictionParams& params, int grid_size) {
    if (!(spec.weight_decay > 0.0))
        throw ValidationError("weight_decay: must be positive to predict a curve (the Adam limit has none)");
    const std::vector<double> lr = lr_array(spec);
    const EmaCoefficients coeffs = ema_coefficients(lr, spec.weight_decay);
    const std::vector<CoeffPoint> cc = continuous_coefficients(coeffs, grid_size);
    return predict_trec(cc, params);
}

Trec full_prediction(const ScheduleSpec& spec, double tpp, const PowerLawFit& fit, int grid_size) {
    if (!(spec.weight_decay > 0.0))
        throw ValidationError("weight_decay: must be positive to predict a curve (the Adam limit has none)");
    const TimescaleResult ts =
        timescale(TimescaleParams::from_steps(spec.peak_lr, spec.weight_decay, double(spec.total_steps)));
    PredictionParams params;
    params.m = predict_m(fit, tpp, ts.tau);
    return predict_from_spec(spec, params, grid_size);
}

std::vector<CoeffPoint> drift_diagnostic(std::span<const double> lr, std::span<const double> curvature,
                                         int grid_size) {
    const size_t T = lr.size();
    if (T == 0)
        throw ValidationError("schedule is empty");
    if (!(curvature.empty() || curvature.size() == 1 || curvature.size() == T))
        throw ValidationError("curvature: expected 0, 1, or total_steps values");

    auto h_at = [&](size_t i) {
        if (curvature.empty()) return 1.0;
        return curvature.size() == 1 ? curvature[0] : curvature[i];
    };

    // suffix[i] = sum_{j >= i} eta_j h_j / T, a Riemann approximation of the
    // remaining-drift integral from step i onward.
    std::vector<double> suffix(T + 1, 0.0);
    for (size_t i = T; i-- > 0;)
        suffix[i] = suffix[i + 1] + lr[i] * h_at(i) / double(T);

    Trec steps;
    steps.points.resize(T);
    for (size_t i = 0; i < T; ++i)
        steps.points[i] = {double(i + 1) / double(T), suffix[i + 1]};

    std::vector<double> grid(static_cast<size_t>(grid_size));
    for (int k = 1; k <= grid_size; ++k) grid[size_t(k - 1)] = double(k) / double(grid_size);
    const std::vector<double> vals = values_at(steps, grid);

    std::vector<CoeffPoint> out(static_cast<size_t>(grid_size));
    for (size_t i = 0; i < out.size(); ++i) out[i] = {grid[i], vals[i]};
    return out;
}

}  // namespace treclab
