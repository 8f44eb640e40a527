#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treclab/ema.hpp"
#include "treclab/schedule.hpp"
#include "treclab/trec.hpp"

namespace treclab {

// Shape family for predicted re-evaluation curves:
//   value(t_hat) = 1 - c(t_hat)^p * t_hat^m
// p is pinned at 0.5; m captures how quickly old batches stop mattering.
struct PredictionParams {
    double p = 0.5;
    double m = 1.0;
};

// Raw (unnormalized) evaluation of the shape family on the coefficient grid.
std::vector<double> predict_trec_values(std::span<const CoeffPoint> c_curve, const PredictionParams& params);

// Normalized predicted curve. A schedule whose coefficients are identically
// zero yields a flat curve and is rejected as a baseline-flat prediction.
Trec predict_trec(std::span<const CoeffPoint> c_curve, const PredictionParams& params);

struct FitMResult {
    double m_star = 0.0;
    double r_p = 0.0;
    bool multimodal = false;   // the correlation profile over m had several local maxima
    bool low_quality = false;  // r_p below 0.9 at the optimum
};

// m* = argmax_m pearson(predicted(m), true curve), searched on a log grid
// over [1e-2, 1e3] and refined by golden-section to 1e-3 relative.
// The true curve must already be prepared (comparison_protocol) and live on
// the same grid as c_curve.
FitMResult fit_m(std::span<const CoeffPoint> c_curve, const Trec& true_curve, double p = 0.5,
                 int grid_points = 64);

struct FitRecord {
    double tpp = 0.0;  // tokens per parameter
    double tau = 0.0;
    double m_star = 0.0;
    double r_p_at_fit = 0.0;
    std::string schedule_kind;  // optional label for schedule-specific fits
};

struct PowerLawFit {
    double C = 0.0;
    double mu1 = 0.0;  // TPP exponent
    double mu2 = 0.0;  // tau exponent
    double r2_log = 0.0;
    int n_points = 0;
    std::optional<std::string> schedule_kind;
};

struct PowerLawOptions {
    double tau_min = 1e-3;  // records outside the trustworthy tau range are dropped
    double tau_max = 1.0;
    std::optional<std::string> schedule_kind;  // fit only records with this label
};

// Ordinary least squares on log m* = log C + mu1 log TPP + mu2 log tau.
// Needs at least 3 records after filtering and a non-collinear design.
PowerLawFit fit_power_law(const std::vector<FitRecord>& records, const PowerLawOptions& opts = {});

double predict_m(const PowerLawFit& fit, double tpp, double tau);

// MoE correction: only the activated parameters count.
double effective_tpp(double tpp, double experts, double experts_per_token);

// Schedule -> coefficients -> shape family with a fixed m.
Trec predict_from_spec(const ScheduleSpec& spec, const PredictionParams& params, int grid_size = 1000);

// Schedule + power law -> predicted curve before any training happens.
Trec full_prediction(const ScheduleSpec& spec, double tpp, const PowerLawFit& fit, int grid_size = 1000);

// Suffix integral int_{t_hat}^1 eta(s) h(s) ds on a uniform grid; a diagnostic
// for how far the loss landscape moves after each point of the run. Curvature
// may be empty (all ones), a single broadcast value, or one value per step.
std::vector<CoeffPoint> drift_diagnostic(std::span<const double> lr, std::span<const double> curvature,
                                         int grid_size);

}  // namespace treclab
