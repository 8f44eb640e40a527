#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace treclab {

// Inputs for the weight-decay timescale tau = 1 / (eta * lam * T).
// T may be given directly or as dataset_tokens / batch_size.
struct TimescaleParams {
    double eta = 0.0;  // peak learning rate
    double lam = 0.0;  // weight decay
    double steps = 0.0;
    std::optional<double> batch_size;
    std::optional<double> dataset_tokens;

    static TimescaleParams from_steps(double eta, double lam, double steps);
    static TimescaleParams from_tokens(double eta, double lam, double batch_size, double dataset_tokens);
};

// lam = 0 is the pure-Adam limit: the run has no finite forgetting horizon,
// so tau is reported as undefined rather than as a validation failure.
struct TimescaleResult {
    bool defined = false;
    double tau = 0.0;       // fraction of the run
    double tau_iter = 0.0;  // in optimizer steps
};

TimescaleResult timescale(const TimescaleParams& params);

// tau_iter expressed in epochs; exposed for reporting only.
double tau_epoch(double tau_iter, double iters_per_epoch);

// Weights of the update-average view of AdamW:
//   theta_T = c0 * theta_0 + sum_i c_i * x_i
// with alpha_i = eta_i * lam, c_i = alpha_i * prod_{j>i} (1 - alpha_j) and
// c0 = prod_j (1 - alpha_j). The weights telescope: c0 + sum_i c_i = 1.
struct EmaCoefficients {
    double c0 = 1.0;
    std::vector<double> c;       // c[i] is the weight of step i+1
    std::vector<double> alphas;  // alphas[i] = lr[i] * lam
    bool drop_c0_for_prediction = true;  // predictions use only c_i, never c0
};

// O(T) backward pass. Throws ValidationError "EMA smoothing out of range at
// step t" if any alpha falls outside [0, 1).
EmaCoefficients ema_coefficients(std::span<const double> lr, double lam);

// |c0 + sum_i c_i - 1| with a compensated sum, so the reported error reflects
// the coefficients rather than the summation order.
double sum_identity_error(const EmaCoefficients& coeffs);

struct CoeffPoint {
    double t_hat = 0.0;
    double c = 0.0;
};

// Coefficients resampled from steps onto a uniform grid over (0, 1]:
// grid point k (1-based) sits at t_hat = k / grid_size. Linear interpolation
// between the step values; c0 is excluded.
std::vector<CoeffPoint> continuous_coefficients(const EmaCoefficients& coeffs, int grid_size);

// c_i / max_i c_i. As lam -> 0 this converges to the normalized learning-rate
// profile, which is the natural coefficient report in the Adam limit.
std::vector<double> small_lambda_profile(std::span<const double> lr, double lam);

struct EmaSummary {
    std::optional<double> tau;
    std::optional<double> tau_iter;
    double c0 = 1.0;
    std::int64_t argmax_step = 0;                 // 1-based step with the largest c_i
    std::array<double, 10> mass_by_decile{};      // raw sums of c_i per decile of steps
    double sum_identity = 0.0;                    // |c0 + sum c - 1|
};

EmaSummary ema_summary(const EmaCoefficients& coeffs, double peak_lr, double lam);

}  // namespace treclab
