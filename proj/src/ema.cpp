#include "treclab/ema.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treclab/errors.hpp"

namespace treclab {

TimescaleParams TimescaleParams::from_steps(double eta, double lam, double steps) {
    TimescaleParams p;
    p.eta = eta;
    p.lam = lam;
    p.steps = steps;
    return p;
}

TimescaleParams TimescaleParams::from_tokens(double eta, double lam, double batch_size, double dataset_tokens) {
    TimescaleParams p;
    p.eta = eta;
    p.lam = lam;
    p.batch_size = batch_size;
    p.dataset_tokens = dataset_tokens;
    if (!(batch_size > 0.0))
        throw ValidationError("batch_size: must be positive");
    p.steps = dataset_tokens / batch_size;
    return p;
}

TimescaleResult timescale(const TimescaleParams& params) {
    if (!(params.eta > 0.0) || !std::isfinite(params.eta))
        throw ValidationError("eta: must be positive and finite");
    if (!(params.lam >= 0.0) || !std::isfinite(params.lam))
        throw ValidationError("lam: must be non-negative and finite");
    if (!(params.steps > 0.0) || !std::isfinite(params.steps))
        throw ValidationError("steps: must be positive and finite");
    if (params.batch_size && params.dataset_tokens) {
        const double derived = *params.dataset_tokens / *params.batch_size;
        if (std::fabs(derived - params.steps) > 1e-9 * std::max(1.0, std::fabs(derived)))
            throw ValidationError("steps: inconsistent with dataset_tokens / batch_size");
    }

    TimescaleResult r;
    if (params.lam == 0.0) {
        r.defined = false;  // timescale undefined (Adam limit)
        return r;
    }
    r.defined = true;
    r.tau_iter = 1.0 / (params.eta * params.lam);
    r.tau = r.tau_iter / params.steps;
    return r;
}

double tau_epoch(double tau_iter, double iters_per_epoch) {
    if (!(iters_per_epoch > 0.0))
        throw ValidationError("iters_per_epoch: must be positive");
    return tau_iter / iters_per_epoch;
}

EmaCoefficients ema_coefficients(std::span<const double> lr, double lam) {
    if (!(lam >= 0.0) || !std::isfinite(lam))
        throw ValidationError("lam: must be non-negative and finite");
    const size_t T = lr.size();

    EmaCoefficients out;
    out.c.resize(T);
    out.alphas.resize(T);
    for (size_t i = 0; i < T; ++i) {
        const double a = lr[i] * lam;
        if (!(a >= 0.0 && a < 1.0))
            throw ValidationError("EMA smoothing out of range at step " + std::to_string(i + 1) +
                                  ": alpha = " + std::to_string(a));
        out.alphas[i] = a;
    }

    // Backward pass over the suffix product prod_{j>i} (1 - alpha_j), kept in
    // extended precision. If any decay factor is tiny or the product nears
    // underflow, accumulation switches to log space; coefficients past that
    // point come out as alpha * exp(log_suffix).
    long double suffix = 1.0L;
    long double log_suffix = 0.0L;
    bool log_mode = false;
    for (size_t k = T; k-- > 0;) {
        const long double a = out.alphas[k];
        out.c[k] = double(log_mode ? a * expl(log_suffix) : a * suffix);
        const long double decay = 1.0L - a;
        if (!log_mode) {
            suffix *= decay;
            if (decay < 1e-12L || suffix < 1e-280L) {
                log_mode = true;
                log_suffix = logl(suffix);
            }
        } else {
            log_suffix += logl(decay);
        }
    }
    out.c0 = double(log_mode ? expl(log_suffix) : suffix);
    return out;
}

double sum_identity_error(const EmaCoefficients& coeffs) {
    // Neumaier summation of c0 followed by the c_i
    double sum = coeffs.c0;
    double comp = 0.0;
    for (double v : coeffs.c) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return std::fabs(sum + comp - 1.0);
}

std::vector<CoeffPoint> continuous_coefficients(const EmaCoefficients& coeffs, int grid_size) {
    if (grid_size < 2)
        throw ValidationError("grid_size: must be at least 2");
    const size_t T = coeffs.c.size();
    if (T == 0)
        throw ValidationError("coefficients are empty");

    std::vector<CoeffPoint> out(static_cast<size_t>(grid_size));
    const double dT = double(T);
    size_t j = 0;  // step index such that (j+1)/T <= g while advancing
    for (int k = 1; k <= grid_size; ++k) {
        const double g = double(k) / double(grid_size);
        CoeffPoint& p = out[size_t(k - 1)];
        p.t_hat = g;
        if (g <= 1.0 / dT) {
            p.c = coeffs.c.front();  // no data left of the first step
            continue;
        }
        while (j + 2 < T && double(j + 2) / dT < g) ++j;
        // now (j+1)/T <= g <= (j+2)/T up to the clamp above
        const double x0 = double(j + 1) / dT;
        const double x1 = double(j + 2) / dT;
        const double y0 = coeffs.c[j];
        const double y1 = coeffs.c[std::min(j + 1, T - 1)];
        if (g >= x1 || x1 == x0)
            p.c = y1;
        else
            p.c = y0 + (y1 - y0) * ((g - x0) / (x1 - x0));
    }
    return out;
}

std::vector<double> small_lambda_profile(std::span<const double> lr, double lam) {
    if (lr.empty())
        throw ValidationError("schedule is empty, profile undefined");
    std::vector<double> out;
    if (lam == 0.0) {
        // Adam limit: c_i -> eta_i * lam, so the normalized profile is the
        // normalized learning-rate schedule itself.
        out.assign(lr.begin(), lr.end());
    } else {
        out = ema_coefficients(lr, lam).c;
    }
    const double peak = *std::max_element(out.begin(), out.end());
    if (!(peak > 0.0))
        throw ValidationError("schedule has no non-zero learning rate, profile undefined");
    for (double& v : out) v /= peak;
    return out;
}

EmaSummary ema_summary(const EmaCoefficients& coeffs, double peak_lr, double lam) {
    EmaSummary s;
    s.c0 = coeffs.c0;
    s.sum_identity = sum_identity_error(coeffs);

    const std::int64_t T = std::int64_t(coeffs.c.size());
    if (T == 0)
        throw ValidationError("coefficients are empty");

    if (lam > 0.0) {
        const TimescaleResult r = timescale(TimescaleParams::from_steps(peak_lr, lam, double(T)));
        s.tau = r.tau;
        s.tau_iter = r.tau_iter;
    }

    std::int64_t best = 0;
    for (std::int64_t i = 1; i < T; ++i)
        if (coeffs.c[size_t(i)] > coeffs.c[size_t(best)]) best = i;
    s.argmax_step = best + 1;

    for (int d = 0; d < 10; ++d) {
        const std::int64_t lo = std::llround(double(T) * d / 10.0);
        const std::int64_t hi = std::llround(double(T) * (d + 1) / 10.0);
        double mass = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) mass += coeffs.c[size_t(i)];
        s.mass_by_decile[size_t(d)] = mass;
    }
    return s;
}

}  // namespace treclab
