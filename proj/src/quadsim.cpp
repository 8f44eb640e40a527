#include "treclab/quadsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "treclab/ema.hpp"
#include "treclab/errors.hpp"

namespace treclab {

namespace {

// Uniform in [0,1) from the top 53 bits; normals via Box-Muller with the
// second value cached. Matches the kSimRngId contract.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Slow drift path: three fixed low frequencies with seeded amplitudes and
// phases, scaled to unit RMS so drift_amplitude controls the overall size.
struct DriftPath {
    static constexpr double kFreqs[3] = {0.5, 1.0, 1.7};
    double amp[3] = {};
    double phase[3] = {};

    static DriftPath draw(SimRng& rng) {
        DriftPath p;
        double sq = 0.0;
        for (int k = 0; k < 3; ++k) {
            p.amp[k] = rng.normal();
            p.phase[k] = rng.uniform() * 2.0 * std::numbers::pi;
            sq += p.amp[k] * p.amp[k];
        }
        const double rms = std::sqrt(sq / 2.0);
        if (rms > 0.0)
            for (double& a : p.amp) a /= rms;
        return p;
    }

    double at(double t_hat) const {
        double v = 0.0;
        for (int k = 0; k < 3; ++k)
            v += amp[k] * std::sin(2.0 * std::numbers::pi * kFreqs[k] * t_hat + phase[k]);
        return v;
    }
};

std::vector<double> resolve_curvature(const SimConfig& config) {
    if (config.dims < 1)
        throw ValidationError("dims: must be >= 1");
    std::vector<double> h;
    if (config.curvature.size() == 1)
        h.assign(size_t(config.dims), config.curvature[0]);
    else if (config.curvature.size() == size_t(config.dims))
        h = config.curvature;
    else
        throw ValidationError("curvature: expected 1 or dims values, got " +
                              std::to_string(config.curvature.size()));
    for (double v : h)
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError("curvature: all values must be positive and finite");
    return h;
}

void validate_config(const SimConfig& config) {
    validate_schedule(config.schedule);
    resolve_curvature(config);
    if (!(config.batch_noise_std >= 0.0) || !std::isfinite(config.batch_noise_std))
        throw ValidationError("batch_noise_std: must be non-negative and finite");
    if (!(config.drift_amplitude >= 0.0) || !std::isfinite(config.drift_amplitude))
        throw ValidationError("drift_amplitude: must be non-negative and finite");
    if (!std::isfinite(config.initial_theta))
        throw ValidationError("initial_theta: must be finite");
    if (config.hq_segment) {
        const auto& seg = *config.hq_segment;
        if (!(seg.start_fraction >= 0.0 && seg.start_fraction < seg.end_fraction && seg.end_fraction <= 1.0))
            throw ValidationError("hq_segment: need 0 <= start_fraction < end_fraction <= 1");
        if (!std::isfinite(seg.target_offset))
            throw ValidationError("hq_segment.target_offset: must be finite");
    }
}

// steps with s_lo < t <= s_hi belong to the window (start, end] in fractions
std::pair<std::int64_t, std::int64_t> window_steps(double start_fraction, double end_fraction,
                                                   std::int64_t total_steps) {
    return {std::llround(start_fraction * double(total_steps)),
            std::llround(end_fraction * double(total_steps))};
}

double step_curvature(const SimConfig& config, double base_h, double t_hat) {
    return config.curvature_scale ? base_h * config.curvature_scale(t_hat) : base_h;
}

SimRun run_core(const SimConfig& config, std::vector<std::vector<double>> targets) {
    const std::int64_t T = config.schedule.total_steps;
    const int D = config.dims;
    const std::vector<double> lr = lr_array(config.schedule);
    const std::vector<double> h = resolve_curvature(config);
    const double lam = config.schedule.weight_decay;

    const bool adamw = config.optimizer == Optimizer::AdamW;
    if (adamw) {
        if (!(config.beta1 >= 0.0 && config.beta1 < 1.0))
            throw ValidationError("beta1: must lie in [0, 1)");
        if (!(config.beta2 >= 0.0 && config.beta2 < 1.0))
            throw ValidationError("beta2: must lie in [0, 1)");
        if (!(config.epsilon > 0.0))
            throw ValidationError("epsilon: must be positive");
    }

    // stability guard, checked before any state is advanced
    for (std::int64_t t = 0; t < T; ++t) {
        const double t_hat = double(t + 1) / double(T);
        if (adamw) {
            const double a = lr[size_t(t)] * lam;
            if (a >= 1.0)
                throw ValidationError("EMA smoothing out of range at step " + std::to_string(t + 1) +
                                      ": eta * lambda = " + std::to_string(a));
        } else {
            for (int d = 0; d < D; ++d) {
                const double a = lr[size_t(t)] * step_curvature(config, h[size_t(d)], t_hat);
                if (a >= 1.0)
                    throw ValidationError("SGD unstable (divergent EMA) at step " + std::to_string(t + 1) +
                                          ": eta * h = " + std::to_string(a));
            }
        }
    }

    SimRun run;
    run.config = config;
    run.batch_targets = std::move(targets);
    run.updates.assign(size_t(T), std::vector<double>(size_t(D), 0.0));
    run.train_losses.total_steps = T;
    run.reeval_losses.total_steps = T;
    run.train_losses.entries.reserve(size_t(T));
    run.reeval_losses.entries.reserve(size_t(T));
    run.decomposition_available = !adamw || lam > 0.0;

    std::vector<double> theta(size_t(D), config.initial_theta);
    std::vector<double> m(size_t(D), 0.0), v(size_t(D), 0.0);
    double b1_pow = 1.0, b2_pow = 1.0;

    for (std::int64_t t = 0; t < T; ++t) {
        const double t_hat = double(t + 1) / double(T);
        const double eta = lr[size_t(t)];
        const auto& target = run.batch_targets[size_t(t)];

        double train = 0.0;
        for (int d = 0; d < D; ++d) {
            const double hd = step_curvature(config, h[size_t(d)], t_hat);
            const double diff = theta[size_t(d)] - target[size_t(d)];
            train += 0.5 * hd * diff * diff;
        }
        run.train_losses.entries.push_back({t + 1, train, ""});

        if (adamw) {
            b1_pow *= config.beta1;
            b2_pow *= config.beta2;
            for (int d = 0; d < D; ++d) {
                const double hd = step_curvature(config, h[size_t(d)], t_hat);
                const double g = hd * (theta[size_t(d)] - target[size_t(d)]);
                m[size_t(d)] = config.beta1 * m[size_t(d)] + (1.0 - config.beta1) * g;
                v[size_t(d)] = config.beta2 * v[size_t(d)] + (1.0 - config.beta2) * g * g;
                const double m_hat = m[size_t(d)] / (1.0 - b1_pow);
                const double v_hat = v[size_t(d)] / (1.0 - b2_pow);
                const double u = m_hat / (std::sqrt(v_hat) + config.epsilon);
                // x_t = -(1/lambda) * m_hat / (sqrt(v_hat) + eps); with it the
                // step is exactly theta <- (1 - eta*lambda) theta + eta*lambda x_t
                run.updates[size_t(t)][size_t(d)] = lam > 0.0 ? -u / lam : -u;
                theta[size_t(d)] = (1.0 - eta * lam) * theta[size_t(d)] - eta * u;
            }
        } else {
            for (int d = 0; d < D; ++d) {
                const double hd = step_curvature(config, h[size_t(d)], t_hat);
                const double a = eta * hd;
                run.updates[size_t(t)][size_t(d)] = target[size_t(d)];
                theta[size_t(d)] = (1.0 - a) * theta[size_t(d)] + a * target[size_t(d)];
            }
        }
    }
    run.final_theta = theta;

    for (std::int64_t t = 0; t < T; ++t) {
        const double t_hat = double(t + 1) / double(T);
        double loss = 0.0;
        for (int d = 0; d < D; ++d) {
            const double hd = step_curvature(config, h[size_t(d)], t_hat);
            const double diff = run.final_theta[size_t(d)] - run.batch_targets[size_t(t)][size_t(d)];
            loss += 0.5 * hd * diff * diff;
        }
        run.reeval_losses.entries.push_back({t + 1, loss, ""});
    }
    return run;
}

}  // namespace

std::vector<std::vector<double>> generate_targets(const SimConfig& config) {
    validate_config(config);
    const std::int64_t T = config.schedule.total_steps;
    const int D = config.dims;

    SimRng rng(config.seed);
    std::vector<DriftPath> paths;
    paths.reserve(size_t(D));
    for (int d = 0; d < D; ++d) paths.push_back(DriftPath::draw(rng));

    std::vector<std::vector<double>> targets(size_t(T), std::vector<double>(size_t(D), 0.0));
    for (std::int64_t t = 0; t < T; ++t) {
        const double t_hat = double(t + 1) / double(T);
        for (int d = 0; d < D; ++d) {
            double v = config.drift_amplitude * paths[size_t(d)].at(t_hat);
            if (config.batch_noise_std > 0.0) v += config.batch_noise_std * rng.normal();
            targets[size_t(t)][size_t(d)] = v;
        }
    }

    if (config.hq_segment) {
        const auto [lo, hi] = window_steps(config.hq_segment->start_fraction,
                                           config.hq_segment->end_fraction, T);
        for (std::int64_t t = lo; t < hi && t < T; ++t)
            for (int d = 0; d < D; ++d) targets[size_t(t)][size_t(d)] += config.hq_segment->target_offset;
    }
    return targets;
}

SimRun run_sgd(const SimConfig& config) {
    SimConfig c = config;
    c.optimizer = Optimizer::Sgd;
    return run_core(c, generate_targets(c));
}

SimRun run_adamw(const SimConfig& config) {
    SimConfig c = config;
    c.optimizer = Optimizer::AdamW;
    return run_core(c, generate_targets(c));
}

SimRun run_sim(const SimConfig& config) {
    return config.optimizer == Optimizer::AdamW ? run_adamw(config) : run_sgd(config);
}

double decomposition_max_rel_error(const SimRun& run) {
    if (!run.decomposition_available)
        throw ValidationError("decomposition unavailable: AdamW with weight decay 0 has no EMA form");
    const std::int64_t T = run.config.schedule.total_steps;
    const int D = run.config.dims;
    const std::vector<double> lr = lr_array(run.config.schedule);
    const std::vector<double> h = resolve_curvature(run.config);

    double worst = 0.0;
    if (run.config.optimizer == Optimizer::AdamW) {
        const EmaCoefficients coeffs = ema_coefficients(lr, run.config.schedule.weight_decay);
        for (int d = 0; d < D; ++d) {
            long double recon = (long double)(coeffs.c0) * run.config.initial_theta;
            for (std::int64_t t = 0; t < T; ++t)
                recon += (long double)(coeffs.c[size_t(t)]) * run.updates[size_t(t)][size_t(d)];
            const double truth = run.final_theta[size_t(d)];
            const double err = std::fabs(double(recon) - truth) / std::max(std::fabs(truth), 1e-12);
            worst = std::max(worst, err);
        }
    } else {
        // per-dimension smoothing alpha_t = eta_t * h_d (curvature hook included)
        for (int d = 0; d < D; ++d) {
            std::vector<double> scaled(static_cast<size_t>(T));
            for (std::int64_t t = 0; t < T; ++t)
                scaled[size_t(t)] =
                    lr[size_t(t)] * step_curvature(run.config, h[size_t(d)], double(t + 1) / double(T));
            const EmaCoefficients coeffs = ema_coefficients(scaled, 1.0);
            long double recon = (long double)(coeffs.c0) * run.config.initial_theta;
            for (std::int64_t t = 0; t < T; ++t)
                recon += (long double)(coeffs.c[size_t(t)]) * run.batch_targets[size_t(t)][size_t(d)];
            const double truth = run.final_theta[size_t(d)];
            const double err = std::fabs(double(recon) - truth) / std::max(std::fabs(truth), 1e-12);
            worst = std::max(worst, err);
        }
    }
    return worst;
}

double hq_eval_loss(const SimRun& run) {
    if (!run.config.hq_segment)
        throw ValidationError("hq_eval_loss requires a config with hq_segment");
    const std::int64_t T = run.config.schedule.total_steps;
    const int D = run.config.dims;
    const std::vector<double> h = resolve_curvature(run.config);
    const auto [lo, hi] = window_steps(run.config.hq_segment->start_fraction,
                                       run.config.hq_segment->end_fraction, T);
    if (hi <= lo)
        throw ValidationError("hq_segment window contains no steps");

    double loss = 0.0;
    for (int d = 0; d < D; ++d) {
        double mean = 0.0;
        for (std::int64_t t = lo; t < hi; ++t) mean += run.batch_targets[size_t(t)][size_t(d)];
        mean /= double(hi - lo);
        const double diff = run.final_theta[size_t(d)] - mean;
        loss += 0.5 * h[size_t(d)] * diff * diff;
    }
    return loss;
}

Trec simulated_trec(const SimRun& run, int window, int grid_size) {
    return comparison_protocol(build_trec(run.reeval_losses), window, grid_size);
}

PlacementSweep placement_experiment(const SimConfig& base, int k, int threads) {
    if (k < 2)
        throw ValidationError("k: placement experiment needs at least 2 segments");
    if (!base.hq_segment)
        throw ValidationError("placement experiment needs hq_segment to supply the target offset");
    validate_config(base);

    const std::int64_t T = base.schedule.total_steps;
    const int D = base.dims;
    const double offset = base.hq_segment->target_offset;

    // One shared base stream: every placement sees the same data apart from
    // where the HQ shift happens to fall.
    SimConfig plain = base;
    plain.hq_segment.reset();
    const std::vector<std::vector<double>> base_targets = generate_targets(plain);

    PlacementSweep sweep;
    sweep.segments.resize(size_t(k));

    std::vector<SimRun> runs(static_cast<size_t>(k));
    auto run_segment = [&](int i) {
        const std::int64_t lo = std::llround(double(T) * i / double(k));
        const std::int64_t hi = std::llround(double(T) * (i + 1) / double(k));
        SimConfig cfg = base;
        cfg.hq_segment = HqSegment{double(i) / double(k), double(i + 1) / double(k), offset};
        std::vector<std::vector<double>> targets = base_targets;
        for (std::int64_t t = lo; t < hi; ++t)
            for (int d = 0; d < D; ++d) targets[size_t(t)][size_t(d)] += offset;
        runs[size_t(i)] = run_core(cfg, std::move(targets));
    };

    const int workers = std::max(1, std::min(threads, k));
    if (workers == 1) {
        for (int i = 0; i < k; ++i) run_segment(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(size_t(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < k; i += workers) run_segment(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (int i = 0; i < k; ++i) {
        sweep.segments[size_t(i)] = {i, double(i) / double(k), double(i + 1) / double(k),
                                     hq_eval_loss(runs[size_t(i)])};
    }

    sweep.baseline = run_core(plain, base_targets);
    {
        // Without a placement the HQ distribution is the offset global mean.
        const std::vector<double> h = resolve_curvature(plain);
        double loss = 0.0;
        for (int d = 0; d < D; ++d) {
            double mean = 0.0;
            for (std::int64_t t = 0; t < T; ++t) mean += base_targets[size_t(t)][size_t(d)];
            mean = mean / double(T) + offset;
            const double diff = sweep.baseline.final_theta[size_t(d)] - mean;
            loss += 0.5 * h[size_t(d)] * diff * diff;
        }
        sweep.baseline_eval = loss;
    }

    sweep.best_segment = 0;
    for (int i = 1; i < k; ++i)
        if (sweep.segments[size_t(i)].hq_eval <= sweep.segments[size_t(sweep.best_segment)].hq_eval)
            sweep.best_segment = i;
    return sweep;
}

}  // namespace treclab
