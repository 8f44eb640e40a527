#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "treclab/schedule.hpp"
#include "treclab/trec.hpp"

namespace treclab {

enum class Optimizer { Sgd, AdamW };

// Targets inside [start_fraction, end_fraction) of the run are shifted by
// target_offset in every dimension; they stand in for a high-quality blend.
struct HqSegment {
    double start_fraction = 0.0;
    double end_fraction = 0.0;
    double target_offset = 0.0;
};

// Independent per-dimension quadratics: batch t in dimension d contributes
// loss 0.5 * h_d * (theta_d - target_{t,d})^2. Targets follow a slow seeded
// drift path plus i.i.d. Gaussian batch noise.
struct SimConfig {
    Optimizer optimizer = Optimizer::AdamW;
    int dims = 1;
    ScheduleSpec schedule;  // supplies total_steps, the lr array, and weight decay
    double beta1 = 0.9;
    double beta2 = 0.95;
    double epsilon = 1e-8;
    std::vector<double> curvature{1.0};  // one value broadcast to all dims, or dims values
    double drift_amplitude = 0.0;
    double batch_noise_std = 0.0;
    double initial_theta = 0.0;
    std::uint64_t seed = 0;
    std::optional<HqSegment> hq_segment;
    // Optional multiplier on curvature as a function of t_hat; off by default.
    // Not part of the JSON form.
    std::function<double(double)> curvature_scale;
};

struct SimRun {
    SimConfig config;
    std::vector<double> final_theta;                 // dims
    std::vector<std::vector<double>> batch_targets;  // [step][dim]
    std::vector<std::vector<double>> updates;        // [step][dim], the EMA inputs x_t
    LossLog train_losses;   // loss of the incoming parameters on each batch
    LossLog reeval_losses;  // loss of the final parameters on each batch
    bool decomposition_available = false;  // false for AdamW with weight decay 0
};

// Generator identity, for reproducing runs outside this codebase: uniforms
// are mt19937_64 draws mapped to [0,1) by (x >> 11) * 2^-53, normals come
// from the Box-Muller transform of consecutive uniforms.
inline constexpr const char* kSimRngId = "mt19937_64/box-muller";

// Deterministic targets for a config: drift path + noise + optional HQ shift.
// Draw order: per dimension 3 (amplitude, phase) pairs for the drift path,
// then noise in step-major order.
std::vector<std::vector<double>> generate_targets(const SimConfig& config);

SimRun run_sgd(const SimConfig& config);
SimRun run_adamw(const SimConfig& config);
SimRun run_sim(const SimConfig& config);  // dispatches on config.optimizer

// Largest per-dimension relative error of the reconstruction
// c0 * theta_0 + sum_i c_i * x_i against the directly simulated final theta.
double decomposition_max_rel_error(const SimRun& run);

// 0.5 * sum_d h_d * (theta_T - hq_mean_d)^2 where hq_mean is the mean target
// over the HQ window of this run. Requires config.hq_segment.
double hq_eval_loss(const SimRun& run);

// Re-evaluation curve of the run: build_trec of the reeval losses pushed
// through the standard comparison protocol.
Trec simulated_trec(const SimRun& run, int window = 100, int grid_size = 1000);

struct PlacementOutcome {
    int segment_index = 0;
    double start_fraction = 0.0;
    double end_fraction = 0.0;
    double hq_eval = 0.0;
};

struct PlacementSweep {
    std::vector<PlacementOutcome> segments;
    double baseline_eval = 0.0;  // no placement; evaluated against the global mean + offset
    int best_segment = 0;        // ties resolved toward the later segment
    SimRun baseline;
};

// Runs k simulations over the same base target stream, placing the HQ shift
// in each 1/k window in turn, plus a no-placement baseline. The base config
// must carry hq_segment to supply the offset; its window is ignored.
// Jobs are distributed over up to `threads` workers; results are ordered by
// segment index regardless of scheduling.
PlacementSweep placement_experiment(const SimConfig& base, int k, int threads = 1);

// JSON form of SimConfig (curvature_scale excluded). Same error conventions
// as parse_schedule.
SimConfig parse_sim_config(const std::string& json_text);
std::string serialize_sim_config(const SimConfig& config);

}  // namespace treclab
