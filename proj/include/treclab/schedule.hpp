#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace treclab {

enum class ScheduleKind {
    LinearD2Z,    // linear decay to zero after warmup
    Cosine,       // half cosine from peak to floor_over_peak * peak
    Step,         // constant, then a single multiplicative drop
    FactorDecay,  // linear decay from peak to final_over_peak * peak
    WSD,          // warmup / stable / decay-to-zero
    Cyclic,       // arbitrary piecewise-linear phases
    Constant,     // flat at peak after warmup
};

const char* schedule_kind_name(ScheduleKind kind);
ScheduleKind schedule_kind_from_name(const std::string& name);

// One piecewise-linear phase of a Cyclic schedule. Learning rates are
// absolute values in the same unit as peak_lr.
struct CyclicSegment {
    double phase_fraction = 0.0;
    double start_lr = 0.0;
    double end_lr = 0.0;

    bool operator==(const CyclicSegment&) const = default;
};

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::Constant;
    std::int64_t total_steps = 0;
    double peak_lr = 0.0;
    double warmup_fraction = 0.1;
    double weight_decay = 0.0;

    // kind-specific parameters; only the ones for `kind` are meaningful
    double drop_at_fraction = 0.7;  // Step
    double drop_factor = 0.1;       // Step
    double final_over_peak = 0.1;   // FactorDecay
    double floor_over_peak = 0.0;   // Cosine
    double flat_fraction = 0.0;     // WSD
    double decay_fraction = 0.0;    // WSD
    std::vector<CyclicSegment> segments;  // Cyclic

    bool operator==(const ScheduleSpec&) const = default;
};

// Number of warmup steps: llround(warmup_fraction * total_steps).
std::int64_t warmup_steps(const ScheduleSpec& spec);

// Throws ValidationError naming the offending field if the spec is
// inconsistent (fractions out of range, Cyclic fractions not summing to
// 1 - warmup_fraction, ...).
void validate_schedule(const ScheduleSpec& spec);

// Learning rate at step t, t in [1, total_steps]. Schedules are evaluated at
// step ends: the warmup ramp reaches peak_lr exactly at the last warmup step
// and decaying kinds reach their final value exactly at t = total_steps.
// Throws std::out_of_range for t outside [1, total_steps].
double lr_at(const ScheduleSpec& spec, std::int64_t t);

// lr_at for every step; result[t-1] corresponds to step t.
std::vector<double> lr_array(const ScheduleSpec& spec);

// JSON document <-> spec. Structural problems (missing field, wrong type,
// unparseable text) raise ParseError; value problems raise ValidationError.
// Messages name the offending field. parse_schedule(serialize_schedule(s))
// reproduces s exactly, including defaulted fields.
ScheduleSpec parse_schedule(const std::string& json_text);
std::string serialize_schedule(const ScheduleSpec& spec);

}  // namespace treclab
