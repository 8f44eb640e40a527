#include "treclab/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "treclab/errors.hpp"

namespace treclab {

namespace {

// Shared linear ramp so that schedules which coincide on a span produce
// bitwise-identical learning rates (WSD tails vs. Cyclic tails).
double lerp_steps(double start_value, double end_value, std::int64_t steps_into, std::int64_t span) {
    return start_value + (end_value - start_value) * (double(steps_into) / double(span));
}

std::string fmt(const char* pattern, double v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace

const char* schedule_kind_name(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::LinearD2Z: return "linear_d2z";
        case ScheduleKind::Cosine: return "cosine";
        case ScheduleKind::Step: return "step";
        case ScheduleKind::FactorDecay: return "factor_decay";
        case ScheduleKind::WSD: return "wsd";
        case ScheduleKind::Cyclic: return "cyclic";
        case ScheduleKind::Constant: return "constant";
    }
    return "unknown";
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
    if (name == "linear_d2z") return ScheduleKind::LinearD2Z;
    if (name == "cosine") return ScheduleKind::Cosine;
    if (name == "step") return ScheduleKind::Step;
    if (name == "factor_decay") return ScheduleKind::FactorDecay;
    if (name == "wsd") return ScheduleKind::WSD;
    if (name == "cyclic") return ScheduleKind::Cyclic;
    if (name == "constant") return ScheduleKind::Constant;
    throw ParseError("kind: unknown schedule kind \"" + name + "\"");
}

std::int64_t warmup_steps(const ScheduleSpec& spec) {
    return std::llround(spec.warmup_fraction * double(spec.total_steps));
}

void validate_schedule(const ScheduleSpec& spec) {
    if (spec.total_steps < 1)
        throw ValidationError("total_steps: must be >= 1, got " + std::to_string(spec.total_steps));
    if (!(spec.peak_lr > 0.0) || !std::isfinite(spec.peak_lr))
        throw ValidationError("peak_lr: must be positive and finite, got " + fmt("%g", spec.peak_lr));
    if (!(spec.warmup_fraction >= 0.0 && spec.warmup_fraction < 1.0))
        throw ValidationError("warmup_fraction: must lie in [0, 1), got " + fmt("%g", spec.warmup_fraction));
    if (!(spec.weight_decay >= 0.0) || !std::isfinite(spec.weight_decay))
        throw ValidationError("weight_decay: must be non-negative and finite, got " + fmt("%g", spec.weight_decay));

    const std::int64_t w = warmup_steps(spec);
    if (w >= spec.total_steps)
        throw ValidationError("warmup_fraction: warmup covers all " + std::to_string(spec.total_steps) +
                              " steps, no room for the main phase");

    switch (spec.kind) {
        case ScheduleKind::Step: {
            if (!(spec.drop_at_fraction > 0.0 && spec.drop_at_fraction < 1.0))
                throw ValidationError("drop_at_fraction: must lie in (0, 1), got " + fmt("%g", spec.drop_at_fraction));
            if (!(spec.drop_factor > 0.0 && spec.drop_factor <= 1.0))
                throw ValidationError("drop_factor: must lie in (0, 1], got " + fmt("%g", spec.drop_factor));
            const std::int64_t drop = std::llround(spec.drop_at_fraction * double(spec.total_steps));
            if (drop <= w)
                throw ValidationError("drop_at_fraction: drop step " + std::to_string(drop) +
                                      " falls inside warmup (" + std::to_string(w) + " steps)");
            break;
        }
        case ScheduleKind::FactorDecay:
            if (!(spec.final_over_peak >= 0.0 && spec.final_over_peak <= 1.0))
                throw ValidationError("final_over_peak: must lie in [0, 1], got " + fmt("%g", spec.final_over_peak));
            break;
        case ScheduleKind::Cosine:
            if (!(spec.floor_over_peak >= 0.0 && spec.floor_over_peak < 1.0))
                throw ValidationError("floor_over_peak: must lie in [0, 1), got " + fmt("%g", spec.floor_over_peak));
            break;
        case ScheduleKind::WSD: {
            if (!(spec.flat_fraction > 0.0) || !(spec.decay_fraction > 0.0))
                throw ValidationError("flat_fraction/decay_fraction: both must be positive");
            const double total = spec.warmup_fraction + spec.flat_fraction + spec.decay_fraction;
            if (std::fabs(total - 1.0) > 1e-12)
                throw ValidationError("decay_fraction: warmup + flat + decay must equal 1, got " + fmt("%.17g", total));
            break;
        }
        case ScheduleKind::Cyclic: {
            if (spec.segments.empty())
                throw ValidationError("segments: Cyclic schedule needs at least one segment");
            double total = spec.warmup_fraction;
            for (size_t i = 0; i < spec.segments.size(); ++i) {
                const auto& seg = spec.segments[i];
                const std::string path = "segments[" + std::to_string(i) + "]";
                if (!(seg.phase_fraction > 0.0))
                    throw ValidationError(path + ".phase_fraction: must be positive, got " + fmt("%g", seg.phase_fraction));
                if (seg.start_lr < 0.0 || seg.end_lr < 0.0)
                    throw ValidationError(path + ": learning rates must be non-negative");
                if (seg.start_lr > spec.peak_lr * (1.0 + 1e-12) || seg.end_lr > spec.peak_lr * (1.0 + 1e-12))
                    throw ValidationError(path + ": learning rates must not exceed peak_lr");
                total += seg.phase_fraction;
            }
            if (std::fabs(total - 1.0) > 1e-12)
                throw ValidationError("segments: phase fractions + warmup_fraction must equal 1, got " +
                                      fmt("%.17g", total));
            break;
        }
        case ScheduleKind::LinearD2Z:
        case ScheduleKind::Constant:
            break;
    }
}

namespace {

double lr_at_validated(const ScheduleSpec& spec, std::int64_t t) {
    const std::int64_t T = spec.total_steps;
    const std::int64_t w = warmup_steps(spec);
    if (t <= w)
        return lerp_steps(0.0, spec.peak_lr, t, w);

    switch (spec.kind) {
        case ScheduleKind::Constant:
            return spec.peak_lr;
        case ScheduleKind::LinearD2Z:
            return lerp_steps(spec.peak_lr, 0.0, t - w, T - w);
        case ScheduleKind::FactorDecay:
            return lerp_steps(spec.peak_lr, spec.final_over_peak * spec.peak_lr, t - w, T - w);
        case ScheduleKind::Cosine: {
            const double floor_lr = spec.floor_over_peak * spec.peak_lr;
            const double phase = double(t - w) / double(T - w);
            return floor_lr + (spec.peak_lr - floor_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
        }
        case ScheduleKind::Step: {
            const std::int64_t drop = std::llround(spec.drop_at_fraction * double(T));
            return t <= drop ? spec.peak_lr : spec.peak_lr * spec.drop_factor;
        }
        case ScheduleKind::WSD: {
            const std::int64_t flat_end = std::llround((spec.warmup_fraction + spec.flat_fraction) * double(T));
            if (t <= flat_end) return spec.peak_lr;
            return lerp_steps(spec.peak_lr, 0.0, t - flat_end, T - flat_end);
        }
        case ScheduleKind::Cyclic: {
            // Segment boundaries are rounded to whole steps; the final boundary
            // is pinned to T so the emitted phase lengths always sum to T.
            double cum = spec.warmup_fraction;
            std::int64_t lo = w;
            for (size_t i = 0; i < spec.segments.size(); ++i) {
                cum += spec.segments[i].phase_fraction;
                std::int64_t hi = (i + 1 == spec.segments.size()) ? T : std::llround(cum * double(T));
                if (hi > T) hi = T;
                if (t <= hi && hi > lo)
                    return lerp_steps(spec.segments[i].start_lr, spec.segments[i].end_lr, t - lo, hi - lo);
                lo = hi;
            }
            // t == T and rounding placed every boundary before it; use last segment end
            return spec.segments.back().end_lr;
        }
    }
    return spec.peak_lr;  // unreachable
}

}  // namespace

double lr_at(const ScheduleSpec& spec, std::int64_t t) {
    if (t < 1 || t > spec.total_steps)
        throw std::out_of_range("step " + std::to_string(t) + " outside [1, " +
                                std::to_string(spec.total_steps) + "]");
    validate_schedule(spec);
    return lr_at_validated(spec, t);
}

std::vector<double> lr_array(const ScheduleSpec& spec) {
    validate_schedule(spec);
    std::vector<double> out(size_t(spec.total_steps));
    for (std::int64_t t = 1; t <= spec.total_steps; ++t)
        out[size_t(t - 1)] = lr_at_validated(spec, t);
    return out;
}

}  // namespace treclab
