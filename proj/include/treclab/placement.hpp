#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treclab/predictor.hpp"
#include "treclab/trec.hpp"

namespace treclab {

struct WindowStat {
    double start_fraction = 0.0;
    double end_fraction = 0.0;
    double mean_value = 0.0;
};

// Mean curve value over k contiguous equal windows. Boundaries are rounded to
// grid indices; every window must contain at least one point.
std::vector<WindowStat> segment_means(const Trec& curve, int k);

struct PlacementPlan {
    double start_fraction = 0.0;
    double end_fraction = 0.0;
    double expected_mean_trec = 0.0;
    bool tie = false;  // several windows share the minimal mean; the latest one is chosen
    std::vector<WindowStat> segment_rank;  // every candidate window, best first
    CurveKind source_kind = CurveKind::Measured;
    int source_points = 0;
};

// Slides a window of hq_fraction of the run over the curve and returns the
// window with the smallest mean value. Ties go to the later window, so equal
// retention favors fresher data.
PlacementPlan recommend(const Trec& curve, double hq_fraction);

struct CurriculumEntry {
    std::int64_t step = 0;
    std::string label;  // "general" or "hq"
};

// Step-level labels for a plan: steps inside (start, end] of the run get the
// hq label. Counts match the requested fractions to within one step.
std::vector<CurriculumEntry> emit_curriculum(const PlacementPlan& plan, std::int64_t total_steps);

// Ranking of one specific window against all same-width windows of a curve.
struct WindowAudit {
    double window_mean = 0.0;
    double best_mean = 0.0;
    int window_rank = 0;  // 1 = best
    int n_windows = 0;
    bool suboptimal = false;  // window mean exceeds the best by more than the margin
    PlacementPlan recommended;
};

WindowAudit audit_window(const Trec& curve, double window_start, double window_end, double margin = 0.05);

// Windows holding less than this share of the total update mass are flagged:
// the final model retains almost nothing from them.
inline constexpr double kNearZeroRetentionMass = 1e-4;

struct AuditReport {
    Trec predicted;
    WindowAudit window;
    double window_mass_fraction = 0.0;  // share of sum_i c_i falling in the window
    double margin = 0.05;
    bool near_zero_retention = false;
};

// Audits a published recipe: given its schedule and where the high-quality
// blend was placed, reports how that window ranks on the predicted curve and
// how much update mass the window actually carries.
AuditReport audit_recipe(const ScheduleSpec& spec, double tpp, const PowerLawFit& fit,
                         double window_start, double window_end, double margin = 0.05,
                         int grid_size = 1000);

}  // namespace treclab
