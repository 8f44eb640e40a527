#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "treclab/errors.hpp"
#include "treclab/placement.hpp"
#include "treclab/predictor.hpp"
#include "treclab/schedule.hpp"
#include "treclab/trec.hpp"

using namespace treclab;

namespace {

template <typename E, typename Fn>
bool throws_containing(Fn&& fn, const std::string& needle) {
    try {
        fn();
    } catch (const E& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    } catch (...) {
        return false;
    }
    return false;
}

// uniform grid with t_hat = (i+1)/n, so cell i covers (i/n, (i+1)/n]
Trec grid_curve(const std::vector<double>& values) {
    Trec curve;
    const size_t n = values.size();
    curve.points.reserve(n);
    for (size_t i = 0; i < n; ++i)
        curve.points.push_back({double(i + 1) / double(n), values[i]});
    return curve;
}

std::vector<double> random_values(size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<double> v(n);
    for (double& x : v) x = double(gen() >> 11) * 0x1.0p-53;
    return v;
}

}  // namespace

TEST_CASE("segment means split an integer staircase exactly") {
    const Trec curve = grid_curve({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});

    auto halves = segment_means(curve, 2);
    REQUIRE_EQ(halves.size(), 2);
    CHECK_EQ(halves[0].start_fraction, 0.0);
    CHECK_EQ(halves[0].end_fraction, 0.5);
    CHECK_EQ(halves[0].mean_value, 3.0);
    CHECK_EQ(halves[1].start_fraction, 0.5);
    CHECK_EQ(halves[1].end_fraction, 1.0);
    CHECK_EQ(halves[1].mean_value, 8.0);

    // ten points over three segments: 3, 4, and 3 cells after rounding
    auto thirds = segment_means(curve, 3);
    REQUIRE_EQ(thirds.size(), 3);
    CHECK_EQ(thirds[0].mean_value, 2.0);
    CHECK_EQ(thirds[1].mean_value, 5.5);
    CHECK_EQ(thirds[2].mean_value, 9.0);
    CHECK_EQ(thirds[1].start_fraction, doctest::Approx(0.3).epsilon(1e-12));
    CHECK_EQ(thirds[1].end_fraction, doctest::Approx(0.7).epsilon(1e-12));

    auto identity = segment_means(curve, 10);
    for (size_t i = 0; i < 10; ++i) CHECK_EQ(identity[i].mean_value, double(i + 1));
}

TEST_CASE("segment requests that cannot be honored are refused") {
    const Trec curve = grid_curve({1, 2, 3, 4});
    CHECK(throws_containing<ValidationError>([&] { segment_means(curve, 0); }, "k"));
    CHECK(throws_containing<ValidationError>([&] { segment_means(curve, 5); }, "exceeds"));

    Trec single;
    single.points.push_back({1.0, 2.0});
    CHECK(throws_containing<ValidationError>([&] { segment_means(single, 1); },
                                             "at least two points"));

    Trec uneven = grid_curve({1, 2, 3, 4});
    uneven.points[2].t_hat = 0.6;
    CHECK(throws_containing<ValidationError>([&] { segment_means(uneven, 2); }, "uniform grid"));

    Trec backwards;
    backwards.points.push_back({1.0, 1.0});
    backwards.points.push_back({0.5, 2.0});
    CHECK(throws_containing<ValidationError>([&] { segment_means(backwards, 1); }, "increasing"));
}

TEST_CASE("the cheapest window wins the recommendation") {
    const Trec curve = grid_curve({9, 8, 7, 6, 5, 1, 2, 3, 4, 5});
    PlacementPlan plan = recommend(curve, 0.2);  // two cells

    CHECK_EQ(plan.start_fraction, 0.5);
    CHECK_EQ(plan.end_fraction, 0.7);
    CHECK_EQ(plan.expected_mean_trec, 1.5);  // cells valued 1 and 2
    CHECK_FALSE(plan.tie);
    CHECK_EQ(plan.source_points, 10);
    CHECK_EQ(int(plan.source_kind), int(CurveKind::Measured));

    REQUIRE_EQ(plan.segment_rank.size(), 9);
    CHECK_EQ(plan.segment_rank[0].start_fraction, 0.5);
    CHECK_EQ(plan.segment_rank[0].mean_value, 1.5);
    for (size_t i = 1; i < plan.segment_rank.size(); ++i)
        CHECK_GE(plan.segment_rank[i].mean_value, plan.segment_rank[i - 1].mean_value);
}

TEST_CASE("equal retention goes to the latest window") {
    const Trec curve = grid_curve({3, 1, 2, 1});
    PlacementPlan plan = recommend(curve, 0.25);  // single-cell windows

    CHECK(plan.tie);
    CHECK_EQ(plan.start_fraction, 0.75);
    CHECK_EQ(plan.end_fraction, 1.0);
    CHECK_EQ(plan.expected_mean_trec, 1.0);

    // equal means rank later windows first
    REQUIRE_EQ(plan.segment_rank.size(), 4);
    CHECK_EQ(plan.segment_rank[0].start_fraction, 0.75);
    CHECK_EQ(plan.segment_rank[1].start_fraction, 0.25);
    CHECK_EQ(plan.segment_rank[2].mean_value, 2.0);
    CHECK_EQ(plan.segment_rank[3].start_fraction, 0.0);
}

TEST_CASE("a flat curve ties everywhere and picks the freshest data") {
    const Trec curve = grid_curve(std::vector<double>(8, 4.0));
    PlacementPlan plan = recommend(curve, 0.25);
    CHECK(plan.tie);
    CHECK_EQ(plan.end_fraction, 1.0);
    CHECK_EQ(plan.start_fraction, 0.75);
}

TEST_CASE("scaling or shifting the curve never moves the recommendation") {
    Trec base = grid_curve(random_values(50, 77));
    Trec moved = base;
    for (auto& p : moved.points) p.value = 3.5 * p.value - 1.25;

    PlacementPlan a = recommend(base, 0.2);
    PlacementPlan b = recommend(moved, 0.2);
    CHECK_EQ(a.start_fraction, b.start_fraction);
    CHECK_EQ(a.end_fraction, b.end_fraction);
    CHECK_EQ(a.tie, b.tie);
    CHECK_EQ(b.expected_mean_trec, doctest::Approx(3.5 * a.expected_mean_trec - 1.25).epsilon(1e-12));
    REQUIRE_EQ(a.segment_rank.size(), b.segment_rank.size());
    for (size_t i = 0; i < a.segment_rank.size(); ++i)
        CHECK_EQ(a.segment_rank[i].start_fraction, b.segment_rank[i].start_fraction);
}

TEST_CASE("window fractions out of range are refused") {
    const Trec curve = grid_curve({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    CHECK(throws_containing<ValidationError>([&] { recommend(curve, 0.0); }, "positive"));
    CHECK(throws_containing<ValidationError>([&] { recommend(curve, -0.5); }, "positive"));
    CHECK(throws_containing<ValidationError>([&] { recommend(curve, 1.0); }, "whole run"));
    CHECK(throws_containing<ValidationError>([&] { recommend(curve, 1.5); }, "whole run"));

    // a window narrower than one cell still selects a single cell
    PlacementPlan plan = recommend(curve, 1e-9);
    CHECK_EQ(plan.end_fraction - plan.start_fraction, doctest::Approx(0.1).epsilon(1e-12));
    CHECK_EQ(plan.expected_mean_trec, 1.0);
}

TEST_CASE("curriculum labels cover exactly the planned step range") {
    PlacementPlan plan;
    plan.start_fraction = 0.25;
    plan.end_fraction = 0.75;
    auto entries = emit_curriculum(plan, 10);
    REQUIRE_EQ(entries.size(), 10);
    for (std::int64_t t = 1; t <= 10; ++t) {
        CHECK_EQ(entries[size_t(t - 1)].step, t);
        // half-step bounds round away from zero: steps 4..8 carry the label
        CHECK_EQ(entries[size_t(t - 1)].label, (t >= 4 && t <= 8) ? "hq" : "general");
    }
}

TEST_CASE("a continued pretraining style plan lands on whole steps") {
    const std::int64_t total = 3303;
    PlacementPlan plan;
    plan.start_fraction = 1979.0 / 3303.0;
    plan.end_fraction = 2213.0 / 3303.0;

    auto entries = emit_curriculum(plan, total);
    REQUIRE_EQ(entries.size(), size_t(total));

    std::int64_t first_hq = 0, last_hq = 0, count = 0;
    for (const auto& e : entries) {
        if (e.label == "hq") {
            if (count == 0) first_hq = e.step;
            last_hq = e.step;
            ++count;
        } else {
            CHECK_EQ(e.label, "general");
        }
    }
    CHECK_EQ(first_hq, 1980);
    CHECK_EQ(last_hq, 2213);
    CHECK_EQ(count, 234);

    const double requested = (plan.end_fraction - plan.start_fraction) * double(total);
    CHECK_LE(std::fabs(double(count) - requested), 1.0);
}

TEST_CASE("curricula that cannot be resolved are refused") {
    PlacementPlan plan;
    plan.start_fraction = 0.25;
    plan.end_fraction = 0.75;
    CHECK(throws_containing<ValidationError>([&] { emit_curriculum(plan, 0); }, "total_steps"));

    PlacementPlan empty;
    empty.start_fraction = 0.5;
    empty.end_fraction = 0.5;
    CHECK(throws_containing<ValidationError>([&] { emit_curriculum(empty, 10); },
                                             "plan window fractions"));

    PlacementPlan sliver;
    sliver.start_fraction = 0.41;
    sliver.end_fraction = 0.42;
    CHECK(throws_containing<ValidationError>([&] { emit_curriculum(sliver, 10); },
                                             "no steps at this resolution"));
}

TEST_CASE("auditing a late window on a falling curve confirms it is best") {
    const Trec curve = grid_curve({10, 9, 8, 7, 6, 5, 4, 3, 2, 1});

    WindowAudit late = audit_window(curve, 0.8, 1.0);
    CHECK_EQ(late.window_mean, 1.5);
    CHECK_EQ(late.best_mean, 1.5);
    CHECK_EQ(late.window_rank, 1);
    CHECK_EQ(late.n_windows, 9);
    CHECK_FALSE(late.suboptimal);
    CHECK_EQ(late.recommended.start_fraction, 0.8);
    CHECK_EQ(late.recommended.end_fraction, 1.0);

    WindowAudit early = audit_window(curve, 0.0, 0.2);
    CHECK_EQ(early.window_mean, 9.5);
    CHECK_EQ(early.best_mean, 1.5);
    CHECK_EQ(early.window_rank, 9);
    CHECK(early.suboptimal);

    // a forgiving margin absorbs the gap
    WindowAudit lenient = audit_window(curve, 0.0, 0.2, 10.0);
    CHECK_FALSE(lenient.suboptimal);
}

TEST_CASE("an audit window narrower than a cell collapses to that cell") {
    const Trec curve = grid_curve({10, 9, 8, 7, 6, 5, 4, 3, 2, 1});
    WindowAudit audit = audit_window(curve, 0.41, 0.44);
    CHECK_EQ(audit.window_mean, 6.0);  // the cell covering (0.4, 0.5]
    CHECK_EQ(audit.n_windows, 10);
}

TEST_CASE("the recommended window always audits at rank one") {
    const Trec curve = grid_curve(random_values(40, 123));
    PlacementPlan plan = recommend(curve, 0.25);
    WindowAudit audit = audit_window(curve, plan.start_fraction, plan.end_fraction, 0.0);
    CHECK_EQ(audit.window_rank, 1);
    CHECK_FALSE(audit.suboptimal);
    CHECK_EQ(audit.window_mean, doctest::Approx(plan.expected_mean_trec).epsilon(1e-12));
    CHECK_EQ(audit.best_mean, audit.window_mean);
}

TEST_CASE("malformed audit windows are refused") {
    const Trec curve = grid_curve({1, 2, 3, 4});
    CHECK(throws_containing<ValidationError>([&] { audit_window(curve, 0.5, 0.5); },
                                             "audit window"));
    CHECK(throws_containing<ValidationError>([&] { audit_window(curve, 0.6, 0.4); },
                                             "audit window"));
    CHECK(throws_containing<ValidationError>([&] { audit_window(curve, 0.2, 0.8, -1.0); },
                                             "margin"));
}

TEST_CASE("recipe audits combine curve rank with retained update mass") {
    PowerLawFit fit;
    fit.C = 0.2;
    fit.mu1 = 0.25;
    fit.mu2 = -0.7;

    ScheduleSpec spec;
    spec.kind = ScheduleKind::Constant;
    spec.total_steps = 1000;
    spec.peak_lr = 0.02;
    spec.warmup_fraction = 0.0;
    spec.weight_decay = 1.0;  // constant alpha = 0.02

    AuditReport report = audit_recipe(spec, 20.0, fit, 0.9, 1.0, 0.05);
    CHECK_EQ(report.margin, 0.05);
    CHECK_EQ(report.predicted.points.size(), 1000);
    CHECK_GE(report.window.window_rank, 1);
    CHECK_EQ(report.window.n_windows, 901);

    // geometric tail sums give the retained-mass share in closed form
    const double alpha = 0.02;
    const double expected_mass =
        (1.0 - std::pow(1.0 - alpha, 100.0)) / (1.0 - std::pow(1.0 - alpha, 1000.0));
    CHECK_EQ(report.window_mass_fraction, doctest::Approx(expected_mass).epsilon(1e-10));
    CHECK_FALSE(report.near_zero_retention);

    CHECK_EQ(audit_recipe(spec, 20.0, fit, 0.9, 1.0, 0.2).margin, 0.2);
}

TEST_CASE("a window under a dead tail is flagged for near zero retention") {
    PowerLawFit fit;
    fit.C = 0.2;
    fit.mu1 = 0.25;
    fit.mu2 = -0.7;

    ScheduleSpec spec;
    spec.kind = ScheduleKind::Cyclic;
    spec.total_steps = 1000;
    spec.peak_lr = 0.004;
    spec.warmup_fraction = 0.0;
    spec.weight_decay = 1.0;
    spec.segments = {{0.9, 0.004, 0.004}, {0.1, 0.0, 0.0}};

    AuditReport report = audit_recipe(spec, 20.0, fit, 0.9, 1.0);
    CHECK_EQ(report.window_mass_fraction, 0.0);
    CHECK(report.near_zero_retention);

    // the same recipe picking a live window is not flagged
    AuditReport live = audit_recipe(spec, 20.0, fit, 0.6, 0.9);
    CHECK_GT(live.window_mass_fraction, 0.5);
    CHECK_FALSE(live.near_zero_retention);
}

TEST_CASE("the retention flag threshold is one part in ten thousand") {
    CHECK_EQ(kNearZeroRetentionMass, 1e-4);
}
