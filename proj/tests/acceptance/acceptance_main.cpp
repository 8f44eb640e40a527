// End-to-end acceptance gate. Each criterion prints exactly one PASS/FAIL
// line with the measured quantity and its runtime; the exit status is the
// number of failed criteria. Runs offline on fixed seeds.

#include "treclab/ema.hpp"
#include "treclab/placement.hpp"
#include "treclab/predictor.hpp"
#include "treclab/quadsim.hpp"
#include "treclab/schedule.hpp"
#include "treclab/trec.hpp"
#include "treclab/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace treclab;

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure(what);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::filesystem::path config_path(const char* name) {
    return std::filesystem::path(TRECLAB_CONFIG_DIR) / name;
}

constexpr ScheduleKind kAllKinds[] = {
    ScheduleKind::LinearD2Z, ScheduleKind::Cosine,      ScheduleKind::Step,
    ScheduleKind::FactorDecay, ScheduleKind::WSD,       ScheduleKind::Cyclic,
    ScheduleKind::Constant,
};

const char* kind_name(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::LinearD2Z: return "linear_d2z";
        case ScheduleKind::Cosine: return "cosine";
        case ScheduleKind::Step: return "step";
        case ScheduleKind::FactorDecay: return "factor_decay";
        case ScheduleKind::WSD: return "wsd";
        case ScheduleKind::Cyclic: return "cyclic";
        case ScheduleKind::Constant: return "constant";
    }
    return "?";
}

// All seven kinds with reasonable phase splits; cosine gets a 10% floor so
// decayed-to-floor shapes are represented alongside decay-to-zero ones.
ScheduleSpec make_spec(ScheduleKind kind, std::int64_t total_steps, double peak_lr,
                       double weight_decay) {
    ScheduleSpec spec;
    spec.kind = kind;
    spec.total_steps = total_steps;
    spec.peak_lr = peak_lr;
    spec.warmup_fraction = 0.1;
    spec.weight_decay = weight_decay;
    if (kind == ScheduleKind::Cosine) spec.floor_over_peak = 0.1;
    if (kind == ScheduleKind::WSD) {
        spec.flat_fraction = 0.6;
        spec.decay_fraction = 0.3;
    }
    if (kind == ScheduleKind::Cyclic)
        spec.segments = {{0.5, peak_lr, 0.4 * peak_lr}, {0.4, 0.4 * peak_lr, 0.0}};
    return spec;
}

int sweep_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return int(std::clamp(hw, 1u, 8u));
}

// --- criterion 1: c0 + sum c_i == 1 on randomized schedules of every kind ---

std::string check_identity() {
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };

    long double worst = 0.0L;
    for (int i = 0; i < 50; ++i) {
        ScheduleKind kind = kAllKinds[i % 7];
        auto total = std::int64_t(std::llround(log_uniform(10.0, 1e5)));
        total = std::clamp<std::int64_t>(total, 10, 100000);
        double peak = log_uniform(1e-3, 1.0);
        double alpha_max = log_uniform(1e-6, 0.5);

        ScheduleSpec spec = make_spec(kind, total, peak, alpha_max / peak);
        spec.warmup_fraction = 0.25 * unit(rng);
        switch (kind) {
            case ScheduleKind::Step:
                // keep the drop step clear of warmup even after rounding at small T
                spec.drop_at_fraction = 0.4 + 0.5 * unit(rng);
                spec.drop_factor = 0.05 + 0.95 * unit(rng);
                break;
            case ScheduleKind::Cosine:
                spec.floor_over_peak = 0.9 * unit(rng);
                break;
            case ScheduleKind::FactorDecay:
                spec.final_over_peak = 0.01 + 0.9 * unit(rng);
                break;
            case ScheduleKind::WSD: {
                double rest = 1.0 - spec.warmup_fraction;
                spec.flat_fraction = rest * (0.2 + 0.6 * unit(rng));
                spec.decay_fraction = rest - spec.flat_fraction;
                break;
            }
            case ScheduleKind::Cyclic: {
                double rest = 1.0 - spec.warmup_fraction;
                double first = rest * (0.3 + 0.4 * unit(rng));
                double mid = peak * 0.5 * unit(rng);
                spec.segments = {{first, peak, mid}, {rest - first, mid, 0.0}};
                break;
            }
            default:
                break;
        }

        std::vector<double> lr = lr_array(spec);
        EmaCoefficients coeffs = ema_coefficients(lr, spec.weight_decay);
        long double sum = coeffs.c0;
        for (double c : coeffs.c) sum += c;
        worst = std::max(worst, std::fabs(sum - 1.0L));
        require(sum_identity_error(coeffs) < 1e-12,
                "library identity error too large on schedule " + std::to_string(i));
    }
    require(double(worst) < 1e-12, "max identity drift " + num(double(worst)));
    return "50 schedules, max |c0 + sum c - 1| = " + num(double(worst));
}

// --- criterion 2: final iterate decomposes into history-weighted targets ---

std::string check_decomposition() {
    double worst = 0.0;
    int idx = 0;
    for (ScheduleKind kind : kAllKinds) {
        for (double beta1 : {0.0, 0.9}) {
            SimConfig config;
            config.optimizer = Optimizer::AdamW;
            config.dims = 16;
            config.schedule = make_spec(kind, 1000, 0.05, 1.0);
            config.beta1 = beta1;
            config.beta2 = 0.95;
            config.drift_amplitude = 1.0;
            config.batch_noise_std = 0.1;
            config.initial_theta = 0.5;
            config.seed = 1000 + idx++;
            SimRun run = run_sim(config);
            require(run.decomposition_available, "decomposition unavailable");
            double err = decomposition_max_rel_error(run);
            worst = std::max(worst, err);
            require(err < 1e-6, std::string(kind_name(kind)) + " beta1=" + num(beta1) +
                                    " rel error " + num(err));
        }
    }
    return "7 kinds x beta1 {0, 0.9}, max rel error = " + num(worst);
}

// --- criterion 3: vanishing decay reduces the weights to the LR profile ---

std::string check_small_decay_limit() {
    double worst = 0.0;
    for (ScheduleKind kind : {ScheduleKind::LinearD2Z, ScheduleKind::FactorDecay}) {
        ScheduleSpec spec = make_spec(kind, 1000, 1.0, 1e-8);
        std::vector<double> lr = lr_array(spec);
        std::vector<double> profile = small_lambda_profile(lr, 1e-8);
        double lr_max = *std::max_element(lr.begin(), lr.end());
        for (std::size_t i = 0; i < lr.size(); ++i)
            worst = std::max(worst, std::fabs(profile[i] - lr[i] / lr_max));
    }
    require(worst < 1e-5, "profile deviates from normalized LR by " + num(worst));
    return "max |profile - lr/max lr| = " + num(worst);
}

// --- criterion 4: short runs match the unrolled recursion exactly ---

std::string check_short_unroll() {
    std::mt19937_64 rng(515151);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        SimConfig config;
        config.optimizer = Optimizer::Sgd;
        config.dims = 1 + i % 4;
        auto total = std::int64_t(3 + int(unit(rng) * 18.0));
        total = std::min<std::int64_t>(total, 20);
        config.schedule = make_spec(kAllKinds[i % 7], total, 0.05 + 0.35 * unit(rng), 0.0);
        config.curvature.clear();
        for (int d = 0; d < config.dims; ++d) config.curvature.push_back(0.5 + unit(rng));
        config.drift_amplitude = 1.0;
        config.batch_noise_std = 0.5;
        config.initial_theta = -1.0 + 2.0 * unit(rng);
        config.seed = 9000 + i;

        SimRun run = run_sgd(config);
        std::vector<double> lr = lr_array(config.schedule);
        for (int d = 0; d < config.dims; ++d) {
            double h = config.curvature[std::size_t(d)];
            double tail = 1.0;
            double recon = 0.0;
            for (std::int64_t t = total - 1; t >= 0; --t) {
                double alpha = lr[std::size_t(t)] * h;
                recon += alpha * tail * run.batch_targets[std::size_t(t)][std::size_t(d)];
                tail *= 1.0 - alpha;
            }
            recon += tail * config.initial_theta;
            worst = std::max(worst, std::fabs(recon - run.final_theta[std::size_t(d)]));
        }
    }
    require(worst <= 1e-12, "unrolled sum deviates by " + num(worst));
    return "10 configs, T <= 20, max |theta_T - unrolled| = " + num(worst);
}

// --- criterion 5: the shape exponent is recoverable from its own family ---

std::string check_exponent_recovery() {
    ScheduleSpec spec = make_spec(ScheduleKind::Cosine, 2000, 0.05, 0.1);
    std::vector<CoeffPoint> c_curve =
        continuous_coefficients(ema_coefficients(lr_array(spec), spec.weight_decay), 1000);
    double worst_rel = 0.0;
    double min_rp = 1.0;
    for (double m : {0.5, 3.0, 40.0}) {
        Trec synth = predict_trec(c_curve, PredictionParams{0.5, m});
        FitMResult fit = fit_m(c_curve, synth);
        double rel = std::fabs(fit.m_star - m) / m;
        worst_rel = std::max(worst_rel, rel);
        min_rp = std::min(min_rp, fit.r_p);
        require(rel < 0.02, "m = " + num(m) + " recovered as " + num(fit.m_star));
        require(fit.r_p > 0.999, "m = " + num(m) + " fit r_p " + num(fit.r_p));
    }
    return "m in {0.5, 3, 40}: max rel err = " + num(worst_rel) + ", min r_p = " + num(min_rp);
}

// --- criterion 6: power-law refit, exact on clean data and stable under noise ---

std::string check_power_law_refit() {
    const double C_true = 1.07, mu1_true = 0.52, mu2_true = -0.67;
    const double tpps[] = {5, 10, 20, 40, 80, 160, 320, 640, 1280};
    std::vector<double> taus;
    for (int i = 0; i < 6; ++i) taus.push_back(0.002 * std::pow(0.8 / 0.002, i / 5.0));

    auto build = [&](std::function<double()> noise) {
        std::vector<FitRecord> records;
        for (double tpp : tpps)
            for (double tau : taus) {
                FitRecord rec;
                rec.tpp = tpp;
                rec.tau = tau;
                rec.m_star = C_true * std::pow(tpp, mu1_true) * std::pow(tau, mu2_true) * noise();
                rec.r_p_at_fit = 1.0;
                records.push_back(rec);
            }
        return records;
    };

    PowerLawFit clean = fit_power_law(build([] { return 1.0; }));
    require(clean.n_points == 54, "clean fit kept " + std::to_string(clean.n_points) + " points");
    double clean_err = std::max({std::fabs(clean.C - C_true), std::fabs(clean.mu1 - mu1_true),
                                 std::fabs(clean.mu2 - mu2_true)});
    require(clean_err <= 1e-10, "clean refit off by " + num(clean_err));
    require(clean.r2_log == 1.0, "clean r2_log = " + num(clean.r2_log));

    double worst_rel = 0.0;
    double min_r2 = 1.0;
    for (int seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(7000 + seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        PowerLawFit noisy =
            fit_power_law(build([&] { return std::exp(0.05 * normal(rng)); }));
        double rel = std::max({std::fabs(noisy.C - C_true) / C_true,
                               std::fabs(noisy.mu1 - mu1_true) / mu1_true,
                               std::fabs(noisy.mu2 - mu2_true) / std::fabs(mu2_true)});
        worst_rel = std::max(worst_rel, rel);
        min_r2 = std::min(min_r2, noisy.r2_log);
        require(rel <= 0.10, "seed " + std::to_string(seed) + " coefficient off by " + num(rel));
        require(noisy.r2_log > 0.95, "seed " + std::to_string(seed) + " r2_log " + num(noisy.r2_log));
    }
    return "clean err = " + num(clean_err) + ", r2_log = 1; 20 noisy seeds: max rel = " +
           num(worst_rel) + ", min r2_log = " + num(min_r2);
}

// --- criterion 7: simulator curves track the fitted shape family per kind ---

std::string check_sim_vs_prediction() {
    double min_r = 1.0;
    ScheduleKind min_kind = ScheduleKind::LinearD2Z;
    for (ScheduleKind kind : kAllKinds) {
        SimConfig config;
        config.optimizer = Optimizer::AdamW;
        config.dims = 96;
        config.schedule = make_spec(kind, 2000, 0.05, 0.1);
        config.drift_amplitude = 1.0;
        config.batch_noise_std = 0.1;
        config.seed = 1;
        SimRun run = run_sim(config);
        Trec measured = simulated_trec(run);

        std::vector<CoeffPoint> c_curve = continuous_coefficients(
            ema_coefficients(lr_array(config.schedule), config.schedule.weight_decay), 1000);
        FitMResult fit = fit_m(c_curve, measured);
        Trec predicted =
            comparison_protocol(predict_trec(c_curve, PredictionParams{0.5, fit.m_star}));
        double r = pearson(predicted, measured);
        if (r < min_r) {
            min_r = r;
            min_kind = kind;
        }
        require(r >= 0.90, std::string(kind_name(kind)) + " r_p = " + num(r));
    }
    return std::string("7 kinds, min r_p = ") + num(min_r) + " (" + kind_name(min_kind) + ")";
}

// --- criterion 8: placement winner sits where the curve bottoms out ---

std::string check_placement() {
    const int threads = sweep_threads();
    auto base_config = [](ScheduleKind kind, double peak) {
        SimConfig config;
        config.optimizer = Optimizer::Sgd;
        config.dims = 48;
        config.schedule = make_spec(kind, 1000, peak, 0.0);
        config.drift_amplitude = 0.4;
        config.batch_noise_std = 0.1;
        config.hq_segment = HqSegment{0.0, 0.1, 3.0};
        return config;
    };

    int step_checked = 0;
    // effective step timescales 0.1 and 0.11
    for (double peak : {0.01, 1.0 / 110.0}) {
        for (std::uint64_t seed : {21, 22, 23}) {
            SimConfig config = base_config(ScheduleKind::Step, peak);
            config.seed = seed;
            PlacementSweep sweep = placement_experiment(config, 10, threads);
            // a tighter window than the default keeps the minimum from
            // smearing across the decile boundary at T = 1000
            Trec curve = simulated_trec(sweep.baseline, 25, 1000);
            auto arg = std::min_element(
                curve.points.begin(), curve.points.end(),
                [](const TrecPoint& a, const TrecPoint& b) { return a.value < b.value; });
            int decile = std::min(9, int(arg->t_hat * 10.0));
            require(sweep.best_segment == decile,
                    "step peak " + num(peak) + " seed " + std::to_string(seed) + ": winner " +
                        std::to_string(sweep.best_segment) + " vs curve minimum decile " +
                        std::to_string(decile));
            ++step_checked;
        }
    }

    int final_checked = 0;
    for (double peak : {0.2, 0.3}) {
        for (std::uint64_t seed : {21, 22, 23}) {
            SimConfig config = base_config(ScheduleKind::LinearD2Z, peak);
            config.seed = seed;
            PlacementSweep sweep = placement_experiment(config, 10, threads);
            require(sweep.best_segment == 9, "linear peak " + num(peak) + " seed " +
                                                 std::to_string(seed) + ": winner " +
                                                 std::to_string(sweep.best_segment));
            ++final_checked;
        }
    }
    return "step winner = curve argmin decile " + std::to_string(step_checked) +
           "/6; decay-to-zero winner = final decile " + std::to_string(final_checked) + "/6";
}

// --- criterion 9: production-scale recipe flags near-zero final retention ---

std::string check_large_run_retention() {
    auto recipe = nlohmann::json::parse(read_file(config_path("llama405b_recipe.json")));
    ScheduleSpec spec = parse_schedule(recipe.at("schedule").dump());
    double tpp = recipe.at("tpp").get<double>();
    double window_start = recipe.at("hq_window").at("start_fraction").get<double>();
    double window_end = recipe.at("hq_window").at("end_fraction").get<double>();
    PowerLawFit fit = power_law_from_json(read_file(config_path("powerlaw.json")));

    AuditReport report = audit_recipe(spec, tpp, fit, window_start, window_end);
    require(report.window_mass_fraction < 1e-4,
            "window mass fraction " + num(report.window_mass_fraction));
    require(report.near_zero_retention, "near-zero retention not flagged");

    // independent mass check straight from the coefficients
    EmaCoefficients coeffs = ema_coefficients(lr_array(spec), spec.weight_decay);
    auto lo = std::int64_t(std::llround(window_start * double(spec.total_steps)));
    long double window_sum = 0.0L, total_sum = 0.0L;
    for (std::size_t i = 0; i < coeffs.c.size(); ++i) {
        total_sum += coeffs.c[i];
        if (std::int64_t(i) >= lo) window_sum += coeffs.c[i];
    }
    double direct = double(window_sum / total_sum);
    require(direct < 1e-4, "direct window mass " + num(direct));
    return "window mass = " + num(report.window_mass_fraction) + " (direct " + num(direct) +
           "), flagged";
}

// --- criterion 10: schedules sharing a tail share weights and curves there ---

std::string check_matched_tails() {
    ScheduleSpec wsd = parse_schedule(read_file(config_path("wsd_base.json")));
    ScheduleSpec cyc = parse_schedule(read_file(config_path("cyclic_matched.json")));
    std::vector<double> lr_wsd = lr_array(wsd);
    std::vector<double> lr_cyc = lr_array(cyc);
    EmaCoefficients cw = ema_coefficients(lr_wsd, wsd.weight_decay);
    EmaCoefficients cc = ema_coefficients(lr_cyc, cyc.weight_decay);

    auto tail_start = std::size_t(wsd.total_steps) - std::size_t(wsd.total_steps) / 5;
    for (std::size_t i = tail_start; i < cw.c.size(); ++i) {
        require(lr_wsd[i] == lr_cyc[i], "tail LR differs at step " + std::to_string(i + 1));
        require(cw.c[i] == cc.c[i], "tail coefficient differs at step " + std::to_string(i + 1));
        // both decay to LR 0 at the very last step, so only positive-LR steps carry weight
        require(lr_wsd[i] == 0.0 || cw.c[i] > 0.0,
                "tail coefficient vanished at step " + std::to_string(i + 1));
    }

    auto tail_curve = [](const ScheduleSpec& spec) {
        SimConfig config;
        config.optimizer = Optimizer::AdamW;
        config.dims = 64;
        config.schedule = spec;
        config.drift_amplitude = 1.0;
        config.batch_noise_std = 0.1;
        config.seed = 4242;
        Trec curve = simulated_trec(run_sim(config));
        std::vector<double> tail;
        for (const TrecPoint& pt : curve.points)
            if (pt.t_hat >= 0.85 - 1e-12) tail.push_back(pt.value);
        return tail;
    };
    std::vector<double> tail_a = tail_curve(wsd);
    std::vector<double> tail_b = tail_curve(cyc);
    require(tail_a.size() == tail_b.size(), "tail sample counts differ");
    double r = pearson(tail_a, tail_b);
    require(r >= 0.90, "tail curve agreement r_p = " + num(r));
    return "final 20% weights identical; simulated tail r_p = " + num(r);
}

// --- criterion 11: the comparison statistics match direct formulas ---

std::string check_statistics_oracles() {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> wide(-2.0, 2.0);
    std::uniform_real_distribution<double> positive(0.1, 10.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double worst_pearson = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(8), b(8);
        for (int i = 0; i < 8; ++i) {
            a[std::size_t(i)] = wide(rng);
            b[std::size_t(i)] = wide(rng);
        }
        long double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
        for (int i = 0; i < 8; ++i) {
            long double x = a[std::size_t(i)], y = b[std::size_t(i)];
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        long double n = 8.0L;
        long double oracle =
            (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
        worst_pearson = std::max(worst_pearson, std::fabs(pearson(a, b) - double(oracle)));
    }
    require(worst_pearson <= 1e-15, "pearson deviates by " + num(worst_pearson));

    double worst_r2 = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> truth(8), pred(8);
        for (int i = 0; i < 8; ++i) {
            truth[std::size_t(i)] = positive(rng);
            pred[std::size_t(i)] = positive(rng);
        }
        long double sum_l = 0;
        for (double v : truth) sum_l += std::log((long double)v);
        long double mean_l = sum_l / 8.0L;
        long double ss_tot = 0, ss_res = 0;
        for (int i = 0; i < 8; ++i) {
            long double l = std::log((long double)truth[std::size_t(i)]);
            long double lp = std::log((long double)pred[std::size_t(i)]);
            ss_tot += (l - mean_l) * (l - mean_l);
            ss_res += (l - lp) * (l - lp);
        }
        long double oracle = 1.0L - ss_res / ss_tot;
        worst_r2 = std::max(worst_r2, std::fabs(log_r2(truth, pred) - double(oracle)));
    }
    require(worst_r2 <= 1e-15, "log_r2 deviates by " + num(worst_r2));

    // affine invariance: the protocol's output ignores positive rescale/shift
    double worst_affine = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        int n = 40 + rep;
        Trec raw, shifted;
        double v = 1.0;
        double a = 0.2 + 4.8 * unit(rng);
        double b = -3.0 + 6.0 * unit(rng);
        for (int k = 0; k < n; ++k) {
            v += -0.2 + 0.4 * unit(rng);
            double t_hat = double(k + 1) / double(n);
            raw.points.push_back({t_hat, v});
            shifted.points.push_back({t_hat, a * v + b});
        }
        Trec pa = comparison_protocol(raw, 9, 200);
        Trec pb = comparison_protocol(shifted, 9, 200);
        for (std::size_t i = 0; i < pa.points.size(); ++i)
            worst_affine =
                std::max(worst_affine, std::fabs(pa.points[i].value - pb.points[i].value));
    }
    require(worst_affine <= 1e-9, "protocol affine drift " + num(worst_affine));
    return "pearson dev = " + num(worst_pearson) + ", log_r2 dev = " + num(worst_r2) +
           ", affine dev = " + num(worst_affine);
}

struct Criterion {
    const char* label;
    std::function<std::string()> run;
    double budget_seconds;  // 0 disables the per-criterion budget
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"coefficient identity, randomized schedules", check_identity, 5.0},
        {"optimizer history decomposition", check_decomposition, 10.0},
        {"small-decay limit matches LR profile", check_small_decay_limit, 0.0},
        {"short-run unrolled recursion", check_short_unroll, 0.0},
        {"shape exponent recovery", check_exponent_recovery, 0.0},
        {"power-law refit, exact and noisy", check_power_law_refit, 0.0},
        {"simulator curves vs fitted predictions", check_sim_vs_prediction, 60.0},
        {"placement winner tracks curve minimum", check_placement, 120.0},
        {"production recipe near-zero retention", check_large_run_retention, 0.0},
        {"matched-tail schedules agree", check_matched_tails, 0.0},
        {"statistics vs direct formulas", check_statistics_oracles, 0.0},
    };

    int failures = 0;
    double total_seconds = 0.0;
    int index = 0;
    for (const Criterion& criterion : criteria) {
        ++index;
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = criterion.run();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        total_seconds += seconds;
        if (ok && criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds) {
            ok = false;
            detail += " [budget " + num(criterion.budget_seconds) + " s exceeded]";
        }
        if (!ok) ++failures;
        std::printf("[%2d] %s  %-42s %s  (%.2f s)\n", index, ok ? "PASS" : "FAIL",
                    criterion.label, detail.c_str(), seconds);
    }
    std::printf("%d/11 criteria passed in %.1f s\n", 11 - failures, total_seconds);
    return failures;
}
