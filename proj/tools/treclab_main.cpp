// treclab: schedules -> EMA coefficients -> predicted/measured re-evaluation
// curves -> data placement. Every command writes its outputs plus a
// <command>.manifest.json tying them to a hash of the resolved inputs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "treclab/ema.hpp"
#include "treclab/errors.hpp"
#include "treclab/io.hpp"
#include "treclab/placement.hpp"
#include "treclab/predictor.hpp"
#include "treclab/quadsim.hpp"
#include "treclab/schedule.hpp"
#include "treclab/svg.hpp"
#include "treclab/trec.hpp"

namespace fs = std::filesystem;
using namespace treclab;

namespace {

struct GlobalOpts {
    std::string out_dir = ".";
    std::optional<std::int64_t> seed;
    int grid = 1000;
    int window = 100;
};

// Accumulates the manifest while hashing inputs and parameters in the order
// they are consumed, so reruns with identical inputs hash identically.
class Run {
public:
    Run(std::string command, const GlobalOpts& opts) : opts_(opts) {
        manifest_.command = std::move(command);
    }

    std::string input_file(const std::string& path) {
        std::string text = read_file(path);
        manifest_.inputs.push_back(path);
        hash_ = fnv1a64(text, hash_);
        return text;
    }

    void param(const std::string& key, const std::string& value) {
        hash_ = fnv1a64(key + "=" + value + ";", hash_);
    }
    void param(const std::string& key, double value) { param(key, format_double(value)); }
    void param(const std::string& key, std::int64_t value) { param(key, std::to_string(value)); }
    void param(const std::string& key, int value) { param(key, std::to_string(value)); }

    void write(const std::string& name, const std::string& content) {
        fs::path dir(opts_.out_dir);
        fs::create_directories(dir);
        fs::path path = dir / name;
        write_file_atomic(path, content);
        manifest_.outputs.push_back(path.string());
        std::cout << "wrote " << path.string() << "\n";
    }

    void finish() {
        manifest_.config_hash = "fnv1a64:" + hash_to_hex(hash_);
        fs::path path = fs::path(opts_.out_dir) / (manifest_.command + ".manifest.json");
        write_file_atomic(path, manifest_to_json(manifest_));
        std::cout << "wrote " << path.string() << "\n";
    }

    const GlobalOpts& opts() const { return opts_; }

private:
    GlobalOpts opts_;
    RunManifest manifest_;
    std::uint64_t hash_ = 14695981039346656037ull;
};

int sweep_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const char* env = std::getenv("TREC_LAB_THREADS");
    if (env == nullptr || *env == '\0') return static_cast<int>(hw);
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
        throw ParseError(std::string("TREC_LAB_THREADS must be a positive integer, got '") + env +
                         "'");
    }
    return static_cast<int>(std::min<long>(v, hw));
}

double schedule_tau(const ScheduleSpec& spec) {
    TimescaleResult ts = timescale(TimescaleParams::from_steps(
        spec.peak_lr, spec.weight_decay, static_cast<double>(spec.total_steps)));
    if (!ts.defined) {
        throw ValidationError("timescale undefined at weight decay 0 (Adam limit)");
    }
    return ts.tau;
}

void write_curve_svg(Run& run, const std::string& name, const Trec& curve,
                     const std::string& title,
                     std::optional<std::pair<double, double>> shade = std::nullopt) {
    SvgOptions options;
    options.title = title;
    options.shade = shade;
    run.write(name, render_curve_svg(curve, options));
}

// --- schedule: config -> per-step learning rates ---------------------------

void cmd_schedule(Run& run, const std::string& config_path) {
    ScheduleSpec spec = parse_schedule(run.input_file(config_path));
    std::vector<double> lr = lr_array(spec);
    run.write("lr.csv", lr_to_csv(lr));
    std::cout << schedule_kind_name(spec.kind) << ", " << spec.total_steps << " steps, peak "
              << format_double(spec.peak_lr) << "\n";
    run.finish();
}

// --- ema: config -> coefficients + summary ---------------------------------

void cmd_ema(Run& run, const std::string& config_path) {
    ScheduleSpec spec = parse_schedule(run.input_file(config_path));
    std::vector<double> lr = lr_array(spec);
    EmaCoefficients coeffs = ema_coefficients(lr, spec.weight_decay);
    EmaSummary summary = ema_summary(coeffs, spec.peak_lr, spec.weight_decay);

    run.write("ema.csv", ema_to_csv(coeffs));
    run.write("ema_summary.json", ema_summary_to_json(summary));
    if (spec.weight_decay == 0.0) {
        // Adam limit: the c_i vanish, so report the normalized profile the
        // coefficients converge to instead.
        std::vector<double> profile = small_lambda_profile(lr, 0.0);
        std::string csv = "step,weight\n";
        for (std::size_t i = 0; i < profile.size(); ++i) {
            csv += std::to_string(i + 1) + "," + format_double(profile[i]) + "\n";
        }
        run.write("ema_profile.csv", csv);
        std::cout << "timescale undefined (Adam limit); wrote normalized profile\n";
    } else {
        std::cout << "tau " << format_double(*summary.tau) << ", coefficient sum error "
                  << format_double(summary.sum_identity) << "\n";
    }
    run.finish();
}

// --- predict: config (+ m or power law) -> predicted curve -----------------

void cmd_predict(Run& run, const std::string& config_path, std::optional<double> m,
                 const std::string& powerlaw_path, std::optional<double> tpp, bool svg) {
    ScheduleSpec spec = parse_schedule(run.input_file(config_path));
    run.param("grid", run.opts().grid);

    Trec curve;
    if (m) {
        run.param("m", *m);
        curve = predict_from_spec(spec, PredictionParams{0.5, *m}, run.opts().grid);
    } else if (!powerlaw_path.empty()) {
        PowerLawFit fit = power_law_from_json(run.input_file(powerlaw_path));
        if (!tpp) throw ParseError("--powerlaw needs --tpp to resolve m");
        run.param("tpp", *tpp);
        curve = full_prediction(spec, *tpp, fit, run.opts().grid);
    } else {
        throw ParseError("predict needs either --m or --powerlaw with --tpp");
    }

    run.write("predicted_trec.csv", trec_to_csv(curve));
    if (svg) write_curve_svg(run, "predicted_trec.svg", curve, "predicted re-evaluation curve");
    run.finish();
}

// --- trec: loss log -> (smoothed) curve ------------------------------------

void cmd_trec(Run& run, const std::string& losslog_path, std::int64_t total_steps, bool normalize_flag,
              bool svg) {
    LossLog log = losslog_from_csv(run.input_file(losslog_path), total_steps);
    run.param("window", run.opts().window);
    run.param("total_steps", log.total_steps);

    Trec curve = build_trec(log);
    if (run.opts().window > 1) curve = smooth(curve, run.opts().window);
    if (normalize_flag) curve = normalize(curve);

    run.write("trec.csv", trec_to_csv(curve));
    if (svg) write_curve_svg(run, "trec.svg", curve, "re-evaluation curve");
    run.finish();
}

// --- fit: schedule + measured curve -> one fit record ----------------------

void cmd_fit(Run& run, const std::string& schedule_path, double tpp, const std::string& losslog_path,
             const std::string& trec_path, std::int64_t total_steps, double p,
             const std::string& label, bool append) {
    ScheduleSpec spec = parse_schedule(run.input_file(schedule_path));
    run.param("tpp", tpp);
    run.param("p", p);
    run.param("grid", run.opts().grid);

    Trec true_curve;
    if (!losslog_path.empty()) {
        LossLog log = losslog_from_csv(run.input_file(losslog_path), total_steps);
        run.param("window", run.opts().window);
        true_curve = comparison_protocol(build_trec(log), run.opts().window, run.opts().grid);
    } else if (!trec_path.empty()) {
        // already smoothed upstream; just align the grid and scale
        true_curve = normalize(resample(trec_from_csv(run.input_file(trec_path)), run.opts().grid));
    } else {
        throw ParseError("fit needs --losslog or --trec");
    }

    EmaCoefficients coeffs = ema_coefficients(lr_array(spec), spec.weight_decay);
    std::vector<CoeffPoint> c_curve = continuous_coefficients(coeffs, run.opts().grid);
    FitMResult result = fit_m(c_curve, true_curve, p);

    FitRecord record;
    record.tpp = tpp;
    record.tau = schedule_tau(spec);
    record.m_star = result.m_star;
    record.r_p_at_fit = result.r_p;
    record.schedule_kind = label.empty() ? schedule_kind_name(spec.kind) : label;

    nlohmann::json obj;
    obj["m_star"] = result.m_star;
    obj["r_p"] = result.r_p;
    obj["multimodal"] = result.multimodal;
    obj["low_quality"] = result.low_quality;
    obj["tau"] = record.tau;
    obj["tpp"] = record.tpp;
    obj["schedule_kind"] = record.schedule_kind;
    run.write("fit.json", obj.dump(2) + "\n");

    fs::path records_path = fs::path(run.opts().out_dir) / "fit_records.csv";
    std::vector<FitRecord> records;
    if (append && fs::exists(records_path)) {
        records = fit_records_from_csv(read_file(records_path));
    }
    records.push_back(record);
    run.write("fit_records.csv", fit_records_to_csv(records));
    std::cout << "m* " << format_double(result.m_star) << ", r_p " << format_double(result.r_p)
              << (result.low_quality ? " (low quality)" : "")
              << (result.multimodal ? " (multimodal)" : "") << "\n";
    run.finish();
}

// --- fit-powerlaw: fit records -> power-law constants ----------------------

void cmd_fit_powerlaw(Run& run, const std::string& records_path, double tau_min, double tau_max,
                      const std::string& kind) {
    std::vector<FitRecord> records = fit_records_from_csv(run.input_file(records_path));
    PowerLawOptions options;
    options.tau_min = tau_min;
    options.tau_max = tau_max;
    if (!kind.empty()) options.schedule_kind = kind;
    run.param("tau_min", tau_min);
    run.param("tau_max", tau_max);
    run.param("schedule_kind", kind);

    PowerLawFit fit = fit_power_law(records, options);
    run.write("powerlaw.json", power_law_to_json(fit));
    std::cout << "m = " << format_double(fit.C) << " * TPP^" << format_double(fit.mu1) << " * tau^"
              << format_double(fit.mu2) << " (log R2 " << format_double(fit.r2_log) << ", "
              << fit.n_points << " records)\n";
    run.finish();
}

// --- simulate: quadratic-model run, optional placement sweep ---------------

void cmd_simulate(Run& run, const std::string& config_path, int placement_k, bool check_decomposition,
                  bool steps_csv, bool svg) {
    SimConfig config = parse_sim_config(run.input_file(config_path));
    if (run.opts().seed) {
        config.seed = static_cast<std::uint64_t>(*run.opts().seed);
        run.param("seed", *run.opts().seed);
    }
    run.param("window", run.opts().window);
    run.param("grid", run.opts().grid);

    SimRun sim = run_sim(config);
    Trec curve = simulated_trec(sim, run.opts().window, run.opts().grid);

    nlohmann::json summary;
    summary["optimizer"] = config.optimizer == Optimizer::AdamW ? "adamw" : "sgd";
    summary["dims"] = config.dims;
    summary["total_steps"] = config.schedule.total_steps;
    summary["seed"] = config.seed;
    summary["rng"] = kSimRngId;
    summary["final_train_loss"] = sim.train_losses.entries.back().loss;
    if (config.hq_segment) summary["hq_eval"] = hq_eval_loss(sim);
    if (check_decomposition) {
        double err = decomposition_max_rel_error(sim);
        summary["decomposition_max_rel_error"] = err;
        std::cout << "decomposition max relative error " << format_double(err) << "\n";
    }

    if (placement_k > 0) {
        PlacementSweep sweep = placement_experiment(config, placement_k, sweep_threads());
        std::string csv = "segment,start_fraction,end_fraction,hq_eval\n";
        for (const auto& seg : sweep.segments) {
            csv += std::to_string(seg.segment_index) + "," + format_double(seg.start_fraction) +
                   "," + format_double(seg.end_fraction) + "," + format_double(seg.hq_eval) + "\n";
        }
        csv += "baseline,0,1," + format_double(sweep.baseline_eval) + "\n";
        run.write("placement.csv", csv);
        summary["best_segment"] = sweep.best_segment;
        summary["baseline_eval"] = sweep.baseline_eval;
    }

    run.write("sim_summary.json", summary.dump(2) + "\n");
    run.write("sim_trec.csv", trec_to_csv(curve));
    if (steps_csv) {
        std::vector<double> lr = lr_array(config.schedule);
        std::vector<double> alpha(lr.size());
        const double base = config.optimizer == Optimizer::AdamW ? config.schedule.weight_decay
                                                                 : config.curvature.front();
        for (std::size_t i = 0; i < lr.size(); ++i) alpha[i] = lr[i] * base;
        std::vector<double> train(lr.size()), reeval(lr.size());
        for (std::size_t i = 0; i < lr.size(); ++i) {
            train[i] = sim.train_losses.entries[i].loss;
            reeval[i] = sim.reeval_losses.entries[i].loss;
        }
        run.write("sim_steps.csv", sim_steps_to_csv(lr, alpha, train, reeval));
    }
    if (svg) write_curve_svg(run, "sim_trec.svg", curve, "simulated re-evaluation curve");
    run.finish();
}

// --- place: curve + HQ budget -> recommended window ------------------------

void cmd_place(Run& run, const std::string& curve_path, double hq_fraction, std::int64_t total_steps,
               bool svg) {
    Trec curve = trec_from_csv(run.input_file(curve_path));
    run.param("hq_fraction", hq_fraction);

    PlacementPlan plan = recommend(curve, hq_fraction);
    run.write("plan.json", placement_plan_to_json(plan));
    if (total_steps > 0) {
        run.param("total_steps", total_steps);
        run.write("curriculum.csv", curriculum_to_csv(emit_curriculum(plan, total_steps)));
    }
    if (svg) {
        write_curve_svg(run, "plan.svg", curve, "recommended placement window",
                        std::make_pair(plan.start_fraction, plan.end_fraction));
    }
    std::cout << "window [" << format_double(plan.start_fraction) << ", "
              << format_double(plan.end_fraction) << "], mean "
              << format_double(plan.expected_mean_trec) << (plan.tie ? " (tie)" : "") << "\n";
    run.finish();
}

// --- audit: published recipe + power law -> placement review ---------------

void cmd_audit(Run& run, const std::string& recipe_path, const std::string& powerlaw_path,
               std::optional<double> margin_flag, bool svg) {
    nlohmann::json recipe;
    try {
        recipe = nlohmann::json::parse(run.input_file(recipe_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad recipe JSON: ") + e.what());
    }
    if (!recipe.is_object()) throw ParseError("recipe must be a JSON object");
    for (const auto& [key, value] : recipe.items()) {
        (void)value;
        if (key != "schedule" && key != "tpp" && key != "hq_window" && key != "margin") {
            throw ParseError("unknown recipe field '" + key + "'");
        }
    }
    for (const char* key : {"schedule", "tpp", "hq_window"}) {
        if (!recipe.contains(key)) throw ParseError(std::string("recipe missing field '") + key + "'");
    }
    if (!recipe["tpp"].is_number()) throw ParseError("recipe field 'tpp' must be a number");
    if (!recipe["hq_window"].is_object()) throw ParseError("recipe field 'hq_window' must be an object");
    for (const auto& [key, value] : recipe["hq_window"].items()) {
        (void)value;
        if (key != std::string("start_fraction") && key != std::string("end_fraction")) {
            throw ParseError("unknown recipe field 'hq_window." + key + "'");
        }
    }
    for (const char* key : {"start_fraction", "end_fraction"}) {
        if (!recipe["hq_window"].contains(key) || !recipe["hq_window"][key].is_number()) {
            throw ParseError(std::string("recipe field 'hq_window.") + key + "' must be a number");
        }
    }

    ScheduleSpec spec = parse_schedule(recipe["schedule"].dump());
    const double tpp = recipe["tpp"].get<double>();
    const double window_start = recipe["hq_window"]["start_fraction"].get<double>();
    const double window_end = recipe["hq_window"]["end_fraction"].get<double>();
    double margin = recipe.value("margin", 0.05);
    if (margin_flag) margin = *margin_flag;

    PowerLawFit fit = power_law_from_json(run.input_file(powerlaw_path));
    run.param("margin", margin);
    run.param("grid", run.opts().grid);

    AuditReport report =
        audit_recipe(spec, tpp, fit, window_start, window_end, margin, run.opts().grid);
    run.write("audit_curve.csv", trec_to_csv(report.predicted));
    run.write("audit.json", audit_report_to_json(report, "audit_curve.csv"));
    if (svg) {
        write_curve_svg(run, "audit.svg", report.predicted, "audited placement window",
                        std::make_pair(window_start, window_end));
    }
    std::cout << "window rank " << report.window.window_rank << "/" << report.window.n_windows
              << (report.window.suboptimal ? ", suboptimal" : "")
              << (report.near_zero_retention ? ", near-zero retention" : "") << "\n";
    run.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"training re-evaluation curve toolkit"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", opts.seed, "override the simulation seed");
    app.add_option("--grid", opts.grid, "resampling grid size")->capture_default_str();
    app.add_option("--window", opts.window, "smoothing window in points")->capture_default_str();

    std::string config_path, losslog_path, trec_path, powerlaw_path, records_path, recipe_path;
    std::string label, kind;
    std::optional<double> m, tpp_opt, margin_flag;
    double tpp = 0.0, p = 0.5, hq_fraction = 0.0;
    double tau_min = 1e-3, tau_max = 1.0;
    std::int64_t total_steps = 0;
    int placement_k = 0;
    bool normalize_flag = false, svg = false, append = false;
    bool check_decomposition = false, steps_csv = false;

    CLI::App* c_schedule = app.add_subcommand("schedule", "expand a schedule config to per-step learning rates");
    c_schedule->add_option("--config", config_path, "schedule JSON")->required();

    CLI::App* c_ema = app.add_subcommand("ema", "update-average coefficients and timescale summary");
    c_ema->add_option("--config", config_path, "schedule JSON")->required();

    CLI::App* c_predict = app.add_subcommand("predict", "predict a re-evaluation curve before training");
    c_predict->add_option("--config", config_path, "schedule JSON")->required();
    c_predict->add_option("--m", m, "forgetting exponent");
    c_predict->add_option("--powerlaw", powerlaw_path, "power-law JSON from fit-powerlaw");
    c_predict->add_option("--tpp", tpp_opt, "tokens per parameter (with --powerlaw)");
    c_predict->add_flag("--svg", svg, "also write an SVG plot");

    CLI::App* c_trec = app.add_subcommand("trec", "turn a per-batch loss log into a curve");
    c_trec->add_option("--losslog", losslog_path, "CSV step,loss[,tag]")->required();
    c_trec->add_option("--total-steps", total_steps, "run length if the log is partial");
    c_trec->add_flag("--normalize", normalize_flag, "min-max normalize the result");
    c_trec->add_flag("--svg", svg, "also write an SVG plot");

    CLI::App* c_fit = app.add_subcommand("fit", "fit the forgetting exponent m to a measured curve");
    c_fit->add_option("--schedule", config_path, "schedule JSON")->required();
    c_fit->add_option("--tpp", tpp, "tokens per parameter")->required();
    c_fit->add_option("--losslog", losslog_path, "CSV step,loss[,tag]");
    c_fit->add_option("--trec", trec_path, "already-smoothed curve CSV");
    c_fit->add_option("--total-steps", total_steps, "run length if the log is partial");
    c_fit->add_option("--p", p, "retention exponent")->capture_default_str();
    c_fit->add_option("--label", label, "schedule-kind label for the record");
    c_fit->add_flag("--append", append, "append to an existing fit_records.csv");

    CLI::App* c_fitpl = app.add_subcommand("fit-powerlaw", "fit m = C * TPP^mu1 * tau^mu2 to fit records");
    c_fitpl->add_option("--records", records_path, "CSV from fit --append")->required();
    c_fitpl->add_option("--tau-min", tau_min, "drop records below this tau")->capture_default_str();
    c_fitpl->add_option("--tau-max", tau_max, "drop records above this tau")->capture_default_str();
    c_fitpl->add_option("--schedule-kind", kind, "fit only records with this label");

    CLI::App* c_sim = app.add_subcommand("simulate", "run the quadratic-model simulator");
    c_sim->add_option("--config", config_path, "simulation JSON")->required();
    c_sim->add_option("--placement-sweep", placement_k, "sweep the HQ window over k segments");
    c_sim->add_flag("--check-decomposition", check_decomposition,
                    "verify the update-average reconstruction of final theta");
    c_sim->add_flag("--steps-csv", steps_csv, "also write per-step lr/alpha/losses");
    c_sim->add_flag("--svg", svg, "also write an SVG plot");

    CLI::App* c_place = app.add_subcommand("place", "recommend where to spend a high-quality data budget");
    c_place->add_option("--curve", trec_path, "curve CSV (measured or predicted)")->required();
    c_place->add_option("--hq-fraction", hq_fraction, "budget as a fraction of the run")->required();
    c_place->add_option("--total-steps", total_steps, "emit a per-step curriculum for this run length");
    c_place->add_flag("--svg", svg, "also write an SVG plot with the window shaded");

    CLI::App* c_audit = app.add_subcommand("audit", "review a published recipe's data placement");
    c_audit->add_option("--recipe", recipe_path, "recipe JSON: schedule, tpp, hq_window")->required();
    c_audit->add_option("--powerlaw", powerlaw_path, "power-law JSON")->required();
    c_audit->add_option("--margin", margin_flag, "suboptimality margin on normalized values");
    c_audit->add_flag("--svg", svg, "also write an SVG plot with the window shaded");

    // lets --out and friends appear after the subcommand name as well
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*c_schedule) {
            Run run("schedule", opts);
            cmd_schedule(run, config_path);
        } else if (*c_ema) {
            Run run("ema", opts);
            cmd_ema(run, config_path);
        } else if (*c_predict) {
            Run run("predict", opts);
            cmd_predict(run, config_path, m, powerlaw_path, tpp_opt, svg);
        } else if (*c_trec) {
            Run run("trec", opts);
            cmd_trec(run, losslog_path, total_steps, normalize_flag, svg);
        } else if (*c_fit) {
            Run run("fit", opts);
            cmd_fit(run, config_path, tpp, losslog_path, trec_path, total_steps, p, label, append);
        } else if (*c_fitpl) {
            Run run("fit-powerlaw", opts);
            cmd_fit_powerlaw(run, records_path, tau_min, tau_max, kind);
        } else if (*c_sim) {
            Run run("simulate", opts);
            cmd_simulate(run, config_path, placement_k, check_decomposition, steps_csv, svg);
        } else if (*c_place) {
            Run run("place", opts);
            cmd_place(run, trec_path, hq_fraction, total_steps, svg);
        } else if (*c_audit) {
            Run run("audit", opts);
            cmd_audit(run, recipe_path, powerlaw_path, margin_flag, svg);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
