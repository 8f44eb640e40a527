#include "treclab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "treclab/errors.hpp"

namespace treclab {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

// Splits into lines, dropping a trailing '\r' per line (files written on
// Windows) and a final empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line;
        if (nl == std::string_view::npos) {
            line = text.substr(pos);
            pos = text.size() + 1;
        } else {
            line = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

double parse_double_field(std::string_view field, std::size_t line_no, const char* name) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + name + " value '" +
                         std::string(field) + "'");
    }
    return value;
}

std::int64_t parse_int_field(std::string_view field, std::size_t line_no, const char* name) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + name + " value '" +
                         std::string(field) + "'");
    }
    return value;
}

void require_header(std::string_view got, std::initializer_list<std::string_view> accepted) {
    for (auto h : accepted) {
        if (got == h) return;
    }
    std::string msg = "unexpected CSV header '" + std::string(got) + "', expected ";
    bool first = true;
    for (auto h : accepted) {
        if (!first) msg += " or ";
        msg += "'" + std::string(h) + "'";
        first = false;
    }
    throw ParseError(msg);
}

nlohmann::json plan_to_json_obj(const PlacementPlan& plan) {
    nlohmann::json obj;
    obj["start_fraction"] = plan.start_fraction;
    obj["end_fraction"] = plan.end_fraction;
    obj["expected_mean_trec"] = plan.expected_mean_trec;
    obj["tie"] = plan.tie;
    obj["source_kind"] = plan.source_kind == CurveKind::Predicted ? "predicted" : "measured";
    obj["source_points"] = plan.source_points;
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& w : plan.segment_rank) {
        ranked.push_back({{"start_fraction", w.start_fraction},
                          {"end_fraction", w.end_fraction},
                          {"mean_value", w.mean_value}});
    }
    obj["segment_rank"] = std::move(ranked);
    return obj;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (ec != std::errc()) throw ValidationError("failed to format double");
    return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path dir = path.parent_path();
    if (dir.empty()) dir = ".";
    std::filesystem::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw ValidationError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ValidationError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                              "': " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw ParseError("error reading '" + path.string() + "'");
    return std::move(buf).str();
}

std::string lr_to_csv(std::span<const double> lr) {
    std::string out = "step,lr\n";
    for (std::size_t i = 0; i < lr.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_double(lr[i]);
        out += '\n';
    }
    return out;
}

std::string ema_to_csv(const EmaCoefficients& coeffs) {
    const auto n = coeffs.c.size();
    std::string out = "step,t_hat,alpha,c\n";
    for (std::size_t i = 0; i < n; ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_double(static_cast<double>(i + 1) / static_cast<double>(n));
        out += ',';
        out += format_double(coeffs.alphas[i]);
        out += ',';
        out += format_double(coeffs.c[i]);
        out += '\n';
    }
    return out;
}

std::string trec_to_csv(const Trec& curve) {
    const bool with_tags = !curve.tags.empty();
    std::string out = with_tags ? "t_hat,value,tag\n" : "t_hat,value\n";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        out += format_double(curve.points[i].t_hat);
        out += ',';
        out += format_double(curve.points[i].value);
        if (with_tags) {
            out += ',';
            out += curve.tags[i];
        }
        out += '\n';
    }
    return out;
}

std::string losslog_to_csv(const LossLog& log) {
    bool with_tags = false;
    for (const auto& e : log.entries) {
        if (!e.tag.empty()) {
            with_tags = true;
            break;
        }
    }
    std::string out = with_tags ? "step,loss,tag\n" : "step,loss\n";
    for (const auto& e : log.entries) {
        out += std::to_string(e.step);
        out += ',';
        out += format_double(e.loss);
        if (with_tags) {
            out += ',';
            out += e.tag;
        }
        out += '\n';
    }
    return out;
}

std::string curriculum_to_csv(const std::vector<CurriculumEntry>& entries) {
    std::string out = "step,label\n";
    for (const auto& e : entries) {
        out += std::to_string(e.step);
        out += ',';
        out += e.label;
        out += '\n';
    }
    return out;
}

std::string fit_records_to_csv(const std::vector<FitRecord>& records) {
    bool with_kind = false;
    for (const auto& r : records) {
        if (!r.schedule_kind.empty()) {
            with_kind = true;
            break;
        }
    }
    std::string out = with_kind ? "tpp,tau,m_star,r_p,schedule_kind\n" : "tpp,tau,m_star,r_p\n";
    for (const auto& r : records) {
        out += format_double(r.tpp);
        out += ',';
        out += format_double(r.tau);
        out += ',';
        out += format_double(r.m_star);
        out += ',';
        out += format_double(r.r_p_at_fit);
        if (with_kind) {
            out += ',';
            out += r.schedule_kind;
        }
        out += '\n';
    }
    return out;
}

std::string sim_steps_to_csv(std::span<const double> lr, std::span<const double> alpha,
                             std::span<const double> train_loss,
                             std::span<const double> reeval_loss) {
    if (lr.size() != alpha.size() || lr.size() != train_loss.size() ||
        lr.size() != reeval_loss.size()) {
        throw ValidationError("per-step column lengths disagree");
    }
    std::string out = "step,lr,alpha,train_loss,reeval_loss\n";
    for (std::size_t i = 0; i < lr.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_double(lr[i]);
        out += ',';
        out += format_double(alpha[i]);
        out += ',';
        out += format_double(train_loss[i]);
        out += ',';
        out += format_double(reeval_loss[i]);
        out += '\n';
    }
    return out;
}

LossLog losslog_from_csv(const std::string& text, std::int64_t total_steps) {
    auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty loss log");
    require_header(lines[0], {"step,loss", "step,loss,tag"});
    const bool with_tags = lines[0] == "step,loss,tag";

    LossLog log;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_fields(lines[i]);
        const std::size_t want = with_tags ? 3 : 2;
        if (fields.size() != want) {
            throw ParseError("line " + std::to_string(i + 1) + ": expected " +
                             std::to_string(want) + " fields, got " +
                             std::to_string(fields.size()));
        }
        LossEntry e;
        e.step = parse_int_field(fields[0], i + 1, "step");
        e.loss = parse_double_field(fields[1], i + 1, "loss");
        if (with_tags) e.tag = std::string(fields[2]);
        log.entries.push_back(std::move(e));
    }
    if (log.entries.empty()) throw ParseError("loss log has a header but no rows");

    if (total_steps > 0) {
        log.total_steps = total_steps;
    } else {
        std::int64_t max_step = 0;
        for (const auto& e : log.entries) max_step = std::max(max_step, e.step);
        log.total_steps = max_step;
    }
    return log;
}

Trec trec_from_csv(const std::string& text) {
    auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty curve file");
    require_header(lines[0], {"t_hat,value", "t_hat,value,tag"});
    const bool with_tags = lines[0] == "t_hat,value,tag";

    Trec curve;
    curve.kind = CurveKind::Measured;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_fields(lines[i]);
        const std::size_t want = with_tags ? 3 : 2;
        if (fields.size() != want) {
            throw ParseError("line " + std::to_string(i + 1) + ": expected " +
                             std::to_string(want) + " fields, got " +
                             std::to_string(fields.size()));
        }
        TrecPoint p;
        p.t_hat = parse_double_field(fields[0], i + 1, "t_hat");
        p.value = parse_double_field(fields[1], i + 1, "value");
        if (!(p.t_hat > 0.0) || p.t_hat > 1.0) {
            throw ParseError("line " + std::to_string(i + 1) + ": t_hat " +
                             format_double(p.t_hat) + " outside (0, 1]");
        }
        curve.points.push_back(p);
        if (with_tags) curve.tags.emplace_back(fields[2]);
    }
    if (curve.points.empty()) throw ParseError("curve file has a header but no rows");

    std::vector<std::size_t> order(curve.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return curve.points[a].t_hat < curve.points[b].t_hat;
    });
    Trec sorted;
    sorted.kind = curve.kind;
    sorted.points.reserve(curve.points.size());
    for (std::size_t idx : order) {
        if (!sorted.points.empty() && sorted.points.back().t_hat == curve.points[idx].t_hat) {
            throw ParseError("duplicate t_hat " + format_double(curve.points[idx].t_hat));
        }
        sorted.points.push_back(curve.points[idx]);
        if (with_tags) sorted.tags.push_back(curve.tags[idx]);
    }
    return sorted;
}

std::vector<FitRecord> fit_records_from_csv(const std::string& text) {
    auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty fit record file");
    require_header(lines[0], {"tpp,tau,m_star,r_p", "tpp,tau,m_star,r_p,schedule_kind"});
    const bool with_kind = lines[0] == "tpp,tau,m_star,r_p,schedule_kind";

    std::vector<FitRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_fields(lines[i]);
        const std::size_t want = with_kind ? 5 : 4;
        if (fields.size() != want) {
            throw ParseError("line " + std::to_string(i + 1) + ": expected " +
                             std::to_string(want) + " fields, got " +
                             std::to_string(fields.size()));
        }
        FitRecord r;
        r.tpp = parse_double_field(fields[0], i + 1, "tpp");
        r.tau = parse_double_field(fields[1], i + 1, "tau");
        r.m_star = parse_double_field(fields[2], i + 1, "m_star");
        r.r_p_at_fit = parse_double_field(fields[3], i + 1, "r_p");
        if (with_kind) r.schedule_kind = std::string(fields[4]);
        records.push_back(std::move(r));
    }
    if (records.empty()) throw ParseError("fit record file has a header but no rows");
    return records;
}

std::string ema_summary_to_json(const EmaSummary& summary) {
    nlohmann::json obj;
    if (summary.tau) {
        obj["tau"] = *summary.tau;
        obj["tau_iter"] = *summary.tau_iter;
        obj["timescale_defined"] = true;
    } else {
        obj["tau"] = nullptr;
        obj["tau_iter"] = nullptr;
        obj["timescale_defined"] = false;
    }
    obj["c0"] = summary.c0;
    obj["argmax_step"] = summary.argmax_step;
    obj["mass_by_decile"] = summary.mass_by_decile;
    obj["sum_identity"] = summary.sum_identity;
    return obj.dump(2) + "\n";
}

std::string power_law_to_json(const PowerLawFit& fit) {
    nlohmann::json obj;
    obj["C"] = fit.C;
    obj["mu1"] = fit.mu1;
    obj["mu2"] = fit.mu2;
    obj["r2_log"] = fit.r2_log;
    obj["n_points"] = fit.n_points;
    if (fit.schedule_kind) obj["schedule_kind"] = *fit.schedule_kind;
    return obj.dump(2) + "\n";
}

PowerLawFit power_law_from_json(const std::string& text) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad power-law JSON: ") + e.what());
    }
    PowerLawFit fit;
    for (const char* key : {"C", "mu1", "mu2"}) {
        if (!obj.contains(key) || !obj[key].is_number()) {
            throw ParseError(std::string("power-law JSON missing numeric field '") + key + "'");
        }
    }
    fit.C = obj["C"].get<double>();
    fit.mu1 = obj["mu1"].get<double>();
    fit.mu2 = obj["mu2"].get<double>();
    fit.r2_log = obj.value("r2_log", 0.0);
    fit.n_points = obj.value("n_points", 0);
    if (obj.contains("schedule_kind")) fit.schedule_kind = obj["schedule_kind"].get<std::string>();
    return fit;
}

std::string placement_plan_to_json(const PlacementPlan& plan) {
    return plan_to_json_obj(plan).dump(2) + "\n";
}

std::string audit_report_to_json(const AuditReport& report, const std::string& curve_path) {
    nlohmann::json obj;
    obj["window"] = {{"mean_value", report.window.window_mean},
                     {"best_mean", report.window.best_mean},
                     {"rank", report.window.window_rank},
                     {"n_windows", report.window.n_windows},
                     {"suboptimal", report.window.suboptimal}};
    obj["recommended"] = plan_to_json_obj(report.window.recommended);
    obj["window_mass_fraction"] = report.window_mass_fraction;
    obj["margin"] = report.margin;
    obj["near_zero_retention"] = report.near_zero_retention;
    if (!curve_path.empty()) obj["curve_csv"] = curve_path;
    return obj.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
    for (unsigned char b : bytes) {
        state ^= b;
        state *= 1099511628211ull;
    }
    return state;
}

std::string hash_to_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string manifest_to_json(const RunManifest& manifest) {
    nlohmann::json obj;
    obj["command"] = manifest.command;
    obj["inputs"] = manifest.inputs;
    obj["config_hash"] = manifest.config_hash;
    obj["version"] = manifest.version;
    obj["outputs"] = manifest.outputs;
    return obj.dump(2) + "\n";
}

}  // namespace treclab
