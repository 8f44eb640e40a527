#include <json.hpp>

#include "treclab/errors.hpp"
#include "treclab/schedule.hpp"

namespace treclab {

using nlohmann::json;

namespace {

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key))
        throw ParseError(key + ": required field missing");
    if (!j.at(key).is_number())
        throw ParseError(key + ": expected a number");
    return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw ParseError(path + ": expected a number");
    return j.at(key).get<double>();
}

}  // namespace

ScheduleSpec parse_schedule(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("schedule document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("schedule document must be a JSON object");

    ScheduleSpec spec;
    if (!doc.contains("kind") || !doc.at("kind").is_string())
        throw ParseError("kind: required string field");
    spec.kind = schedule_kind_from_name(doc.at("kind").get<std::string>());

    if (!doc.contains("total_steps") || !doc.at("total_steps").is_number_integer())
        throw ParseError("total_steps: required integer field");
    spec.total_steps = doc.at("total_steps").get<std::int64_t>();

    spec.peak_lr = require_number(doc, "peak_lr");
    spec.warmup_fraction = number_or(doc, "warmup_fraction", "warmup_fraction", 0.1);
    spec.weight_decay = number_or(doc, "weight_decay", "weight_decay", 0.0);

    const json params = doc.contains("params") ? doc.at("params") : json::object();
    if (!params.is_object())
        throw ParseError("params: expected an object");

    switch (spec.kind) {
        case ScheduleKind::Step:
            spec.drop_at_fraction = number_or(params, "drop_at_fraction", "params.drop_at_fraction", spec.drop_at_fraction);
            spec.drop_factor = number_or(params, "drop_factor", "params.drop_factor", spec.drop_factor);
            break;
        case ScheduleKind::FactorDecay:
            spec.final_over_peak = number_or(params, "final_over_peak", "params.final_over_peak", spec.final_over_peak);
            break;
        case ScheduleKind::Cosine:
            spec.floor_over_peak = number_or(params, "floor_over_peak", "params.floor_over_peak", 0.0);
            break;
        case ScheduleKind::WSD:
            if (!params.contains("flat_fraction"))
                throw ParseError("params.flat_fraction: required for wsd");
            if (!params.contains("decay_fraction"))
                throw ParseError("params.decay_fraction: required for wsd");
            spec.flat_fraction = number_or(params, "flat_fraction", "params.flat_fraction", 0.0);
            spec.decay_fraction = number_or(params, "decay_fraction", "params.decay_fraction", 0.0);
            break;
        case ScheduleKind::Cyclic: {
            if (!params.contains("segments") || !params.at("segments").is_array())
                throw ParseError("params.segments: required array for cyclic");
            size_t i = 0;
            for (const json& s : params.at("segments")) {
                const std::string path = "params.segments[" + std::to_string(i) + "]";
                if (!s.is_object())
                    throw ParseError(path + ": expected an object");
                CyclicSegment seg;
                seg.phase_fraction = number_or(s, "phase_fraction", path + ".phase_fraction", -1.0);
                if (seg.phase_fraction < 0.0)
                    throw ParseError(path + ".phase_fraction: required field missing");
                if (!s.contains("start_lr"))
                    throw ParseError(path + ".start_lr: required field missing");
                if (!s.contains("end_lr"))
                    throw ParseError(path + ".end_lr: required field missing");
                seg.start_lr = number_or(s, "start_lr", path + ".start_lr", 0.0);
                seg.end_lr = number_or(s, "end_lr", path + ".end_lr", 0.0);
                spec.segments.push_back(seg);
                ++i;
            }
            break;
        }
        case ScheduleKind::LinearD2Z:
        case ScheduleKind::Constant:
            break;
    }

    validate_schedule(spec);
    return spec;
}

std::string serialize_schedule(const ScheduleSpec& spec) {
    json doc;
    doc["kind"] = schedule_kind_name(spec.kind);
    doc["total_steps"] = spec.total_steps;
    doc["peak_lr"] = spec.peak_lr;
    doc["warmup_fraction"] = spec.warmup_fraction;
    doc["weight_decay"] = spec.weight_decay;

    json params = json::object();
    switch (spec.kind) {
        case ScheduleKind::Step:
            params["drop_at_fraction"] = spec.drop_at_fraction;
            params["drop_factor"] = spec.drop_factor;
            break;
        case ScheduleKind::FactorDecay:
            params["final_over_peak"] = spec.final_over_peak;
            break;
        case ScheduleKind::Cosine:
            params["floor_over_peak"] = spec.floor_over_peak;
            break;
        case ScheduleKind::WSD:
            params["flat_fraction"] = spec.flat_fraction;
            params["decay_fraction"] = spec.decay_fraction;
            break;
        case ScheduleKind::Cyclic: {
            json segs = json::array();
            for (const auto& seg : spec.segments) {
                segs.push_back({{"phase_fraction", seg.phase_fraction},
                                {"start_lr", seg.start_lr},
                                {"end_lr", seg.end_lr}});
            }
            params["segments"] = segs;
            break;
        }
        case ScheduleKind::LinearD2Z:
        case ScheduleKind::Constant:
            break;
    }
    doc["params"] = params;
    return doc.dump(2) + "\n";
}

}  // namespace treclab
