#include <json.hpp>

#include "treclab/errors.hpp"
#include "treclab/quadsim.hpp"

namespace treclab {

using nlohmann::json;

SimConfig parse_sim_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("sim config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("sim config must be a JSON object");

    SimConfig cfg;
    if (doc.contains("optimizer")) {
        if (!doc.at("optimizer").is_string())
            throw ParseError("optimizer: expected \"sgd\" or \"adamw\"");
        const std::string name = doc.at("optimizer").get<std::string>();
        if (name == "sgd")
            cfg.optimizer = Optimizer::Sgd;
        else if (name == "adamw")
            cfg.optimizer = Optimizer::AdamW;
        else
            throw ParseError("optimizer: expected \"sgd\" or \"adamw\", got \"" + name + "\"");
    }

    if (!doc.contains("schedule") || !doc.at("schedule").is_object())
        throw ParseError("schedule: required object field");
    cfg.schedule = parse_schedule(doc.at("schedule").dump());

    auto number_or = [&](const char* key, double fallback) {
        if (!doc.contains(key)) return fallback;
        if (!doc.at(key).is_number())
            throw ParseError(std::string(key) + ": expected a number");
        return doc.at(key).get<double>();
    };

    if (doc.contains("dims")) {
        if (!doc.at("dims").is_number_integer())
            throw ParseError("dims: expected an integer");
        cfg.dims = doc.at("dims").get<int>();
    }
    cfg.beta1 = number_or("beta1", cfg.beta1);
    cfg.beta2 = number_or("beta2", cfg.beta2);
    cfg.epsilon = number_or("epsilon", cfg.epsilon);
    cfg.drift_amplitude = number_or("drift_amplitude", cfg.drift_amplitude);
    cfg.batch_noise_std = number_or("batch_noise_std", cfg.batch_noise_std);
    cfg.initial_theta = number_or("initial_theta", cfg.initial_theta);

    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer())
            throw ParseError("seed: expected an integer");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }

    if (doc.contains("curvature")) {
        const json& cur = doc.at("curvature");
        if (cur.is_number()) {
            cfg.curvature = {cur.get<double>()};
        } else if (cur.is_array()) {
            cfg.curvature.clear();
            for (const json& v : cur) {
                if (!v.is_number())
                    throw ParseError("curvature: expected numbers");
                cfg.curvature.push_back(v.get<double>());
            }
        } else {
            throw ParseError("curvature: expected a number or an array of numbers");
        }
    }

    if (doc.contains("hq_segment") && !doc.at("hq_segment").is_null()) {
        const json& seg = doc.at("hq_segment");
        if (!seg.is_object())
            throw ParseError("hq_segment: expected an object");
        auto seg_number = [&](const char* key) {
            if (!seg.contains(key) || !seg.at(key).is_number())
                throw ParseError(std::string("hq_segment.") + key + ": required number field");
            return seg.at(key).get<double>();
        };
        cfg.hq_segment = HqSegment{seg_number("start_fraction"), seg_number("end_fraction"),
                                   seg_number("target_offset")};
    }
    return cfg;
}

std::string serialize_sim_config(const SimConfig& config) {
    json doc;
    doc["optimizer"] = config.optimizer == Optimizer::AdamW ? "adamw" : "sgd";
    doc["dims"] = config.dims;
    doc["schedule"] = json::parse(serialize_schedule(config.schedule));
    doc["beta1"] = config.beta1;
    doc["beta2"] = config.beta2;
    doc["epsilon"] = config.epsilon;
    if (config.curvature.size() == 1)
        doc["curvature"] = config.curvature[0];
    else
        doc["curvature"] = config.curvature;
    doc["drift_amplitude"] = config.drift_amplitude;
    doc["batch_noise_std"] = config.batch_noise_std;
    doc["initial_theta"] = config.initial_theta;
    doc["seed"] = config.seed;
    if (config.hq_segment) {
        doc["hq_segment"] = {{"start_fraction", config.hq_segment->start_fraction},
                             {"end_fraction", config.hq_segment->end_fraction},
                             {"target_offset", config.hq_segment->target_offset}};
    }
    return doc.dump(2) + "\n";
}

}  // namespace treclab
