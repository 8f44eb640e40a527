#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treclab/ema.hpp"
#include "treclab/placement.hpp"
#include "treclab/predictor.hpp"
#include "treclab/trec.hpp"

namespace treclab {

inline constexpr const char* kToolkitVersion = "0.1.0";

// 17 significant digits, '.' decimal point regardless of locale, so every
// serialized double round-trips exactly.
std::string format_double(double v);

// Write via a temp file in the same directory plus rename, so readers never
// observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// CSV forms. Headers are mandatory on read and always emitted on write.
std::string lr_to_csv(std::span<const double> lr);                  // step,lr
std::string ema_to_csv(const EmaCoefficients& coeffs);              // step,t_hat,alpha,c
std::string trec_to_csv(const Trec& curve);                         // t_hat,value[,tag]
std::string losslog_to_csv(const LossLog& log);                     // step,loss[,tag]
std::string curriculum_to_csv(const std::vector<CurriculumEntry>&); // step,label
std::string fit_records_to_csv(const std::vector<FitRecord>&);      // tpp,tau,m_star,r_p[,schedule_kind]
std::string sim_steps_to_csv(std::span<const double> lr, std::span<const double> alpha,
                             std::span<const double> train_loss,
                             std::span<const double> reeval_loss);

// total_steps <= 0 means "use the largest step in the file".
LossLog losslog_from_csv(const std::string& text, std::int64_t total_steps = 0);
Trec trec_from_csv(const std::string& text);
std::vector<FitRecord> fit_records_from_csv(const std::string& text);

// JSON forms
std::string ema_summary_to_json(const EmaSummary& summary);
std::string power_law_to_json(const PowerLawFit& fit);
PowerLawFit power_law_from_json(const std::string& text);
std::string placement_plan_to_json(const PlacementPlan& plan);
std::string audit_report_to_json(const AuditReport& report, const std::string& curve_path);

struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::string config_hash;
    std::string version = kToolkitVersion;
    std::vector<std::string> outputs;
};

// FNV-1a over raw bytes; platform-independent, good enough to tie outputs to
// the exact inputs that produced them.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 14695981039346656037ull);
std::string hash_to_hex(std::uint64_t h);

std::string manifest_to_json(const RunManifest& manifest);

}  // namespace treclab
