#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedra/engine.hpp"

namespace fedra::cli {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2 };

std::string build_id();

// %.17g; integers print without a fraction.
std::string format_real(double v);

inline constexpr const char* kMetricsHeader =
    "round,true_m,estimated_m,selected_count,filtered_malicious,filtered_benign,train_loss,"
    "eval_accuracy,warnings";
std::string metrics_row(const RoundRecord& rec);
void write_metrics_csv(const std::filesystem::path& path, std::span<const RoundRecord> records);

nlohmann::json record_to_json(const RoundRecord& rec);
nlohmann::json summary_json(const ExperimentConfig& cfg, std::span<const RoundRecord> records,
                            double wall_clock_seconds);

inline const std::vector<std::string> kSweepParams = {
    "alpha_q", "rule", "attack", "ratio_mode", "gamma", "m_tilde_override"};
// Throws ConfigError on an unknown param or a bad value.
void apply_sweep_value(ExperimentConfig& cfg, const std::string& param, const std::string& value);

int cmd_simulate(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed,
                 std::optional<std::filesystem::path> out_dir);
int cmd_sweep(const std::filesystem::path& config_path, const std::string& param,
              const std::vector<std::string>& values, const std::filesystem::path& out_dir);
int cmd_verify(std::optional<std::filesystem::path> report_path, bool inject_hypergeom_fault = false);

// Full command line, including usage errors mapped to exit code 2.
int run(int argc, char** argv);

}  // namespace fedra::cli
