#include "fedra/cli.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "fedra/config.hpp"
#include "fedra/error.hpp"
#include "fedra/verify.hpp"

#ifndef FEDRA_BUILD_ID
#define FEDRA_BUILD_ID "unknown"
#endif

namespace fedra::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(what + ": not a number: " + text);
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(what + ": not an integer: " + text);
  return v;
}

std::string dir_name(const std::string& param, const std::string& value) {
  std::string safe;
  for (char c : value) safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return param + "_" + safe;
}

struct RunOutput {
  std::vector<RoundRecord> records;
  double seconds = 0.0;
};

RunOutput run_and_write(const ExperimentConfig& cfg, const fs::path& out_dir) {
  std::cout << "# fedra-sim " << build_id() << " seed=" << cfg.seed << " out=" << out_dir.string()
            << "\n# config " << config_to_json(cfg).dump() << std::endl;
  const auto start = std::chrono::steady_clock::now();
  auto result = run_simulation(cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::create_directories(out_dir);
  write_metrics_csv(out_dir / "metrics.csv", result.records);
  write_text(out_dir / "summary.json", summary_json(cfg, result.records, secs).dump(2) + "\n");
  return {std::move(result.records), secs};
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

std::string build_id() { return FEDRA_BUILD_ID; }

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metrics_row(const RoundRecord& rec) {
  std::string row = std::to_string(rec.round) + "," + std::to_string(rec.true_m) + ",";
  if (rec.estimated_m) row += std::to_string(*rec.estimated_m);
  row += "," + std::to_string(rec.selected_count) + "," + std::to_string(rec.filtered_malicious) +
         "," + std::to_string(rec.filtered_benign) + "," + format_real(rec.train_loss) + ",";
  if (rec.eval_accuracy) row += format_real(*rec.eval_accuracy);
  row += "," + join(rec.warnings, ';');
  return row;
}

void write_metrics_csv(const fs::path& path, std::span<const RoundRecord> records) {
  std::string text = std::string(kMetricsHeader) + "\n";
  for (const auto& rec : records) text += metrics_row(rec) + "\n";
  write_text(path, text);
}

json record_to_json(const RoundRecord& rec) {
  return {{"round", rec.round},
          {"true_m", rec.true_m},
          {"estimated_m", rec.estimated_m ? json(*rec.estimated_m) : json(nullptr)},
          {"selected_count", rec.selected_count},
          {"filtered_malicious", rec.filtered_malicious},
          {"filtered_benign", rec.filtered_benign},
          {"train_loss", rec.train_loss},
          {"eval_accuracy", rec.eval_accuracy ? json(*rec.eval_accuracy) : json(nullptr)},
          {"warnings", rec.warnings}};
}

json summary_json(const ExperimentConfig& cfg, std::span<const RoundRecord> records,
                  double wall_clock_seconds) {
  json out;
  out["build_id"] = build_id();
  out["seed"] = cfg.seed;
  out["config"] = config_to_json(cfg);
  out["rounds_completed"] = records.size();
  out["final_record"] = records.empty() ? json(nullptr) : record_to_json(records.back());
  out["wall_clock_seconds"] = wall_clock_seconds;
  return out;
}

void apply_sweep_value(ExperimentConfig& cfg, const std::string& param, const std::string& value) {
  if (param == "alpha_q") {
    cfg.attack.alpha_q = parse_double(value, param);
  } else if (param == "gamma") {
    cfg.rule.gamma = parse_double(value, param);
  } else if (param == "rule") {
    const auto k = parse_rule_kind(value);
    if (!k) throw ConfigError("rule: unknown rule " + value);
    cfg.rule.kind = *k;
  } else if (param == "attack") {
    const auto k = parse_attack_kind(value);
    if (!k) throw ConfigError("attack: unknown attack " + value);
    cfg.attack.kind = *k;
  } else if (param == "ratio_mode") {
    if (value == "fixed") cfg.population.ratio_mode = RatioMode::Fixed;
    else if (value == "dynamic") cfg.population.ratio_mode = RatioMode::Dynamic;
    else throw ConfigError("ratio_mode must be fixed or dynamic, got " + value);
  } else if (param == "m_tilde_override") {
    if (value == "auto") cfg.rule.m_tilde_override.reset();
    else cfg.rule.m_tilde_override = parse_int(value, param);
  } else {
    throw ConfigError("unknown sweep param " + param + " (expected one of " +
                      join(kSweepParams, ',') + ")");
  }
  validate(cfg);
}

int cmd_simulate(const fs::path& config_path, std::optional<std::uint64_t> seed,
                 std::optional<fs::path> out_dir) {
  return guarded([&] {
    auto cfg = parse_config_file(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = out_dir->string();
    run_and_write(cfg, cfg.output_dir);
    return kOk;
  });
}

int cmd_sweep(const fs::path& config_path, const std::string& param,
              const std::vector<std::string>& values, const fs::path& out_dir) {
  return guarded([&] {
    const auto base = parse_config_file(config_path);
    if (values.empty()) throw ConfigError("--values is empty");
    std::vector<ExperimentConfig> runs;
    for (const auto& v : values) {
      auto cfg = base;
      apply_sweep_value(cfg, param, v);
      cfg.output_dir = (out_dir / dir_name(param, v)).string();
      runs.push_back(std::move(cfg));
    }
    std::string table = "param,value,seed," + std::string(kMetricsHeader) + "\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto out = run_and_write(runs[i], runs[i].output_dir);
      table += param + "," + values[i] + "," + std::to_string(runs[i].seed) + ",";
      if (!out.records.empty()) table += metrics_row(out.records.back());
      else table += ",,,,,,,,";
      table += "\n";
    }
    write_text(out_dir / "sweep.csv", table);
    std::cout << table;
    return kOk;
  });
}

int cmd_verify(std::optional<fs::path> report_path, bool inject_hypergeom_fault) {
  return guarded([&] {
    verify::SuiteOptions opts;
    opts.inject_hypergeom_fault = inject_hypergeom_fault;
    const auto checks = verify::run_suite(opts);
    bool all = true;
    json report;
    report["build_id"] = build_id();
    report["seed"] = opts.seed;
    report["checks"] = json::array();
    for (const auto& c : checks) {
      all = all && c.pass;
      char line[160];
      std::snprintf(line, sizeof line, "%-4s  %-32s measured=%-22s bound=%-22s ",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), format_real(c.measured).c_str(),
                    format_real(c.bound).c_str());
      std::cout << line << c.detail << "\n";
      report["checks"].push_back({{"name", c.name},
                                  {"measured", c.measured},
                                  {"bound", c.bound},
                                  {"pass", c.pass},
                                  {"detail", c.detail}});
    }
    report["pass"] = all;
    write_text(report_path.value_or("verify_report.json"), report.dump(2) + "\n");
    std::cout << (all ? "verify: all checks passed" : "verify: FAILED") << std::endl;
    return all ? kOk : kFailure;
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Quantity-robust federated learning simulator", "fedra-sim"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto* sim = app.add_subcommand("simulate", "Run one experiment");
  sim->add_option("--config", config_path, "JSON config")->required();
  sim->add_option("--seed", seed, "Override the config seed");
  sim->add_option("--out", out, "Output directory (default: config output_dir)");

  std::string param;
  std::string values;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sweep->add_option("--config", config_path, "JSON config")->required();
  sweep->add_option("--param", param, join(kSweepParams, '|'))->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();

  std::optional<std::string> report;
  std::string fault;
  auto* ver = app.add_subcommand("verify", "Run the oracle suite");
  ver->add_option("--report", report, "JSON report path (default verify_report.json)");
  ver->add_option("--inject-fault", fault)->group("")->check(CLI::IsMember({"hypergeom"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*sim) {
    std::optional<fs::path> out_dir;
    if (out) out_dir = *out;
    return cmd_simulate(config_path, seed, out_dir);
  }
  if (*sweep) {
    std::vector<std::string> list;
    std::string item;
    for (char c : values + ",") {
      if (c == ',') {
        if (!item.empty()) list.push_back(item);
        item.clear();
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        item += c;
      }
    }
    return cmd_sweep(config_path, param, list, sweep_out);
  }
  std::optional<fs::path> report_path;
  if (report) report_path = *report;
  return cmd_verify(report_path, fault == "hypergeom");
}

}  // namespace fedra::cli
