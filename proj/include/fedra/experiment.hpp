#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fedra/adversary.hpp"
#include "fedra/aggregators.hpp"
#include "fedra/cohort.hpp"

namespace fedra {

enum class TaskKind { GaussianMean, Softmax };
enum class DataSource { Synthetic, Mnist };

struct TaskConfig {
  TaskKind kind = TaskKind::GaussianMean;
  std::size_t dim = 10;
  // GaussianMean: every coordinate of the true mean / per-dim std.
  double mean_value = 1.0;
  double stddev = 1.0;
  // Training samples; 0 means round(N * target_mean).
  std::size_t dataset_size = 0;
  // Softmax.
  int num_classes = 10;
  double l2_reg = 1e-4;
  double separation = 1.0;
  std::size_t test_size = 1000;
  DataSource source = DataSource::Synthetic;
  // Directory holding train-images-idx3-ubyte, train-labels-idx1-ubyte,
  // t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte.
  std::string mnist_dir;
};

struct PopulationConfig {
  int N = 3000;
  int M = 300;
  int n = 50;
  std::optional<int> M_tilde;  // absent: the server assumes M
  RatioMode ratio_mode = RatioMode::Dynamic;

  int m_tilde_total() const { return M_tilde.value_or(M); }
};

struct QuantityConfig {
  double target_mean = 20.0;
  double log_sigma = 3.0;
};

enum class RuleKind {
  FedAvgWeighted,
  Krum,
  MKrum,
  Median,
  Trimean,
  Bulyan,
  NormBound,
  Rfa,
  Truncate,
  FedRA
};

// How baselines pick their m_tilde each round.
struct MTildeSetting {
  enum class Mode { Auto, Fixed, TrueCount };
  Mode mode = Mode::Auto;  // Auto: ceil(n * M_tilde / N)
  int value = 0;
};

struct RuleConfig {
  RuleKind kind = RuleKind::FedRA;
  MTildeSetting m_tilde;
  std::optional<int> mkrum_count;  // absent: n - m_tilde
  double gamma = 0.1;
  std::optional<int> m_tilde_override;
  double norm_threshold = 1.0;
  Rfa rfa;
  double top_fraction = 0.1;
  double mass_fraction = 0.5;
};

struct ServerConfig {
  std::optional<double> lr;  // absent: 0.01 GaussianMean, 0.05 softmax
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool bias_correction = true;
};

struct ExperimentConfig {
  TaskConfig task;
  PopulationConfig population;
  QuantityConfig quantities;
  PartitionSpec partition;
  RuleConfig rule;
  AttackSpec attack;
  int rounds = 200;
  int eval_interval = 10;
  std::uint64_t seed = 0;
  ServerConfig server;
  std::string output_dir = "out";
};

std::string rule_kind_name(RuleKind kind);
std::optional<RuleKind> parse_rule_kind(const std::string& name);
std::optional<AttackKind> parse_attack_kind(const std::string& name);

double effective_lr(const ExperimentConfig& cfg);

// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& cfg);

// Concrete rule for a round with n reports and true_m malicious among them.
AggregationRule resolve_rule(const RuleConfig& rule, const PopulationConfig& pop, int n,
                             int true_m);

}  // namespace fedra
