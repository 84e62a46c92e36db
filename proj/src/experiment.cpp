#include "fedra/experiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <utility>

#include "fedra/error.hpp"

namespace fedra {
namespace {

constexpr std::array<std::pair<RuleKind, const char*>, 10> kRuleNames{{
    {RuleKind::FedAvgWeighted, "FedAvgWeighted"},
    {RuleKind::Krum, "Krum"},
    {RuleKind::MKrum, "MKrum"},
    {RuleKind::Median, "Median"},
    {RuleKind::Trimean, "Trimean"},
    {RuleKind::Bulyan, "Bulyan"},
    {RuleKind::NormBound, "NormBound"},
    {RuleKind::Rfa, "RFA"},
    {RuleKind::Truncate, "Truncate"},
    {RuleKind::FedRA, "FedRA"},
}};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string rule_kind_name(RuleKind kind) {
  for (const auto& [k, name] : kRuleNames)
    if (k == kind) return name;
  return "FedRA";
}

std::optional<RuleKind> parse_rule_kind(const std::string& name) {
  const std::string key = lower(name);
  for (const auto& [k, n] : kRuleNames)
    if (lower(n) == key) return k;
  if (key == "fedavg") return RuleKind::FedAvgWeighted;
  return std::nullopt;
}

std::optional<AttackKind> parse_attack_kind(const std::string& name) {
  const std::string key = lower(name);
  for (AttackKind k : {AttackKind::None, AttackKind::LabelFlip, AttackKind::Lie, AttackKind::Optimize})
    if (lower(attack_name(k)) == key) return k;
  return std::nullopt;
}

double effective_lr(const ExperimentConfig& cfg) {
  if (cfg.server.lr) return *cfg.server.lr;
  return cfg.task.kind == TaskKind::GaussianMean ? 0.01 : 0.05;
}

void validate(const ExperimentConfig& cfg) {
  const auto& t = cfg.task;
  check(t.dim >= 1, "task.dim must be >= 1");
  check(t.stddev > 0.0 && std::isfinite(t.stddev), "task.stddev must be positive");
  check(std::isfinite(t.mean_value), "task.mean_value must be finite");
  check(t.num_classes >= 2, "task.num_classes must be >= 2");
  check(t.l2_reg >= 0.0, "task.l2_reg must be >= 0");
  check(t.separation > 0.0, "task.separation must be positive");
  check(t.kind == TaskKind::GaussianMean || t.test_size >= 1, "task.test_size must be >= 1");
  check(t.source != DataSource::Mnist || t.kind == TaskKind::Softmax,
        "task.source mnist requires task.kind softmax");
  check(t.source != DataSource::Mnist || !t.mnist_dir.empty(),
        "task.mnist_dir is required for task.source mnist");

  const auto& p = cfg.population;
  check(p.N >= 1, "population.N must be >= 1");
  check(p.M >= 0 && p.M <= p.N, "population.M must lie in [0, N]");
  check(p.n >= 1 && p.n <= p.N, "population.n must lie in [1, N]");
  check(p.m_tilde_total() >= 0 && p.m_tilde_total() <= p.N, "population.M_tilde must lie in [0, N]");
  if (p.ratio_mode == RatioMode::Fixed) {
    const int m = expected_malicious(p.n, p.M, p.N);
    check(m <= p.M && p.n - m <= p.N - p.M,
          "population: fixed ratio needs ceil(n*M/N) <= M and n - m <= N - M");
  }
  check(t.dataset_size == 0 || t.dataset_size >= static_cast<std::size_t>(p.N),
        "task.dataset_size must be >= population.N");

  check(cfg.quantities.target_mean >= 1.0, "quantities.target_mean must be >= 1");
  check(cfg.quantities.log_sigma >= 0.0, "quantities.log_sigma must be >= 0");
  check(cfg.partition.single_class_fraction >= 0.0 && cfg.partition.single_class_fraction <= 1.0,
        "partition.single_class_fraction must lie in [0, 1]");
  check(cfg.partition.mode == PartitionMode::Iid || t.kind == TaskKind::Softmax,
        "partition.mode non_iid requires a labeled (softmax) task");

  const auto& r = cfg.rule;
  check(r.gamma > 0.0 && r.gamma <= 0.5, "rule.gamma must lie in (0, 0.5]");
  check(r.norm_threshold > 0.0, "rule.threshold must be positive");
  check(r.rfa.smoothing > 0.0, "rule.smoothing must be positive");
  check(r.rfa.max_iters >= 0, "rule.max_iters must be >= 0");
  check(r.rfa.tolerance >= 0.0, "rule.tolerance must be >= 0");
  check(r.top_fraction > 0.0 && r.top_fraction < 1.0, "rule.top_fraction must lie in (0, 1)");
  check(r.mass_fraction > 0.0 && r.mass_fraction < 1.0, "rule.mass_fraction must lie in (0, 1)");
  check(!r.m_tilde_override || *r.m_tilde_override >= 0, "rule.m_tilde_override must be >= 0");
  check(r.m_tilde.mode != MTildeSetting::Mode::Fixed || r.m_tilde.value >= 0,
        "rule.m_tilde must be >= 0");
  check(!r.mkrum_count || (*r.mkrum_count >= 1 && *r.mkrum_count <= p.n),
        "rule.count must lie in [1, n]");

  if (r.m_tilde.mode != MTildeSetting::Mode::TrueCount) {
    const int m = r.m_tilde.mode == MTildeSetting::Mode::Auto
                      ? expected_malicious(p.n, p.m_tilde_total(), p.N)
                      : r.m_tilde.value;
    switch (r.kind) {
      case RuleKind::Krum:
      case RuleKind::MKrum:
        check(p.n >= m + 3, "rule: Krum needs n >= m_tilde + 3");
        break;
      case RuleKind::Bulyan:
        check(p.n >= 4 * m + 3, "rule: Bulyan needs n >= 4 m_tilde + 3");
        break;
      case RuleKind::Trimean:
      case RuleKind::Truncate:
        check(2 * m < p.n, "rule: trimming needs 2 m_tilde < n");
        break;
      default:
        break;
    }
  }
  if (r.kind == RuleKind::FedRA)
    check(p.n >= expected_malicious(p.n, p.m_tilde_total(), p.N) + 3,
          "rule: FedRA needs n >= ceil(n*M_tilde/N) + 3");

  try {
    validate(cfg.attack);
  } catch (const Error& e) {
    throw ConfigError(std::string("attack: ") + e.what());
  }
  check(cfg.attack.kind != AttackKind::LabelFlip || t.kind == TaskKind::Softmax,
        "attack.kind LabelFlip requires a labeled (softmax) task");

  check(cfg.rounds >= 0, "rounds must be >= 0");
  check(cfg.eval_interval >= 1, "eval_interval must be >= 1");
  const auto& s = cfg.server;
  check(!s.lr || (*s.lr > 0.0 && std::isfinite(*s.lr)), "server.lr must be positive");
  check(s.beta1 >= 0.0 && s.beta1 < 1.0, "server.beta1 must lie in [0, 1)");
  check(s.beta2 >= 0.0 && s.beta2 < 1.0, "server.beta2 must lie in [0, 1)");
  check(s.eps > 0.0, "server.eps must be positive");
}

AggregationRule resolve_rule(const RuleConfig& rule, const PopulationConfig& pop, int n,
                             int true_m) {
  int m = 0;
  switch (rule.m_tilde.mode) {
    case MTildeSetting::Mode::Auto:
      m = expected_malicious(n, pop.m_tilde_total(), pop.N);
      break;
    case MTildeSetting::Mode::Fixed:
      m = rule.m_tilde.value;
      break;
    case MTildeSetting::Mode::TrueCount:
      m = true_m;
      break;
  }
  switch (rule.kind) {
    case RuleKind::FedAvgWeighted: return FedAvgWeighted{};
    case RuleKind::Krum: return Krum{m};
    case RuleKind::MKrum: return MKrum{m, rule.mkrum_count.value_or(std::max(1, n - m))};
    case RuleKind::Median: return Median{};
    case RuleKind::Trimean: return Trimean{m};
    case RuleKind::Bulyan: return Bulyan{m};
    case RuleKind::NormBound: return NormBound{rule.norm_threshold};
    case RuleKind::Rfa: return rule.rfa;
    case RuleKind::Truncate: return Truncate{rule.top_fraction, rule.mass_fraction, m};
    case RuleKind::FedRA:
      return FedRaParams{rule.gamma, pop.N, pop.m_tilde_total(), pop.ratio_mode,
                         rule.m_tilde_override};
  }
  return FedAvgWeighted{};
}

}  // namespace fedra
