#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedra/experiment.hpp"

namespace fedra {

struct ServerState {
  UpdateVector w;
  UpdateVector adam_m;
  UpdateVector adam_v;
  std::int64_t step_count = 0;

  static ServerState initial(std::size_t dim);
};

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool bias_correction = true;
};

// Server-side Adam on the aggregated gradient g.
ServerState fedadam_step(const ServerState& state, const UpdateVector& g, const AdamConfig& cfg);

// Client ids for one round, ascending. Dynamic ratio: n ids uniformly without
// replacement. Fixed ratio: exactly ceil(n M / N) malicious ids plus benign
// ids, each uniform within its group.
std::vector<ClientId> sample_round(const PopulationConfig& pop, const std::vector<bool>& malicious,
                                   Rng& rng);

struct RoundRecord {
  int round = 0;
  int true_m = 0;
  std::optional<int> estimated_m;
  int selected_count = 0;
  int filtered_malicious = 0;
  int filtered_benign = 0;
  double train_loss = 0.0;
  // Task metric: test accuracy (softmax) or ||w - mu*||_2 (GaussianMean).
  std::optional<double> eval_accuracy;
  std::vector<std::string> warnings;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

// Everything fixed at setup: data, partition, malicious ids.
struct World {
  Task task;
  Dataset train;
  Dataset test;
  std::vector<ClientDataset> clients;
  std::vector<bool> malicious;
};

World build_world(const ExperimentConfig& cfg);

double evaluate(const World& world, const UpdateVector& w);

// Per-round view handed to observers after aggregation.
struct RoundTrace {
  int round = 0;
  std::span<const ClientReport> reports;
  const std::vector<bool>* report_is_malicious = nullptr;  // parallel to reports
  const AggregationRule* rule = nullptr;
  const AggregateResult* result = nullptr;
};

using RoundObserver = std::function<void(const RoundTrace&)>;

class Simulation {
 public:
  explicit Simulation(ExperimentConfig cfg);
  Simulation(ExperimentConfig cfg, World world);

  const ExperimentConfig& config() const { return cfg_; }
  const World& world() const { return world_; }
  const ServerState& server() const { return server_; }
  int rounds_done() const { return round_; }

  void set_observer(RoundObserver observer) { observer_ = std::move(observer); }

  // Runs the next round and returns its record.
  RoundRecord step();

 private:
  ExperimentConfig cfg_;
  World world_;
  ServerState server_;
  AdamConfig adam_;
  int round_ = 0;
  RoundObserver observer_;
};

struct SimulationResult {
  std::vector<RoundRecord> records;
  ServerState final_state;
};

SimulationResult run_simulation(const ExperimentConfig& cfg, RoundObserver observer = {});

}  // namespace fedra
