#include "fedra/engine.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>

#include "fedra/error.hpp"
#include "fedra/parallel.hpp"

namespace fedra {

ServerState ServerState::initial(std::size_t dim) {
  return {UpdateVector::zeros(dim), UpdateVector::zeros(dim), UpdateVector::zeros(dim), 0};
}

ServerState fedadam_step(const ServerState& state, const UpdateVector& g, const AdamConfig& cfg) {
  require_same_dim(state.w, g);
  require_same_dim(state.w, state.adam_m);
  require_same_dim(state.w, state.adam_v);
  if (!(cfg.lr > 0.0) || !(cfg.eps > 0.0)) throw Error("Adam lr and eps must be positive");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw Error("Adam betas must lie in [0, 1)");

  const std::size_t d = g.size();
  const std::int64_t t = state.step_count + 1;
  const double c1 = cfg.bias_correction ? 1.0 - std::pow(cfg.beta1, static_cast<double>(t)) : 1.0;
  const double c2 = cfg.bias_correction ? 1.0 - std::pow(cfg.beta2, static_cast<double>(t)) : 1.0;
  std::vector<double> w(d), m(d), v(d);
  for (std::size_t k = 0; k < d; ++k) {
    m[k] = cfg.beta1 * state.adam_m[k] + (1.0 - cfg.beta1) * g[k];
    v[k] = cfg.beta2 * state.adam_v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
    const double m_hat = m[k] / c1;
    const double v_hat = v[k] / c2;
    w[k] = state.w[k] - cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
  return {UpdateVector(std::move(w)), UpdateVector(std::move(m)), UpdateVector(std::move(v)), t};
}

std::vector<ClientId> sample_round(const PopulationConfig& pop, const std::vector<bool>& malicious,
                                   Rng& rng) {
  if (pop.n < 1 || pop.n > pop.N) throw Error("round size n must lie in [1, N]");
  if (static_cast<int>(malicious.size()) != pop.N) throw Error("malicious flags must cover N clients");
  std::vector<ClientId> out;
  out.reserve(static_cast<std::size_t>(pop.n));
  if (pop.ratio_mode == RatioMode::Dynamic) {
    std::vector<ClientId> all(static_cast<std::size_t>(pop.N));
    std::iota(all.begin(), all.end(), ClientId{0});
    std::sample(all.begin(), all.end(), std::back_inserter(out), pop.n, rng);
  } else {
    std::vector<ClientId> bad, good;
    for (int i = 0; i < pop.N; ++i) (malicious[i] ? bad : good).push_back(static_cast<ClientId>(i));
    const int m = expected_malicious(pop.n, static_cast<int>(bad.size()), pop.N);
    if (m > static_cast<int>(bad.size()) || pop.n - m > static_cast<int>(good.size()))
      throw Error("fixed-ratio sampling impossible for this population");
    std::sample(bad.begin(), bad.end(), std::back_inserter(out), m, rng);
    std::sample(good.begin(), good.end(), std::back_inserter(out), pop.n - m, rng);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::filesystem::path mnist_file(const std::string& dir, const char* name) {
  return std::filesystem::path(dir) / name;
}

}  // namespace

World build_world(const ExperimentConfig& cfg) {
  validate(cfg);
  Rng rng = make_rng(cfg.seed, {stream::kSetup});
  const auto& pop = cfg.population;
  World world;

  std::size_t train_size = cfg.task.dataset_size;
  if (train_size == 0)
    train_size = std::max<std::size_t>(
        static_cast<std::size_t>(pop.N),
        static_cast<std::size_t>(std::llround(pop.N * cfg.quantities.target_mean)));

  if (cfg.task.kind == TaskKind::GaussianMean) {
    GaussianMeanTask task{std::vector<double>(cfg.task.dim, cfg.task.mean_value),
                          std::vector<double>(cfg.task.dim, cfg.task.stddev)};
    world.train = make_gaussian_dataset(task, train_size, rng);
    world.task = std::move(task);
  } else if (cfg.task.source == DataSource::Synthetic) {
    auto split = make_blobs(cfg.task.dim, cfg.task.num_classes, train_size, cfg.task.test_size,
                            cfg.task.separation, rng);
    world.train = std::move(split.train);
    world.test = std::move(split.test);
    world.task = SoftmaxTask{cfg.task.dim, cfg.task.num_classes, cfg.task.l2_reg};
  } else {
    const std::size_t limit = cfg.task.dataset_size;
    world.train = load_idx(mnist_file(cfg.task.mnist_dir, "train-images-idx3-ubyte"),
                           mnist_file(cfg.task.mnist_dir, "train-labels-idx1-ubyte"), limit);
    world.test = load_idx(mnist_file(cfg.task.mnist_dir, "t10k-images-idx3-ubyte"),
                          mnist_file(cfg.task.mnist_dir, "t10k-labels-idx1-ubyte"),
                          cfg.task.test_size);
    world.task = SoftmaxTask{world.train.dim, 10, cfg.task.l2_reg};
  }

  const auto quantities = sample_quantities(static_cast<std::size_t>(pop.N),
                                            cfg.quantities.target_mean, cfg.quantities.log_sigma,
                                            rng);
  world.clients = partition(world.train, quantities, cfg.partition, rng);

  world.malicious.assign(static_cast<std::size_t>(pop.N), false);
  std::vector<ClientId> ids(static_cast<std::size_t>(pop.N));
  std::iota(ids.begin(), ids.end(), ClientId{0});
  std::vector<ClientId> bad;
  std::sample(ids.begin(), ids.end(), std::back_inserter(bad), pop.M, rng);
  for (ClientId id : bad) {
    world.malicious[id] = true;
    world.clients[id].is_malicious = true;
  }
  return world;
}

double evaluate(const World& world, const UpdateVector& w) {
  if (const auto* g = std::get_if<GaussianMeanTask>(&world.task)) return parameter_error(*g, w);
  return accuracy(std::get<SoftmaxTask>(world.task), w, world.test);
}

Simulation::Simulation(ExperimentConfig cfg) : Simulation(cfg, build_world(cfg)) {}

Simulation::Simulation(ExperimentConfig cfg, World world)
    : cfg_(std::move(cfg)), world_(std::move(world)) {
  validate(cfg_);
  server_ = ServerState::initial(parameter_dim(world_.task));
  adam_ = {effective_lr(cfg_), cfg_.server.beta1, cfg_.server.beta2, cfg_.server.eps,
           cfg_.server.bias_correction};
}

RoundRecord Simulation::step() {
  const int round = round_;
  const auto& pop = cfg_.population;
  const auto& attack = cfg_.attack;

  Rng sampler = make_rng(cfg_.seed, {stream::kSampling, static_cast<std::uint64_t>(round)});
  const auto ids = sample_round(pop, world_.malicious, sampler);
  const std::size_t n = ids.size();

  std::vector<bool> is_bad(n);
  for (std::size_t i = 0; i < n; ++i) is_bad[i] = world_.malicious[ids[i]];

  // Honest local work first; label-flip colluders train on flipped labels.
  std::vector<LocalResult> local(n);
  parallel_for(n, [&](std::size_t i) {
    const bool flip = is_bad[i] && attack.kind == AttackKind::LabelFlip;
    local[i] = local_update(world_.task, server_.w, world_.train, world_.clients[ids[i]], flip);
  });

  std::vector<UpdateVector> colluder_updates;
  std::vector<Quantity> colluder_quantities;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_bad[i]) continue;
    colluder_updates.push_back(local[i].gradient);
    colluder_quantities.push_back(local[i].quantity);
  }
  const int true_m = static_cast<int>(colluder_updates.size());

  std::vector<ClientReport> reports(n);
  for (std::size_t i = 0; i < n; ++i)
    reports[i] = {ids[i], local[i].gradient, local[i].quantity};

  if (true_m > 0) {
    std::optional<UpdateVector> shared;
    if (attack.kind == AttackKind::Lie) {
      const double z = attack.z.value_or(lie_default_z(static_cast<int>(n), true_m));
      shared = lie_update(colluder_updates, z);
    } else if (attack.kind == AttackKind::Optimize) {
      shared = optimize_update(colluder_updates, attack.lambda);
    }
    const bool enhance = attack.kind != AttackKind::None || attack.alpha_q > 0.0;
    const Quantity q = enhance ? enhanced_quantity(colluder_quantities, attack.alpha_q) : 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_bad[i]) continue;
      if (shared) reports[i].update = *shared;
      if (enhance) reports[i].quantity = q;
    }
  }

  const AggregationRule rule = resolve_rule(cfg_.rule, pop, static_cast<int>(n), true_m);
  AggregateResult result;
  try {
    result = aggregate(rule, reports);
  } catch (const Error& e) {
    throw Error("round " + std::to_string(round) + " (" + rule_name(rule) + "): " + e.what());
  }

  if (observer_) {
    observer_(RoundTrace{round, reports, &is_bad, &rule, &result});
  }

  server_ = fedadam_step(server_, result.update, adam_);
  ++round_;

  RoundRecord rec;
  rec.round = round;
  rec.true_m = true_m;
  rec.estimated_m = result.info.m_tilde;
  rec.selected_count = static_cast<int>(result.info.selected.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sel = result.info.selected;
    if (std::find(sel.begin(), sel.end(), ids[i]) != sel.end()) continue;
    (is_bad[i] ? rec.filtered_malicious : rec.filtered_benign) += 1;
  }

  long double loss = 0.0L;
  long double weight = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_bad[i] && true_m < static_cast<int>(n)) continue;
    loss += static_cast<long double>(local[i].quantity) * local[i].loss;
    weight += static_cast<long double>(local[i].quantity);
  }
  rec.train_loss = static_cast<double>(loss / weight);

  if (round_ % cfg_.eval_interval == 0 || round_ == cfg_.rounds)
    rec.eval_accuracy = evaluate(world_, server_.w);
  rec.warnings = result.info.warnings;
  return rec;
}

SimulationResult run_simulation(const ExperimentConfig& cfg, RoundObserver observer) {
  Simulation sim(cfg);
  sim.set_observer(std::move(observer));
  SimulationResult out;
  out.records.reserve(static_cast<std::size_t>(cfg.rounds));
  for (int t = 0; t < cfg.rounds; ++t) out.records.push_back(sim.step());
  out.final_state = sim.server();
  return out;
}

}  // namespace fedra
