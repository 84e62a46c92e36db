#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "fedra/engine.hpp"
#include "fedra/error.hpp"

using namespace fedra;

namespace {

ExperimentConfig small_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.task.kind = TaskKind::GaussianMean;
  cfg.task.dim = 10;
  cfg.population = {300, 30, 20, std::nullopt, RatioMode::Dynamic};
  cfg.rounds = 40;
  cfg.eval_interval = 10;
  cfg.seed = seed;
  return cfg;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (const char* old = std::getenv("FEDRA_SIM_THREADS")) saved = old;
    ::setenv("FEDRA_SIM_THREADS", value, 1);
  }
  ~EnvGuard() {
    if (saved.empty())
      ::unsetenv("FEDRA_SIM_THREADS");
    else
      ::setenv("FEDRA_SIM_THREADS", saved.c_str(), 1);
  }
  std::string saved;
};

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("sample_round: fixed ratio takes exactly ceil(n M / N) malicious") {
  PopulationConfig pop{50, 5, 10, std::nullopt, RatioMode::Fixed};
  std::vector<bool> bad(50, false);
  for (int i = 0; i < 5; ++i) bad[i * 7] = true;
  Rng rng = make_rng(1, {});
  for (int t = 0; t < 200; ++t) {
    const auto ids = sample_round(pop, bad, rng);
    REQUIRE(ids.size() == 10);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    CHECK(std::set<ClientId>(ids.begin(), ids.end()).size() == 10);
    int m = 0;
    for (auto id : ids) m += bad[id];
    CHECK(m == 1);
  }
}

TEST_CASE("sample_round: dynamic ratio averages n M / N") {
  PopulationConfig pop{50, 5, 10, std::nullopt, RatioMode::Dynamic};
  std::vector<bool> bad(50, false);
  for (int i = 0; i < 5; ++i) bad[i] = true;
  Rng rng = make_rng(2, {});
  const int trials = 10000;
  long total = 0;
  for (int t = 0; t < trials; ++t)
    for (auto id : sample_round(pop, bad, rng)) total += bad[id];
  CHECK(std::fabs(static_cast<double>(total) / trials - 1.0) < 0.05);

  pop.n = 50;
  const auto all = sample_round(pop, bad, rng);
  for (int i = 0; i < 50; ++i) CHECK(all[i] == static_cast<ClientId>(i));
  pop.n = 51;
  CHECK_THROWS_AS(sample_round(pop, bad, rng), Error);
}

TEST_CASE("fedadam_step: first step and zero gradient") {
  const AdamConfig cfg;
  auto s = fedadam_step(ServerState::initial(2), UpdateVector{1.0, -4.0}, cfg);
  CHECK(s.step_count == 1);
  CHECK(s.w[0] == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(s.w[1] == doctest::Approx(0.01 * 4.0 / (4.0 + 1e-8)).epsilon(1e-12));

  // Zero gradient keeps drifting along the first moment, never reverses.
  const auto before = s.w[0];
  s = fedadam_step(s, UpdateVector{0.0, 0.0}, cfg);
  CHECK(s.w[0] < before);

  // A steady gradient moves w monotonically.
  ServerState t = ServerState::initial(1);
  for (int i = 0; i < 20; ++i) {
    const double prev = t.w[0];
    t = fedadam_step(t, UpdateVector{0.5}, cfg);
    CHECK(t.w[0] < prev);
  }
  CHECK_THROWS_AS(fedadam_step(t, UpdateVector{0.5, 1.0}, cfg), Error);
}

TEST_CASE("zero rounds gives no records") {
  auto cfg = small_config(3);
  cfg.rounds = 0;
  const auto r = run_simulation(cfg);
  CHECK(r.records.empty());
  CHECK(r.final_state.step_count == 0);
}

TEST_CASE("determinism and seed sensitivity") {
  auto cfg = small_config(4);
  cfg.attack.kind = AttackKind::Lie;
  cfg.attack.alpha_q = 10.0;
  const auto a = run_simulation(cfg);
  const auto b = run_simulation(cfg);
  CHECK(a.records == b.records);
  CHECK(a.final_state.w == b.final_state.w);
  cfg.seed = 5;
  const auto c = run_simulation(cfg);
  CHECK_FALSE(a.records == c.records);
}

TEST_CASE("record bookkeeping") {
  for (auto mode : {RatioMode::Dynamic, RatioMode::Fixed}) {
    auto cfg = small_config(6);
    cfg.population.ratio_mode = mode;
    cfg.attack.kind = AttackKind::Lie;
    cfg.rounds = 25;
    const auto r = run_simulation(cfg);
    REQUIRE(r.records.size() == 25);
    for (std::size_t t = 0; t < r.records.size(); ++t) {
      const auto& rec = r.records[t];
      CHECK(rec.round == static_cast<int>(t));
      CHECK(rec.filtered_malicious + rec.filtered_benign == 20 - rec.selected_count);
      CHECK(rec.filtered_malicious <= rec.true_m);
      CHECK(rec.estimated_m.has_value());
      CHECK(rec.eval_accuracy.has_value() == ((t + 1) % 10 == 0 || t + 1 == 25));
      if (mode == RatioMode::Fixed) CHECK(rec.true_m == 2);
    }
  }
}

TEST_CASE("benign FedAvg converges on the Gaussian mean task") {
  auto cfg = small_config(7);
  cfg.population.M = 0;
  cfg.rule.kind = RuleKind::FedAvgWeighted;
  cfg.rounds = 200;
  const auto r = run_simulation(cfg);
  REQUIRE(r.records.back().eval_accuracy.has_value());
  CHECK(*r.records.back().eval_accuracy < 0.05 * std::sqrt(10.0));
  CHECK(r.records.back().train_loss < r.records.front().train_loss);
}

TEST_CASE("without an attack, malicious clients report honest work") {
  auto cfg = small_config(8);
  cfg.attack = {};
  Simulation sim(cfg);
  int checked = 0;
  UpdateVector w;
  sim.set_observer([&](const RoundTrace& trace) {
    for (std::size_t i = 0; i < trace.reports.size(); ++i) {
      const auto& rep = trace.reports[i];
      const auto& client = sim.world().clients[rep.client_id];
      const auto honest = local_update(sim.world().task, w, sim.world().train, client);
      CHECK(rep.update == honest.gradient);
      CHECK(rep.quantity == client.quantity());
      checked += (*trace.report_is_malicious)[i];
    }
  });
  for (int t = 0; t < 15; ++t) {
    w = sim.server().w;
    sim.step();
  }
  CHECK(checked > 0);
}

TEST_CASE("FedRA filters most enhanced LIE colluders") {
  auto cfg = small_config(9);
  cfg.attack.kind = AttackKind::Lie;
  cfg.attack.alpha_q = 10.0;
  cfg.rounds = 200;
  const auto r = run_simulation(cfg);
  long filtered = 0, present = 0;
  for (const auto& rec : r.records) {
    filtered += rec.filtered_malicious;
    present += rec.true_m;
  }
  REQUIRE(present > 0);
  const double ratio = static_cast<double>(filtered) / present;
  INFO("filtered/true malicious = " << ratio);
  CHECK(ratio >= 0.9);
}

TEST_CASE("thread count does not change results") {
  auto cfg = small_config(10);
  cfg.attack.kind = AttackKind::Optimize;
  std::vector<RoundRecord> one, four;
  {
    EnvGuard g("1");
    one = run_simulation(cfg).records;
  }
  {
    EnvGuard g("4");
    four = run_simulation(cfg).records;
  }
  CHECK(one == four);
}

TEST_CASE("softmax on synthetic blobs learns") {
  ExperimentConfig cfg;
  cfg.task.kind = TaskKind::Softmax;
  cfg.task.dim = 5;
  cfg.task.num_classes = 3;
  cfg.task.separation = 3.0;
  cfg.task.test_size = 300;
  cfg.population = {100, 0, 20, std::nullopt, RatioMode::Dynamic};
  cfg.rule.kind = RuleKind::FedAvgWeighted;
  cfg.rounds = 100;
  cfg.seed = 11;
  const auto r = run_simulation(cfg);
  REQUIRE(r.records.back().eval_accuracy.has_value());
  CHECK(*r.records.back().eval_accuracy > 0.8);
}

}  // TEST_SUITE
