// Acceptance gate: one PASS/FAIL/SKIP line per criterion, exit 1 on any FAIL.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fedra/aggregators.hpp"
#include "fedra/cli.hpp"
#include "fedra/config.hpp"
#include "fedra/engine.hpp"
#include "fedra/error.hpp"
#include "fedra/verify.hpp"

namespace fs = std::filesystem;
using namespace fedra;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Status::Pass : Status::Fail, std::move(detail)};
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1-4: oracle checks -------------------------------------------------

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(20240521, {stream::kVerify, 1});
  const auto r = verify::check_aggregator_oracles(200, rng);
  const double secs = elapsed(t0);
  return verdict(r.pass && secs < 10.0,
                 "mismatches=" + num(r.measured) + " " + r.detail + " t=" + num(secs, 3) + "s");
}

Outcome c2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = verify::check_hypergeom_exact();
  const double secs = elapsed(t0);
  return verdict(r.pass && secs < 5.0, "max_abs_diff=" + num(r.measured, 3) + " " + r.detail +
                                           " t=" + num(secs, 3) + "s");
}

Outcome c3() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> sigma(8, 1.0);
  const double target = std::sqrt(2.0 / M_PI) / std::sqrt(2.0 * std::log(2.0));
  bool ok = true;
  std::string detail;
  const std::pair<Quantity, Quantity> pairs[] = {{1, 1}, {1, 10}, {10, 10}, {3, 100}};
  std::uint64_t tag = 10;
  for (const auto& [qi, qj] : pairs) {
    Rng rng = make_rng(20240521, {stream::kVerify, tag++});
    const auto r = verify::lemma1_check(qi, qj, sigma, 100000, rng);
    ok = ok && r.empirical_mean <= r.bound && std::fabs(r.ratio - target) <= 0.02;
    detail += "ratio(" + std::to_string(qi) + "," + std::to_string(qj) + ")=" + num(r.ratio) + " ";
  }
  for (int n : {2, 10, 50}) {
    Rng rng = make_rng(20240521, {stream::kVerify, tag++});
    const auto r = verify::lemma3_max_check(n, 1, sigma, 10000, rng);
    ok = ok && r.empirical_max_mean <= r.bound;
    detail += "max/bound(n=" + std::to_string(n) + ")=" + num(r.empirical_max_mean / r.bound) + " ";
  }
  const double secs = elapsed(t0);
  return verdict(ok && secs < 30.0, detail + "t=" + num(secs, 3) + "s");
}

Outcome c4() {
  Rng rng = make_rng(20240521, {stream::kVerify, 100});
  const auto rec = verify::mcne_recovery(500, 50, 50, 6.0, 1000, rng);
  Rng rng2 = make_rng(20240521, {stream::kVerify, 102});
  const auto aff = verify::check_mcne_affine_invariance(100, rng2);
  return verdict(rec.recovery_rate >= 0.95 && aff.pass,
                 "recovery=" + num(rec.recovery_rate) + " affine_mismatches=" + num(aff.measured));
}

// ---- 5-7: simulated trends ----------------------------------------------

ExperimentConfig trend_config(std::uint64_t seed, double alpha_q, RuleKind rule) {
  ExperimentConfig cfg;
  cfg.task.kind = TaskKind::GaussianMean;
  cfg.task.dim = 10;
  cfg.population.N = 300;
  cfg.population.M = 30;
  cfg.population.n = 20;
  cfg.population.ratio_mode = RatioMode::Dynamic;
  cfg.attack.kind = AttackKind::Lie;
  cfg.attack.alpha_q = alpha_q;
  cfg.rule.kind = rule;
  cfg.rounds = 200;
  cfg.seed = seed;
  validate(cfg);
  return cfg;
}

double final_error(const ExperimentConfig& cfg) {
  return *run_simulation(cfg).records.back().eval_accuracy;
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

double mean_final_error(double alpha_q, RuleKind rule, std::string& per_seed) {
  double acc = 0.0;
  for (auto s : kSeeds) {
    const double e = final_error(trend_config(s, alpha_q, rule));
    per_seed += num(e, 3) + " ";
    acc += e;
  }
  return acc / std::size(kSeeds);
}

Outcome c5() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string s0, s10, a0, a10;
  const double fed0 = mean_final_error(0.0, RuleKind::FedRA, s0);
  const double fed10 = mean_final_error(10.0, RuleKind::FedRA, s10);
  const double avg0 = mean_final_error(0.0, RuleKind::FedAvgWeighted, a0);
  const double avg10 = mean_final_error(10.0, RuleKind::FedAvgWeighted, a10);
  const double secs = elapsed(t0);
  const bool fedra_ok = std::fabs(fed10 - fed0) <= 0.2 * fed0;
  const bool avg_ok = avg10 >= 3.0 * avg0;
  return verdict(fedra_ok && avg_ok && secs < 120.0,
                 "FedRA err a0=" + num(fed0) + " a10=" + num(fed10) + " (x" + num(fed10 / fed0) +
                     ") FedAvgWeighted err a0=" + num(avg0) + " a10=" + num(avg10) + " (x" +
                     num(avg10 / avg0) + ") t=" + num(secs, 3) + "s");
}

std::vector<ClientReport> with_extremes(std::span<const ClientReport> reports,
                                        const std::vector<bool>& bad,
                                        const std::vector<ClientId>& selected, double value) {
  std::vector<ClientReport> out(reports.begin(), reports.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!bad[i]) continue;
    if (std::find(selected.begin(), selected.end(), out[i].client_id) != selected.end()) continue;
    out[i].update = UpdateVector::filled(out[i].update.size(), value);
    out[i].quantity = 1000000000;
  }
  return out;
}

Outcome c6() {
  Simulation sim(trend_config(1, 10.0, RuleKind::FedRA));
  int checks = 0;
  int same_selection = 0;
  int invariance_failures = 0;
  sim.set_observer([&](const RoundTrace& t) {
    const auto& params = std::get<FedRaParams>(*t.rule);
    for (double extreme : {1e6, -1e6}) {
      const auto moved = with_extremes(t.reports, *t.report_is_malicious, t.result->info.selected,
                                       extreme);
      const auto again = fedra_aggregate(moved, params);
      ++checks;
      // Only meaningful while the replaced clients stay excluded.
      if (again.info.selected != t.result->info.selected) continue;
      ++same_selection;
      if (!(again.update == t.result->update)) ++invariance_failures;
    }
  });
  double filtered = 0.0;
  double truth = 0.0;
  for (int r = 0; r < 200; ++r) {
    const auto rec = sim.step();
    if (rec.round < 50) continue;
    filtered += rec.filtered_malicious;
    truth += rec.true_m;
  }
  const double ratio = truth > 0 ? filtered / truth : 1.0;
  return verdict(ratio >= 0.9 && invariance_failures == 0,
                 "filtered/true=" + num(ratio) + " invariance_failures=" +
                     std::to_string(invariance_failures) + " (selection kept in " +
                     std::to_string(same_selection) + "/" + std::to_string(checks) + " reruns)");
}

Outcome c7() {
  int wins = 0;
  std::string detail;
  for (auto s : kSeeds) {
    auto cfg = trend_config(s, 10.0, RuleKind::FedRA);
    const double mcne = final_error(cfg);
    cfg.rule.m_tilde_override = 5;
    const double under = final_error(cfg);
    cfg.rule.m_tilde_override = 15;
    const double over = final_error(cfg);
    if (mcne <= under && mcne <= over) ++wins;
    detail += "[" + num(mcne, 3) + " " + num(under, 3) + " " + num(over, 3) + "] ";
  }
  return verdict(wins >= 4, "wins=" + std::to_string(wins) + "/5 [mcne under over] " + detail);
}

// ---- 8: MNIST ----------------------------------------------------------

std::string mnist_dir() {
  if (const char* env = std::getenv("FEDRA_MNIST_DIR")) return env;
  return FEDRA_SOURCE_DIR "/data/mnist";
}

Outcome c8() {
  const std::string dir = mnist_dir();
  for (const char* f : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                        "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"})
    if (!fs::exists(fs::path(dir) / f)) return {Status::Skip, "MNIST IDX files not found in " + dir};
  const auto t0 = std::chrono::steady_clock::now();
  auto run = [&](RuleKind rule, double alpha_q) {
    ExperimentConfig cfg;
    cfg.task.kind = TaskKind::Softmax;
    cfg.task.source = DataSource::Mnist;
    cfg.task.mnist_dir = dir;
    cfg.task.dataset_size = 3000;
    cfg.population.N = 300;
    cfg.population.M = 30;
    cfg.population.n = 20;
    cfg.attack.kind = AttackKind::Lie;
    cfg.attack.alpha_q = alpha_q;
    cfg.rule.kind = rule;
    cfg.rounds = 300;
    cfg.eval_interval = 300;
    cfg.seed = 1;
    return *run_simulation(cfg).records.back().eval_accuracy;
  };
  const double fed10 = run(RuleKind::FedRA, 10.0);
  const double fed0 = run(RuleKind::FedRA, 0.0);
  const double avg10 = run(RuleKind::FedAvgWeighted, 10.0);
  const double secs = elapsed(t0);
  return verdict(fed10 - avg10 >= 0.10 && std::fabs(fed10 - fed0) <= 0.03 && secs < 600.0,
                 "FedRA a10=" + num(fed10) + " a0=" + num(fed0) + " FedAvgWeighted a10=" +
                     num(avg10) + " t=" + num(secs, 3) + "s");
}

// ---- 9: determinism ------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome c9() {
  const fs::path root = fs::temp_directory_path() / ("fedra_accept_" + std::to_string(::getpid()));
  fs::create_directories(root);
  std::ofstream(root / "cfg.json")
      << R"({"rounds": 30, "eval_interval": 5, "attack": {"kind": "LIE", "alpha_q": 5},
            "population": {"N": 300, "n": 20}})";
  const int a = cli::cmd_simulate(root / "cfg.json", 7, root / "a");
  const int b = cli::cmd_simulate(root / "cfg.json", 7, root / "b");
  const bool csv_same = slurp(root / "a/metrics.csv") == slurp(root / "b/metrics.csv");
  auto sa = nlohmann::json::parse(slurp(root / "a/summary.json"));
  auto sb = nlohmann::json::parse(slurp(root / "b/summary.json"));
  for (auto* s : {&sa, &sb}) {
    s->erase("wall_clock_seconds");
    (*s)["config"].erase("output_dir");
  }
  const bool summary_same = sa == sb;
  fs::remove_all(root);
  return verdict(a == 0 && b == 0 && csv_same && summary_same,
                 std::string("exit=") + std::to_string(a) + "/" + std::to_string(b) +
                     " metrics.csv " + (csv_same ? "identical" : "DIFFERENT") + ", summary.json " +
                     (summary_same ? "identical" : "DIFFERENT") + " modulo wall clock");
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "aggregator oracle equivalence", c1},
      {2, "hypergeometric prior exactness", c2},
      {3, "Lemma 1 / Lemma 3 Monte-Carlo bounds", c3},
      {4, "MCNE recovery and affine invariance", c4},
      {5, "quantity-robustness trend", c5},
      {6, "filtering fidelity and exclusion invariance", c6},
      {7, "estimator ablation", c7},
      {8, "MNIST desk scale", c8},
      {9, "simulate determinism", c9},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Skip ? "SKIP" : "FAIL";
    if (o.status == Status::Fail) ++failed;
    std::printf("[%s] criterion %d: %s -- %s\n", tag, c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
