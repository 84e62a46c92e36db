#include "fedra/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "fedra/aggregators.hpp"
#include "fedra/cohort.hpp"
#include "fedra/error.hpp"
#include "fedra/mcne.hpp"

namespace fedra::verify {
namespace {

using Pair = std::pair<double, ClientId>;

double naive_sq_dist(const ClientReport& a, const ClientReport& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.update.size(); ++k) {
    const double diff = a.update[k] - b.update[k];
    s += diff * diff;
  }
  return s;
}

std::vector<Pair> naive_krum_scores(const std::vector<const ClientReport*>& members,
                                    std::size_t neighbors) {
  std::vector<Pair> scores;
  for (const ClientReport* i : members) {
    std::vector<Pair> d;
    for (const ClientReport* j : members)
      if (j != i) d.emplace_back(naive_sq_dist(*i, *j), j->client_id);
    std::sort(d.begin(), d.end());
    double s = 0.0;
    for (std::size_t r = 0; r < neighbors && r < d.size(); ++r) s += d[r].first;
    scores.emplace_back(s, i->client_id);
  }
  return scores;
}

std::vector<const ClientReport*> pointers(std::span<const ClientReport> reports) {
  std::vector<const ClientReport*> out;
  for (const auto& r : reports) out.push_back(&r);
  return out;
}

std::vector<double> naive_trim(const std::vector<const ClientReport*>& members, int k) {
  const std::size_t d = members.front()->update.size();
  std::vector<double> out(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> col;
    for (const ClientReport* r : members) col.push_back(r->update[c]);
    std::sort(col.begin(), col.end());
    double s = 0.0;
    int cnt = 0;
    for (std::size_t i = static_cast<std::size_t>(k); i + static_cast<std::size_t>(k) < col.size(); ++i) {
      s += col[i];
      ++cnt;
    }
    out[c] = s / cnt;
  }
  return out;
}

unsigned __int128 exact_choose(int a, int b) {
  unsigned __int128 r = 1;
  for (int i = 1; i <= b; ++i) r = r * static_cast<unsigned>(a - b + i) / static_cast<unsigned>(i);
  return r;
}

double l1_of(const UpdateVector& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double sum_of(std::span<const double> sigma) {
  double s = 0.0;
  for (double x : sigma) s += x;
  return s;
}

GaussianMeanTask centered_task(std::span<const double> sigma) {
  return GaussianMeanTask{std::vector<double>(sigma.size(), 0.0),
                          std::vector<double>(sigma.begin(), sigma.end())};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

ClientId brute_force_krum(std::span<const ClientReport> reports, int m_tilde) {
  return brute_force_mkrum(reports, m_tilde, 1).front();
}

std::vector<ClientId> brute_force_mkrum(std::span<const ClientReport> reports, int m_tilde,
                                        int count) {
  const int n = static_cast<int>(reports.size());
  auto scores = naive_krum_scores(pointers(reports), static_cast<std::size_t>(n - m_tilde - 2));
  std::sort(scores.begin(), scores.end());
  std::vector<ClientId> out;
  for (int i = 0; i < count; ++i) out.push_back(scores[i].second);
  return out;
}

std::vector<double> brute_force_median(std::span<const ClientReport> reports) {
  const std::size_t d = reports.front().update.size();
  std::vector<double> out(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> col;
    for (const auto& r : reports) col.push_back(r.update[c]);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    out[c] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return out;
}

std::vector<double> brute_force_trimmed_mean(std::span<const ClientReport> reports, int k) {
  return naive_trim(pointers(reports), k);
}

std::vector<double> brute_force_bulyan(std::span<const ClientReport> reports, int m_tilde) {
  auto remaining = pointers(reports);
  std::vector<const ClientReport*> picked;
  const int theta = static_cast<int>(reports.size()) - 2 * m_tilde;
  while (static_cast<int>(picked.size()) < theta) {
    const int r = static_cast<int>(remaining.size());
    const int neighbors = r >= 2 ? std::max(1, r - m_tilde - 2) : 0;
    auto scores = naive_krum_scores(remaining, static_cast<std::size_t>(neighbors));
    const Pair best = *std::min_element(scores.begin(), scores.end());
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      if ((*it)->client_id == best.second) {
        picked.push_back(*it);
        remaining.erase(it);
        break;
      }
    }
  }
  return naive_trim(picked, m_tilde);
}

double exact_hypergeom_log(int N, int M_tilde, int n, int m_tilde) {
  if (N > 60) throw Error("exact hypergeometric oracle supports N <= 60");
  if (m_tilde < 0 || m_tilde > M_tilde || m_tilde > n || n - m_tilde > N - M_tilde)
    return -std::numeric_limits<double>::infinity();
  const unsigned __int128 v = exact_choose(M_tilde, m_tilde) * exact_choose(N - M_tilde, n - m_tilde);
  return static_cast<double>(std::log(static_cast<long double>(v)));
}

double lemma1_bound(Quantity q_i, Quantity q_j, std::span<const double> sigma) {
  const double qi = static_cast<double>(q_i);
  const double qj = static_cast<double>(q_j);
  return std::sqrt(2.0 * std::log(2.0)) * std::sqrt((qi + qj) / (qi * qj)) * sum_of(sigma);
}

Lemma1Result lemma1_check(Quantity q_i, Quantity q_j, std::span<const double> sigma,
                          std::int64_t trials, Rng& rng) {
  const auto task = centered_task(sigma);
  const auto w = UpdateVector::zeros(sigma.size());
  long double acc = 0.0L;
  for (std::int64_t t = 0; t < trials; ++t) {
    const auto gi = gaussian_client_update(task, w, q_i, rng);
    const auto gj = gaussian_client_update(task, w, q_j, rng);
    double s = 0.0;
    for (std::size_t k = 0; k < sigma.size(); ++k) s += std::fabs(gi[k] - gj[k]);
    acc += s;
  }
  Lemma1Result out;
  out.empirical_mean = static_cast<double>(acc / static_cast<long double>(trials));
  out.bound = lemma1_bound(q_i, q_j, sigma);
  out.ratio = out.empirical_mean / out.bound;
  return out;
}

double lemma3_bound(int n, Quantity q, std::span<const double> sigma) {
  return std::sqrt(2.0 * std::log(2.0 * n)) * sum_of(sigma) / std::sqrt(static_cast<double>(q));
}

Lemma3Result lemma3_max_check(int n, Quantity q, std::span<const double> sigma,
                              std::int64_t trials, Rng& rng) {
  const auto task = centered_task(sigma);
  const auto w = UpdateVector::zeros(sigma.size());
  long double acc = 0.0L;
  for (std::int64_t t = 0; t < trials; ++t) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, l1_of(gaussian_client_update(task, w, q, rng)));
    acc += worst;
  }
  return {static_cast<double>(acc / static_cast<long double>(trials)), lemma3_bound(n, q, sigma)};
}

RecoveryResult mcne_recovery(int N, int M_tilde, int n, double separation, int trials, Rng& rng) {
  if (!(separation >= 0.0)) throw Error("separation must be >= 0");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  RecoveryResult out;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    int bad_left = M_tilde;
    int total_left = N;
    int m = 0;
    for (int i = 0; i < n; ++i) {
      if (unif(rng) * total_left < bad_left) {
        ++m;
        --bad_left;
      }
      --total_left;
    }
    std::vector<double> scores;
    for (int i = 0; i < n - m; ++i) scores.push_back(normal(rng));
    for (int i = 0; i < m; ++i) scores.push_back(separation + normal(rng));
    std::sort(scores.begin(), scores.end());
    const int est = estimate_malicious_count(scores, N, M_tilde);
    out.true_counts.push_back(m);
    out.estimates.push_back(est);
    if (est == m) ++hits;
  }
  out.recovery_rate = trials > 0 ? static_cast<double>(hits) / trials : 0.0;
  return out;
}

CheckResult check_aggregator_oracles(int instances, Rng& rng) {
  std::uniform_int_distribution<int> n_dist(3, 8);
  std::uniform_int_distribution<int> d_dist(1, 4);
  std::uniform_int_distribution<int> grid(-3, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  int mismatches = 0;
  double worst = 0.0;
  std::string first_failure;

  auto record = [&](bool ok, const std::string& what, int inst) {
    if (ok) return;
    ++mismatches;
    if (first_failure.empty()) first_failure = what + " @instance " + std::to_string(inst);
  };
  auto vec_diff = [&](const UpdateVector& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
    worst = std::max(worst, m);
    return m <= 1e-12;
  };

  for (int inst = 0; inst < instances; ++inst) {
    const int n = n_dist(rng);
    const int d = d_dist(rng);
    const bool on_grid = inst % 3 == 0;
    std::vector<ClientReport> reports;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(d);
      for (double& x : v) x = on_grid ? grid(rng) : normal(rng);
      reports.push_back({static_cast<ClientId>(i * 7 % 11 + 100 * (i % 2)), UpdateVector(v), 1});
    }
    std::uniform_int_distribution<int> m_dist(0, n - 3);
    const int m = m_dist(rng);
    std::uniform_int_distribution<int> c_dist(1, n);
    const int count = c_dist(rng);

    record(krum_select(reports, m, 1).front() == brute_force_krum(reports, m), "krum", inst);
    record(krum_select(reports, m, count) == brute_force_mkrum(reports, m, count), "mkrum", inst);
    record(vec_diff(coordinate_median(updates_of(reports)), brute_force_median(reports)), "median",
           inst);
    const int k = std::uniform_int_distribution<int>(0, (n - 1) / 2)(rng);
    record(vec_diff(coordinate_trimmed_mean(updates_of(reports), static_cast<std::size_t>(k)),
                    brute_force_trimmed_mean(reports, k)),
           "trimean", inst);
    const int bm = std::uniform_int_distribution<int>(0, (n - 3) / 4)(rng);
    record(vec_diff(bulyan(reports, bm).update, brute_force_bulyan(reports, bm)), "bulyan", inst);
  }
  return {"aggregator_oracles", static_cast<double>(mismatches), 0.0, mismatches == 0,
          "instances=" + std::to_string(instances) + " max_vec_diff=" + fmt(worst) +
              (first_failure.empty() ? "" : " first_failure=" + first_failure)};
}

CheckResult check_hypergeom_exact(double fault_offset) {
  double worst = 0.0;
  long long compared = 0;
  int support_mismatch = 0;
  for (int N = 1; N <= 60; ++N) {
    for (int M = 0; M <= N; ++M) {
      for (int n = 0; n <= N; ++n) {
        for (int m = 0; m <= std::min(n, M); ++m) {
          const double exact = exact_hypergeom_log(N, M, n, m);
          const double fast = hypergeom_log_weight(N, M, n, m) + fault_offset;
          const bool e_inf = std::isinf(exact);
          const bool f_inf = std::isinf(fast);
          if (e_inf || f_inf) {
            if (e_inf != f_inf) ++support_mismatch;
            continue;
          }
          worst = std::max(worst, std::fabs(exact - fast));
          ++compared;
        }
      }
    }
  }
  return {"hypergeom_exact", worst, 1e-9, worst <= 1e-9 && support_mismatch == 0,
          "compared=" + std::to_string(compared) +
              " support_mismatches=" + std::to_string(support_mismatch)};
}

CheckResult check_mcne_affine_invariance(int sets, Rng& rng) {
  std::uniform_int_distribution<int> n_dist(5, 50);
  std::uniform_real_distribution<double> a_dist(0.1, 10.0);
  std::uniform_real_distribution<double> b_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> sep_dist(0.0, 8.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  int mismatches = 0;
  for (int s = 0; s < sets; ++s) {
    const int n = n_dist(rng);
    const int m = std::uniform_int_distribution<int>(0, std::min(n - 2, 10))(rng);
    const double sep = sep_dist(rng);
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) scores.push_back(normal(rng) + (i < m ? sep : 0.0));
    std::sort(scores.begin(), scores.end());
    const double a = a_dist(rng);
    const double b = b_dist(rng);
    std::vector<double> moved;
    for (double x : scores) moved.push_back(a * x + b);
    if (estimate_malicious_count(scores, 500, 50) != estimate_malicious_count(moved, 500, 50))
      ++mismatches;
  }
  return {"mcne_affine_invariance", static_cast<double>(mismatches), 0.0, mismatches == 0,
          "sets=" + std::to_string(sets)};
}

std::vector<CheckResult> run_suite(const SuiteOptions& options) {
  std::vector<CheckResult> out;
  Rng rng = make_rng(options.seed, {stream::kVerify, 1});
  out.push_back(check_aggregator_oracles(200, rng));
  out.push_back(check_hypergeom_exact(options.inject_hypergeom_fault ? 1e-6 : 0.0));

  const std::vector<double> sigma(8, 1.0);
  const double target = std::sqrt(2.0 / M_PI) / std::sqrt(2.0 * std::log(2.0));
  const std::pair<Quantity, Quantity> pairs[] = {{1, 1}, {1, 10}, {10, 10}, {3, 100}};
  std::uint64_t tag = 10;
  for (const auto& [qi, qj] : pairs) {
    Rng r = make_rng(options.seed, {stream::kVerify, tag++});
    const auto res = lemma1_check(qi, qj, sigma, 100000, r);
    const bool ok = res.empirical_mean <= res.bound && std::fabs(res.ratio - target) <= 0.02;
    out.push_back({"lemma1 q=(" + std::to_string(qi) + "," + std::to_string(qj) + ")",
                   res.empirical_mean, res.bound, ok,
                   "ratio=" + fmt(res.ratio) + " target=" + fmt(target) + "+-0.02"});
  }
  for (int n : {2, 10, 50}) {
    Rng r = make_rng(options.seed, {stream::kVerify, tag++});
    const auto res = lemma3_max_check(n, 1, sigma, 10000, r);
    out.push_back({"lemma3 n=" + std::to_string(n), res.empirical_max_mean, res.bound,
                   res.empirical_max_mean <= res.bound, "q=1 sigma=ones(8) trials=10000"});
  }

  {
    Rng r = make_rng(options.seed, {stream::kVerify, 100});
    const auto res = mcne_recovery(500, 50, 50, 6.0, 1000, r);
    out.push_back({"mcne_recovery separation=6", res.recovery_rate, 0.95,
                   res.recovery_rate >= 0.95, "N=500 M=50 n=50 trials=1000"});
  }
  {
    Rng r = make_rng(options.seed, {stream::kVerify, 101});
    const auto res = mcne_recovery(500, 50, 50, 100.0, 1000, r);
    out.push_back({"mcne_recovery separation=100", res.recovery_rate, 1.0,
                   res.recovery_rate >= 1.0, "N=500 M=50 n=50 trials=1000"});
  }
  {
    Rng r = make_rng(options.seed, {stream::kVerify, 102});
    out.push_back(check_mcne_affine_invariance(100, r));
  }
  return out;
}

}  // namespace fedra::verify
