#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedra/rng.hpp"
#include "fedra/types.hpp"

namespace fedra::verify {

// Brute-force re-implementations. They share no code with the aggregation
// path: plain double loops and full sorts.
ClientId brute_force_krum(std::span<const ClientReport> reports, int m_tilde);
std::vector<ClientId> brute_force_mkrum(std::span<const ClientReport> reports, int m_tilde,
                                        int count);
std::vector<double> brute_force_median(std::span<const ClientReport> reports);
std::vector<double> brute_force_trimmed_mean(std::span<const ClientReport> reports, int k);
std::vector<double> brute_force_bulyan(std::span<const ClientReport> reports, int m_tilde);

// ln[C(M_tilde, m_tilde) C(N - M_tilde, n - m_tilde)] from exact 128-bit
// integer binomials; -inf outside the support. Requires N <= 60.
double exact_hypergeom_log(int N, int M_tilde, int n, int m_tilde);

struct Lemma1Result {
  double empirical_mean = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

// Monte-Carlo mean of ||g_i - g_j||_1 for benign Gaussian updates with
// quantities q_i, q_j against sqrt(2 ln 2) sqrt((q_i + q_j)/(q_i q_j)) ||sigma||_1.
Lemma1Result lemma1_check(Quantity q_i, Quantity q_j, std::span<const double> sigma,
                          std::int64_t trials, Rng& rng);
double lemma1_bound(Quantity q_i, Quantity q_j, std::span<const double> sigma);

struct Lemma3Result {
  double empirical_max_mean = 0.0;
  double bound = 0.0;
};

// Monte-Carlo mean of max_i ||g_i - mu||_1 over n i.i.d. updates of quantity
// q against sqrt(2 ln 2n) ||sigma||_1 / sqrt(q).
Lemma3Result lemma3_max_check(int n, Quantity q, std::span<const double> sigma,
                              std::int64_t trials, Rng& rng);
double lemma3_bound(int n, Quantity q, std::span<const double> sigma);

struct RecoveryResult {
  double recovery_rate = 0.0;
  std::vector<int> true_counts;
  std::vector<int> estimates;
};

// Per trial: m ~ Hypergeometric(n, M_tilde, N); benign scores ~ N(0, 1),
// malicious ~ N(separation, 1); exact-recovery rate of the estimator.
RecoveryResult mcne_recovery(int N, int M_tilde, int n, double separation, int trials, Rng& rng);

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 20240521;
  // Test-only: perturbs the log-gamma side of the hypergeometric comparison.
  bool inject_hypergeom_fault = false;
};

// Oracle-equivalence checks for the aggregators (200 random instances).
CheckResult check_aggregator_oracles(int instances, Rng& rng);
// Log-gamma prior vs exact integers over every valid (N <= 60, M, n, m).
CheckResult check_hypergeom_exact(double fault_offset = 0.0);
// MCNE estimate unchanged under a*s + b on random score sets.
CheckResult check_mcne_affine_invariance(int sets, Rng& rng);

std::vector<CheckResult> run_suite(const SuiteOptions& options = {});

}  // namespace fedra::verify
