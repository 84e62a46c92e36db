#include "fedra/mcne.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedra/error.hpp"

namespace fedra {
namespace {

double log_choose(int a, int b) {
  return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
}

void require_ascending(std::span<const double> s) {
  if (!std::is_sorted(s.begin(), s.end())) throw Error("scores must be sorted ascending");
  for (double x : s)
    if (!std::isfinite(x)) throw Error("scores must be finite");
}

struct Moments {
  double mean;
  double sum_sq_dev;
};

Moments moments(std::span<const double> s) {
  long double sum = 0.0L;
  for (double x : s) sum += x;
  const long double mu = sum / static_cast<long double>(s.size());
  long double ss = 0.0L;
  for (double x : s) ss += (x - mu) * (x - mu);
  return {static_cast<double>(mu), static_cast<double>(ss)};
}

}  // namespace

double hypergeom_log_weight(int N, int M_tilde, int n, int m_tilde) {
  if (N < 0 || M_tilde < 0 || n < 0 || m_tilde < 0)
    throw Error("hypergeometric arguments must be non-negative");
  if (n > N || M_tilde > N)
    throw Error("hypergeometric precondition violated: need n <= N and M_tilde <= N");
  if (m_tilde > M_tilde || m_tilde > n || n - m_tilde > N - M_tilde) return kNegInf;
  return log_choose(M_tilde, m_tilde) + log_choose(N - M_tilde, n - m_tilde);
}

double sigma_floor(std::span<const double> sorted_scores) {
  if (sorted_scores.empty()) return 1e-12;
  const double range = sorted_scores.back() - sorted_scores.front();
  return std::max(1e-12, 1e-9 * range);
}

GroupStats group_stats(std::span<const double> sorted_scores, int m_tilde) {
  require_ascending(sorted_scores);
  const int n = static_cast<int>(sorted_scores.size());
  if (m_tilde < 0 || m_tilde > n - 2)
    throw Error("m_tilde must lie in [0, n-2] (m_tilde=" + std::to_string(m_tilde) +
                ", n=" + std::to_string(n) + ")");
  const double floor = sigma_floor(sorted_scores);
  const auto benign = sorted_scores.first(static_cast<std::size_t>(n - m_tilde));
  const auto malicious = sorted_scores.last(static_cast<std::size_t>(m_tilde));

  GroupStats g;
  g.benign_count = n - m_tilde;
  g.malicious_count = m_tilde;
  const Moments b = moments(benign);
  g.mu_b = b.mean;
  g.sigma_b = std::max(floor, std::sqrt(b.sum_sq_dev / (g.benign_count - 1)));
  if (m_tilde == 1) {
    g.mu_m = malicious.front();
    g.sigma_m = floor;
  } else if (m_tilde >= 2) {
    const Moments m = moments(malicious);
    g.mu_m = m.mean;
    g.sigma_m = std::max(floor, std::sqrt(m.sum_sq_dev / (m_tilde - 1)));
  }
  return g;
}

double log_likelihood(std::span<const double> sorted_scores, int m_tilde, int N, int M_tilde) {
  const int n = static_cast<int>(sorted_scores.size());
  const double prior = hypergeom_log_weight(N, M_tilde, n, m_tilde);
  const GroupStats g = group_stats(sorted_scores, m_tilde);
  if (prior == kNegInf) return kNegInf;

  auto gaussian_terms = [](std::span<const double> group, double mu, double sigma) {
    long double quad = 0.0L;
    for (double x : group) quad += (x - mu) * (x - mu);
    return -static_cast<double>(group.size()) * std::log(sigma) -
           static_cast<double>(quad / (2.0L * sigma * sigma));
  };

  double ll = prior;
  ll += gaussian_terms(sorted_scores.first(static_cast<std::size_t>(g.benign_count)), g.mu_b,
                       g.sigma_b);
  if (m_tilde >= 1) {
    const double sigma_m = m_tilde == 1 ? g.sigma_b : *g.sigma_m;
    ll += gaussian_terms(sorted_scores.last(static_cast<std::size_t>(m_tilde)), *g.mu_m, sigma_m);
  }
  return ll;
}

int estimate_malicious_count(std::span<const double> sorted_scores, int N, int M_tilde) {
  const int n = static_cast<int>(sorted_scores.size());
  if (n < 3) throw Error("MCNE needs at least 3 scores");
  const int last = std::min(n - 2, M_tilde);
  int best = -1;
  double best_ll = kNegInf;
  for (int m = 0; m <= last; ++m) {
    const double ll = log_likelihood(sorted_scores, m, N, M_tilde);
    if (ll == kNegInf) continue;
    if (best < 0 || ll > best_ll) {
      best = m;
      best_ll = ll;
    }
  }
  if (best < 0) throw Error("empty hypergeometric support");
  return best;
}

int estimate_malicious_count(const ScoreTable& scores, int N, int M_tilde) {
  const auto sorted = scores.sorted_scores();
  return estimate_malicious_count(sorted, N, M_tilde);
}

}  // namespace fedra
