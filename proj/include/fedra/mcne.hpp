#pragma once

#include <limits>
#include <optional>
#include <span>

#include "fedra/scorer.hpp"

namespace fedra {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// ln[C(M_tilde, m_tilde) * C(N - M_tilde, n - m_tilde)], the hypergeometric
/// prior on m_tilde up to the constant 1/C(N, n). Returns kNegInf outside
/// the support. Throws Error when n > N or M_tilde > N or any argument is
/// negative.
double hypergeom_log_weight(int N, int M_tilde, int n, int m_tilde);

/// Two-group Gaussian fit of an ascending score list split after the first
/// n - m_tilde entries. Variances use the count - 1 divisor and every sigma
/// is floored at sigma_floor(scores). The malicious moments are absent when
/// m_tilde == 0; a single-element malicious group reports sigma = floor.
struct GroupStats {
  double mu_b = 0.0;
  double sigma_b = 0.0;
  std::optional<double> mu_m;
  std::optional<double> sigma_m;
  int benign_count = 0;
  int malicious_count = 0;
};

double sigma_floor(std::span<const double> sorted_scores);

GroupStats group_stats(std::span<const double> sorted_scores, int m_tilde);

/// Hypergeometric log-prior plus the split two-Gaussian log-likelihood
/// (constant terms dropped). A one-element malicious group carries no
/// scale information and is scored with sigma_b. Returns kNegInf when the
/// prior is outside its support.
double log_likelihood(std::span<const double> sorted_scores, int m_tilde, int N, int M_tilde);

/// argmax over m_tilde in {0, ..., min(n - 2, M_tilde)} of log_likelihood,
/// ties toward the smaller m_tilde. Throws Error when n < 3 or every
/// candidate has zero prior mass.
int estimate_malicious_count(std::span<const double> sorted_scores, int N, int M_tilde);
int estimate_malicious_count(const ScoreTable& scores, int N, int M_tilde);

}  // namespace fedra
