#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedra/types.hpp"

namespace fedra {

/// Quantity-normalized dissimilarity between two updates:
/// sqrt(q_i q_j / (q_i + q_j)) * ||g_i - g_j||_1.
///
/// For benign clients ||g_i - g_j||_1 shrinks like sqrt(1/q_i + 1/q_j), so
/// the prefactor makes Q roughly quantity-independent for honest pairs.
double q_value(const UpdateVector& g_i, const UpdateVector& g_j, Quantity q_i, Quantity q_j);

/// Per-client quantity-robust scores. `scores[r]` belongs to report r;
/// `sorted_order` lists report indices by ascending score, ties by client id.
struct ScoreTable {
  std::vector<ClientScore> scores;
  std::vector<std::size_t> sorted_order;

  std::size_t size() const { return scores.size(); }
  /// Scores in ascending order (the MCNE input).
  std::vector<double> sorted_scores() const;
};

/// s(i) = q_i^gamma * (sum of the n - m_tilde - 2 smallest Q(i, j), j != i).
/// Neighbor ties are broken by (Q, client_id).
///
/// Throws Error when n < m_tilde + 3 or gamma is outside (0, 0.5].
ScoreTable robust_scores(std::span<const ClientReport> reports, int m_tilde, double gamma);

}  // namespace fedra
