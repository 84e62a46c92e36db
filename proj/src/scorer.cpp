#include "fedra/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedra/error.hpp"

namespace fedra {

double q_value(const UpdateVector& g_i, const UpdateVector& g_j, Quantity q_i, Quantity q_j) {
  if (q_i < 1 || q_j < 1) throw Error("quantities must be >= 1");
  const double qi = static_cast<double>(q_i);
  const double qj = static_cast<double>(q_j);
  return std::sqrt(qi * qj / (qi + qj)) * l1_distance(g_i, g_j);
}

std::vector<double> ScoreTable::sorted_scores() const {
  std::vector<double> out;
  out.reserve(sorted_order.size());
  for (std::size_t idx : sorted_order) out.push_back(scores[idx].score);
  return out;
}

ScoreTable robust_scores(std::span<const ClientReport> reports, int m_tilde, double gamma) {
  validate_reports(reports);
  if (!(gamma > 0.0 && gamma <= 0.5)) throw Error("gamma must lie in (0, 0.5]");
  const int n = static_cast<int>(reports.size());
  if (m_tilde < 0 || n < m_tilde + 3)
    throw Error("insufficient clients for neighbor set (n=" + std::to_string(n) +
                ", m_tilde=" + std::to_string(m_tilde) + ")");
  const auto neighbors = static_cast<std::size_t>(n - m_tilde - 2);

  std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = q_value(reports[i].update, reports[j].update, reports[i].quantity,
                               reports[j].quantity);
      q[i * n + j] = v;
      q[j * n + i] = v;
    }
  }

  ScoreTable table;
  table.scores.resize(n);
  std::vector<int> others;
  for (int i = 0; i < n; ++i) {
    others.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::partial_sort(others.begin(), others.begin() + neighbors, others.end(),
                      [&](int a, int b) {
                        const double qa = q[i * n + a];
                        const double qb = q[i * n + b];
                        if (qa != qb) return qa < qb;
                        return reports[a].client_id < reports[b].client_id;
                      });
    long double sum = 0.0L;
    for (std::size_t r = 0; r < neighbors; ++r) sum += q[i * n + others[r]];
    const double weight = std::pow(static_cast<double>(reports[i].quantity), gamma);
    table.scores[i] = {reports[i].client_id, static_cast<double>(weight * sum)};
  }

  table.sorted_order.resize(n);
  std::iota(table.sorted_order.begin(), table.sorted_order.end(), std::size_t{0});
  std::sort(table.sorted_order.begin(), table.sorted_order.end(),
            [&](std::size_t a, std::size_t b) {
              const auto& sa = table.scores[a];
              const auto& sb = table.scores[b];
              if (sa.score != sb.score) return sa.score < sb.score;
              return sa.client_id < sb.client_id;
            });
  return table;
}

}  // namespace fedra
