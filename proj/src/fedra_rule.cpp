#include "fedra/fedra_rule.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "fedra/error.hpp"
#include "fedra/mcne.hpp"
#include "fedra/scorer.hpp"

namespace fedra {

void validate(const FedRaParams& p) {
  if (!(p.gamma > 0.0 && p.gamma <= 0.5)) throw Error("FedRA gamma must lie in (0, 0.5]");
  if (p.population < 1) throw Error("FedRA population N must be >= 1");
  if (p.malicious_total < 0 || p.malicious_total > p.population)
    throw Error("FedRA M_tilde must lie in [0, N]");
  if (p.m_tilde_override && *p.m_tilde_override < 0)
    throw Error("FedRA m_tilde_override must be >= 0");
}

AggregateResult fedra_aggregate(std::span<const ClientReport> reports, const FedRaParams& params) {
  validate(params);
  validate_reports(reports);
  const int n = static_cast<int>(reports.size());
  if (n > params.population) throw Error("more reports than population N");
  const int m_init = expected_malicious(n, params.malicious_total, params.population);

  ScoreTable table = robust_scores(reports, m_init, params.gamma);

  AggregateResult result;
  int m_used = m_init;
  int c = 0;
  if (params.m_tilde_override) {
    m_used = *params.m_tilde_override;
    c = n - m_used;
  } else if (params.ratio_mode == RatioMode::Fixed) {
    c = n - m_init - 1;
  } else {
    m_used = estimate_malicious_count(table, params.population, params.malicious_total);
    c = n - m_used;
  }
  if (c < 1) {
    c = 1;
    result.info.warnings.emplace_back("c_clamped");
  }

  std::vector<bool> keep(n, false);
  for (int r = 0; r < c; ++r) keep[table.sorted_order[r]] = true;

  std::vector<UpdateVector> chosen;
  std::vector<double> weights;
  for (int i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    chosen.push_back(reports[i].update);
    weights.push_back(static_cast<double>(reports[i].quantity));
    result.info.selected.push_back(reports[i].client_id);
  }
  result.update = weighted_mean(chosen, weights);
  result.info.scores = std::move(table.scores);
  result.info.m_tilde = m_used;
  return result;
}

}  // namespace fedra
