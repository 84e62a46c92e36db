#pragma once

#include <optional>
#include <span>

#include "fedra/types.hpp"

namespace fedra {

struct FedRaParams {
  double gamma = 0.1;
  int population = 1;       // N
  int malicious_total = 0;  // server's estimate M_tilde
  RatioMode ratio_mode = RatioMode::Dynamic;
  // Forces the number of filtered clients (c = n - override), bypassing
  // both the fixed-ratio rule and MCNE. Used by the estimator ablation.
  std::optional<int> m_tilde_override;
};

void validate(const FedRaParams& p);

// One FedRA aggregation round.
// 
// Scores every report with m_init = ceil(n * M_tilde / N) neighbors
// excluded, picks c = n - m_init - 1 (fixed ratio) or c = n - MCNE
// (dynamic ratio) lowest-score clients, and returns the quantity-weighted
// mean of their updates. c is clamped to at least 1, adding the
// "c_clamped" warning.
AggregateResult fedra_aggregate(std::span<const ClientReport> reports, const FedRaParams& params);

}  // namespace fedra
