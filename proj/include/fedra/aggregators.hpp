#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fedra/fedra_rule.hpp"
#include "fedra/types.hpp"

namespace fedra {

// Quantity-weighted mean of every report (FedAvg).
struct FedAvgWeighted {};
struct Krum {
  int m_tilde = 0;
};
struct MKrum {
  int m_tilde = 0;
  int count = 1;
};
struct Median {};
struct Trimean {
  int k = 0;
};
struct Bulyan {
  int m_tilde = 0;
};
struct NormBound {
  double threshold = 1.0;
};
struct Rfa {
  int max_iters = 100;
  double smoothing = 1e-6;
  double tolerance = 1e-10;
};
struct Truncate {
  double top_fraction = 0.1;
  double mass_fraction = 0.5;
  int trim_k = 0;
};

using AggregationRule = std::variant<FedAvgWeighted, Krum, MKrum, Median, Trimean, Bulyan,
                                     NormBound, Rfa, Truncate, FedRaParams>;

std::string rule_name(const AggregationRule& rule);

// Krum family. Score of i = sum of squared L2 distances to its n - m_tilde - 2
// nearest neighbors (ties by client id). Returns the `count` lowest-score
// ids, ascending by (score, id). count == 1 is Krum.
std::vector<ClientId> krum_select(std::span<const ClientReport> reports, int m_tilde, int count);

// Iterated Krum selection of n - 2 m_tilde updates followed by a
// coordinate-wise trimmed mean with k = m_tilde. Requires n >= 4 m_tilde + 3.
AggregateResult bulyan(std::span<const ClientReport> reports, int m_tilde);

// Clip every update to L2 norm <= threshold, then quantity-weighted mean.
UpdateVector norm_bound(std::span<const ClientReport> reports, double threshold);

// Quantity-weighted geometric median via smoothed Weiszfeld iterations,
// started at the quantity-weighted mean.
UpdateVector rfa_geometric_median(std::span<const ClientReport> reports, const Rfa& params);

// Largest cap U >= 1 such that, with every quantity capped at U, the
// ceil(top_fraction * n) largest capped quantities hold at most
// mass_fraction of the capped total.
Quantity truncate_threshold(std::span<const Quantity> quantities, double top_fraction = 0.1,
                            double mass_fraction = 0.5);

AggregateResult aggregate(const AggregationRule& rule, std::span<const ClientReport> reports);

}  // namespace fedra
