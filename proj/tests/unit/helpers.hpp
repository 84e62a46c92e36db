#pragma once

#include <algorithm>
#include <initializer_list>
#include <random>
#include <vector>

#include "fedra/rng.hpp"
#include "fedra/types.hpp"

namespace testing {

inline fedra::ClientReport rep(fedra::ClientId id, std::initializer_list<double> v,
                               fedra::Quantity q = 1) {
  return {id, fedra::UpdateVector(v), q};
}

inline std::vector<fedra::ClientReport> one_d(std::initializer_list<double> values) {
  std::vector<fedra::ClientReport> out;
  fedra::ClientId id = 0;
  for (double x : values) out.push_back({id++, fedra::UpdateVector{x}, 1});
  return out;
}

inline std::vector<fedra::ClientReport> random_reports(fedra::Rng& rng, int n, int d,
                                                       fedra::Quantity max_q = 50) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<fedra::Quantity> qd(1, max_q);
  std::vector<fedra::ClientReport> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (double& x : v) x = normal(rng);
    out.push_back({static_cast<fedra::ClientId>(i * 3 + 1), fedra::UpdateVector(v), qd(rng)});
  }
  return out;
}

inline std::vector<fedra::ClientId> sorted_ids(std::vector<fedra::ClientId> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace testing
