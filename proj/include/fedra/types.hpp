#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedra/numkit.hpp"

namespace fedra {

using ClientId = std::uint32_t;
using Quantity = std::int64_t;

// One client's submission for a round.
struct ClientReport {
  ClientId client_id = 0;
  UpdateVector update;
  Quantity quantity = 1;
};

struct ClientScore {
  ClientId client_id = 0;
  double score = 0.0;
};

// What an aggregation rule kept. `selected` lists ids in report order so
// that re-aggregating exactly those reports reproduces the output.
struct SelectionInfo {
  std::vector<ClientId> selected;
  std::vector<ClientScore> scores;
  std::optional<int> m_tilde;
  std::vector<std::string> warnings;
};

struct AggregateResult {
  UpdateVector update;
  SelectionInfo info;
};

enum class RatioMode { Fixed, Dynamic };

// Throws unless reports are non-empty, share one dimension, have quantity
// >= 1 and unique ids. Returns the dimension.
std::size_t validate_reports(std::span<const ClientReport> reports);

std::vector<UpdateVector> updates_of(std::span<const ClientReport> reports);
std::vector<double> quantities_of(std::span<const ClientReport> reports);

// ceil(n * m_total / population), the per-round malicious count implied by
// a population ratio.
int expected_malicious(int n, int m_total, int population);

}  // namespace fedra
