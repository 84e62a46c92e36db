#include "fedra/types.hpp"

#include <algorithm>
#include <string>

#include "fedra/error.hpp"

namespace fedra {

std::size_t validate_reports(std::span<const ClientReport> reports) {
  if (reports.empty()) throw Error("no client reports");
  std::vector<ClientId> ids;
  ids.reserve(reports.size());
  for (const auto& r : reports) {
    require_same_dim(reports.front().update, r.update);
    if (r.quantity < 1)
      throw Error("client " + std::to_string(r.client_id) + " reported quantity < 1");
    ids.push_back(r.client_id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw Error("duplicate client id in round");
  return reports.front().update.size();
}

std::vector<UpdateVector> updates_of(std::span<const ClientReport> reports) {
  std::vector<UpdateVector> out;
  out.reserve(reports.size());
  for (const auto& r : reports) out.push_back(r.update);
  return out;
}

std::vector<double> quantities_of(std::span<const ClientReport> reports) {
  std::vector<double> out;
  out.reserve(reports.size());
  for (const auto& r : reports) out.push_back(static_cast<double>(r.quantity));
  return out;
}

int expected_malicious(int n, int m_total, int population) {
  if (population <= 0) throw Error("population must be positive");
  const long long num = static_cast<long long>(n) * m_total;
  return static_cast<int>((num + population - 1) / population);
}

}  // namespace fedra
