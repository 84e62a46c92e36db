#include "fedra/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedra/error.hpp"

namespace fedra {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Krum scores over the reports listed in `members`, using `neighbors`
// nearest neighbors each. `dist` is the full n x n squared-distance matrix.
std::vector<double> krum_scores(std::span<const ClientReport> reports,
                                std::span<const std::size_t> members,
                                const std::vector<double>& dist, std::size_t neighbors) {
  const std::size_t n = reports.size();
  std::vector<double> scores(members.size());
  std::vector<std::size_t> others;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const std::size_t i = members[a];
    others.clear();
    for (std::size_t j : members)
      if (j != i) others.push_back(j);
    const std::size_t take = std::min(neighbors, others.size());
    std::partial_sort(others.begin(), others.begin() + take, others.end(),
                      [&](std::size_t x, std::size_t y) {
                        const double dx = dist[i * n + x];
                        const double dy = dist[i * n + y];
                        if (dx != dy) return dx < dy;
                        return reports[x].client_id < reports[y].client_id;
                      });
    long double sum = 0.0L;
    for (std::size_t r = 0; r < take; ++r) sum += dist[i * n + others[r]];
    scores[a] = static_cast<double>(sum);
  }
  return scores;
}

std::vector<double> pairwise_squared(std::span<const ClientReport> reports) {
  const std::size_t n = reports.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = squared_l2_distance(reports[i].update, reports[j].update);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }
  return dist;
}

// Member position with the smallest score; ties by client id.
std::size_t argmin_score(std::span<const ClientReport> reports,
                         std::span<const std::size_t> members, std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < members.size(); ++a) {
    if (scores[a] < scores[best] ||
        (scores[a] == scores[best] &&
         reports[members[a]].client_id < reports[members[best]].client_id))
      best = a;
  }
  return best;
}

// Reports whose ids are in `ids`, kept in report order.
std::vector<std::size_t> indices_in_report_order(std::span<const ClientReport> reports,
                                                 std::span<const ClientId> ids) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < reports.size(); ++i)
    if (std::find(ids.begin(), ids.end(), reports[i].client_id) != ids.end()) out.push_back(i);
  return out;
}

AggregateResult all_selected(std::span<const ClientReport> reports, UpdateVector update) {
  AggregateResult res;
  res.update = std::move(update);
  for (const auto& r : reports) res.info.selected.push_back(r.client_id);
  return res;
}

AggregateResult plain_mean_of(std::span<const ClientReport> reports,
                              std::span<const ClientId> ids) {
  AggregateResult res;
  std::vector<UpdateVector> chosen;
  for (std::size_t i : indices_in_report_order(reports, ids)) {
    chosen.push_back(reports[i].update);
    res.info.selected.push_back(reports[i].client_id);
  }
  res.update = chosen.size() == 1 ? chosen.front() : mean(chosen);
  return res;
}

void require_m_tilde(int m_tilde) {
  if (m_tilde < 0) throw Error("m_tilde must be >= 0");
}

}  // namespace

std::string rule_name(const AggregationRule& rule) {
  return std::visit(Overloaded{
                        [](const FedAvgWeighted&) { return std::string("FedAvgWeighted"); },
                        [](const Krum&) { return std::string("Krum"); },
                        [](const MKrum&) { return std::string("MKrum"); },
                        [](const Median&) { return std::string("Median"); },
                        [](const Trimean&) { return std::string("Trimean"); },
                        [](const Bulyan&) { return std::string("Bulyan"); },
                        [](const NormBound&) { return std::string("NormBound"); },
                        [](const Rfa&) { return std::string("RFA"); },
                        [](const Truncate&) { return std::string("Truncate"); },
                        [](const FedRaParams&) { return std::string("FedRA"); },
                    },
                    rule);
}

std::vector<ClientId> krum_select(std::span<const ClientReport> reports, int m_tilde, int count) {
  validate_reports(reports);
  require_m_tilde(m_tilde);
  const int n = static_cast<int>(reports.size());
  if (n < m_tilde + 3)
    throw Error("Krum needs n >= m_tilde + 3 (n=" + std::to_string(n) +
                ", m_tilde=" + std::to_string(m_tilde) + ")");
  if (count < 1 || count > n) throw Error("Krum selection count must lie in [1, n]");

  const auto dist = pairwise_squared(reports);
  std::vector<std::size_t> members(n);
  std::iota(members.begin(), members.end(), std::size_t{0});
  const auto scores = krum_scores(reports, members, dist, static_cast<std::size_t>(n - m_tilde - 2));

  std::vector<std::size_t> order = members;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return reports[a].client_id < reports[b].client_id;
  });
  std::vector<ClientId> out;
  for (int r = 0; r < count; ++r) out.push_back(reports[order[r]].client_id);
  return out;
}

AggregateResult bulyan(std::span<const ClientReport> reports, int m_tilde) {
  validate_reports(reports);
  require_m_tilde(m_tilde);
  const int n = static_cast<int>(reports.size());
  if (n < 4 * m_tilde + 3)
    throw Error("Bulyan needs n >= 4 m_tilde + 3 (n=" + std::to_string(n) +
                ", m_tilde=" + std::to_string(m_tilde) + ")");
  const int theta = n - 2 * m_tilde;

  const auto dist = pairwise_squared(reports);
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<ClientId> picked;
  while (static_cast<int>(picked.size()) < theta) {
    const int r = static_cast<int>(remaining.size());
    // Krum's neighbor count on the shrinking set, never below one neighbor.
    const std::size_t neighbors = r >= 2 ? static_cast<std::size_t>(std::max(1, r - m_tilde - 2)) : 0;
    const auto scores = krum_scores(reports, remaining, dist, neighbors);
    const std::size_t best = argmin_score(reports, remaining, scores);
    picked.push_back(reports[remaining[best]].client_id);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }

  AggregateResult res;
  std::vector<UpdateVector> chosen;
  for (std::size_t i : indices_in_report_order(reports, picked)) {
    chosen.push_back(reports[i].update);
    res.info.selected.push_back(reports[i].client_id);
  }
  res.update = coordinate_trimmed_mean(chosen, static_cast<std::size_t>(m_tilde));
  res.info.m_tilde = m_tilde;
  return res;
}

UpdateVector norm_bound(std::span<const ClientReport> reports, double threshold) {
  validate_reports(reports);
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw Error("norm bound threshold must be positive");
  std::vector<UpdateVector> clipped;
  clipped.reserve(reports.size());
  for (const auto& r : reports) {
    const double norm = l2_norm(r.update);
    clipped.push_back(norm > threshold ? scaled(r.update, threshold / norm) : r.update);
  }
  return weighted_mean(clipped, quantities_of(reports));
}

UpdateVector rfa_geometric_median(std::span<const ClientReport> reports, const Rfa& params) {
  validate_reports(reports);
  if (!(params.smoothing > 0.0)) throw Error("RFA smoothing must be positive");
  if (params.max_iters < 0) throw Error("RFA max_iters must be >= 0");
  if (!(params.tolerance >= 0.0)) throw Error("RFA tolerance must be >= 0");
  if (reports.size() == 1) return reports.front().update;

  const auto updates = updates_of(reports);
  const auto q = quantities_of(reports);
  UpdateVector v = weighted_mean(updates, q);
  std::vector<double> w(reports.size());
  for (int it = 0; it < params.max_iters; ++it) {
    for (std::size_t i = 0; i < updates.size(); ++i)
      w[i] = q[i] / std::max(l2_distance(updates[i], v), params.smoothing);
    UpdateVector next = weighted_mean(updates, w);
    const double step = l2_distance(next, v);
    v = std::move(next);
    if (step < params.tolerance) break;
  }
  return v;
}

Quantity truncate_threshold(std::span<const Quantity> quantities, double top_fraction,
                            double mass_fraction) {
  if (quantities.empty()) throw Error("truncate threshold needs at least one quantity");
  if (!(top_fraction > 0.0 && top_fraction < 1.0))
    throw Error("truncate top_fraction must lie in (0, 1)");
  if (!(mass_fraction > 0.0 && mass_fraction < 1.0))
    throw Error("truncate mass_fraction must lie in (0, 1)");
  for (Quantity q : quantities)
    if (q < 1) throw Error("quantities must be >= 1");

  std::vector<Quantity> sorted(quantities.begin(), quantities.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t n = sorted.size();
  const auto top = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n) - 1e-12)), 1, n);

  auto satisfied = [&](Quantity cap) {
    long double top_sum = 0.0L;
    long double total = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const Quantity c = std::min(sorted[i], cap);
      total += static_cast<long double>(c);
      if (i < top) top_sum += static_cast<long double>(c);
    }
    return top_sum <= static_cast<long double>(mass_fraction) * total;
  };

  // The top-share of the capped total is non-decreasing in the cap.
  Quantity lo = 1;
  Quantity hi = sorted.front();
  if (!satisfied(lo)) return 1;
  while (lo < hi) {
    const Quantity mid = lo + (hi - lo + 1) / 2;
    if (satisfied(mid))
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

AggregateResult aggregate(const AggregationRule& rule, std::span<const ClientReport> reports) {
  validate_reports(reports);
  const int n = static_cast<int>(reports.size());
  return std::visit(
      Overloaded{
          [&](const FedAvgWeighted&) {
            return all_selected(reports, weighted_mean(updates_of(reports), quantities_of(reports)));
          },
          [&](const Krum& r) {
            const auto ids = krum_select(reports, r.m_tilde, 1);
            auto res = plain_mean_of(reports, ids);
            res.info.m_tilde = r.m_tilde;
            return res;
          },
          [&](const MKrum& r) {
            const auto ids = krum_select(reports, r.m_tilde, r.count);
            auto res = plain_mean_of(reports, ids);
            res.info.m_tilde = r.m_tilde;
            return res;
          },
          [&](const Median&) { return all_selected(reports, coordinate_median(updates_of(reports))); },
          [&](const Trimean& r) {
            if (r.k < 0) throw Error("Trimean k must be >= 0");
            auto res = all_selected(
                reports, coordinate_trimmed_mean(updates_of(reports), static_cast<std::size_t>(r.k)));
            res.info.m_tilde = r.k;
            return res;
          },
          [&](const Bulyan& r) { return bulyan(reports, r.m_tilde); },
          [&](const NormBound& r) { return all_selected(reports, norm_bound(reports, r.threshold)); },
          [&](const Rfa& r) { return all_selected(reports, rfa_geometric_median(reports, r)); },
          [&](const Truncate& r) {
            if (r.trim_k < 0 || 2 * r.trim_k >= n) throw Error("Truncate trim_k needs 0 <= 2k < n");
            std::vector<Quantity> q;
            for (const auto& rep : reports) q.push_back(rep.quantity);
            const Quantity cap = truncate_threshold(q, r.top_fraction, r.mass_fraction);
            std::vector<double> capped;
            for (Quantity x : q) capped.push_back(static_cast<double>(std::min(x, cap)));
            auto res = all_selected(reports, weighted_coordinate_trimmed_mean(
                                                 updates_of(reports), capped,
                                                 static_cast<std::size_t>(r.trim_k)));
            res.info.m_tilde = r.trim_k;
            return res;
          },
          [&](const FedRaParams& p) { return fedra_aggregate(reports, p); },
      },
      rule);
}

}  // namespace fedra
