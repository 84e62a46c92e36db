#include "fedra/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "fedra/error.hpp"

namespace fedra {

UpdateVector::UpdateVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error("update vector must have dimension >= 1");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      throw Error("update vector entry " + std::to_string(k) + " is not finite");
  }
}

UpdateVector::UpdateVector(std::initializer_list<double> values)
    : UpdateVector(std::vector<double>(values)) {}

UpdateVector UpdateVector::zeros(std::size_t dim) { return filled(dim, 0.0); }

UpdateVector UpdateVector::filled(std::size_t dim, double value) {
  return UpdateVector(std::vector<double>(dim, value));
}

void require_same_dim(const UpdateVector& a, const UpdateVector& b) {
  if (a.empty() || b.empty()) throw Error("empty update vector");
  if (a.size() != b.size())
    throw Error("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
}

std::size_t require_uniform_dim(std::span<const UpdateVector> vectors) {
  if (vectors.empty()) throw Error("empty vector list");
  for (const auto& v : vectors) require_same_dim(vectors.front(), v);
  return vectors.front().size();
}

double l1_distance(const UpdateVector& a, const UpdateVector& b) {
  require_same_dim(a, b);
  long double sum = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k)
    sum += std::fabs(static_cast<long double>(a[k]) - b[k]);
  return static_cast<double>(sum);
}

double l2_norm(const UpdateVector& a) {
  long double sum = 0.0L;
  for (double x : a) sum += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(sum));
}

double squared_l2_distance(const UpdateVector& a, const UpdateVector& b) {
  require_same_dim(a, b);
  long double sum = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const long double d = static_cast<long double>(a[k]) - b[k];
    sum += d * d;
  }
  return static_cast<double>(sum);
}

double l2_distance(const UpdateVector& a, const UpdateVector& b) {
  return std::sqrt(squared_l2_distance(a, b));
}

UpdateVector scaled(const UpdateVector& a, double factor) {
  std::vector<double> out(a.begin(), a.end());
  for (double& x : out) x *= factor;
  return UpdateVector(std::move(out));
}

UpdateVector weighted_mean(std::span<const UpdateVector> vectors, std::span<const double> weights) {
  const std::size_t dim = require_uniform_dim(vectors);
  if (weights.size() != vectors.size()) throw Error("weights/vectors length mismatch");
  long double total = 0.0L;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weights must be finite and non-negative");
    total += w;
  }
  if (total <= 0.0L) throw Error("weights sum to zero");

  std::vector<double> out(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    long double acc = 0.0L;
    double lo = vectors[0][k];
    double hi = lo;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      acc += static_cast<long double>(weights[i]) * vectors[i][k];
      lo = std::min(lo, vectors[i][k]);
      hi = std::max(hi, vectors[i][k]);
    }
    out[k] = std::clamp(static_cast<double>(acc / total), lo, hi);
  }
  return UpdateVector(std::move(out));
}

UpdateVector mean(std::span<const UpdateVector> vectors) {
  const std::vector<double> ones(vectors.size(), 1.0);
  return weighted_mean(vectors, ones);
}

namespace {

std::vector<double> column(std::span<const UpdateVector> vectors, std::size_t k) {
  std::vector<double> col(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) col[i] = vectors[i][k];
  return col;
}

}  // namespace

UpdateVector coordinate_median(std::span<const UpdateVector> vectors) {
  const std::size_t dim = require_uniform_dim(vectors);
  const std::size_t n = vectors.size();
  std::vector<double> out(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    auto col = column(vectors, k);
    std::sort(col.begin(), col.end());
    if (n % 2 == 1) {
      out[k] = col[n / 2];
    } else {
      const long double a = col[n / 2 - 1];
      out[k] = static_cast<double>((a + col[n / 2]) / 2.0L);
    }
  }
  return UpdateVector(std::move(out));
}

UpdateVector coordinate_trimmed_mean(std::span<const UpdateVector> vectors, std::size_t k) {
  const std::vector<double> ones(vectors.size(), 1.0);
  return weighted_coordinate_trimmed_mean(vectors, ones, k);
}

UpdateVector weighted_coordinate_trimmed_mean(std::span<const UpdateVector> vectors,
                                              std::span<const double> weights, std::size_t k) {
  const std::size_t dim = require_uniform_dim(vectors);
  const std::size_t n = vectors.size();
  if (weights.size() != n) throw Error("weights/vectors length mismatch");
  if (2 * k >= n)
    throw Error("trimmed mean needs 2k < count (k=" + std::to_string(k) +
                ", count=" + std::to_string(n) + ")");

  std::vector<std::size_t> order(n);
  std::vector<double> out(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = vectors[a][c];
      const double vb = vectors[b][c];
      return va != vb ? va < vb : a < b;
    });
    long double acc = 0.0L;
    long double total = 0.0L;
    for (std::size_t r = k; r < n - k; ++r) {
      acc += static_cast<long double>(weights[order[r]]) * vectors[order[r]][c];
      total += weights[order[r]];
    }
    if (total <= 0.0L) throw Error("trimmed weights sum to zero");
    const double lo = vectors[order[k]][c];
    const double hi = vectors[order[n - k - 1]][c];
    out[c] = std::clamp(static_cast<double>(acc / total), lo, hi);
  }
  return UpdateVector(std::move(out));
}

}  // namespace fedra
