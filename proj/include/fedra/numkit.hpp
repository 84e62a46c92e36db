#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedra {

// Dense gradient-space vector. Non-empty and finite by construction; a
// default-constructed vector is an empty placeholder that every operation
// rejects.
class UpdateVector {
 public:
  UpdateVector() = default;
  explicit UpdateVector(std::vector<double> values);
  UpdateVector(std::initializer_list<double> values);

  static UpdateVector zeros(std::size_t dim);
  static UpdateVector filled(std::size_t dim, double value);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  friend bool operator==(const UpdateVector&, const UpdateVector&) = default;

 private:
  std::vector<double> values_;
};

void require_same_dim(const UpdateVector& a, const UpdateVector& b);
// Non-empty list of vectors sharing one non-zero dimension; returns it.
std::size_t require_uniform_dim(std::span<const UpdateVector> vectors);

double l1_distance(const UpdateVector& a, const UpdateVector& b);
double l2_norm(const UpdateVector& a);
double l2_distance(const UpdateVector& a, const UpdateVector& b);
double squared_l2_distance(const UpdateVector& a, const UpdateVector& b);

UpdateVector scaled(const UpdateVector& a, double factor);

// Sum_i w_i v_i / Sum_i w_i, accumulated in long double in index order and
// clamped per coordinate into the inputs' range.
UpdateVector weighted_mean(std::span<const UpdateVector> vectors, std::span<const double> weights);
UpdateVector mean(std::span<const UpdateVector> vectors);

UpdateVector coordinate_median(std::span<const UpdateVector> vectors);

// Per coordinate: drop the k smallest and k largest values, average the rest.
UpdateVector coordinate_trimmed_mean(std::span<const UpdateVector> vectors, std::size_t k);

// Same trimming, but the surviving values are averaged with weights.
UpdateVector weighted_coordinate_trimmed_mean(std::span<const UpdateVector> vectors,
                                              std::span<const double> weights, std::size_t k);

}  // namespace fedra
