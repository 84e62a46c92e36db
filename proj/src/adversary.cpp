#include "fedra/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "fedra/error.hpp"

namespace fedra {
namespace {

struct CoordinateMoments {
  std::vector<double> mean;
  std::vector<double> stddev;
};

CoordinateMoments coordinate_moments(std::span<const UpdateVector> vs) {
  const std::size_t dim = require_uniform_dim(vs);
  const auto n = static_cast<long double>(vs.size());
  CoordinateMoments out{std::vector<double>(dim), std::vector<double>(dim, 0.0)};
  for (std::size_t k = 0; k < dim; ++k) {
    long double sum = 0.0L;
    for (const auto& v : vs) sum += v[k];
    const long double mu = sum / n;
    out.mean[k] = static_cast<double>(mu);
    if (vs.size() >= 2) {
      long double ss = 0.0L;
      for (const auto& v : vs) ss += (v[k] - mu) * (v[k] - mu);
      out.stddev[k] = static_cast<double>(std::sqrt(ss / (n - 1.0L)));
    }
  }
  return out;
}

}  // namespace

std::string attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "None";
    case AttackKind::LabelFlip: return "LabelFlip";
    case AttackKind::Lie: return "LIE";
    case AttackKind::Optimize: return "Optimize";
  }
  return "None";
}

void validate(const AttackSpec& spec) {
  if (!(spec.alpha_q >= 0.0) || !std::isfinite(spec.alpha_q)) throw Error("alpha_q must be >= 0");
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda))
    throw Error("Optimize lambda must be positive");
  if (spec.z && !std::isfinite(*spec.z)) throw Error("LIE z must be finite");
}

int flip_label(int label, int num_classes) {
  if (num_classes < 2) throw Error("label flip needs at least 2 classes");
  if (label < 0 || label >= num_classes)
    throw Error("label " + std::to_string(label) + " outside [0, " +
                std::to_string(num_classes) + ")");
  return num_classes - 1 - label;
}

double lie_default_z(int n, int m) {
  if (m <= 0 || m >= n) return 0.0;
  const double p = 1.0 - static_cast<double>(n / 2 + 1 - m) / static_cast<double>(n - m);
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 3.0;
  const boost::math::normal_distribution<double> std_normal;
  return std::clamp(boost::math::quantile(std_normal, p), 0.0, 3.0);
}

UpdateVector lie_update(std::span<const UpdateVector> colluders, double z) {
  if (colluders.empty()) throw Error("LIE needs at least one colluder");
  if (colluders.size() == 1) return colluders.front();
  const auto mom = coordinate_moments(colluders);
  std::vector<double> out(mom.mean.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mom.mean[k] + z * mom.stddev[k];
  return UpdateVector(std::move(out));
}

UpdateVector optimize_update(std::span<const UpdateVector> colluders, double lambda) {
  if (colluders.empty()) throw Error("Optimize needs at least one colluder");
  const auto mom = coordinate_moments(colluders);
  std::vector<double> out(mom.mean.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double mu = mom.mean[k];
    const double sign = mu > 0.0 ? 1.0 : (mu < 0.0 ? -1.0 : 0.0);
    out[k] = mu - lambda * sign * mom.stddev[k];
  }
  return UpdateVector(std::move(out));
}

Quantity enhanced_quantity(std::span<const Quantity> colluder_quantities, double alpha_q) {
  if (colluder_quantities.empty()) throw Error("enhanced quantity needs at least one colluder");
  if (!(alpha_q >= 0.0)) throw Error("alpha_q must be >= 0");
  const auto n = static_cast<long double>(colluder_quantities.size());
  long double sum = 0.0L;
  for (Quantity q : colluder_quantities) sum += static_cast<long double>(q);
  const long double mu = sum / n;
  long double sd = 0.0L;
  if (colluder_quantities.size() >= 2) {
    long double ss = 0.0L;
    for (Quantity q : colluder_quantities) ss += (q - mu) * (q - mu);
    sd = std::sqrt(ss / (n - 1.0L));
  }
  const long double value = std::round(mu + static_cast<long double>(alpha_q) * sd);
  return std::max<Quantity>(1, static_cast<Quantity>(value));
}

}  // namespace fedra
