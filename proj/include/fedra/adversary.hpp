#pragma once

#include <optional>
#include <span>
#include <string>

#include "fedra/types.hpp"

namespace fedra {

enum class AttackKind { None, LabelFlip, Lie, Optimize };

std::string attack_name(AttackKind kind);

struct AttackSpec {
  AttackKind kind = AttackKind::None;
  // LIE noise multiplier; absent means lie_default_z for the round.
  std::optional<double> z;
  // Optimize step against the benign direction.
  double lambda = 4.0;
  // Quantity-enlarging factor.
  double alpha_q = 0.0;
};

void validate(const AttackSpec& spec);

int flip_label(int label, int num_classes);

// Phi^-1(1 - (floor(n/2) + 1 - m) / (n - m)), clamped to [0, 3].
double lie_default_z(int n, int m);

// mean + z * std per coordinate over the colluders' honest updates
// (Bessel-corrected std). With fewer than two colluders the single honest
// update is returned unchanged.
UpdateVector lie_update(std::span<const UpdateVector> colluders, double z);

// mean - lambda * sign(mean) * std per coordinate; std is zero for a single
// colluder.
UpdateVector optimize_update(std::span<const UpdateVector> colluders, double lambda);

// round(mean_q + alpha_q * std_q) over the colluders' true quantities,
// at least 1.
Quantity enhanced_quantity(std::span<const Quantity> colluder_quantities, double alpha_q);

}  // namespace fedra
