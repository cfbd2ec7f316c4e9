#ifndef UWBLOC_MULTILATERATION_HPP_
#define UWBLOC_MULTILATERATION_HPP_

#include <optional>
#include <vector>

#include "uwbloc/geometry.hpp"

namespace uwbloc {

struct RangeObservation {
  Vec3 anchor = Vec3::Zero();
  double range = 0.0;
};

struct MultilaterationResult {
  Vec3 position = Vec3::Zero();
  double rms_residual = 0.0;
  int iterations = 0;
};

/// Position from >= 4 simultaneous ranges: closed-form linear seed
/// (difference-of-squares system) refined by damped Gauss-Newton on the
/// range residuals. Returns nullopt when the geometry does not pin down a
/// solution (rank-deficient linear system or non-converging refinement).
std::optional<MultilaterationResult> solve_position(
    const std::vector<RangeObservation>& observations, int max_iterations = 30);

}  // namespace uwbloc

#endif  // UWBLOC_MULTILATERATION_HPP_
