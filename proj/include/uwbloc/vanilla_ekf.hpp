#ifndef UWBLOC_VANILLA_EKF_HPP_
#define UWBLOC_VANILLA_EKF_HPP_

#include <Eigen/Core>
#include <optional>

#include "uwbloc/geometry.hpp"
#include "uwbloc/records.hpp"

namespace uwbloc {

/// Process-noise discretization for the constant-velocity filter.
/// kPaper keeps the original implementation's block verbatim, including its
/// sigma-independent T/2 velocity term; kStandard is the conventional
/// white-noise-acceleration block sigma_a * [[T^4/4, T^3/2], [T^3/2, T^2]].
enum class QForm { kPaper, kStandard };

struct VanillaConfig {
  double sigma_a = 0.125;  // process-noise intensity, appears linearly in Q
  double r_floor = 0.01;   // minimum measurement std-dev, meters
  QForm q_form = QForm::kPaper;
  std::optional<double> gate_threshold;  // meters; unset = gating off
  int gate_warmup = 50;  // accepted updates before the gate arms
};

/// 6-state mean/covariance with its timestamp of validity.
/// x = [px, vx, py, vy, pz, vz].
struct VanillaState {
  Eigen::Matrix<double, 6, 1> x = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 6> P = Eigen::Matrix<double, 6, 6>::Identity();
  double t = 0.0;
};

/// Constant-velocity EKF over scalar UWB ranges.
///
/// Single-owner mutable state machine; the static matrix builders are pure.
class VanillaEkf {
 public:
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;

  VanillaEkf(VanillaState init, VanillaConfig cfg);

  /// Position at `position`, velocity zero, covariance 1 m^2 / 1 (m/s)^2.
  static VanillaState initial_state(const Vec3& position, double t);

  /// Block-diagonal constant-velocity transition, blocks [[1, dt], [0, 1]].
  static Mat6 transition_matrix(double dt);

  /// Block-diagonal process noise in the selected form; symmetric.
  static Mat6 process_noise(double dt, double sigma_a, QForm form);

  /// Propagates mean and covariance by dt seconds.
  /// Throws NonMonotonicTime (dt < 0) and NonFiniteState.
  void time_update(double dt);

  /// Scalar EKF range update. The state must already be valid at sample.t.
  /// When gating is configured and armed, a sample whose |innovation| exceeds
  /// the threshold is rejected and the state is left untouched.
  /// Throws DegenerateGeometry and NonFiniteState.
  UpdateOutcome measurement_update(const RangeSample& sample,
                                   const AnchorMap& anchors);

  const VanillaState& state() const { return state_; }
  const VanillaConfig& config() const { return config_; }
  double t() const { return state_.t; }
  Vec3 position() const;
  Vec3 velocity() const;
  int accepted_count() const { return accepted_count_; }

 private:
  void symmetrize();
  void require_finite(const char* where) const;

  VanillaState state_;
  VanillaConfig config_;
  int accepted_count_ = 0;
};

}  // namespace uwbloc

#endif  // UWBLOC_VANILLA_EKF_HPP_
