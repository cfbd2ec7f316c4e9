#ifndef UWBLOC_FUSION_EKF_HPP_
#define UWBLOC_FUSION_EKF_HPP_

#include <Eigen/Core>

#include "uwbloc/geometry.hpp"
#include "uwbloc/records.hpp"

namespace uwbloc {

struct FusionConfig {
  double tau_a = 0.5;   // accelerometer white-noise intensity (tuning value)
  double tau_b = 0.01;  // bias random-walk intensity (tuning value)
  double gate_threshold = 2.0;  // meters
  int gate_warmup = 50;         // accepted updates before the gate arms
  double r_floor = 0.01;        // minimum measurement std-dev, meters
};

/// 9-state mean/covariance with its timestamp of validity.
/// x = [px, vx, abx, py, vy, aby, pz, vz, abz].
struct FusionState {
  Eigen::Matrix<double, 9, 1> x = Eigen::Matrix<double, 9, 1>::Zero();
  Eigen::Matrix<double, 9, 9> P = Eigen::Matrix<double, 9, 9>::Identity();
  double t = 0.0;
};

/// 9-state EKF fusing UWB ranges with IMU acceleration as control input.
/// The accelerometer bias is part of the state; the net acceleration applied
/// during propagation is (measured - estimated bias). Range updates pass
/// through an innovation gate: once armed, a sample whose |innovation|
/// exceeds gate_threshold is rejected and the state is left bit-identical.
///
/// Single-owner mutable state machine; the static matrix builders are pure.
class FusionEkf {
 public:
  using Vec9 = Eigen::Matrix<double, 9, 1>;
  using Mat9 = Eigen::Matrix<double, 9, 9>;

  FusionEkf(FusionState init, FusionConfig cfg);

  /// Position at `position`, velocity and bias zero; covariance 1 m^2
  /// position, 1 (m/s)^2 velocity, 0.5 (m/s^2)^2 bias.
  static FusionState initial_state(const Vec3& position, double t);

  /// Block-diagonal transition, blocks [[1, dt, -dt^2/2], [0, 1, -dt], [0,0,1]].
  static Mat9 transition_matrix(double dt);

  /// Block-diagonal input gain, first column of each block [dt^2/2, dt, 0].
  static Mat9 input_matrix(double dt);

  /// Control vector with acceleration at slots 0, 3, 6 and zeros elsewhere.
  static Vec9 input_vector(const Vec3& accel);

  /// Block-diagonal process noise driven by tau_a (accel noise) and tau_b
  /// (bias random walk); symmetric PSD.
  static Mat9 process_noise(double dt, double tau_a, double tau_b);

  /// Propagates to imu.t applying imu.accel over the whole interval, then
  /// holds that acceleration for later propagate_to calls.
  /// Throws NonMonotonicTime (imu.t < state.t) and NonFiniteState.
  void time_update(const ImuSample& imu);

  /// Propagates to t with the last seen acceleration held zero-order.
  void propagate_to(double t);

  /// Scalar EKF range update with innovation gating. The state must already
  /// be valid at sample.t (see propagate_to).
  /// Throws DegenerateGeometry and NonFiniteState.
  UpdateOutcome measurement_update(const RangeSample& sample,
                                   const AnchorMap& anchors);

  const FusionState& state() const { return state_; }
  const FusionConfig& config() const { return config_; }
  double t() const { return state_.t; }
  Vec3 position() const;
  Vec3 velocity() const;
  Vec3 accel_bias() const;
  int accepted_count() const { return accepted_count_; }

 private:
  void advance(double dt, const Vec3& accel);
  void symmetrize();
  void require_finite(const char* where) const;

  FusionState state_;
  FusionConfig config_;
  Vec3 last_accel_ = Vec3::Zero();
  int accepted_count_ = 0;
};

}  // namespace uwbloc

#endif  // UWBLOC_FUSION_EKF_HPP_
