#include "uwbloc/fusion_ekf.hpp"

#include <cmath>

#include "uwbloc/errors.hpp"

namespace uwbloc {

FusionEkf::FusionEkf(FusionState init, FusionConfig cfg)
    : state_(std::move(init)), config_(cfg) {
  if (config_.tau_a <= 0.0) throw ConfigError("tau_a must be > 0");
  if (config_.tau_b <= 0.0) throw ConfigError("tau_b must be > 0");
  if (config_.gate_threshold <= 0.0) {
    throw ConfigError("gate threshold must be > 0");
  }
  if (config_.r_floor < 0.0) throw ConfigError("r_floor must be >= 0");
  require_finite("init");
}

FusionState FusionEkf::initial_state(const Vec3& position, double t) {
  FusionState s;
  s.x.setZero();
  s.x(0) = position.x();
  s.x(3) = position.y();
  s.x(6) = position.z();
  s.P.setIdentity();
  for (int axis = 0; axis < 3; ++axis) s.P(3 * axis + 2, 3 * axis + 2) = 0.5;
  s.t = t;
  return s;
}

FusionEkf::Mat9 FusionEkf::transition_matrix(double dt) {
  Eigen::Matrix3d block;
  block << 1.0, dt, -dt * dt / 2.0,  //
      0.0, 1.0, -dt,                 //
      0.0, 0.0, 1.0;
  Mat9 a = Mat9::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    a.block<3, 3>(3 * axis, 3 * axis) = block;
  }
  return a;
}

FusionEkf::Mat9 FusionEkf::input_matrix(double dt) {
  Eigen::Matrix3d block = Eigen::Matrix3d::Zero();
  block(0, 0) = dt * dt / 2.0;
  block(1, 0) = dt;
  Mat9 b = Mat9::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    b.block<3, 3>(3 * axis, 3 * axis) = block;
  }
  return b;
}

FusionEkf::Vec9 FusionEkf::input_vector(const Vec3& accel) {
  Vec9 u = Vec9::Zero();
  u(0) = accel.x();
  u(3) = accel.y();
  u(6) = accel.z();
  return u;
}

FusionEkf::Mat9 FusionEkf::process_noise(double dt, double tau_a,
                                         double tau_b) {
  const double t2 = dt * dt;
  const double t3 = t2 * dt;
  const double t4 = t3 * dt;
  const double t5 = t4 * dt;
  Eigen::Matrix3d block;
  block << t3 * tau_a / 3.0 + t5 * tau_b / 20.0,
      t2 * tau_a / 2.0 + t4 * tau_b / 8.0, -t3 * tau_b / 6.0,  //
      t2 * tau_a / 2.0 + t4 * tau_b / 8.0, dt * tau_a + t3 * tau_b / 3.0,
      -t2 * tau_b / 2.0,  //
      -t3 * tau_b / 6.0, -t2 * tau_b / 2.0, dt * tau_b;
  Mat9 q = Mat9::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    q.block<3, 3>(3 * axis, 3 * axis) = block;
  }
  return q;
}

void FusionEkf::time_update(const ImuSample& imu) {
  if (imu.t < state_.t) {
    throw NonMonotonicTime("IMU sample at t=" + std::to_string(imu.t) +
                           " behind filter time t=" + std::to_string(state_.t));
  }
  advance(imu.t - state_.t, imu.accel);
  last_accel_ = imu.accel;
}

void FusionEkf::propagate_to(double t) {
  if (t < state_.t) {
    throw NonMonotonicTime("propagate_to t=" + std::to_string(t) +
                           " behind filter time t=" + std::to_string(state_.t));
  }
  if (t > state_.t) advance(t - state_.t, last_accel_);
}

UpdateOutcome FusionEkf::measurement_update(const RangeSample& sample,
                                            const AnchorMap& anchors) {
  const Vec3& anchor = anchors.position(sample.anchor_id);
  const double predicted = predict_range(position(), anchor);
  const double innovation = sample.range - predicted;

  const bool gate_active = accepted_count_ >= config_.gate_warmup;
  if (gate_active && std::abs(innovation) > config_.gate_threshold) {
    return {false, innovation, true};
  }

  const Eigen::Matrix<double, 1, 9> h =
      range_jacobian(position(), anchor, StateLayout::kFusion9);
  const double sigma = std::max(sample.sigma_r, config_.r_floor);
  const double denom = (h * state_.P * h.transpose())(0) + sigma * sigma;
  const Vec9 gain = state_.P * h.transpose() / denom;

  state_.x += gain * innovation;
  state_.P = ((Mat9::Identity() - gain * h) * state_.P).eval();
  symmetrize();
  require_finite("measurement_update");
  ++accepted_count_;
  return {true, innovation, gate_active};
}

Vec3 FusionEkf::position() const {
  return {state_.x(0), state_.x(3), state_.x(6)};
}

Vec3 FusionEkf::velocity() const {
  return {state_.x(1), state_.x(4), state_.x(7)};
}

Vec3 FusionEkf::accel_bias() const {
  return {state_.x(2), state_.x(5), state_.x(8)};
}

void FusionEkf::advance(double dt, const Vec3& accel) {
  const Mat9 a = transition_matrix(dt);
  state_.x = a * state_.x + input_matrix(dt) * input_vector(accel);
  state_.P = a * state_.P * a.transpose() +
             process_noise(dt, config_.tau_a, config_.tau_b);
  state_.t += dt;
  symmetrize();
  require_finite("time_update");
}

void FusionEkf::symmetrize() {
  state_.P = (0.5 * (state_.P + state_.P.transpose())).eval();
}

void FusionEkf::require_finite(const char* where) const {
  if (!state_.x.allFinite() || !state_.P.allFinite() ||
      !std::isfinite(state_.t)) {
    throw NonFiniteState(std::string("non-finite 9-state filter state after ") +
                         where);
  }
}

}  // namespace uwbloc
