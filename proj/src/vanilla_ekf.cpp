#include "uwbloc/vanilla_ekf.hpp"

#include <cmath>

#include "uwbloc/errors.hpp"

namespace uwbloc {

VanillaEkf::VanillaEkf(VanillaState init, VanillaConfig cfg)
    : state_(std::move(init)), config_(cfg) {
  if (config_.sigma_a <= 0.0) throw ConfigError("sigma_a must be > 0");
  if (config_.r_floor < 0.0) throw ConfigError("r_floor must be >= 0");
  if (config_.gate_threshold && *config_.gate_threshold <= 0.0) {
    throw ConfigError("gate threshold must be > 0");
  }
  require_finite("init");
}

VanillaState VanillaEkf::initial_state(const Vec3& position, double t) {
  VanillaState s;
  s.x << position.x(), 0.0, position.y(), 0.0, position.z(), 0.0;
  s.P = Mat6::Identity();
  s.t = t;
  return s;
}

VanillaEkf::Mat6 VanillaEkf::transition_matrix(double dt) {
  Mat6 a = Mat6::Identity();
  for (int axis = 0; axis < 3; ++axis) a(2 * axis, 2 * axis + 1) = dt;
  return a;
}

VanillaEkf::Mat6 VanillaEkf::process_noise(double dt, double sigma_a,
                                           QForm form) {
  const double t2 = dt * dt;
  const double t3 = t2 * dt;
  const double t4 = t3 * dt;
  Eigen::Matrix2d block;
  if (form == QForm::kPaper) {
    block << sigma_a * t4 / 3.0, sigma_a * t3 / 2.0,  //
        sigma_a * t3 / 2.0, dt / 2.0;
  } else {
    block << sigma_a * t4 / 4.0, sigma_a * t3 / 2.0,  //
        sigma_a * t3 / 2.0, sigma_a * t2;
  }
  Mat6 q = Mat6::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    q.block<2, 2>(2 * axis, 2 * axis) = block;
  }
  return q;
}

void VanillaEkf::time_update(double dt) {
  if (dt < 0.0) {
    throw NonMonotonicTime("time update with dt = " + std::to_string(dt));
  }
  const Mat6 a = transition_matrix(dt);
  state_.x = a * state_.x;
  state_.P = a * state_.P * a.transpose() +
             process_noise(dt, config_.sigma_a, config_.q_form);
  state_.t += dt;
  symmetrize();
  require_finite("time_update");
}

UpdateOutcome VanillaEkf::measurement_update(const RangeSample& sample,
                                             const AnchorMap& anchors) {
  const Vec3& anchor = anchors.position(sample.anchor_id);
  const double predicted = predict_range(position(), anchor);
  const double innovation = sample.range - predicted;

  const bool gate_active =
      config_.gate_threshold.has_value() &&
      accepted_count_ >= config_.gate_warmup;
  if (gate_active && std::abs(innovation) > *config_.gate_threshold) {
    return {false, innovation, true};
  }

  const Eigen::Matrix<double, 1, 6> h =
      range_jacobian(position(), anchor, StateLayout::kVanilla6);
  const double sigma = std::max(sample.sigma_r, config_.r_floor);
  const double denom = (h * state_.P * h.transpose())(0) + sigma * sigma;
  const Vec6 gain = state_.P * h.transpose() / denom;

  state_.x += gain * innovation;
  state_.P = ((Mat6::Identity() - gain * h) * state_.P).eval();
  symmetrize();
  require_finite("measurement_update");
  ++accepted_count_;
  return {true, innovation, gate_active};
}

Vec3 VanillaEkf::position() const {
  return {state_.x(0), state_.x(2), state_.x(4)};
}

Vec3 VanillaEkf::velocity() const {
  return {state_.x(1), state_.x(3), state_.x(5)};
}

void VanillaEkf::symmetrize() {
  state_.P = (0.5 * (state_.P + state_.P.transpose())).eval();
}

void VanillaEkf::require_finite(const char* where) const {
  if (!state_.x.allFinite() || !state_.P.allFinite() ||
      !std::isfinite(state_.t)) {
    throw NonFiniteState(std::string("non-finite 6-state filter state after ") +
                         where);
  }
}

}  // namespace uwbloc
