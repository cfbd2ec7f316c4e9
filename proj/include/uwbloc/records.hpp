#ifndef UWBLOC_RECORDS_HPP_
#define UWBLOC_RECORDS_HPP_

#include <cstdint>
#include <vector>

#include "uwbloc/geometry.hpp"

namespace uwbloc {

/// One scalar two-way range to a single anchor.
struct RangeSample {
  double t = 0.0;        // seconds
  int anchor_id = 0;     // 0..5
  double range = 0.0;    // meters, >= 0
  double sigma_r = 0.0;  // sensor-reported std-dev, meters, > 0
  bool truth_outlier = false;  // simulator-only ground-truth label
};

/// World-frame, gravity-compensated acceleration sample.
struct ImuSample {
  double t = 0.0;
  Vec3 accel = Vec3::Zero();  // m/s^2
};

/// Ground-truth kinematic sample produced by the trajectory generator.
struct TruthSample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

/// Ground-truth record as stored in log files (bias instead of acceleration).
struct TruthRecord {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
};

/// Filter output at one timestamp. accel_bias is zero for the 6-state filter.
struct StateEstimate {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
};

/// Result of one measurement update. innovation = measured - predicted range;
/// |innovation| is the gate distance. gate_active tells whether the gate was
/// armed (threshold configured and warmup elapsed) when the sample arrived.
struct UpdateOutcome {
  bool accepted = true;
  double innovation = 0.0;
  bool gate_active = false;
};

/// Per-update outcome record for gating analysis.
struct UpdateRecord {
  double t = 0.0;
  int anchor_id = 0;
  bool accepted = true;
  double innovation = 0.0;
  bool gate_active = false;
};

}  // namespace uwbloc

#endif  // UWBLOC_RECORDS_HPP_
