#ifndef UWBLOC_SIM_HPP_
#define UWBLOC_SIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "uwbloc/geometry.hpp"
#include "uwbloc/records.hpp"

namespace uwbloc {

inline constexpr double kRangeRateHz = 80.0;  // TDMA slot rate, 6-anchor round-robin
inline constexpr double kImuRateHz = 50.0;
inline constexpr double kTruthRateHz = 100.0;

struct Waypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

struct TrajectorySpec {
  enum class Kind { kHover, kLine, kCircle, kLissajous, kWaypoints };

  Kind kind = Kind::kHover;
  Vec3 center{7.0, 12.0, 1.5};
  // Lissajous: per-axis sinusoids center + amplitude * sin(2*pi*t/period + phase).
  // Line: sinusoidal oscillation along `axis`, amplitude/period/phase from
  // the x components. Circle: xy-plane, radius_m and period from period_s.x().
  Vec3 amplitude = Vec3::Zero();
  Vec3 period_s = Vec3::Ones();
  Vec3 phase_rad = Vec3::Zero();
  Vec3 axis{1.0, 0.0, 0.0};
  double radius_m = 1.0;
  std::vector<Waypoint> waypoints;  // kWaypoints: natural cubic spline knots
  double duration_s = 60.0;
  double v_max = 1.2;   // m/s, flight envelope
  double a_max = 2.0;   // m/s^2
};

struct NoiseSpec {
  double range_sigma = 0.10;     // meters
  double outlier_rate = 0.0;     // probability per range sample
  double outlier_min = 2.0;      // meters, displacement magnitude bounds
  double outlier_max = 6.0;
  double imu_sigma = 0.35;       // m/s^2 per axis
  Vec3 bias_initial = Vec3::Zero();   // m/s^2
  double bias_walk_sigma = 0.0;  // m/s^2 per sqrt(s)
  std::uint64_t seed = 0;
};

/// Exact kinematics of the analytic trajectory at time t.
TruthSample evaluate_trajectory(const TrajectorySpec& spec, double t);

/// Validates the velocity/acceleration envelope by dense sampling (1 kHz)
/// and waypoint/parameter sanity. Throws EnvelopeViolation or ConfigError.
void validate_trajectory(const TrajectorySpec& spec);

/// C2-continuous trajectory sampled at rate_hz over [0, duration).
/// Throws EnvelopeViolation if spec parameters exceed the envelope.
std::vector<TruthSample> generate_truth(const TrajectorySpec& spec,
                                        double rate_hz);

/// Interpolates a sampled trajectory: cubic Hermite for position (uses the
/// stored velocities), linear for velocity and acceleration. t must lie
/// within the sampled span.
TruthSample truth_at(std::span<const TruthSample> truth, double t);

/// 80 Hz TDMA round-robin ranges: anchor_id(n) = n mod 6, t(n) = n / 80.
/// Clean samples are true distance + Gaussian(0, range_sigma); with
/// probability outlier_rate a sample is displaced by a uniformly drawn
/// magnitude in [outlier_min, outlier_max] with random sign and labeled.
std::vector<RangeSample> sample_ranges(std::span<const TruthSample> truth,
                                       const AnchorMap& anchors,
                                       const NoiseSpec& noise);

struct ImuSeries {
  std::vector<ImuSample> samples;
  std::vector<Vec3> bias_truth;  // ground-truth bias at each sample time
};

/// 50 Hz IMU: measured = true acceleration + bias(t) + Gaussian(0, imu_sigma);
/// bias random-walks from bias_initial with per-step std bias_walk_sigma*sqrt(dt).
ImuSeries sample_imu(std::span<const TruthSample> truth,
                     const NoiseSpec& noise);

struct SimRun {
  std::vector<TruthSample> truth;   // at kTruthRateHz
  std::vector<RangeSample> ranges;  // at kRangeRateHz
  ImuSeries imu;                    // at kImuRateHz
};

/// One deterministic end-to-end sensor run. Pure function of
/// (spec, noise, anchors); identical seeds give bit-identical output.
SimRun simulate_run(const TrajectorySpec& spec, const NoiseSpec& noise,
                    const AnchorMap& anchors);

}  // namespace uwbloc

#endif  // UWBLOC_SIM_HPP_
