#include "uwbloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "uwbloc/errors.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kEnvelopeProbeHz = 1000.0;
constexpr double kEnvelopeSlack = 1e-9;
constexpr double kSigmaReportFloor = 1e-6;  // keeps sigma_r > 0 in records

// RNG substream tags; changing these changes every generated stream.
constexpr std::uint64_t kRangeStreamTag = 1;
constexpr std::uint64_t kImuStreamTag = 2;

// Natural cubic spline through (t_i, value_i), one per axis.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> ts, std::vector<double> values)
      : t_(std::move(ts)), y_(std::move(values)) {
    const std::size_t n = t_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    // Tridiagonal solve for second derivatives, natural end conditions.
    const int last = static_cast<int>(n) - 1;
    std::vector<double> diag(n, 2.0), rhs(n, 0.0), upper(n, 0.0), lower(n, 0.0);
    for (int i = 1; i < last; ++i) {
      const double h0 = t_[i] - t_[i - 1];
      const double h1 = t_[i + 1] - t_[i];
      lower[i] = h0;
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    // Interior unknowns only; m_[0] = m_[last] = 0.
    for (int i = 2; i < last; ++i) {
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (int i = last - 1; i >= 1; --i) {
      m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    }
  }

  void eval(double t, double& p, double& v, double& a) const {
    const std::size_t n = t_.size();
    std::size_t hi = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin();
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    const std::size_t lo = hi - 1;
    const double h = t_[hi] - t_[lo];
    const double x0 = t_[hi] - t;
    const double x1 = t - t_[lo];
    p = m_[lo] * x0 * x0 * x0 / (6.0 * h) + m_[hi] * x1 * x1 * x1 / (6.0 * h) +
        (y_[lo] / h - m_[lo] * h / 6.0) * x0 +
        (y_[hi] / h - m_[hi] * h / 6.0) * x1;
    v = -m_[lo] * x0 * x0 / (2.0 * h) + m_[hi] * x1 * x1 / (2.0 * h) -
        (y_[lo] / h - m_[lo] * h / 6.0) + (y_[hi] / h - m_[hi] * h / 6.0);
    a = m_[lo] * x0 / h + m_[hi] * x1 / h;
  }

 private:
  std::vector<double> t_, y_;
  std::vector<double> m_;  // second derivatives at knots
};

struct WaypointSplines {
  CubicSpline x, y, z;
};

WaypointSplines build_waypoint_splines(const TrajectorySpec& spec) {
  const auto& wp = spec.waypoints;
  std::vector<double> ts(wp.size());
  std::vector<double> xs(wp.size()), ys(wp.size()), zs(wp.size());
  for (std::size_t i = 0; i < wp.size(); ++i) {
    ts[i] = wp[i].t;
    xs[i] = wp[i].position.x();
    ys[i] = wp[i].position.y();
    zs[i] = wp[i].position.z();
  }
  return {CubicSpline(ts, xs), CubicSpline(std::vector<double>(ts), ys),
          CubicSpline(std::move(ts), zs)};
}

void check_waypoints(const TrajectorySpec& spec) {
  if (spec.waypoints.size() < 2) {
    throw ConfigError("waypoint trajectory needs at least 2 waypoints");
  }
  for (std::size_t i = 1; i < spec.waypoints.size(); ++i) {
    if (!(spec.waypoints[i].t > spec.waypoints[i - 1].t)) {
      throw ConfigError("waypoint timestamps must be strictly increasing");
    }
  }
  if (spec.duration_s >
      spec.waypoints.back().t - spec.waypoints.front().t + 1e-12) {
    throw ConfigError("duration exceeds the waypoint time span");
  }
}

TruthSample eval_at(const TrajectorySpec& spec, const WaypointSplines* splines,
                    double t) {
  TruthSample s;
  s.t = t;
  switch (spec.kind) {
    case TrajectorySpec::Kind::kHover:
      s.position = spec.center;
      break;
    case TrajectorySpec::Kind::kLine: {
      const Vec3 dir = spec.axis.normalized();
      const double omega = kTwoPi / spec.period_s.x();
      const double arg = omega * t + spec.phase_rad.x();
      s.position = spec.center + dir * (spec.amplitude.x() * std::sin(arg));
      s.velocity = dir * (spec.amplitude.x() * omega * std::cos(arg));
      s.acceleration =
          dir * (-spec.amplitude.x() * omega * omega * std::sin(arg));
      break;
    }
    case TrajectorySpec::Kind::kCircle: {
      const double omega = kTwoPi / spec.period_s.x();
      const double arg = omega * t + spec.phase_rad.x();
      const double c = std::cos(arg), sn = std::sin(arg);
      s.position = spec.center + Vec3(spec.radius_m * c, spec.radius_m * sn, 0);
      s.velocity = Vec3(-spec.radius_m * omega * sn, spec.radius_m * omega * c, 0);
      s.acceleration = Vec3(-spec.radius_m * omega * omega * c,
                            -spec.radius_m * omega * omega * sn, 0);
      break;
    }
    case TrajectorySpec::Kind::kLissajous: {
      for (int i = 0; i < 3; ++i) {
        const double omega = kTwoPi / spec.period_s(i);
        const double arg = omega * t + spec.phase_rad(i);
        s.position(i) = spec.center(i) + spec.amplitude(i) * std::sin(arg);
        s.velocity(i) = spec.amplitude(i) * omega * std::cos(arg);
        s.acceleration(i) = -spec.amplitude(i) * omega * omega * std::sin(arg);
      }
      break;
    }
    case TrajectorySpec::Kind::kWaypoints: {
      const double tq = t + spec.waypoints.front().t;
      splines->x.eval(tq, s.position.x(), s.velocity.x(), s.acceleration.x());
      splines->y.eval(tq, s.position.y(), s.velocity.y(), s.acceleration.y());
      splines->z.eval(tq, s.position.z(), s.velocity.z(), s.acceleration.z());
      break;
    }
  }
  return s;
}

void check_params(const TrajectorySpec& spec) {
  if (spec.duration_s <= 0.0) throw ConfigError("duration must be > 0");
  if (spec.v_max <= 0.0 || spec.a_max <= 0.0) {
    throw ConfigError("v_max and a_max must be > 0");
  }
  switch (spec.kind) {
    case TrajectorySpec::Kind::kLine:
      if (spec.period_s.x() <= 0.0) throw ConfigError("period must be > 0");
      if (spec.axis.norm() < 1e-12) throw ConfigError("line axis is zero");
      break;
    case TrajectorySpec::Kind::kCircle:
      if (spec.period_s.x() <= 0.0) throw ConfigError("period must be > 0");
      if (spec.radius_m <= 0.0) throw ConfigError("radius must be > 0");
      break;
    case TrajectorySpec::Kind::kLissajous:
      if ((spec.period_s.array() <= 0.0).any()) {
        throw ConfigError("all lissajous periods must be > 0");
      }
      break;
    case TrajectorySpec::Kind::kWaypoints:
      check_waypoints(spec);
      break;
    case TrajectorySpec::Kind::kHover:
      break;
  }
}

}  // namespace

TruthSample evaluate_trajectory(const TrajectorySpec& spec, double t) {
  check_params(spec);
  if (spec.kind == TrajectorySpec::Kind::kWaypoints) {
    const WaypointSplines splines = build_waypoint_splines(spec);
    return eval_at(spec, &splines, t);
  }
  return eval_at(spec, nullptr, t);
}

void validate_trajectory(const TrajectorySpec& spec) {
  check_params(spec);
  std::optional<WaypointSplines> splines;
  if (spec.kind == TrajectorySpec::Kind::kWaypoints) {
    splines = build_waypoint_splines(spec);
  }

  const auto steps =
      static_cast<std::size_t>(spec.duration_s * kEnvelopeProbeHz) + 1;
  for (std::size_t n = 0; n <= steps; ++n) {
    const double t =
        std::min(static_cast<double>(n) / kEnvelopeProbeHz, spec.duration_s);
    const TruthSample s = eval_at(spec, splines ? &*splines : nullptr, t);
    const double v = s.velocity.norm();
    const double a = s.acceleration.norm();
    if (v > spec.v_max + kEnvelopeSlack) {
      throw EnvelopeViolation("speed " + std::to_string(v) + " m/s at t=" +
                              std::to_string(t) + " exceeds v_max " +
                              std::to_string(spec.v_max));
    }
    if (a > spec.a_max + kEnvelopeSlack) {
      throw EnvelopeViolation("acceleration " + std::to_string(a) +
                              " m/s^2 at t=" + std::to_string(t) +
                              " exceeds a_max " + std::to_string(spec.a_max));
    }
  }
}

std::vector<TruthSample> generate_truth(const TrajectorySpec& spec,
                                        double rate_hz) {
  if (rate_hz <= 0.0) throw ConfigError("truth rate must be > 0");
  validate_trajectory(spec);

  std::optional<WaypointSplines> splines;
  if (spec.kind == TrajectorySpec::Kind::kWaypoints) {
    splines = build_waypoint_splines(spec);
  }

  std::vector<TruthSample> out;
  const auto count =
      static_cast<std::size_t>(std::ceil(spec.duration_s * rate_hz - 1e-9));
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double t = static_cast<double>(n) / rate_hz;
    out.push_back(eval_at(spec, splines ? &*splines : nullptr, t));
  }
  return out;
}

TruthSample truth_at(std::span<const TruthSample> truth, double t) {
  if (truth.empty()) throw InsufficientInput("empty truth sequence");
  if (t < truth.front().t - 1e-9 || t > truth.back().t + 1e-9) {
    throw InsufficientInput("t=" + std::to_string(t) +
                            " outside the truth span");
  }
  auto hi = std::lower_bound(
      truth.begin(), truth.end(), t,
      [](const TruthSample& s, double tv) { return s.t < tv; });
  if (hi == truth.begin()) return truth.front();
  if (hi == truth.end()) return truth.back();
  const TruthSample& b = *hi;
  const TruthSample& a = *(hi - 1);
  const double h = b.t - a.t;
  if (h <= 0.0) return a;
  const double u = (t - a.t) / h;

  TruthSample s;
  s.t = t;
  // Cubic Hermite on position from stored velocities.
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  s.position = h00 * a.position + h10 * h * a.velocity + h01 * b.position +
               h11 * h * b.velocity;
  s.velocity = (1 - u) * a.velocity + u * b.velocity;
  s.acceleration = (1 - u) * a.acceleration + u * b.acceleration;
  return s;
}

std::vector<RangeSample> sample_ranges(std::span<const TruthSample> truth,
                                       const AnchorMap& anchors,
                                       const NoiseSpec& noise) {
  std::vector<RangeSample> out;
  if (truth.empty()) return out;
  Rng rng = Rng::substream(noise.seed, kRangeStreamTag);
  const double span_end = truth.back().t;
  const auto count = static_cast<std::size_t>(
      std::floor(span_end * kRangeRateHz + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double t = static_cast<double>(n) / kRangeRateHz;
    if (t > span_end) break;
    const int anchor_id = static_cast<int>(n % kNumAnchors);
    const Vec3 p = truth_at(truth, t).position;
    const double true_dist = predict_range(p, anchors.position(anchor_id));

    // Fixed draw count per sample keeps the stream aligned across configs.
    const double g = rng.gaussian();
    const double u_outlier = rng.uniform01();
    const double magnitude = rng.uniform(noise.outlier_min, noise.outlier_max);
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;

    RangeSample s;
    s.t = t;
    s.anchor_id = anchor_id;
    s.range = true_dist + noise.range_sigma * g;
    s.truth_outlier = u_outlier < noise.outlier_rate;
    if (s.truth_outlier) s.range += sign * magnitude;
    s.range = std::max(s.range, 0.0);
    s.sigma_r = std::max(noise.range_sigma, kSigmaReportFloor);
    out.push_back(s);
  }
  return out;
}

ImuSeries sample_imu(std::span<const TruthSample> truth,
                     const NoiseSpec& noise) {
  ImuSeries out;
  if (truth.empty()) return out;
  Rng rng = Rng::substream(noise.seed, kImuStreamTag);
  const double dt = 1.0 / kImuRateHz;
  const double walk_step = noise.bias_walk_sigma * std::sqrt(dt);
  const double span_end = truth.back().t;
  Vec3 bias = noise.bias_initial;
  for (std::size_t n = 0;; ++n) {
    const double t = static_cast<double>(n) / kImuRateHz;
    if (t > span_end + 1e-9) break;
    if (n > 0) {
      // Three walk draws then three noise draws, every sample.
      bias += walk_step * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
    } else {
      for (int i = 0; i < 3; ++i) rng.gaussian();
    }
    const Vec3 noise_draw(rng.gaussian(), rng.gaussian(), rng.gaussian());
    ImuSample s;
    s.t = t;
    s.accel =
        truth_at(truth, std::min(t, span_end)).acceleration + bias +
        noise.imu_sigma * noise_draw;
    out.samples.push_back(s);
    out.bias_truth.push_back(bias);
  }
  return out;
}

SimRun simulate_run(const TrajectorySpec& spec, const NoiseSpec& noise,
                    const AnchorMap& anchors) {
  SimRun run;
  run.truth = generate_truth(spec, kTruthRateHz);
  run.ranges = sample_ranges(run.truth, anchors, noise);
  run.imu = sample_imu(run.truth, noise);
  return run;
}

}  // namespace uwbloc
