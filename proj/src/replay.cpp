#include "uwbloc/replay.hpp"

#include <optional>

#include "uwbloc/errors.hpp"
#include "uwbloc/multilateration.hpp"

namespace uwbloc {

namespace {

constexpr std::size_t kInitRound = kNumAnchors;  // ranges consumed by init

std::optional<Vec3> init_position(const std::vector<RangeSample>& ranges,
                                  const AnchorMap& anchors) {
  if (ranges.size() < kInitRound) return std::nullopt;
  std::vector<RangeObservation> obs;
  obs.reserve(kInitRound);
  for (std::size_t i = 0; i < kInitRound; ++i) {
    obs.push_back({anchors.position(ranges[i].anchor_id), ranges[i].range});
  }
  if (const auto solved = solve_position(obs)) return solved->position;
  return anchors.centroid();  // degenerate round, start somewhere sane
}

}  // namespace

EstimatesData replay(const LogData& log, const AnchorMap& anchors,
                     const VanillaConfig& config) {
  EstimatesData out;
  const auto origin = init_position(log.ranges, anchors);
  if (!origin) return out;

  VanillaEkf filter(
      VanillaEkf::initial_state(*origin, log.ranges[kInitRound - 1].t), config);
  for (std::size_t i = kInitRound; i < log.ranges.size(); ++i) {
    const RangeSample& sample = log.ranges[i];
    filter.time_update(sample.t - filter.t());
    const UpdateOutcome outcome = filter.measurement_update(sample, anchors);
    out.updates.push_back({sample.t, sample.anchor_id, outcome.accepted,
                           outcome.innovation, outcome.gate_active});
    out.estimates.push_back(
        {sample.t, filter.position(), filter.velocity(), Vec3::Zero()});
  }
  return out;
}

EstimatesData replay(const LogData& log, const AnchorMap& anchors,
                     const FusionConfig& config) {
  EstimatesData out;
  if (!log.ranges.empty() && log.imu.empty()) {
    throw InsufficientInput(
        "fusion filter needs `imu` records, the log has none");
  }
  const auto origin = init_position(log.ranges, anchors);
  if (!origin) return out;

  FusionEkf filter(
      FusionEkf::initial_state(*origin, log.ranges[kInitRound - 1].t), config);

  // Merge imu and range streams from the init time on; at equal timestamps
  // the imu sample is applied first (matching the log's tie order).
  std::size_t ii = 0;
  while (ii < log.imu.size() && log.imu[ii].t < filter.t()) ++ii;
  for (std::size_t ir = kInitRound; ir < log.ranges.size(); ++ir) {
    const RangeSample& sample = log.ranges[ir];
    while (ii < log.imu.size() && log.imu[ii].t <= sample.t) {
      filter.time_update(log.imu[ii]);
      ++ii;
    }
    filter.propagate_to(sample.t);
    const UpdateOutcome outcome = filter.measurement_update(sample, anchors);
    out.updates.push_back({sample.t, sample.anchor_id, outcome.accepted,
                           outcome.innovation, outcome.gate_active});
    out.estimates.push_back(
        {sample.t, filter.position(), filter.velocity(), filter.accel_bias()});
  }
  return out;
}

EstimatesData replay(const LogData& log, const AnchorMap& anchors,
                     FilterKind kind, const VanillaConfig& vanilla,
                     const FusionConfig& fusion) {
  return kind == FilterKind::kVanilla ? replay(log, anchors, vanilla)
                                      : replay(log, anchors, fusion);
}

}  // namespace uwbloc
