#ifndef UWBLOC_REPLAY_HPP_
#define UWBLOC_REPLAY_HPP_

#include "uwbloc/fusion_ekf.hpp"
#include "uwbloc/log_io.hpp"
#include "uwbloc/vanilla_ekf.hpp"

namespace uwbloc {

enum class FilterKind { kVanilla, kFusion };

/// Replays a time-sorted log through a filter. Initialization is a
/// multilateration solve over the first 6 range samples (one TDMA round);
/// one estimate is emitted per subsequent range sample. Deterministic.
///
/// The vanilla filter consumes range records only; the fusion filter also
/// consumes imu records and throws InsufficientInput when ranges are present
/// but no imu records are.
EstimatesData replay(const LogData& log, const AnchorMap& anchors,
                     const VanillaConfig& config);
EstimatesData replay(const LogData& log, const AnchorMap& anchors,
                     const FusionConfig& config);

EstimatesData replay(const LogData& log, const AnchorMap& anchors,
                     FilterKind kind, const VanillaConfig& vanilla,
                     const FusionConfig& fusion);

}  // namespace uwbloc

#endif  // UWBLOC_REPLAY_HPP_
