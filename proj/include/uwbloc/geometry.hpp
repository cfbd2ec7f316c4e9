#ifndef UWBLOC_GEOMETRY_HPP_
#define UWBLOC_GEOMETRY_HPP_

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <vector>

namespace uwbloc {

using Vec3 = Eigen::Vector3d;

/// State-vector layout tag. Position components are interleaved with the
/// per-axis dynamic states: slots (0,2,4) for the 6-state filter
/// [px,vx,py,vy,pz,vz], slots (0,3,6) for the 9-state filter
/// [px,vx,abx,py,vy,aby,pz,vz,abz].
enum class StateLayout { kVanilla6, kFusion9 };

constexpr int state_dim(StateLayout layout) {
  return layout == StateLayout::kVanilla6 ? 6 : 9;
}

constexpr std::array<int, 3> position_slots(StateLayout layout) {
  return layout == StateLayout::kVanilla6 ? std::array<int, 3>{0, 2, 4}
                                          : std::array<int, 3>{0, 3, 6};
}

/// Below this predicted range the measurement Jacobian is undefined.
inline constexpr double kMinPredictedRange = 1e-6;

/// Minimum allowed spacing between any two anchors.
inline constexpr double kMinAnchorSpacing = 0.5;

inline constexpr int kNumAnchors = 6;

struct Anchor {
  int id = 0;
  Vec3 position = Vec3::Zero();
};

/// Fixed set of 6 surveyed anchor positions (NWU, meters), indexed by id 0..5.
class AnchorMap {
 public:
  /// The built-in deployment geometry used by all presets.
  static AnchorMap standard();

  /// Validates: exactly 6 entries, distinct ids 0..5, finite coordinates,
  /// pairwise spacing >= kMinAnchorSpacing. Throws ConfigError.
  static AnchorMap from_entries(const std::vector<Anchor>& entries);

  /// Plain-text file, one `id x y z` per line, '#' starts a comment.
  /// Throws ConfigError naming the offending line.
  static AnchorMap load(const std::filesystem::path& path);

  bool has(int id) const { return id >= 0 && id < kNumAnchors; }

  /// Position of anchor `id`; throws ConfigError for ids outside 0..5.
  const Vec3& position(int id) const;

  const std::array<Vec3, kNumAnchors>& positions() const { return positions_; }

  /// Mean of the anchor positions (always interior to their convex hull).
  Vec3 centroid() const;

 private:
  AnchorMap() = default;
  std::array<Vec3, kNumAnchors> positions_{};
};

/// Euclidean distance between mobile and anchor. Total on finite inputs,
/// symmetric, zero iff the points coincide.
double predict_range(const Vec3& mobile, const Vec3& anchor);

/// Row Jacobian of predict_range w.r.t. the state in the given layout:
/// (p_i - p_Ai) / r at the position slots, zero elsewhere. The nonzero
/// entries form a unit vector. Throws DegenerateGeometry when the predicted
/// range is at or below kMinPredictedRange.
Eigen::RowVectorXd range_jacobian(const Vec3& mobile, const Vec3& anchor,
                                  StateLayout layout);

}  // namespace uwbloc

#endif  // UWBLOC_GEOMETRY_HPP_
