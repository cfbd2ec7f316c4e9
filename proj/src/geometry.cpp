#include "uwbloc/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "uwbloc/errors.hpp"

namespace uwbloc {

AnchorMap AnchorMap::standard() {
  return from_entries({
      {0, {0.0, 0.0, 0.0}},
      {1, {14.6, 0.0, 0.0}},
      {2, {14.6, 25.5, 0.0}},
      {3, {0.0, -1.0, 5.3}},
      {4, {0.0, 26.6, 5.3}},
      {5, {17.4, 10.1, 5.3}},
  });
}

AnchorMap AnchorMap::from_entries(const std::vector<Anchor>& entries) {
  if (entries.size() != kNumAnchors) {
    throw ConfigError("anchor map needs exactly " +
                      std::to_string(kNumAnchors) + " anchors, got " +
                      std::to_string(entries.size()));
  }
  AnchorMap map;
  std::array<bool, kNumAnchors> seen{};
  for (const Anchor& a : entries) {
    if (a.id < 0 || a.id >= kNumAnchors) {
      throw ConfigError("anchor id " + std::to_string(a.id) +
                        " outside 0.." + std::to_string(kNumAnchors - 1));
    }
    if (seen[a.id]) {
      throw ConfigError("duplicate anchor id " + std::to_string(a.id));
    }
    if (!a.position.allFinite()) {
      throw ConfigError("anchor " + std::to_string(a.id) +
                        " has non-finite coordinates");
    }
    seen[a.id] = true;
    map.positions_[a.id] = a.position;
  }
  for (int i = 0; i < kNumAnchors; ++i) {
    for (int j = i + 1; j < kNumAnchors; ++j) {
      const double d = (map.positions_[i] - map.positions_[j]).norm();
      if (d < kMinAnchorSpacing) {
        throw ConfigError("anchors " + std::to_string(i) + " and " +
                          std::to_string(j) + " are only " +
                          std::to_string(d) + " m apart (min " +
                          std::to_string(kMinAnchorSpacing) + " m)");
      }
    }
  }
  return map;
}

AnchorMap AnchorMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open anchors file: " + path.string());
  }
  std::vector<Anchor> entries;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    Anchor a;
    if (!(fields >> a.id)) continue;  // blank or comment-only line
    if (!(fields >> a.position.x() >> a.position.y() >> a.position.z())) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected `id x y z`");
    }
    std::string extra;
    if (fields >> extra) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": trailing content `" + extra + "`");
    }
    entries.push_back(a);
  }
  try {
    return from_entries(entries);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

const Vec3& AnchorMap::position(int id) const {
  if (!has(id)) {
    throw ConfigError("unknown anchor id " + std::to_string(id));
  }
  return positions_[id];
}

Vec3 AnchorMap::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : positions_) sum += p;
  return sum / static_cast<double>(kNumAnchors);
}

double predict_range(const Vec3& mobile, const Vec3& anchor) {
  return (mobile - anchor).norm();
}

Eigen::RowVectorXd range_jacobian(const Vec3& mobile, const Vec3& anchor,
                                  StateLayout layout) {
  const double r = predict_range(mobile, anchor);
  if (!(r > kMinPredictedRange)) {
    throw DegenerateGeometry("predicted range " + std::to_string(r) +
                             " m too small to linearize");
  }
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(state_dim(layout));
  const Vec3 direction = (mobile - anchor) / r;
  const auto slots = position_slots(layout);
  for (int i = 0; i < 3; ++i) h(slots[i]) = direction(i);
  return h;
}

}  // namespace uwbloc
