#include "uwbloc/multilateration.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace uwbloc {

namespace {

double total_cost(const std::vector<RangeObservation>& obs, const Vec3& p) {
  double cost = 0.0;
  for (const auto& o : obs) {
    const double r = (p - o.anchor).norm() - o.range;
    cost += r * r;
  }
  return cost;
}

std::optional<Vec3> linear_seed(const std::vector<RangeObservation>& obs) {
  // Subtracting the first squared-range equation from the rest leaves a
  // linear system in the position.
  const int n = static_cast<int>(obs.size()) - 1;
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  const Vec3& a0 = obs[0].anchor;
  const double r0 = obs[0].range;
  for (int i = 0; i < n; ++i) {
    const Vec3& ai = obs[i + 1].anchor;
    const double ri = obs[i + 1].range;
    a.row(i) = 2.0 * (ai - a0).transpose();
    b(i) = ai.squaredNorm() - a0.squaredNorm() - ri * ri + r0 * r0;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) return std::nullopt;
  const Vec3 p = qr.solve(b);
  if (!p.allFinite()) return std::nullopt;
  return p;
}

}  // namespace

std::optional<MultilaterationResult> solve_position(
    const std::vector<RangeObservation>& observations, int max_iterations) {
  if (observations.size() < 4) return std::nullopt;
  for (const auto& o : observations) {
    if (!o.anchor.allFinite() || !std::isfinite(o.range) || o.range < 0.0) {
      return std::nullopt;
    }
  }

  const auto seed = linear_seed(observations);
  if (!seed) return std::nullopt;

  Vec3 p = *seed;
  double cost = total_cost(observations, p);
  double lambda = 1e-6;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Vec3 jtr = Vec3::Zero();
    for (const auto& o : observations) {
      const Vec3 d = p - o.anchor;
      const double dist = d.norm();
      if (dist < 1e-9) continue;  // sitting on an anchor, direction undefined
      const Vec3 j = d / dist;
      jtj += j * j.transpose();
      jtr += j * (dist - o.range);
    }
    const Eigen::Matrix3d damped =
        jtj + lambda * Eigen::Matrix3d::Identity();
    const Vec3 step = damped.ldlt().solve(jtr);
    if (!step.allFinite()) return std::nullopt;

    const Vec3 candidate = p - step;
    const double candidate_cost = total_cost(observations, candidate);
    if (candidate_cost <= cost) {
      p = candidate;
      cost = candidate_cost;
      lambda = std::max(lambda * 0.5, 1e-12);
      if (step.norm() < 1e-10) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e6) break;
    }
  }

  MultilaterationResult result;
  result.position = p;
  result.rms_residual =
      std::sqrt(cost / static_cast<double>(observations.size()));
  result.iterations = iter;
  return result;
}

}  // namespace uwbloc
