#ifndef UWBLOC_EVAL_HPP_
#define UWBLOC_EVAL_HPP_

#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwbloc/log_io.hpp"
#include "uwbloc/records.hpp"

namespace uwbloc {

struct ErrorStats {
  double max_error = 0.0;   // meters
  double mean_error = 0.0;  // meters
  Vec3 rmse_axis = Vec3::Zero();
  std::size_t count = 0;  // samples included after warmup
};

/// Position-error statistics against linearly interpolated truth. Estimates
/// inside the warmup window (first warmup_s seconds of the estimate stream)
/// are excluded.
ErrorStats position_errors(std::span<const StateEstimate> estimates,
                           std::span<const TruthRecord> truth,
                           double warmup_s = 2.0);

struct LatencyParams {
  double grid_hz = 100.0;
  double max_lag_s = 2.0;
  double lag_step_s = 0.01;
  double min_overlap_s = 10.0;
  double min_truth_variance = 1e-4;  // m^2 on the chosen axis
};

/// Estimate-behind-truth lag on one axis (0=x, 1=y, 2=z): both series are
/// resampled to a uniform grid and the lag maximizing their normalized
/// cross-correlation is returned (positive = estimate lags truth).
/// Throws InsufficientInput (< min_overlap_s of common data) and
/// InsufficientExcitation (truth variance below min_truth_variance).
double latency(std::span<const StateEstimate> estimates,
               std::span<const TruthRecord> truth, int axis,
               const LatencyParams& params = {});

/// Axis with the largest truth position variance.
int dominant_axis(std::span<const TruthRecord> truth);

struct EstimatorReport {
  std::string name;
  double max_error = 0.0;
  double mean_error = 0.0;
  Vec3 rmse_axis = Vec3::Zero();
  std::optional<double> latency_s;  // unset when excitation is insufficient
  int latency_axis = 0;
  long accepted = 0;
  long rejected = 0;
};

struct EvalReport {
  double warmup_s = 2.0;
  std::vector<EstimatorReport> estimators;
};

struct NamedEstimates {
  std::string name;
  EstimatesData data;
};

/// Full report for one or more estimate streams against one log.
EvalReport evaluate(const LogData& log,
                    const std::vector<NamedEstimates>& estimates,
                    double warmup_s = 2.0);

/// Lossless JSON round-trip.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Flat `metric,estimator,value` rows.
void write_metrics_csv(std::ostream& out, const EvalReport& report);

/// Per-estimate rows `t,truth_px,..,truth_vz,est_px,..,est_abz` with truth
/// linearly interpolated to the estimate timestamps.
void write_timeseries_csv(std::ostream& out,
                          std::span<const StateEstimate> estimates,
                          std::span<const TruthRecord> truth);

}  // namespace uwbloc

#endif  // UWBLOC_EVAL_HPP_
