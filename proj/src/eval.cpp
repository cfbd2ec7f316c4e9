#include "uwbloc/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "uwbloc/errors.hpp"

namespace uwbloc {

namespace {

using ordered_json = nlohmann::ordered_json;

struct TruthInterpolator {
  std::span<const TruthRecord> truth;

  bool covers(double t) const {
    return !truth.empty() && t >= truth.front().t - 1e-9 &&
           t <= truth.back().t + 1e-9;
  }

  TruthRecord at(double t) const {
    auto hi = std::lower_bound(
        truth.begin(), truth.end(), t,
        [](const TruthRecord& r, double tv) { return r.t < tv; });
    if (hi == truth.begin()) return truth.front();
    if (hi == truth.end()) return truth.back();
    const TruthRecord& b = *hi;
    const TruthRecord& a = *(hi - 1);
    const double h = b.t - a.t;
    const double u = h > 0.0 ? (t - a.t) / h : 0.0;
    TruthRecord r;
    r.t = t;
    r.position = (1 - u) * a.position + u * b.position;
    r.velocity = (1 - u) * a.velocity + u * b.velocity;
    r.accel_bias = (1 - u) * a.accel_bias + u * b.accel_bias;
    return r;
  }
};

// Linear resampling of (t, value) pairs onto a uniform grid.
std::vector<double> resample(const std::vector<double>& ts,
                             const std::vector<double>& values, double t0,
                             double dt, std::size_t count) {
  std::vector<double> out(count);
  std::size_t j = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    while (j + 1 < ts.size() && ts[j + 1] < t) ++j;
    if (j + 1 >= ts.size()) {
      out[i] = values.back();
      continue;
    }
    const double h = ts[j + 1] - ts[j];
    const double u = h > 0.0 ? std::clamp((t - ts[j]) / h, 0.0, 1.0) : 0.0;
    out[i] = (1 - u) * values[j] + u * values[j + 1];
  }
  return out;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void append_number(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
}

ordered_json vec3_json(const Vec3& v) {
  return ordered_json::array({v.x(), v.y(), v.z()});
}

Vec3 vec3_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

ErrorStats position_errors(std::span<const StateEstimate> estimates,
                           std::span<const TruthRecord> truth,
                           double warmup_s) {
  ErrorStats stats;
  if (estimates.empty() || truth.empty()) return stats;
  const TruthInterpolator interp{truth};
  const double start = estimates.front().t + warmup_s;
  double sum = 0.0;
  Vec3 sq_sum = Vec3::Zero();
  for (const StateEstimate& e : estimates) {
    if (e.t < start || !interp.covers(e.t)) continue;
    const Vec3 diff = e.position - interp.at(e.t).position;
    const double err = diff.norm();
    stats.max_error = std::max(stats.max_error, err);
    sum += err;
    sq_sum += diff.cwiseProduct(diff);
    ++stats.count;
  }
  if (stats.count > 0) {
    const auto n = static_cast<double>(stats.count);
    stats.mean_error = sum / n;
    stats.rmse_axis = (sq_sum / n).cwiseSqrt();
  }
  return stats;
}

int dominant_axis(std::span<const TruthRecord> truth) {
  Vec3 mean = Vec3::Zero();
  for (const TruthRecord& r : truth) mean += r.position;
  if (!truth.empty()) mean /= static_cast<double>(truth.size());
  Vec3 var = Vec3::Zero();
  for (const TruthRecord& r : truth) {
    const Vec3 d = r.position - mean;
    var += d.cwiseProduct(d);
  }
  int axis = 0;
  var.maxCoeff(&axis);
  return axis;
}

double latency(std::span<const StateEstimate> estimates,
               std::span<const TruthRecord> truth, int axis,
               const LatencyParams& params) {
  if (axis < 0 || axis > 2) throw ConfigError("axis must be 0, 1 or 2");
  if (estimates.size() < 2 || truth.size() < 2) {
    throw InsufficientInput("latency needs two non-trivial series");
  }
  const double t0 = std::max(estimates.front().t, truth.front().t);
  const double t1 = std::min(estimates.back().t, truth.back().t);
  if (t1 - t0 < params.min_overlap_s) {
    throw InsufficientInput("latency needs >= " +
                            std::to_string(params.min_overlap_s) +
                            " s of overlapping data, got " +
                            std::to_string(t1 - t0) + " s");
  }

  const double dt = 1.0 / params.grid_hz;
  const auto count = static_cast<std::size_t>((t1 - t0) / dt) + 1;

  std::vector<double> et(estimates.size()), ev(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    et[i] = estimates[i].t;
    ev[i] = estimates[i].position(axis);
  }
  std::vector<double> gt(truth.size()), gv(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    gt[i] = truth[i].t;
    gv[i] = truth[i].position(axis);
  }
  const std::vector<double> e = resample(et, ev, t0, dt, count);
  const std::vector<double> g = resample(gt, gv, t0, dt, count);

  const double g_mean = mean_of(g);
  double g_var = 0.0;
  for (double x : g) g_var += (x - g_mean) * (x - g_mean);
  g_var /= static_cast<double>(g.size());
  if (g_var < params.min_truth_variance) {
    throw InsufficientExcitation(
        "truth variance " + std::to_string(g_var) + " m^2 on axis " +
        std::to_string(axis) + " is below " +
        std::to_string(params.min_truth_variance));
  }

  const int max_shift = static_cast<int>(
      std::lround(params.max_lag_s / params.lag_step_s));
  const int stride =
      std::max(1, static_cast<int>(std::lround(params.lag_step_s / dt)));
  const auto n = static_cast<int>(count);

  double best_ncc = -std::numeric_limits<double>::infinity();
  int best_shift = 0;
  for (int shift = -max_shift; shift <= max_shift; ++shift) {
    const int k = shift * stride;
    // Positive lag: estimate at i matches truth at i - k.
    const int lo = std::max(0, k);
    const int hi = std::min(n, n + k);
    const int m = hi - lo;
    if (m < 2) continue;
    double se = 0.0, sg = 0.0;
    for (int i = lo; i < hi; ++i) {
      se += e[i];
      sg += g[i - k];
    }
    const double me = se / m, mg = sg / m;
    double cov = 0.0, vare = 0.0, varg = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double de = e[i] - me;
      const double dg = g[i - k] - mg;
      cov += de * dg;
      vare += de * de;
      varg += dg * dg;
    }
    if (vare <= 0.0 || varg <= 0.0) continue;
    const double ncc = cov / std::sqrt(vare * varg);
    if (ncc > best_ncc) {
      best_ncc = ncc;
      best_shift = shift;
    }
  }
  return static_cast<double>(best_shift) * params.lag_step_s;
}

EvalReport evaluate(const LogData& log,
                    const std::vector<NamedEstimates>& estimates,
                    double warmup_s) {
  EvalReport report;
  report.warmup_s = warmup_s;
  for (const NamedEstimates& named : estimates) {
    EstimatorReport r;
    r.name = named.name;
    const ErrorStats stats =
        position_errors(named.data.estimates, log.truth, warmup_s);
    r.max_error = stats.max_error;
    r.mean_error = stats.mean_error;
    r.rmse_axis = stats.rmse_axis;
    for (const UpdateRecord& u : named.data.updates) {
      (u.accepted ? r.accepted : r.rejected) += 1;
    }
    r.latency_axis = dominant_axis(log.truth);
    if (!named.data.estimates.empty()) {
      // The initialization transient would bias the correlation peak, so the
      // lag search sees the same post-warmup slice as the error statistics.
      const double start = named.data.estimates.front().t + warmup_s;
      const auto first = std::lower_bound(
          named.data.estimates.begin(), named.data.estimates.end(), start,
          [](const StateEstimate& e, double tv) { return e.t < tv; });
      const auto offset =
          static_cast<std::size_t>(first - named.data.estimates.begin());
      const auto tail =
          std::span<const StateEstimate>(named.data.estimates).subspan(offset);
      try {
        r.latency_s = latency(tail, log.truth, r.latency_axis);
      } catch (const Error&) {
        r.latency_s.reset();  // hover-style runs have no measurable lag
      }
    }
    report.estimators.push_back(std::move(r));
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["warmup_s"] = report.warmup_s;
  j["estimators"] = ordered_json::array();
  for (const EstimatorReport& r : report.estimators) {
    ordered_json e;
    e["name"] = r.name;
    e["max_error_m"] = r.max_error;
    e["mean_error_m"] = r.mean_error;
    e["rmse_axis_m"] = vec3_json(r.rmse_axis);
    if (r.latency_s) {
      e["latency_s"] = *r.latency_s;
    } else {
      e["latency_s"] = nullptr;
    }
    e["latency_axis"] = r.latency_axis;
    e["accepted"] = r.accepted;
    e["rejected"] = r.rejected;
    j["estimators"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  EvalReport report;
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid report JSON: ") + e.what());
  }
  report.warmup_s = j.at("warmup_s").get<double>();
  for (const auto& e : j.at("estimators")) {
    EstimatorReport r;
    r.name = e.at("name").get<std::string>();
    r.max_error = e.at("max_error_m").get<double>();
    r.mean_error = e.at("mean_error_m").get<double>();
    r.rmse_axis = vec3_from(e.at("rmse_axis_m"));
    if (!e.at("latency_s").is_null()) {
      r.latency_s = e.at("latency_s").get<double>();
    }
    r.latency_axis = e.at("latency_axis").get<int>();
    r.accepted = e.at("accepted").get<long>();
    r.rejected = e.at("rejected").get<long>();
    report.estimators.push_back(std::move(r));
  }
  return report;
}

void write_metrics_csv(std::ostream& out, const EvalReport& report) {
  out << "metric,estimator,value\n";
  const auto row = [&out](const char* metric, const std::string& name,
                          double value) {
    std::string line = metric;
    line += ',';
    line += name;
    line += ',';
    append_number(line, value);
    line += '\n';
    out << line;
  };
  for (const EstimatorReport& r : report.estimators) {
    row("max_error_m", r.name, r.max_error);
    row("mean_error_m", r.name, r.mean_error);
    row("rmse_x_m", r.name, r.rmse_axis.x());
    row("rmse_y_m", r.name, r.rmse_axis.y());
    row("rmse_z_m", r.name, r.rmse_axis.z());
    if (r.latency_s) row("latency_s", r.name, *r.latency_s);
    row("accepted", r.name, static_cast<double>(r.accepted));
    row("rejected", r.name, static_cast<double>(r.rejected));
  }
}

void write_timeseries_csv(std::ostream& out,
                          std::span<const StateEstimate> estimates,
                          std::span<const TruthRecord> truth) {
  out << "t,truth_px,truth_py,truth_pz,truth_vx,truth_vy,truth_vz,"
         "est_px,est_py,est_pz,est_vx,est_vy,est_vz,"
         "est_abx,est_aby,est_abz\n";
  const TruthInterpolator interp{truth};
  std::string line;
  for (const StateEstimate& e : estimates) {
    if (!interp.covers(e.t)) continue;
    const TruthRecord g = interp.at(e.t);
    line.clear();
    append_number(line, e.t);
    for (const double v :
         {g.position.x(), g.position.y(), g.position.z(), g.velocity.x(),
          g.velocity.y(), g.velocity.z(), e.position.x(), e.position.y(),
          e.position.z(), e.velocity.x(), e.velocity.y(), e.velocity.z(),
          e.accel_bias.x(), e.accel_bias.y(), e.accel_bias.z()}) {
      line += ',';
      append_number(line, v);
    }
    line += '\n';
    out << line;
  }
}

}  // namespace uwbloc
