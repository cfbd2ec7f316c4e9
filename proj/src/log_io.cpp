#include "uwbloc/log_io.hpp"

#include <cmath>
#include <json.hpp>
#include <limits>
#include <set>
#include <string>

#include "uwbloc/errors.hpp"

namespace uwbloc {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json truth_json(const TruthRecord& r) {
  return ordered_json{{"t", r.t},
                      {"type", "truth"},
                      {"px", r.position.x()},
                      {"py", r.position.y()},
                      {"pz", r.position.z()},
                      {"vx", r.velocity.x()},
                      {"vy", r.velocity.y()},
                      {"vz", r.velocity.z()},
                      {"abx", r.accel_bias.x()},
                      {"aby", r.accel_bias.y()},
                      {"abz", r.accel_bias.z()}};
}

ordered_json imu_json(const ImuSample& s) {
  return ordered_json{{"t", s.t},
                      {"type", "imu"},
                      {"ax", s.accel.x()},
                      {"ay", s.accel.y()},
                      {"az", s.accel.z()}};
}

ordered_json range_json(const RangeSample& s) {
  return ordered_json{{"t", s.t},         {"type", "range"},
                      {"anchor", s.anchor_id}, {"r", s.range},
                      {"sigma", s.sigma_r},    {"outlier", s.truth_outlier}};
}

ordered_json estimate_json(const StateEstimate& e) {
  return ordered_json{{"t", e.t},
                      {"type", "est"},
                      {"px", e.position.x()},
                      {"py", e.position.y()},
                      {"pz", e.position.z()},
                      {"vx", e.velocity.x()},
                      {"vy", e.velocity.y()},
                      {"vz", e.velocity.z()},
                      {"abx", e.accel_bias.x()},
                      {"aby", e.accel_bias.y()},
                      {"abz", e.accel_bias.z()}};
}

ordered_json update_json(const UpdateRecord& u) {
  return ordered_json{{"t", u.t},
                      {"type", "update"},
                      {"anchor", u.anchor_id},
                      {"accepted", u.accepted},
                      {"d", std::abs(u.innovation)},
                      {"gated", u.gate_active}};
}

// Strict record parsing: exact key set, typed access, finite numbers.
class RecordParser {
 public:
  RecordParser(const ordered_json& j, long line) : j_(j), line_(line) {
    if (!j_.is_object()) throw SchemaError("record is not an object", line_);
  }

  double number(const char* key) {
    const auto& v = field(key);
    if (!v.is_number()) {
      throw SchemaError(std::string("field `") + key + "` must be a number",
                        line_);
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw SchemaError(std::string("field `") + key + "` is not finite",
                        line_);
    }
    return d;
  }

  int integer(const char* key) {
    const auto& v = field(key);
    if (!v.is_number_integer()) {
      throw SchemaError(std::string("field `") + key + "` must be an integer",
                        line_);
    }
    return v.get<int>();
  }

  bool boolean(const char* key) {
    const auto& v = field(key);
    if (!v.is_boolean()) {
      throw SchemaError(std::string("field `") + key + "` must be a boolean",
                        line_);
    }
    return v.get<bool>();
  }

  std::string text(const char* key) {
    const auto& v = field(key);
    if (!v.is_string()) {
      throw SchemaError(std::string("field `") + key + "` must be a string",
                        line_);
    }
    return v.get<std::string>();
  }

  void done() const {
    if (seen_ != j_.size()) {
      for (const auto& [key, value] : j_.items()) {
        if (!used_.contains(key)) {
          throw SchemaError("unknown field `" + key + "`", line_);
        }
      }
    }
  }

 private:
  const ordered_json& field(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) {
      throw SchemaError(std::string("missing field `") + key + "`", line_);
    }
    if (used_.insert(key).second) ++seen_;
    return *it;
  }

  const ordered_json& j_;
  long line_;
  std::set<std::string> used_;
  std::size_t seen_ = 0;
};

Vec3 vec3_fields(RecordParser& p, const char* x, const char* y,
                 const char* z) {
  return {p.number(x), p.number(y), p.number(z)};
}

void check_stream_order(double prev, double t, const char* stream, long line) {
  if (t <= prev) {
    throw NonMonotonicTime("line " + std::to_string(line) + ": " + stream +
                           " timestamps must be strictly increasing");
  }
}

}  // namespace

void write_log(std::ostream& out, const SimRun& run) {
  std::size_t it = 0, ii = 0, ir = 0;
  std::size_t bias_cursor = 0;
  const auto next_t = [&](std::size_t i, const auto& v) {
    return i < v.size() ? v[i].t
                        : std::numeric_limits<double>::infinity();
  };
  while (it < run.truth.size() || ii < run.imu.samples.size() ||
         ir < run.ranges.size()) {
    const double tt = next_t(it, run.truth);
    const double ti = next_t(ii, run.imu.samples);
    const double tr = next_t(ir, run.ranges);
    // Tie order: truth < imu < range.
    if (tt <= ti && tt <= tr) {
      while (bias_cursor + 1 < run.imu.samples.size() &&
             run.imu.samples[bias_cursor + 1].t <= tt) {
        ++bias_cursor;
      }
      TruthRecord rec;
      rec.t = run.truth[it].t;
      rec.position = run.truth[it].position;
      rec.velocity = run.truth[it].velocity;
      rec.accel_bias = run.imu.bias_truth.empty()
                           ? Vec3::Zero()
                           : run.imu.bias_truth[bias_cursor];
      out << truth_json(rec).dump() << '\n';
      ++it;
    } else if (ti <= tr) {
      out << imu_json(run.imu.samples[ii]).dump() << '\n';
      ++ii;
    } else {
      out << range_json(run.ranges[ir]).dump() << '\n';
      ++ir;
    }
  }
}

LogData read_log(std::istream& in) {
  LogData data;
  std::string line;
  long line_no = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  double last_truth = last_t, last_imu = last_t, last_range = last_t;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    RecordParser p(j, line_no);
    const double t = p.number("t");
    const std::string type = p.text("type");
    if (t < last_t) {
      throw NonMonotonicTime("line " + std::to_string(line_no) +
                             ": records must be sorted by t");
    }
    last_t = t;
    if (type == "truth") {
      check_stream_order(last_truth, t, "truth", line_no);
      last_truth = t;
      TruthRecord r;
      r.t = t;
      r.position = vec3_fields(p, "px", "py", "pz");
      r.velocity = vec3_fields(p, "vx", "vy", "vz");
      r.accel_bias = vec3_fields(p, "abx", "aby", "abz");
      p.done();
      data.truth.push_back(r);
    } else if (type == "imu") {
      check_stream_order(last_imu, t, "imu", line_no);
      last_imu = t;
      ImuSample s;
      s.t = t;
      s.accel = vec3_fields(p, "ax", "ay", "az");
      p.done();
      data.imu.push_back(s);
    } else if (type == "range") {
      check_stream_order(last_range, t, "range", line_no);
      last_range = t;
      RangeSample s;
      s.t = t;
      s.anchor_id = p.integer("anchor");
      s.range = p.number("r");
      s.sigma_r = p.number("sigma");
      s.truth_outlier = p.boolean("outlier");
      p.done();
      if (s.anchor_id < 0 || s.anchor_id >= kNumAnchors) {
        throw SchemaError("anchor id " + std::to_string(s.anchor_id) +
                              " outside 0.." + std::to_string(kNumAnchors - 1),
                          line_no);
      }
      if (s.range < 0.0) throw SchemaError("range must be >= 0", line_no);
      if (s.sigma_r <= 0.0) throw SchemaError("sigma must be > 0", line_no);
      data.ranges.push_back(s);
    } else {
      throw SchemaError("unknown record type `" + type + "`", line_no);
    }
  }
  return data;
}

void write_estimates(std::ostream& out, const EstimatesData& data) {
  std::size_t ie = 0, iu = 0;
  while (ie < data.estimates.size() || iu < data.updates.size()) {
    const double te = ie < data.estimates.size()
                          ? data.estimates[ie].t
                          : std::numeric_limits<double>::infinity();
    const double tu = iu < data.updates.size()
                          ? data.updates[iu].t
                          : std::numeric_limits<double>::infinity();
    // Tie order: update before the estimate it produced.
    if (tu <= te) {
      out << update_json(data.updates[iu]).dump() << '\n';
      ++iu;
    } else {
      out << estimate_json(data.estimates[ie]).dump() << '\n';
      ++ie;
    }
  }
}

EstimatesData read_estimates(std::istream& in) {
  EstimatesData data;
  std::string line;
  long line_no = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    RecordParser p(j, line_no);
    const double t = p.number("t");
    const std::string type = p.text("type");
    if (t < last_t) {
      throw NonMonotonicTime("line " + std::to_string(line_no) +
                             ": records must be sorted by t");
    }
    last_t = t;
    if (type == "est") {
      StateEstimate e;
      e.t = t;
      e.position = vec3_fields(p, "px", "py", "pz");
      e.velocity = vec3_fields(p, "vx", "vy", "vz");
      e.accel_bias = vec3_fields(p, "abx", "aby", "abz");
      p.done();
      data.estimates.push_back(e);
    } else if (type == "update") {
      UpdateRecord u;
      u.t = t;
      u.anchor_id = p.integer("anchor");
      u.accepted = p.boolean("accepted");
      u.innovation = p.number("d");
      u.gate_active = p.boolean("gated");
      p.done();
      data.updates.push_back(u);
    } else {
      throw SchemaError("unknown record type `" + type + "`", line_no);
    }
  }
  return data;
}

}  // namespace uwbloc
