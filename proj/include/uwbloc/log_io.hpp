#ifndef UWBLOC_LOG_IO_HPP_
#define UWBLOC_LOG_IO_HPP_

#include <iostream>
#include <vector>

#include "uwbloc/records.hpp"
#include "uwbloc/sim.hpp"

namespace uwbloc {

// Line-delimited JSON, one record per line, sorted by t with ties broken
// truth < imu < range:
//   {"t":..,"type":"truth","px":..,"py":..,"pz":..,"vx":..,"vy":..,"vz":..,
//    "abx":..,"aby":..,"abz":..}
//   {"t":..,"type":"imu","ax":..,"ay":..,"az":..}
//   {"t":..,"type":"range","anchor":..,"r":..,"sigma":..,"outlier":..}
// Estimator output uses the same framing:
//   {"t":..,"type":"est","px":..,...,"abz":..}
//   {"t":..,"type":"update","anchor":..,"accepted":..,"d":..,"gated":..}

struct LogData {
  std::vector<TruthRecord> truth;
  std::vector<ImuSample> imu;
  std::vector<RangeSample> ranges;
};

struct EstimatesData {
  std::vector<StateEstimate> estimates;
  std::vector<UpdateRecord> updates;
};

/// Serializes a simulated run. Truth records carry the ground-truth IMU bias
/// held zero-order from the IMU stream.
void write_log(std::ostream& out, const SimRun& run);

/// Parses and validates a sensor log. Throws SchemaError with the 1-based
/// line number on malformed records and NonMonotonicTime on unsorted input.
LogData read_log(std::istream& in);

void write_estimates(std::ostream& out, const EstimatesData& data);
EstimatesData read_estimates(std::istream& in);

}  // namespace uwbloc

#endif  // UWBLOC_LOG_IO_HPP_
