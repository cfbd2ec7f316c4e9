#ifndef UWBLOC_CONFIG_HPP_
#define UWBLOC_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uwbloc/fusion_ekf.hpp"
#include "uwbloc/sim.hpp"
#include "uwbloc/vanilla_ekf.hpp"

namespace uwbloc {

/// Everything a run needs: trajectory, noise, both filter configs, seed.
/// The top-level seed is authoritative; resolve() copies it into the noise
/// spec before use.
struct RunConfig {
  std::uint64_t seed = 0;
  TrajectorySpec trajectory;
  NoiseSpec noise;
  VanillaConfig vanilla;
  FusionConfig fusion;
  double eval_warmup_s = 2.0;

  NoiseSpec resolved_noise() const {
    NoiseSpec n = noise;
    n.seed = seed;
    return n;
  }
};

/// Built-in run configurations: "hover", "line", "circle", "lissajous",
/// "table1-proxy". Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Canonical JSON snapshot (all keys, fixed order, newline-terminated).
std::string config_to_json(const RunConfig& config);

/// Applies a (possibly partial) JSON document onto `base`. Unknown keys
/// anywhere are ConfigErrors naming the offending path.
RunConfig config_from_json(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// FNV-1a 64 over the canonical snapshot, hex encoded.
std::string config_hash(const RunConfig& config);

/// Identity stamp of an input artifact, by content provenance rather than
/// filesystem path.
struct InputStamp {
  std::string role;  // "log", "estimates"
  std::string name;  // estimator name for estimates, empty otherwise
  std::uint64_t seed = 0;
  std::string hash;
};

/// Machine-readable record sufficient to regenerate a command's outputs
/// bit-identically: tool version, command, resolved config, input stamps.
/// Contains no timestamps or absolute paths.
struct Provenance {
  std::string command;
  RunConfig config;
  std::vector<InputStamp> inputs;
};

std::string provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const std::string& text);

void write_provenance(const std::filesystem::path& dir, const Provenance& p);
Provenance read_provenance(const std::filesystem::path& file);

/// provenance.json expected beside an artifact file.
std::filesystem::path provenance_path_for(const std::filesystem::path& artifact);

}  // namespace uwbloc

#endif  // UWBLOC_CONFIG_HPP_
