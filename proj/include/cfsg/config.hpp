#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfsg/channel.hpp"
#include "cfsg/geometry.hpp"

namespace cfsg {

struct MonteCarloSpec {
  int n_topologies = 1000;
  int n_channel_draws = 1000;
};

// Every scalar the model needs, with defaults matching the reference
// parameter set (20 MHz system, 200-sample coherence block, 10 users with
// 5-antenna APs at 40 APs/km^2). The deployment square defaults to 4 km so
// that both path-loss branches actually occur at these densities; the region
// is a config knob like everything else.
struct SystemConfig {
  double lambda_ap = 40.0;  // AP density, per km^2
  AreaSpec area;
  int n_antennas = 5;  // N, antennas per AP
  int n_users = 10;    // K
  double alpha = 3.5;  // path-loss exponent, must exceed 2
  int tau_tr = 10;     // uplink training length, samples
  int tau_c = 200;     // coherence block length, samples
  int tau_d_sc = 10;   // extra downlink training charged to small cells
  double p_tr_mw = 100.0;
  double p_d_mw = 200.0;
  double bandwidth_hz = 20e6;
  double noise_figure_db = 9.0;
  double noise_temp_k = 290.0;
  // Noise-normalized powers. Zero means "derive from the physical entries".
  double rho_tr = 0.0;
  double rho_d = 0.0;
  PilotPolicy pilot_assignment = PilotPolicy::kAuto;
  std::uint64_t seed = 12345;
  MonteCarloSpec mc;
  double coverage_threshold_db = 0.0;  // T used when T is not the swept axis
};

struct ConfigError : std::runtime_error {
  int line;  // 1-based line in the source file; 0 when not file-related
  std::string key;
  ConfigError(const std::string& msg, int line_no = 0, std::string key_name = {})
      : std::runtime_error(msg), line(line_no), key(std::move(key_name)) {}
};

struct ConfigIssue {
  std::string key;
  std::string message;
};

// Fills rho_tr/rho_d from the physical powers unless already set explicitly.
void resolve_powers(SystemConfig& cfg);

SystemConfig default_config();

// Invariant check. Returns all violations; empty means the config is usable.
std::vector<ConfigIssue> validate(const SystemConfig& cfg);

// Flat `key = value` file with '#' comments. Unknown keys, duplicates,
// malformed values and invariant violations all throw ConfigError carrying
// the key name and 1-based line number.
SystemConfig load_config(const std::string& path);
SystemConfig parse_config(const std::string& text, const std::string& name);

// Serializes the resolved config back to the same key = value dialect.
std::string format_config(const SystemConfig& cfg);

PilotBook pilot_book_for(const SystemConfig& cfg);

}  // namespace cfsg
