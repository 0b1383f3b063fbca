#pragma once

// Run configuration: a sectioned key = value text file with unit suffixes.
//
//   [device]       n, qutrit_levels, cavity_levels, delta, omega10,
//                  anharmonic_fraction, b | g1, cavity_freq
//   [decoherence]  kappa_inv, gamma10_inv, gamma21_inv, gamma20_inv,
//                  gamma_phi1_inv, gamma_phi2_inv
//   [crosstalk]    ratio, coupling_caps, self_cap
//   [sweep]        b, ratios, include_theta, include_losses, reduce_subspace,
//                  truncation_check, step_check, workers
//   [integrator]   method, steps_per_period, max_step, rel_tol, abs_tol
//   [thresholds]   dispersive, isolation, lifetime
//
// Frequencies take GHz/MHz/kHz/Hz (converted to rad/s), times s/ms/us/ns/ps,
// capacitances F/pF/fF. Lists are comma separated; a unit on the last
// element applies to elements written without one. Per-qutrit lists hold n+1
// entries (registers, then the coupler); a single value is broadcast.
// Unknown sections or keys are errors.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wprep/device.hpp"
#include "wprep/dynamics.hpp"

namespace wprep {

struct LossSettings {
  std::vector<double> kappa_inv;       // n entries (s)
  std::vector<double> gamma10_inv;     // n+1 entries (s), 0 = channel off
  std::vector<double> gamma21_inv;
  std::vector<double> gamma20_inv;
  std::vector<double> gamma_phi1_inv;
  std::vector<double> gamma_phi2_inv;
};

struct SweepSettings {
  std::vector<double> b_grid;
  std::vector<double> ratios;
  bool include_theta = true;
  bool include_losses = true;
  bool reduce_subspace = true;
  bool truncation_check = true;
  bool step_check = true;
  std::size_t workers = 1;
};

struct RunConfig {
  std::size_t n = 3;
  std::size_t qutrit_levels = 3;
  std::size_t cavity_levels = 3;
  std::vector<double> delta;      // rad/s
  std::vector<double> omega10;    // rad/s, n+1
  double anharmonic_fraction = 0.05;
  double b = 8.0;                 // used unless g1 is set
  std::optional<double> g1;       // rad/s
  std::vector<double> cavity_freq;  // rad/s, n entries; empty = omega10 - delta

  LossSettings losses;

  double crosstalk_ratio = 0.0;
  std::vector<double> coupling_caps;  // F, n entries (optional)
  double self_cap = 0.0;              // F

  SweepSettings sweep;
  IntegratorConfig integrator;
  ConditionThresholds thresholds;
};

// The three-register reference device with its quoted lifetimes; identical
// to configs/paper_fig4.cfg.
RunConfig default_config();

// Throws ConfigError with "source:line: message" for malformed input.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

// Checks list lengths and ranges; throws ConfigError.
void check_config(const RunConfig& cfg);

// "4:12:0.5" (inclusive range) or "6, 8, 10".
std::vector<double> parse_grid(const std::string& text);

// Matched device at normalized detuning b with losses (if enabled), cavity
// frequencies, truncations and uniform crosstalk ratio * max_j g_Aj.
MatchedDevice build_device(const RunConfig& cfg, double b, double ratio, bool include_losses = true);

// Same, using cfg.b (or cfg.g1) and cfg.crosstalk_ratio.
MatchedDevice build_device(const RunConfig& cfg);

// Canonical text form of every field, used for hashing and metadata.
std::string canonical_text(const RunConfig& cfg);

}  // namespace wprep
