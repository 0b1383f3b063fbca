#pragma once

// Fidelity sweeps over normalized detuning b and crosstalk ratio
// g_kl / max_j g_Aj, each point evolved for exactly t_W(b).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wprep/config.hpp"

namespace wprep {

const char* version_string();

struct SweepRow {
  double b = 0.0;
  double ratio = 0.0;
  double fidelity = 0.0;  // NaN when the point failed
  double t_w = 0.0;       // s
  bool trunc_ok = false;
  bool step_ok = false;
  bool conditions_ok = false;
  double wall_s = 0.0;

  // Diagnostics for the metadata file.
  double fidelity_half_step = 0.0;
  double fidelity_alt_truncation = 0.0;
  std::size_t alt_cavity_levels = 0;
  double step = 0.0;  // step of the reported fidelity
  std::size_t step_refinements = 0;
  std::size_t steps = 0;
  std::size_t active_dim = 0;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // b-major, ratio-minor
  std::size_t workers = 1;
  double wall_s = 0.0;
};

// Tolerances of the two convergence gates.
inline constexpr double kStepTolerance = 1e-6;
inline constexpr double kTruncationTolerance = 5e-3;
// Step halvings tried beyond the default step before step_ok is given up.
inline constexpr std::size_t kMaxStepRefinements = 3;

// Evolves |0..0>|1>_A|vac> for t_W under H_I (+ Theta_I) with the configured
// losses and returns F against |W>|0>_A|vac>. With the step check on, the
// step is halved until two successive runs agree within kStepTolerance and
// the coarser run of that pair is reported. The truncation check reruns at
// the other Fock truncation (2 <-> 3) with the same step. Integration failures come back as a row with `error` set.
SweepRow run_point(const RunConfig& cfg, double b, double ratio);

using ProgressFn = std::function<void(const SweepRow&, std::size_t done, std::size_t total)>;

// All (b, ratio) pairs of cfg.sweep on `workers` threads. Row order and
// contents do not depend on the worker count.
SweepResult run_sweep(const RunConfig& cfg, std::size_t workers, const ProgressFn& progress = {});

// Header b,ratio,fidelity,t_w_ns,trunc_ok,step_ok,wall_s. With
// `reproducible`, wall_s is written as 0 so the file depends only on inputs.
void write_sweep_csv(std::ostream& os, const SweepResult& result, bool reproducible, int precision = 12);

// FNV-1a 64 of canonical_text(cfg).
std::uint64_t parameter_hash(const RunConfig& cfg);

// JSON sidecar: version, integrator, truncations, toggles, parameter hash,
// canonical config and per-row diagnostics including wall times.
void write_sweep_metadata(std::ostream& os, const SweepResult& result, const RunConfig& cfg);

}  // namespace wprep
