#pragma once

// Time evolution: Schrodinger propagation of kets, Lindblad propagation of
// density matrices and the closed-form ideal two-amplitude evolution.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wprep/device.hpp"
#include "wprep/hamiltonians.hpp"
#include "wprep/hilbert.hpp"

namespace wprep {

struct CollapseChannel {
  std::string label;
  SparseOperator op;
  double rate = 0.0;  // rad/s
};

class CollapseSet {
 public:
  CollapseSet() = default;
  explicit CollapseSet(HilbertLayout layout) : layout_(std::move(layout)) {}

  // Throws for negative rates or a foreign layout. Zero-rate channels are dropped.
  void add(std::string label, SparseOperator op, double rate);

  const HilbertLayout& layout() const { return layout_; }
  const std::vector<CollapseChannel>& channels() const { return channels_; }
  bool empty() const { return channels_.empty(); }
  double total_rate() const;

 private:
  HilbertLayout layout_;
  std::vector<CollapseChannel> channels_;
};

// Cavity decay a_j at kappa_j; per qutrit |0><1| at gamma10, |1><2| at
// gamma21, |0><2| at gamma20 and the projectors |1><1|, |2><2| at the
// dephasing rates. Channels needing level |2> are skipped for two-level qutrits.
CollapseSet build_collapse_set(const DeviceParams& params, const HilbertLayout& layout);

enum class IntegratorMethod { FixedRk4, AdaptiveDopri5 };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::FixedRk4;
  // Upper bound on the step (s); 0 selects 1/(steps_per_period * f_max).
  double max_step = 0.0;
  double steps_per_period = 25.0;
  // Adaptive stepping only.
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  // Extra sample times inside (0, t_final]; t_final is always sampled.
  std::vector<double> checkpoint_times;
  // Hermitian eigendecomposition at checkpoints (density matrices only).
  bool check_positivity = true;
  // Integrate on the smallest basis subspace closed under the Hamiltonian
  // terms and collapse channels that contains the initial support. Exact.
  bool restrict_to_reachable = false;
};

std::string to_string(IntegratorMethod m);
IntegratorMethod integrator_method_from_string(const std::string& s);

// Fastest phase frequency of H (or the summed collapse rates, if larger) in
// Hz. A static H falls back to its norm bound.
double fastest_frequency_hz(const TimeDependentOperator& H, const CollapseSet* collapse = nullptr);

// 1/(steps_per_period * f_max), or cfg.max_step when set. Throws
// std::invalid_argument if cfg.max_step exceeds that bound or neither yields
// a finite step.
double resolve_max_step(const IntegratorConfig& cfg, double f_max_hz);

// Largest step with h * ||H||_bound <= 1.
double stability_step(const TimeDependentOperator& H);

// The step the integrators use: resolve_max_step, further capped by
// stability_step unless cfg.max_step was given explicitly.
double resolve_step(const IntegratorConfig& cfg, const TimeDependentOperator& H, const CollapseSet* collapse);

// ---------------------------------------------------------------------------
// Reachable-subspace restriction.

struct Subspace {
  HilbertLayout parent;
  std::vector<std::size_t> indices;  // sorted parent basis indices
  HilbertLayout layout;              // single "subspace" subsystem of size indices.size()
};

// Closure of `seeds` under every operator's nonzero pattern (column -> row).
Subspace reachable_subspace(const HilbertLayout& parent, const std::vector<std::size_t>& seeds,
                            const std::vector<const SparseOperator*>& generators);
// Closure for a Lindblad problem: H terms and their conjugates, jumps and
// jump^dagger jump products.
Subspace reachable_subspace(const QuantumState& initial, const TimeDependentOperator& H, const CollapseSet& collapse);

SparseOperator restrict_to(const SparseOperator& op, const Subspace& s);
TimeDependentOperator restrict_to(const TimeDependentOperator& op, const Subspace& s);
CollapseSet restrict_to(const CollapseSet& c, const Subspace& s);
QuantumState restrict_to(const QuantumState& state, const Subspace& s);
QuantumState lift(const QuantumState& reduced, const Subspace& s);

// ---------------------------------------------------------------------------
// Lindblad generator.

// d rho/dt = -i[H(t), rho] + sum_k rate_k (L rho L^+ - {L^+ L, rho}/2).
// Holds scratch buffers: one instance per trajectory/thread.
class LindbladGenerator {
 public:
  LindbladGenerator(TimeDependentOperator H, const CollapseSet& collapse);

  std::size_t dim() const { return dim_; }
  // `rho` must be Hermitian; `out` is resized as needed.
  void apply(double t, const DenseMatrix& rho, DenseMatrix& out);

 private:
  // Entries of sqrt(rate) L grouped into runs where row and column both
  // advance by one.
  struct Run {
    std::size_t row, col, begin, length;
  };
  struct Jump {
    std::vector<std::size_t> rows, cols;
    std::vector<Complex> vals;
    std::vector<double> real_vals;  // filled when every value is real
    std::vector<Run> runs;
  };

  std::size_t dim_ = 0;
  TimeDependentOperator hamiltonian_;
  std::vector<Complex> h_values_;
  std::vector<Triplet> damping_;  // -(i/2) sum rate L^+ L
  std::vector<Jump> jumps_;
  DenseMatrix scratch_;
};

DenseMatrix lindblad_rhs(const DenseMatrix& rho, double t, const TimeDependentOperator& H, const CollapseSet& C);

struct MasterCheckpoint {
  double time = 0.0;
  double trace = 0.0;
  double min_eigenvalue = 0.0;  // NaN when positivity checks are off
  double fidelity = 0.0;        // NaN without a target
};

struct MasterResult {
  QuantumState rho;
  std::vector<MasterCheckpoint> checkpoints;
  double step = 0.0;
  std::size_t steps = 0;
  double max_symmetrization = 0.0;  // largest |rho - rho^+| removed after a step
  double max_trace_drift = 0.0;
  std::size_t active_dim = 0;
};

// Fixed-step RK4 on the density matrix with Hermitian symmetrization after
// every step. `theta`, when given, is added to H. Throws IntegrationError if
// the trace drifts by more than 1e-6.
MasterResult evolve_master(const QuantumState& rho0, const TimeDependentOperator& H, const TimeDependentOperator* theta,
                           const CollapseSet& collapse, double t_final, const IntegratorConfig& cfg,
                           const QuantumState* target = nullptr);

// ---------------------------------------------------------------------------
// Pure states.

struct KetSample {
  double time = 0.0;
  double norm = 0.0;
  double fidelity = 0.0;  // NaN without a target
  KetVector amplitudes;   // only filled when requested
};

struct SchrodingerResult {
  QuantumState psi;
  std::vector<KetSample> samples;
  double max_norm_drift = 0.0;
  std::size_t steps = 0;
};

TimeDependentOperator static_operator(const SparseOperator& H, std::string label = "H");

SchrodingerResult evolve_schrodinger(const QuantumState& psi0, const TimeDependentOperator& H, double t_final,
                                     const IntegratorConfig& cfg, const QuantumState* target = nullptr,
                                     bool keep_amplitudes = false);

// ---------------------------------------------------------------------------

struct AnalyticIdealState {
  Complex c_ground;  // coefficient of |0...0>|1>_A
  Complex c_W;       // coefficient of |W>|0>_A
};

// c_ground = e^{-i chi t} cos(sqrt(n) lambda t), c_W = -i e^{-i chi t} sin(sqrt(n) lambda t).
AnalyticIdealState analytic_evolution(std::size_t n, double chi, double lambda, double t);

// CSV with columns time_ns,trace,min_eig,fidelity.
void write_trajectory_csv(std::ostream& os, const std::vector<MasterCheckpoint>& checkpoints, int precision = 12);

}  // namespace wprep
