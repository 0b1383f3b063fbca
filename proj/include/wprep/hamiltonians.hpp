#pragma once

// Interaction-picture Hamiltonians of the protocol as sums of static sparse
// operators with e^{i f t} phases:
//
//   H(t) = sum_k amplitude_k e^{i f_k t} O_k + h.c.
//
// Terms flagged self-conjugate are added once (no h.c.).

#include <span>
#include <string>
#include <vector>

#include "wprep/device.hpp"
#include "wprep/hilbert.hpp"

namespace wprep {

struct HamiltonianTerm {
  std::string label;
  SparseOperator op;
  double frequency = 0.0;  // rad/s
  Complex amplitude = 1.0;
  bool self_conjugate = false;
};

// Fixed union sparsity pattern (CSR) of all terms and their conjugates.
struct SparsityPattern {
  std::size_t dim = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> cols;

  std::size_t nnz() const { return cols.size(); }
};

class TimeDependentOperator {
 public:
  TimeDependentOperator() = default;
  TimeDependentOperator(HilbertLayout layout, std::vector<HamiltonianTerm> terms);

  const HilbertLayout& layout() const { return layout_; }
  const std::vector<HamiltonianTerm>& terms() const { return terms_; }
  const SparsityPattern& pattern() const { return pattern_; }
  bool empty() const { return terms_.empty(); }

  // Largest |f_k| over all terms (rad/s).
  double max_frequency() const;
  // Upper bound on ||H(t)||_2 valid for all t (sum of |amplitude| * row-sum norms).
  double norm_bound() const;

  // Values aligned with pattern().cols. `values` must have pattern().nnz() entries.
  void evaluate(double t, std::span<Complex> values) const;
  SparseOperator at(double t) const;
  double hermiticity_defect(double t) const;

  // Concatenates the term lists; layouts must agree.
  friend TimeDependentOperator operator+(const TimeDependentOperator& a, const TimeDependentOperator& b);

 private:
  struct TermSlots {
    std::vector<std::size_t> direct;
    std::vector<std::size_t> conjugate;
  };

  HilbertLayout layout_;
  std::vector<HamiltonianTerm> terms_;
  SparsityPattern pattern_;
  std::vector<TermSlots> slots_;
};

// sum_j g_j (e^{i delta_j t} a_j s_j^+ + h.c.) + sum_j g_Aj (e^{i delta_Aj t} a_j s_A^+ + h.c.)
TimeDependentOperator build_H_I(const DeviceParams& params, const HilbertLayout& layout);

// |1>-|2> transitions driven by the cavities (only when the qutrits carry
// three levels) plus direct cavity-cavity crosstalk
// sum_{k<l} g_kl (e^{-i Delta_kl t} a_k a_l^+ + h.c.).
TimeDependentOperator build_Theta_I(const DeviceParams& params, const HilbertLayout& layout);

// H_I + Theta_I.
TimeDependentOperator build_h_I(const DeviceParams& params, const HilbertLayout& layout);

// Dispersive effective Hamiltonian with photon-number dependent Stark shifts
// and the cavity-mediated register-coupler exchange
// lambda_j = (g_j g_Aj / 2)(1/delta_j + 1/delta_Aj).
TimeDependentOperator build_H_eff(const DeviceParams& params, const HilbertLayout& layout);

// lambda (J_+ s_A^- + J_- s_A^+) on a register-plus-coupler layout without
// cavities. Throws std::invalid_argument if the per-register rates
// g_j g_Aj / delta_j differ by more than 1e-9 relative.
SparseOperator build_H_tilde_int(const DeviceParams& params, const HilbertLayout& register_layout);

// chi (sum_j |1><1|_j + |1><1|_A) under the matched conditions.
SparseOperator build_H0(const DeviceParams& params, const HilbertLayout& layout);

// sum_j a_j^+ a_j + sum_q (|1><1| + 2|2><2|)_q over whatever the layout holds.
SparseOperator excitation_number(const HilbertLayout& layout);

}  // namespace wprep
