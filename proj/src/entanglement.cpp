#include "wprep/entanglement.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wprep/errors.hpp"

namespace wprep {

QuantumState w_state(std::size_t n) {
  if (n < 2) throw std::invalid_argument("w_state: n must be >= 2");
  std::vector<Subsystem> subs;
  for (std::size_t j = 0; j < n; ++j) subs.push_back({HilbertLayout::qubit_label(j), SubsystemKind::Qutrit, 2});
  return protocol_target(HilbertLayout(std::move(subs)), n);
}

QuantumState protocol_target(const HilbertLayout& layout, std::size_t n) {
  if (n == 0) throw std::invalid_argument("protocol_target: n must be >= 1");
  KetVector v = KetVector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::size_t> levels(layout.size(), 0);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t s = layout.index_of(HilbertLayout::qubit_label(j));
    levels[s] = 1;
    v(static_cast<Eigen::Index>(layout.basis_index(levels))) = amp;
    levels[s] = 0;
  }
  return QuantumState::ket(layout, std::move(v), false);
}

QuantumState protocol_initial(const HilbertLayout& layout) {
  std::vector<std::size_t> levels(layout.size(), 0);
  levels[layout.index_of(HilbertLayout::coupler_label)] = 1;
  return QuantumState::basis(layout, levels);
}

double fidelity(const QuantumState& state, const QuantumState& target) {
  if (!(state.layout() == target.layout())) throw LayoutMismatch("fidelity: state and target layouts differ");
  const KetVector& t = target.amplitudes();
  if (state.is_ket()) return std::norm(t.dot(state.amplitudes()));
  const Complex f = t.dot(state.matrix() * t);
  if (std::abs(f.imag()) > 1e-12 * std::max(1.0, std::abs(f.real())))
    throw std::logic_error("fidelity: imaginary residue exceeds 1e-12; state is not Hermitian");
  return f.real();
}

double preparation_time(const DerivedQuantities& derived) { return preparation_time(derived.n, derived.lambda); }

}  // namespace wprep
