#include "wprep/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "wprep/errors.hpp"

namespace wprep {

HilbertLayout::HilbertLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
  std::unordered_set<std::string> seen;
  for (const auto& s : subsystems_) {
    if (s.dim == 0) throw std::invalid_argument("subsystem '" + s.label + "' has zero dimension");
    if (!seen.insert(s.label).second) throw std::invalid_argument("duplicate subsystem label '" + s.label + "'");
  }
  strides_.assign(subsystems_.size(), 1);
  total_dim_ = 1;
  for (std::size_t i = subsystems_.size(); i-- > 0;) {
    strides_[i] = total_dim_;
    total_dim_ *= subsystems_[i].dim;
  }
}

HilbertLayout HilbertLayout::protocol(std::size_t n, std::size_t qutrit_levels, std::size_t cavity_levels) {
  if (n == 0) throw std::invalid_argument("protocol layout needs at least one register qubit");
  if (qutrit_levels < 2 || qutrit_levels > 3) throw std::invalid_argument("qutrit_levels must be 2 or 3");
  if (cavity_levels < 2) throw std::invalid_argument("cavity_levels must be >= 2");
  std::vector<Subsystem> subs;
  for (std::size_t j = 0; j < n; ++j) subs.push_back({qubit_label(j), SubsystemKind::Qutrit, qutrit_levels});
  subs.push_back({coupler_label, SubsystemKind::Qutrit, qutrit_levels});
  for (std::size_t j = 0; j < n; ++j) subs.push_back({cavity_label(j), SubsystemKind::Cavity, cavity_levels});
  return HilbertLayout(std::move(subs));
}

HilbertLayout HilbertLayout::register_only(std::size_t n, std::size_t levels) {
  if (n == 0) throw std::invalid_argument("register layout needs at least one qubit");
  std::vector<Subsystem> subs;
  for (std::size_t j = 0; j < n; ++j) subs.push_back({qubit_label(j), SubsystemKind::Qutrit, levels});
  subs.push_back({coupler_label, SubsystemKind::Qutrit, levels});
  return HilbertLayout(std::move(subs));
}

bool HilbertLayout::contains(const std::string& label) const {
  return std::any_of(subsystems_.begin(), subsystems_.end(), [&](const Subsystem& s) { return s.label == label; });
}

std::size_t HilbertLayout::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i)
    if (subsystems_[i].label == label) return i;
  throw std::invalid_argument("unknown subsystem label '" + label + "'");
}

std::size_t HilbertLayout::basis_index(std::span<const std::size_t> levels) const {
  if (levels.size() != subsystems_.size())
    throw std::invalid_argument("basis_index: expected " + std::to_string(subsystems_.size()) + " levels");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] >= subsystems_[i].dim)
      throw std::out_of_range("level " + std::to_string(levels[i]) + " out of range for " + subsystems_[i].label);
    idx += levels[i] * strides_[i];
  }
  return idx;
}

std::vector<std::size_t> HilbertLayout::levels_of(std::size_t index) const {
  if (index >= total_dim_) throw std::out_of_range("basis index out of range");
  std::vector<std::size_t> levels(subsystems_.size());
  for (std::size_t i = 0; i < subsystems_.size(); ++i) levels[i] = level_of(index, i);
  return levels;
}

std::string HilbertLayout::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (i) os << " x ";
    os << subsystems_[i].label << "(" << subsystems_[i].dim << ")";
  }
  os << " = " << total_dim_;
  return os.str();
}

// ---------------------------------------------------------------------------

SparseOperator::SparseOperator(HilbertLayout layout, std::vector<Triplet> entries)
    : layout_(std::move(layout)), entries_(std::move(entries)) {
  const std::size_t d = layout_.total_dim();
  for (const auto& t : entries_)
    if (t.row >= d || t.col >= d) throw std::out_of_range("sparse entry index outside the layout dimension");
  canonicalize();
}

void SparseOperator::canonicalize() {
  std::sort(entries_.begin(), entries_.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<Triplet> merged;
  merged.reserve(entries_.size());
  for (const auto& t : entries_) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col)
      merged.back().value += t.value;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Triplet& t) { return t.value == Complex(0.0, 0.0); });
  entries_ = std::move(merged);

  const std::size_t d = layout_.total_dim();
  row_ptr_.assign(d + 1, 0);
  for (const auto& t : entries_) ++row_ptr_[t.row + 1];
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
}

SparseOperator SparseOperator::identity(const HilbertLayout& layout) {
  std::vector<Triplet> e;
  e.reserve(layout.total_dim());
  for (std::size_t i = 0; i < layout.total_dim(); ++i) e.push_back({i, i, 1.0});
  return SparseOperator(layout, std::move(e));
}

SparseOperator SparseOperator::from_dense(const HilbertLayout& layout, const LocalMatrix& m) {
  if (static_cast<std::size_t>(m.rows()) != layout.total_dim() || m.rows() != m.cols())
    throw std::invalid_argument("from_dense: matrix does not match layout dimension");
  std::vector<Triplet> e;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) != Complex(0.0, 0.0)) e.push_back({std::size_t(r), std::size_t(c), m(r, c)});
  return SparseOperator(layout, std::move(e));
}

Complex SparseOperator::at(std::size_t row, std::size_t col) const {
  if (row >= dim() || col >= dim()) throw std::out_of_range("SparseOperator::at");
  auto first = entries_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  auto last = entries_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  auto it = std::lower_bound(first, last, col, [](const Triplet& t, std::size_t c) { return t.col < c; });
  return (it != last && it->col == col) ? it->value : Complex(0.0, 0.0);
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (const auto& t : entries_) m = std::max(m, std::abs(t.value));
  return m;
}

double SparseOperator::hermiticity_defect() const {
  double m = 0.0;
  for (const auto& t : entries_) m = std::max(m, std::abs(t.value - std::conj(at(t.col, t.row))));
  return m;
}

SparseOperator SparseOperator::adjoint() const {
  std::vector<Triplet> e;
  e.reserve(entries_.size());
  for (const auto& t : entries_) e.push_back({t.col, t.row, std::conj(t.value)});
  return SparseOperator(layout_, std::move(e));
}

LocalMatrix SparseOperator::to_dense() const {
  const auto d = static_cast<Eigen::Index>(dim());
  LocalMatrix m = LocalMatrix::Zero(d, d);
  for (const auto& t : entries_) m(Eigen::Index(t.row), Eigen::Index(t.col)) = t.value;
  return m;
}

KetVector SparseOperator::apply(const KetVector& v) const {
  if (static_cast<std::size_t>(v.size()) != dim()) throw LayoutMismatch("apply: vector size does not match operator");
  KetVector out = KetVector::Zero(v.size());
  for (const auto& t : entries_) out(Eigen::Index(t.row)) += t.value * v(Eigen::Index(t.col));
  return out;
}

DenseMatrix SparseOperator::multiply(const DenseMatrix& m) const {
  if (static_cast<std::size_t>(m.rows()) != dim()) throw LayoutMismatch("multiply: row count does not match operator");
  DenseMatrix out = DenseMatrix::Zero(m.rows(), m.cols());
  for (const auto& t : entries_) out.row(Eigen::Index(t.row)) += t.value * m.row(Eigen::Index(t.col));
  return out;
}

SparseOperator& SparseOperator::operator+=(const SparseOperator& other) {
  if (!(layout_ == other.layout_)) throw LayoutMismatch("operator+: layouts differ");
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
  canonicalize();
  return *this;
}

SparseOperator& SparseOperator::operator-=(const SparseOperator& other) { return *this += Complex(-1.0) * other; }

SparseOperator& SparseOperator::operator*=(Complex s) {
  for (auto& t : entries_) t.value *= s;
  canonicalize();
  return *this;
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  if (!(a.layout_ == b.layout_)) throw LayoutMismatch("operator*: layouts differ");
  std::vector<Triplet> e;
  for (const auto& ta : a.entries_) {
    for (std::size_t k = b.row_ptr_[ta.col]; k < b.row_ptr_[ta.col + 1]; ++k) {
      const auto& tb = b.entries_[k];
      e.push_back({ta.row, tb.col, ta.value * tb.value});
    }
  }
  return SparseOperator(a.layout_, std::move(e));
}

bool SparseOperator::operator==(const SparseOperator& other) const {
  if (!(layout_ == other.layout_) || entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& x = entries_[i];
    const auto& y = other.entries_[i];
    if (x.row != y.row || x.col != y.col || x.value != y.value) return false;
  }
  return true;
}

double mat_commutator_norm(const SparseOperator& a, const SparseOperator& b) {
  return (a * b - b * a).max_abs();
}

// ---------------------------------------------------------------------------

LocalMatrix annihilation(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("annihilation: dim must be >= 2");
  const auto d = static_cast<Eigen::Index>(dim);
  LocalMatrix a = LocalMatrix::Zero(d, d);
  for (Eigen::Index k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

LocalMatrix transition(std::size_t dim, std::size_t to, std::size_t from) {
  if (to >= dim || from >= dim) throw std::out_of_range("transition: level outside the local dimension");
  const auto d = static_cast<Eigen::Index>(dim);
  LocalMatrix m = LocalMatrix::Zero(d, d);
  m(Eigen::Index(to), Eigen::Index(from)) = 1.0;
  return m;
}

LocalMatrix projector(std::size_t dim, std::size_t level) { return transition(dim, level, level); }

SparseOperator embed(const LocalMatrix& local_op, const std::string& target, const HilbertLayout& layout) {
  const std::size_t s = layout.index_of(target);
  const std::size_t d = layout.subsystem(s).dim;
  if (local_op.rows() != local_op.cols() || static_cast<std::size_t>(local_op.rows()) != d)
    throw std::invalid_argument("embed: local operator is not " + std::to_string(d) + "x" + std::to_string(d) +
                                " for subsystem '" + target + "'");
  const std::size_t stride = layout.stride(s);
  const std::size_t block = stride * d;
  const std::size_t outer = layout.total_dim() / block;

  std::vector<Triplet> local;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (local_op(Eigen::Index(r), Eigen::Index(c)) != Complex(0.0, 0.0))
        local.push_back({r, c, local_op(Eigen::Index(r), Eigen::Index(c))});

  std::vector<Triplet> e;
  e.reserve(local.size() * outer * stride);
  for (std::size_t hi = 0; hi < outer; ++hi)
    for (const auto& t : local)
      for (std::size_t lo = 0; lo < stride; ++lo)
        e.push_back({hi * block + t.row * stride + lo, hi * block + t.col * stride + lo, t.value});
  return SparseOperator(layout, std::move(e));
}

// ---------------------------------------------------------------------------

QuantumState QuantumState::ket(HilbertLayout layout, KetVector amplitudes, bool normalize) {
  if (static_cast<std::size_t>(amplitudes.size()) != layout.total_dim())
    throw LayoutMismatch("ket: amplitude count does not match layout");
  if (normalize) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw std::invalid_argument("ket: cannot normalize the zero vector");
    amplitudes /= n;
  }
  QuantumState s(std::move(layout), StateForm::Ket);
  s.ket_ = std::move(amplitudes);
  return s;
}

QuantumState QuantumState::density(HilbertLayout layout, DenseMatrix rho) {
  if (static_cast<std::size_t>(rho.rows()) != layout.total_dim() || rho.rows() != rho.cols())
    throw LayoutMismatch("density: matrix does not match layout");
  QuantumState s(std::move(layout), StateForm::Density);
  s.rho_ = std::move(rho);
  return s;
}

QuantumState QuantumState::basis(const HilbertLayout& layout, std::span<const std::size_t> levels) {
  KetVector v = KetVector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
  v(static_cast<Eigen::Index>(layout.basis_index(levels))) = 1.0;
  return ket(layout, std::move(v), false);
}

QuantumState QuantumState::maximally_mixed(const HilbertLayout& layout) {
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  DenseMatrix rho = DenseMatrix::Identity(d, d) / static_cast<double>(d);
  return density(layout, std::move(rho));
}

const KetVector& QuantumState::amplitudes() const {
  if (form_ != StateForm::Ket) throw std::logic_error("state is a density matrix, not a ket");
  return ket_;
}
KetVector& QuantumState::amplitudes() {
  if (form_ != StateForm::Ket) throw std::logic_error("state is a density matrix, not a ket");
  return ket_;
}
const DenseMatrix& QuantumState::matrix() const {
  if (form_ != StateForm::Density) throw std::logic_error("state is a ket, not a density matrix");
  return rho_;
}
DenseMatrix& QuantumState::matrix() {
  if (form_ != StateForm::Density) throw std::logic_error("state is a ket, not a density matrix");
  return rho_;
}

QuantumState QuantumState::to_density() const {
  if (form_ == StateForm::Density) return *this;
  DenseMatrix rho = ket_ * ket_.adjoint();
  return density(layout_, std::move(rho));
}

Complex QuantumState::trace() const { return is_ket() ? Complex(ket_.squaredNorm(), 0.0) : rho_.trace(); }

double QuantumState::norm() const { return is_ket() ? ket_.norm() : std::abs(rho_.trace()); }

double QuantumState::hermiticity_defect() const {
  if (is_ket()) return 0.0;
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double QuantumState::min_eigenvalue() const {
  if (is_ket()) return 0.0;
  const Eigen::MatrixXcd herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void QuantumState::validate(double trace_tol, double herm_tol, double eig_floor) const {
  if (is_ket()) {
    if (std::abs(ket_.norm() - 1.0) > trace_tol) throw std::domain_error("ket is not normalized");
    return;
  }
  if (hermiticity_defect() > herm_tol) throw std::domain_error("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > trace_tol) throw std::domain_error("density matrix trace != 1");
  if (min_eigenvalue() < eig_floor) throw std::domain_error("density matrix has a negative eigenvalue");
}

QuantumState apply(const SparseOperator& op, const QuantumState& state) {
  if (!(op.layout() == state.layout())) throw LayoutMismatch("apply: operator and state layouts differ");
  if (state.is_ket()) return QuantumState::ket(state.layout(), op.apply(state.amplitudes()), false);
  DenseMatrix left = op.multiply(state.matrix());
  // (op * left^dagger)^dagger = left * op^dagger
  DenseMatrix left_dag = left.adjoint();
  DenseMatrix out = op.multiply(left_dag).adjoint();
  return QuantumState::density(state.layout(), std::move(out));
}

QuantumState partial_trace(const QuantumState& state, const std::vector<std::string>& keep) {
  const auto& layout = state.layout();
  std::vector<bool> kept(layout.size(), false);
  for (const auto& label : keep) kept[layout.index_of(label)] = true;

  std::vector<Subsystem> kept_subs;
  std::vector<std::size_t> kept_idx, traced_idx;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (kept[i]) {
      kept_subs.push_back(layout.subsystem(i));
      kept_idx.push_back(i);
    } else {
      traced_idx.push_back(i);
    }
  }
  HilbertLayout reduced(kept_subs);
  std::size_t traced_dim = 1;
  for (auto i : traced_idx) traced_dim *= layout.subsystem(i).dim;

  const QuantumState rho_state = state.to_density();
  const DenseMatrix& rho = rho_state.matrix();

  // Group full indices by their traced-out digits.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> groups(traced_dim);
  for (std::size_t idx = 0; idx < layout.total_dim(); ++idx) {
    std::size_t k = 0, t = 0;
    for (auto i : kept_idx) k = k * layout.subsystem(i).dim + layout.level_of(idx, i);
    for (auto i : traced_idx) t = t * layout.subsystem(i).dim + layout.level_of(idx, i);
    groups[t].push_back({k, idx});
  }

  const auto rd = static_cast<Eigen::Index>(reduced.total_dim());
  DenseMatrix out = DenseMatrix::Zero(rd, rd);
  for (const auto& g : groups)
    for (const auto& [ki, i] : g)
      for (const auto& [kj, j] : g) out(Eigen::Index(ki), Eigen::Index(kj)) += rho(Eigen::Index(i), Eigen::Index(j));
  return QuantumState::density(std::move(reduced), std::move(out));
}

}  // namespace wprep
