#pragma once

// Composite Hilbert spaces of qutrits and truncated cavity modes, sparse
// complex operators on them, and pure/mixed states.
//
// Basis ordering: row-major over subsystems in layout order, i.e. the first
// subsystem is the most significant digit. For the protocol layout this is
// (q1, ..., qn, A, c1, ..., cn), so the ket |1 0 0>|0>_A|vac> of three
// qubits has qubit 1 in the leftmost position.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wprep {

using Complex = std::complex<double>;
using LocalMatrix = Eigen::MatrixXcd;
using KetVector = Eigen::VectorXcd;
using DenseMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SubsystemKind { Qutrit, Cavity, Generic };

struct Subsystem {
  std::string label;
  SubsystemKind kind;
  std::size_t dim;

  bool operator==(const Subsystem&) const = default;
};

class HilbertLayout {
 public:
  HilbertLayout() = default;
  explicit HilbertLayout(std::vector<Subsystem> subsystems);

  // Canonical protocol layout: q1..qn, A, c1..cn.
  static HilbertLayout protocol(std::size_t n, std::size_t qutrit_levels, std::size_t cavity_levels);
  // q1..qn, A only (used by the cavity-free effective models).
  static HilbertLayout register_only(std::size_t n, std::size_t levels = 2);

  static std::string qubit_label(std::size_t j) { return "q" + std::to_string(j + 1); }
  static std::string cavity_label(std::size_t j) { return "c" + std::to_string(j + 1); }
  static constexpr const char* coupler_label = "A";

  std::size_t total_dim() const { return total_dim_; }
  std::size_t size() const { return subsystems_.size(); }
  const Subsystem& subsystem(std::size_t i) const { return subsystems_.at(i); }
  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  bool contains(const std::string& label) const;
  // Throws std::invalid_argument for unknown labels.
  std::size_t index_of(const std::string& label) const;
  std::size_t dim_of(const std::string& label) const { return subsystems_[index_of(label)].dim; }
  // Distance in the flat index between consecutive levels of subsystem i.
  std::size_t stride(std::size_t i) const { return strides_.at(i); }

  std::size_t basis_index(std::span<const std::size_t> levels) const;
  std::size_t basis_index(std::initializer_list<std::size_t> levels) const {
    return basis_index(std::span<const std::size_t>(levels.begin(), levels.size()));
  }
  std::vector<std::size_t> levels_of(std::size_t index) const;
  std::size_t level_of(std::size_t index, std::size_t subsystem) const {
    return (index / strides_[subsystem]) % subsystems_[subsystem].dim;
  }

  bool operator==(const HilbertLayout& other) const { return subsystems_ == other.subsystems_; }

  std::string describe() const;

 private:
  std::vector<Subsystem> subsystems_;
  std::vector<std::size_t> strides_;
  std::size_t total_dim_ = 1;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  Complex value;
};

// Complex sparse matrix on a composite space, stored as a canonical
// coordinate list (row-major sorted, duplicates merged, exact zeros dropped)
// with a row-pointer index for fast products.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(HilbertLayout layout, std::vector<Triplet> entries);

  static SparseOperator zero(const HilbertLayout& layout) { return SparseOperator(layout, {}); }
  static SparseOperator identity(const HilbertLayout& layout);
  static SparseOperator from_dense(const HilbertLayout& layout, const LocalMatrix& m);

  const HilbertLayout& layout() const { return layout_; }
  std::size_t dim() const { return layout_.total_dim(); }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Triplet>& entries() const { return entries_; }
  // Entries of row r are entries()[row_ptr()[r] .. row_ptr()[r+1]).
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }

  Complex at(std::size_t row, std::size_t col) const;
  double max_abs() const;
  // max |M - M^dagger|.
  double hermiticity_defect() const;
  bool is_zero() const { return entries_.empty(); }

  SparseOperator adjoint() const;
  LocalMatrix to_dense() const;

  KetVector apply(const KetVector& v) const;
  // Sparse times dense (dim x m) matrix.
  DenseMatrix multiply(const DenseMatrix& m) const;

  SparseOperator& operator+=(const SparseOperator& other);
  SparseOperator& operator-=(const SparseOperator& other);
  SparseOperator& operator*=(Complex s);

  friend SparseOperator operator+(SparseOperator a, const SparseOperator& b) { return a += b; }
  friend SparseOperator operator-(SparseOperator a, const SparseOperator& b) { return a -= b; }
  friend SparseOperator operator*(Complex s, SparseOperator a) { return a *= s; }
  friend SparseOperator operator*(SparseOperator a, Complex s) { return a *= s; }
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);

  // Bitwise equality of canonical entries.
  bool operator==(const SparseOperator& other) const;

 private:
  void canonicalize();

  HilbertLayout layout_;
  std::vector<Triplet> entries_;
  std::vector<std::size_t> row_ptr_;
};

// ||AB - BA||_max.
double mat_commutator_norm(const SparseOperator& a, const SparseOperator& b);

// Local single-subsystem matrices.
LocalMatrix annihilation(std::size_t dim);
// |to><from| on a d-level system.
LocalMatrix transition(std::size_t dim, std::size_t to, std::size_t from);
LocalMatrix projector(std::size_t dim, std::size_t level);

// I x ... x local_op x ... x I with local_op acting on `target`.
SparseOperator embed(const LocalMatrix& local_op, const std::string& target, const HilbertLayout& layout);

enum class StateForm { Ket, Density };

// Pure ket or density matrix with its layout.
class QuantumState {
 public:
  QuantumState() = default;
  static QuantumState ket(HilbertLayout layout, KetVector amplitudes, bool normalize = true);
  static QuantumState density(HilbertLayout layout, DenseMatrix rho);
  static QuantumState basis(const HilbertLayout& layout, std::span<const std::size_t> levels);
  static QuantumState basis(const HilbertLayout& layout, std::initializer_list<std::size_t> levels) {
    return basis(layout, std::span<const std::size_t>(levels.begin(), levels.size()));
  }
  static QuantumState maximally_mixed(const HilbertLayout& layout);

  const HilbertLayout& layout() const { return layout_; }
  StateForm form() const { return form_; }
  bool is_ket() const { return form_ == StateForm::Ket; }
  std::size_t dim() const { return layout_.total_dim(); }

  // Throw std::logic_error when the form does not match.
  const KetVector& amplitudes() const;
  KetVector& amplitudes();
  const DenseMatrix& matrix() const;
  DenseMatrix& matrix();

  QuantumState to_density() const;
  Complex trace() const;
  double norm() const;
  double hermiticity_defect() const;
  // Full Hermitian eigendecomposition; O(dim^3).
  double min_eigenvalue() const;

  // Checks the normalization/Hermiticity/positivity invariants; throws
  // std::domain_error naming the first violated one.
  void validate(double trace_tol = 1e-10, double herm_tol = 1e-12, double eig_floor = -1e-7) const;

 private:
  QuantumState(HilbertLayout layout, StateForm form) : layout_(std::move(layout)), form_(form) {}

  HilbertLayout layout_;
  StateForm form_ = StateForm::Ket;
  KetVector ket_;
  DenseMatrix rho_;
};

// Ket: op|psi>. Density: op rho op^dagger. Results are not renormalized.
QuantumState apply(const SparseOperator& op, const QuantumState& state);

// Reduced state over `keep` (kept subsystems stay in layout order).
QuantumState partial_trace(const QuantumState& state, const std::vector<std::string>& keep);

}  // namespace wprep
