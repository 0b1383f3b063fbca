#include <cmath>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "wprep/errors.hpp"
#include "wprep/hilbert.hpp"

using namespace wprep;

namespace {

HilbertLayout two_qubits() {
  return HilbertLayout({{"q1", SubsystemKind::Qutrit, 2}, {"q2", SubsystemKind::Qutrit, 2}});
}

LocalMatrix random_local(std::size_t d, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  LocalMatrix m(d, d);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

DenseMatrix random_density(std::size_t d, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  DenseMatrix a(d, d);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = Complex(nd(rng), nd(rng));
  DenseMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("layout index arithmetic") {
  auto l = HilbertLayout::protocol(3, 3, 2);
  CHECK(l.size() == 7);
  CHECK(l.total_dim() == 81 * 8);
  CHECK(l.subsystem(0).label == "q1");
  CHECK(l.subsystem(3).label == "A");
  CHECK(l.subsystem(4).label == "c1");
  CHECK(l.stride(6) == 1);
  CHECK(l.stride(0) == l.total_dim() / 3);
  const std::size_t idx = l.basis_index({1, 0, 2, 1, 0, 1, 1});
  CHECK(l.levels_of(idx) == std::vector<std::size_t>{1, 0, 2, 1, 0, 1, 1});
  CHECK(l.level_of(idx, 2) == 2);
  CHECK_THROWS_AS(l.index_of("c9"), std::invalid_argument);
  CHECK_THROWS(l.basis_index({3, 0, 0, 0, 0, 0, 0}));
  CHECK_THROWS(HilbertLayout({{"x", SubsystemKind::Cavity, 2}, {"x", SubsystemKind::Cavity, 2}}));
  CHECK_THROWS(HilbertLayout({{"x", SubsystemKind::Cavity, 0}}));
}

TEST_CASE("annihilation matrices") {
  auto a2 = annihilation(2);
  CHECK(a2(0, 1) == Complex(1.0));
  CHECK(a2(1, 0) == Complex(0.0));
  CHECK(a2(0, 0) == Complex(0.0));
  auto a3 = annihilation(3);
  CHECK(a3(0, 1) == Complex(1.0));
  CHECK(a3(1, 2) == Complex(std::sqrt(2.0)));
  CHECK((a3.array() != Complex(0.0)).count() == 2);
  LocalMatrix n = a3.adjoint() * a3;
  CHECK(std::abs(n(2, 2) - 2.0) < 1e-15);
  CHECK_THROWS_AS(annihilation(1), std::invalid_argument);
  CHECK_THROWS_AS(annihilation(0), std::invalid_argument);
}

TEST_CASE("embed") {
  auto l = two_qubits();
  SUBCASE("identity") {
    CHECK(embed(LocalMatrix::Identity(2, 2), "q2", l) == SparseOperator::identity(l));
  }
  SUBCASE("lowering on qubit 1 by hand") {
    auto op = embed(transition(2, 0, 1), "q1", l);
    REQUIRE(op.nnz() == 2);
    CHECK(op.entries()[0].row == 0);
    CHECK(op.entries()[0].col == 2);
    CHECK(op.entries()[1].row == 1);
    CHECK(op.entries()[1].col == 3);
  }
  SUBCASE("bosonic ladder on a cavity") {
    HilbertLayout lc({{"q1", SubsystemKind::Qutrit, 2}, {"c1", SubsystemKind::Cavity, 3}});
    auto a = embed(annihilation(3), "c1", lc);
    CHECK(a.nnz() == 2 * 2);
    CHECK(a.at(lc.basis_index({1, 0}), lc.basis_index({1, 1})) == Complex(1.0));
    CHECK(std::abs(a.at(lc.basis_index({0, 1}), lc.basis_index({0, 2})) - std::sqrt(2.0)) < 1e-15);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(embed(annihilation(3), "q1", l), std::invalid_argument);
    CHECK_THROWS_AS(embed(annihilation(2), "zz", l), std::invalid_argument);
  }
}

TEST_CASE("embed properties on random operators") {
  std::mt19937 rng(7);
  HilbertLayout l({{"a", SubsystemKind::Qutrit, 2}, {"b", SubsystemKind::Qutrit, 3}, {"c", SubsystemKind::Cavity, 2}});
  for (int rep = 0; rep < 5; ++rep) {
    for (const char* target : {"a", "b"}) {
      const std::size_t d = l.dim_of(target);
      auto x = random_local(d, rng);
      auto y = random_local(d, rng);
      auto lhs = embed(x * y, target, l);
      auto rhs = embed(x, target, l) * embed(y, target, l);
      CHECK((lhs - rhs).max_abs() < 1e-12);
      CHECK(embed(x, target, l).nnz() == static_cast<std::size_t>((x.array() != Complex(0.0)).count()) * (l.total_dim() / d));
    }
    auto xa = embed(random_local(2, rng), "a", l);
    auto yb = embed(random_local(3, rng), "b", l);
    CHECK(mat_commutator_norm(xa, yb) == 0.0);
    CHECK(xa.adjoint().adjoint() == xa);
  }
}

TEST_CASE("operator algebra") {
  auto l = two_qubits();
  auto sp1 = embed(transition(2, 1, 0), "q1", l);
  auto sm2 = embed(transition(2, 0, 1), "q2", l);
  CHECK(mat_commutator_norm(sp1, sp1) == 0.0);
  CHECK(mat_commutator_norm(sp1, sm2) == 0.0);
  CHECK(mat_commutator_norm(sp1, sp1.adjoint()) == doctest::Approx(1.0));

  auto x = sp1 + sp1.adjoint();
  CHECK(x.hermiticity_defect() == 0.0);
  CHECK((sp1 - sp1).is_zero());
  CHECK((Complex(2.0) * sp1).at(2, 0) == Complex(2.0));
  CHECK(x.to_dense().isApprox(x.to_dense().adjoint()));

  DenseMatrix m = DenseMatrix::Identity(4, 4);
  CHECK(x.multiply(m).isApprox(DenseMatrix(x.to_dense())));

  auto psi = QuantumState::basis(l, {0, 1});
  auto out = apply(SparseOperator::identity(l), psi);
  CHECK(out.amplitudes() == psi.amplitudes());
  auto flipped = apply(sp1, psi);
  CHECK(flipped.amplitudes()(Eigen::Index(l.basis_index({1, 1}))) == Complex(1.0));

  auto other = HilbertLayout::register_only(2, 3);
  CHECK_THROWS_AS(sp1 + SparseOperator::identity(other), LayoutMismatch);
  CHECK_THROWS_AS(mat_commutator_norm(sp1, SparseOperator::identity(other)), LayoutMismatch);
  CHECK_THROWS_AS(apply(sp1, QuantumState::basis(other, {0, 0, 0})), LayoutMismatch);
}

TEST_CASE("sparse canonicalization merges duplicates and drops zeros") {
  auto l = two_qubits();
  SparseOperator op(l, {{1, 2, 1.0}, {0, 0, 2.0}, {1, 2, -1.0}, {0, 0, 1.0}, {3, 3, 0.0}});
  REQUIRE(op.nnz() == 1);
  CHECK(op.at(0, 0) == Complex(3.0));
  CHECK_THROWS(SparseOperator(l, {{4, 0, 1.0}}));
}

TEST_CASE("quantum state invariants") {
  auto l = two_qubits();
  KetVector v(4);
  v << 1.0, 1.0, 0.0, 0.0;
  auto psi = QuantumState::ket(l, v);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
  auto rho = psi.to_density();
  CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
  CHECK(rho.hermiticity_defect() < 1e-15);
  CHECK(rho.min_eigenvalue() > -1e-12);
  CHECK_NOTHROW(rho.validate());
  CHECK_THROWS_AS(psi.matrix(), std::logic_error);
  CHECK_THROWS_AS(rho.amplitudes(), std::logic_error);

  DenseMatrix bad = DenseMatrix::Identity(4, 4);
  CHECK_THROWS_AS(QuantumState::density(l, bad).validate(), std::domain_error);
  DenseMatrix neg = DenseMatrix::Zero(4, 4);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(QuantumState::density(l, neg).validate(), std::domain_error);
}

TEST_CASE("partial trace") {
  std::mt19937 rng(11);
  HilbertLayout l({{"A", SubsystemKind::Qutrit, 2}, {"B", SubsystemKind::Qutrit, 3}});
  HilbertLayout la({{"A", SubsystemKind::Qutrit, 2}});
  SUBCASE("product state factorizes") {
    DenseMatrix ra = random_density(2, rng), rb = random_density(3, rng);
    DenseMatrix prod = Eigen::kroneckerProduct(ra, rb);
    auto red = partial_trace(QuantumState::density(l, prod), {"A"});
    CHECK((red.matrix() - ra).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(red.layout() == la);
  }
  SUBCASE("trace over everything") {
    auto red = partial_trace(QuantumState::density(l, random_density(6, rng)), {});
    REQUIRE(red.dim() == 1);
    CHECK(std::abs(red.matrix()(0, 0) - 1.0) < 1e-12);
  }
  SUBCASE("Bell state") {
    auto two = two_qubits();
    KetVector v = KetVector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    auto red = partial_trace(QuantumState::ket(two, v), {"q2"});
    CHECK((red.matrix() - 0.5 * DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("trace preserved on random states") {
    for (int k = 0; k < 5; ++k) {
      auto rho = QuantumState::density(l, random_density(6, rng));
      CHECK(std::abs(partial_trace(rho, {"B"}).trace() - rho.trace()) < 1e-12);
    }
  }
  CHECK_THROWS_AS(partial_trace(QuantumState::maximally_mixed(l), {"Z"}), std::invalid_argument);
}
