#include <cmath>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "reference_fixture.hpp"
#include "wprep/errors.hpp"
#include "wprep/hamiltonians.hpp"

using namespace wprep;

namespace {

DeviceParams small_params(std::size_t qutrit_levels, std::size_t cavity_levels, double ratio = 0.0) {
  auto p = reference_device(8.0).params;
  p.qutrit_levels = qutrit_levels;
  p.cavity_levels = cavity_levels;
  const double g_max = *std::max_element(p.g_A.begin(), p.g_A.end());
  p.g_cross = uniform_crosstalk(p.n, ratio * g_max);
  return p;
}

std::vector<double> sample_times() {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 64e-9);
  std::vector<double> t{0.0, 32e-9 * std::numbers::sqrt2};
  for (int k = 0; k < 8; ++k) t.push_back(u(rng));
  return t;
}

}  // namespace

TEST_CASE("resonant Jaynes-Cummings reduction") {
  const double g = 1.3e8;
  DeviceParams p;
  p.n = 1;
  p.qutrit_levels = 2;
  p.cavity_levels = 3;
  p.delta = {0.0};
  p.delta_A = {1e9};
  p.g = {g};
  p.g_A = {0.0};
  p.gt = p.gt_A = p.deltat = p.deltat_A = {0.0};
  const auto layout = HilbertLayout::protocol(1, 2, 3);
  const auto H = build_H_I(p, layout);
  const auto a = embed(annihilation(3), "c1", layout);
  const auto sp = embed(transition(2, 1, 0), "q1", layout);
  const SparseOperator jc = Complex(g) * (a * sp + a.adjoint() * sp.adjoint());
  for (double t : {0.0, 1.7e-9, 3.3e-8}) CHECK((H.at(t) - jc).max_abs() < 1e-6);
  CHECK(H.at(0.0).at(layout.basis_index({0, 0, 1}), layout.basis_index({1, 0, 0})) == Complex(g));
}

TEST_CASE("H_I matrix elements and Hermiticity") {
  const auto p = small_params(3, 2);
  const auto layout = HilbertLayout::protocol(3, 3, 2);
  const auto H = build_H_I(p, layout);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<std::size_t> excited(7, 0), photon(7, 0);
    excited[j] = 1;
    photon[4 + j] = 1;
    CHECK(H.at(0.0).at(layout.basis_index(photon), layout.basis_index(excited)) == Complex(p.g[j]));
  }
  for (double t : sample_times()) {
    const auto Ht = H.at(t);
    CHECK(Ht.hermiticity_defect() < 1e-12 * Ht.max_abs());
  }
}

TEST_CASE("Theta_I") {
  SUBCASE("vanishes for two-level qutrits without crosstalk") {
    const auto p = small_params(2, 2);
    CHECK(build_Theta_I(p, HilbertLayout::protocol(3, 2, 2)).empty());
  }
  SUBCASE("matrix element of the 1-2 transition") {
    const auto p = small_params(3, 2);
    const auto layout = HilbertLayout::protocol(3, 3, 2);
    const auto T = build_Theta_I(p, layout);
    CHECK(T.at(0.0).at(layout.basis_index({1, 0, 0, 0, 1, 0, 0}), layout.basis_index({2, 0, 0, 0, 0, 0, 0})) ==
          Complex(p.gt[0]));
  }
  SUBCASE("crosstalk conserves photon number") {
    const auto p = small_params(2, 3, 0.4);
    const auto layout = HilbertLayout::protocol(3, 2, 3);
    const auto T = build_Theta_I(p, layout);
    CHECK(T.terms().size() == 3);
    // Exact integer diagonal; a^+a picks up sqrt(2)^2 rounding.
    std::vector<Triplet> diag;
    for (std::size_t i = 0; i < layout.total_dim(); ++i)
      diag.push_back({i, i, double(layout.level_of(i, 4) + layout.level_of(i, 5) + layout.level_of(i, 6))});
    const SparseOperator n_ph(layout, diag);
    for (double t : sample_times()) CHECK(mat_commutator_norm(T.at(t), n_ph) == 0.0);
    // a_1 a_2^+ |1,0> = |0,1> with amplitude g_12 at t=0.
    const double g12 = p.g_cross[0][1];
    CHECK(T.at(0.0).at(layout.basis_index({0, 0, 0, 0, 0, 1, 0}), layout.basis_index({0, 0, 0, 0, 1, 0, 0})) ==
          Complex(g12));
  }
  SUBCASE("asymmetric crosstalk rejected") {
    auto p = small_params(3, 2, 0.2);
    p.g_cross[0][1] *= 1.5;
    CHECK_THROWS_AS(build_Theta_I(p, HilbertLayout::protocol(3, 3, 2)), std::invalid_argument);
  }
}

TEST_CASE("h_I commutes with the excitation number") {
  const auto p = small_params(3, 3, 0.6);
  const auto layout = HilbertLayout::protocol(3, 3, 3);
  const auto h = build_h_I(p, layout);
  const auto N = excitation_number(layout);
  for (double t : sample_times()) {
    const auto ht = h.at(t);
    CHECK(mat_commutator_norm(ht, N) == 0.0);
    CHECK(ht.hermiticity_defect() < 1e-12 * ht.max_abs());
  }
}

TEST_CASE("layout mismatch") {
  const auto p = small_params(3, 3);
  CHECK_THROWS_AS(build_H_I(p, HilbertLayout::protocol(3, 3, 2)), LayoutMismatch);
  CHECK_THROWS_AS(build_Theta_I(p, HilbertLayout::protocol(2, 3, 3)), LayoutMismatch);
  CHECK_THROWS_AS(build_H_eff(p, HilbertLayout::protocol(3, 2, 3)), LayoutMismatch);
}

TEST_CASE("H_eff") {
  const auto p = small_params(2, 2);
  const auto layout = HilbertLayout::protocol(3, 2, 2);
  const auto H = build_H_eff(p, layout);
  const auto H0 = H.at(0.0);
  CHECK(H0.hermiticity_defect() < 1e-12 * H0.max_abs());

  SUBCASE("lambda_j reduces to g g_A / delta") {
    const double lambda = reference_device(8.0).derived.lambda;
    CHECK(H0.at(layout.basis_index({1, 0, 0, 0, 0, 0, 0}), layout.basis_index({0, 0, 0, 1, 0, 0, 0})).real() ==
          doctest::Approx(lambda).epsilon(1e-12));
  }
  SUBCASE("Stark shift sign with the coupler decoupled") {
    auto q = p;
    for (auto& x : q.g_A) x = 0.0;
    const auto Hq = build_H_eff(q, layout).at(0.0);
    const std::size_t k = layout.basis_index({0, 0, 0, 0, 1, 0, 0});
    CHECK(Hq.at(k, k).real() == doctest::Approx(-p.g[0] * p.g[0] / p.delta[0]).epsilon(1e-12));
  }
  SUBCASE("zero-photon sector equals H0 + H_int") {
    const auto reg = HilbertLayout::register_only(3, 2);
    const LocalMatrix expected = (build_H0(p, reg) + build_H_tilde_int(p, reg)).to_dense();
    const std::size_t cav_block = 8;
    for (std::size_t r = 0; r < reg.total_dim(); ++r)
      for (std::size_t c = 0; c < reg.total_dim(); ++c) {
        const Complex v = H0.at(r * cav_block, c * cav_block);
        CHECK(std::abs(v - expected(Eigen::Index(r), Eigen::Index(c))) < 1e-12 * H0.max_abs());
      }
  }
}

TEST_CASE("H_tilde_int and H0 on the register space") {
  const auto dev = reference_device(8.0);
  const auto& p = dev.params;
  const auto reg = HilbertLayout::register_only(3, 2);
  const auto Hint = build_H_tilde_int(p, reg);
  const auto H0 = build_H0(p, reg);
  const double lambda = dev.derived.lambda, chi = dev.derived.chi;

  const auto psi = QuantumState::basis(reg, {0, 0, 0, 1});
  const KetVector out = Hint.apply(psi.amplitudes());
  for (auto lv : {std::vector<std::size_t>{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}})
    CHECK(std::abs(out(Eigen::Index(reg.basis_index(lv))) - lambda) < 1e-12 * std::abs(lambda));
  CHECK(std::abs(out.norm() - std::sqrt(3.0) * std::abs(lambda)) < 1e-9 * std::abs(lambda));

  SparseOperator n_q = SparseOperator::zero(reg);
  for (const auto& s : reg.subsystems()) n_q += embed(projector(2, 1), s.label, reg);
  CHECK(mat_commutator_norm(Hint, n_q) == 0.0);

  const auto ground_A = reg.basis_index({0, 0, 0, 1});
  CHECK(H0.at(ground_A, ground_A).real() == doctest::Approx(chi));
  CHECK(H0.at(0, 0) == Complex(0.0));
  KetVector w = KetVector::Zero(16);
  for (auto lv : {std::vector<std::size_t>{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}})
    w(Eigen::Index(reg.basis_index(lv))) = 1.0 / std::sqrt(3.0);
  CHECK((H0.apply(w) - chi * w).norm() < 1e-9 * std::abs(chi));

  SUBCASE("single-excitation block") {
    const LocalMatrix d = Hint.to_dense();
    const Complex block = w.dot(d * QuantumState::basis(reg, {0, 0, 0, 1}).amplitudes());
    CHECK(std::abs(block - std::sqrt(3.0) * lambda) < 1e-9 * std::abs(lambda));
  }
  SUBCASE("frame invariance") {
    const LocalMatrix h0 = H0.to_dense(), hi = Hint.to_dense();
    const double t = dev.derived.t_w;
    const LocalMatrix U = (Complex(0, 1) * t * h0).exp();
    const LocalMatrix rotated = U * hi * U.adjoint();
    CHECK((rotated - hi).norm() < 1e-10 * hi.norm());
  }
  SUBCASE("zero lambda and unmatched params") {
    auto q = p;
    for (auto& x : q.g_A) x = 0.0;
    CHECK(build_H_tilde_int(q, reg).is_zero());
    q = p;
    q.g_A[1] *= 1.01;
    CHECK_THROWS_AS(build_H_tilde_int(q, reg), std::invalid_argument);
  }
}

TEST_CASE("time-dependent operator evaluation") {
  const auto layout = HilbertLayout::register_only(1, 2);
  const auto sp = embed(transition(2, 1, 0), "q1", layout);
  TimeDependentOperator H(layout, {{"x", sp, 2.0, Complex(0.5, 0.0), false}});
  const double t = 0.3;
  const auto Ht = H.at(t);
  CHECK(std::abs(Ht.at(layout.basis_index({1, 0}), 0) - 0.5 * std::polar(1.0, 2.0 * t)) < 1e-15);
  CHECK(std::abs(Ht.at(0, layout.basis_index({1, 0})) - 0.5 * std::polar(1.0, -2.0 * t)) < 1e-15);
  CHECK(H.max_frequency() == 2.0);
  CHECK(H.norm_bound() == doctest::Approx(1.0));
  CHECK_THROWS(TimeDependentOperator(layout, {{"bad", sp, 0.0, 1.0, true}}));
  CHECK_THROWS(TimeDependentOperator(layout, {{"bad", sp + sp.adjoint(), 1.0, 1.0, true}}));
}
