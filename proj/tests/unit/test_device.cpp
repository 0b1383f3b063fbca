#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "reference_fixture.hpp"
#include "wprep/device.hpp"

using namespace wprep;

namespace {
constexpr double MHz = kTwoPi * 1e6;
constexpr double GHz = kTwoPi * 1e9;
}  // namespace

TEST_CASE("matched couplings at b = 8") {
  const auto dev = reference_device(8.0);
  const auto& p = dev.params;
  const double g_expect[] = {62.5, 88.4, 108.3};
  const double gA_expect[] = {36.1, 51.0, 62.5};
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(p.g[j] / MHz - g_expect[j]) < 0.1);
    CHECK(std::abs(p.g_A[j] / MHz - gA_expect[j]) < 0.1);
    CHECK(p.delta_A[j] == p.delta[j]);
    CHECK(p.gt[j] == doctest::Approx(std::sqrt(2.0) * p.g[j]).epsilon(1e-15));
    CHECK(p.deltat[j] == doctest::Approx(p.delta[j] - 0.05 * 6.5 * GHz).epsilon(1e-15));
    CHECK(p.deltat_A[j] == doctest::Approx(p.delta[j] - 0.05 * 6.5 * GHz).epsilon(1e-15));
  }
  CHECK(p.Delta[0][1] / GHz == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(p.Delta[0][2] / GHz == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(p.Delta[0][2] / kTwoPi == -1e9);
  CHECK(p.Delta[0][1] / kTwoPi == -0.5e9);
  CHECK(p.Delta[1][2] / kTwoPi == -0.5e9);
  CHECK(p.Delta[1][2] / GHz == doctest::Approx(-0.5).epsilon(1e-14));

  CHECK(dev.derived.lambda / MHz == doctest::Approx(-4.51).epsilon(0.002));
  CHECK(std::abs(dev.derived.t_w * 1e9 - 32.0) < 0.5);
  CHECK(dev.derived.chi < 0.0);
}

TEST_CASE("matching identities hold to 1e-12") {
  for (double b : {4.0, 6.5, 8.0, 12.0}) {
    const auto dev = reference_device(b);
    const auto& p = dev.params;
    const double chi = dev.derived.chi, lambda = dev.derived.lambda;
    double sum_A = 0.0;
    for (std::size_t j = 0; j < p.n; ++j) {
      CHECK(std::abs(p.g[j] * p.g[j] / p.delta[j] - chi) / std::abs(chi) < 1e-12);
      CHECK(std::abs(p.g[j] * p.g_A[j] / p.delta[j] - lambda) / std::abs(lambda) < 1e-12);
      sum_A += p.g_A[j] * p.g_A[j] / p.delta_A[j];
      for (std::size_t l = 0; l < p.n; ++l) {
        CHECK(std::abs(p.Delta[j][l] - (p.delta[l] - p.delta[j])) <= 1e-15 * std::abs(p.delta[l] - p.delta[j]) + 1e-6);
        CHECK(p.Delta[j][l] == -p.Delta[l][j]);
      }
    }
    CHECK(std::abs(sum_A - chi) / std::abs(chi) < 1e-12);
    CHECK(std::abs(lambda - chi / std::sqrt(3.0)) / std::abs(lambda) < 1e-12);
    CHECK(std::signbit(chi) == std::signbit(p.delta[0]));
  }
}

TEST_CASE("single register degenerate case") {
  const double d = -0.7 * GHz, g = 40 * MHz;
  const auto dev = derive_matched_params({{d}, g, {6.0 * GHz, 6.0 * GHz}});
  CHECK(dev.params.g_A[0] == doctest::Approx(g));
  CHECK(dev.derived.lambda == doctest::Approx(g * g / d));
  CHECK(dev.derived.t_w == doctest::Approx(std::numbers::pi * std::abs(d) / (2 * g * g)));
}

TEST_CASE("derive rejects bad detunings") {
  CHECK_THROWS_AS(derive_matched_params({{-1.0 * GHz, 1.0 * GHz}, 10 * MHz, {1, 1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(derive_matched_params({{-1.0 * GHz, 0.0}, 10 * MHz, {1, 1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(derive_matched_params({{-1.0 * GHz}, 0.0, {1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(derive_matched_params({{-1.0 * GHz}, 1.0, {1}}), std::invalid_argument);
  CHECK_THROWS_AS(derive_matched_params_b(reference_inputs(), 0.0), std::invalid_argument);
}

TEST_CASE("condition report") {
  auto dev = reference_device(8.0);
  apply_reference_losses(dev.params);
  const auto report = condition_report(dev.params, dev.derived);
  REQUIRE(report.size() == 3 + 3 + 2 + 2);
  CHECK(report[0].value == doctest::Approx(8.0));
  CHECK(report[0].threshold == 5.0);
  CHECK(report[0].pass);
  const auto& cav = report[8];
  CHECK(cav.value == doctest::Approx(5e-6 / 3));
  CHECK(cav.pass);
  CHECK(report[9].value == doctest::Approx(2.5e-6));
  CHECK(all_pass(report));

  SUBCASE("decoupled coupler gives infinite isolation") {
    auto p = dev.params;
    for (auto& x : p.g_A) x = 0.0;
    const auto r = condition_report(p, dev.derived);
    CHECK(std::isinf(r[6].value));
    CHECK(r[6].pass);
    CHECK(r[7].pass);
  }
  SUBCASE("weakly dispersive point fails") {
    const auto d2 = reference_device(3.0);
    CHECK_FALSE(condition_report(d2.params, d2.derived)[0].pass);
  }
}

TEST_CASE("crosstalk estimate") {
  const std::vector<double> gA = {36.1 * MHz, 51.0 * MHz, 62.5 * MHz};
  const auto g = estimate_crosstalk({1e-15, 1e-15, 1e-15}, 97e-15, gA);
  CHECK(g[0][1] == doctest::Approx(0.01 * gA[1]));
  CHECK(g[1][0] == g[0][1]);
  CHECK(g[0][0] == 0.0);
  const auto z = estimate_crosstalk({0.0, 0.0, 2e-15}, 50e-15, gA);
  CHECK(z[0][1] == 0.0);
  CHECK(z[0][2] == doctest::Approx(gA[0] * 2e-15 / 52e-15));
  CHECK_THROWS_AS(estimate_crosstalk({-1e-15, 1e-15, 1e-15}, 97e-15, gA), std::invalid_argument);
  CHECK_THROWS_AS(estimate_crosstalk({1e-15, 1e-15, 1e-15}, 0.0, gA), std::invalid_argument);
  CHECK_THROWS_AS(estimate_crosstalk({1e-15, 1e-15}, 1e-15, gA), std::invalid_argument);
}

TEST_CASE("quality factor") {
  CHECK(quality_factor(6.0 * GHz, 5e-6) == doctest::Approx(1.9e5).epsilon(0.01));
  CHECK(quality_factor(5.0 * GHz, 5e-6) == doctest::Approx(1.6e5).epsilon(0.02));
  CHECK(quality_factor(5.0 * GHz, 10e-6) == doctest::Approx(2 * quality_factor(5.0 * GHz, 5e-6)));
  CHECK_THROWS(quality_factor(0.0, 1.0));
  CHECK_THROWS(quality_factor(1.0, -1.0));
}
