#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "wprep/sweep.hpp"

using namespace wprep;

TEST_CASE("reference point fidelity and convergence flags") {
  const auto row = run_point(default_config(), 8.0, 0.2);
  CHECK(row.error.empty());
  CHECK(row.fidelity == doctest::Approx(0.97486).epsilon(2e-5));
  CHECK(row.step_ok);
  CHECK(row.trunc_ok);
  CHECK(row.active_dim == 8);
  CHECK(row.alt_cavity_levels == 2);
  CHECK(row.t_w > 0.0);
  CHECK(std::abs(row.fidelity_half_step - row.fidelity) < kStepTolerance);
}

TEST_CASE("a failing point yields a flagged row instead of aborting") {
  auto cfg = default_config();
  cfg.integrator.max_step = 1e-6;  // far above the resolvable step
  const auto row = run_point(cfg, 8.0, 0.0);
  CHECK(!row.error.empty());
  CHECK(std::isnan(row.fidelity));
  CHECK(!row.step_ok);
  CHECK(!row.trunc_ok);
}

TEST_CASE("sweep output does not depend on the worker count") {
  auto cfg = default_config();
  cfg.sweep.b_grid = {6.0, 10.0};
  cfg.sweep.ratios = {0.0, 1.0};
  cfg.sweep.step_check = false;
  std::size_t calls = 0;
  const auto one = run_sweep(cfg, 1, [&](const SweepRow&, std::size_t done, std::size_t total) {
    ++calls;
    CHECK(done <= total);
  });
  const auto two = run_sweep(cfg, 2);
  CHECK(calls == 4);
  std::ostringstream a, b;
  write_sweep_csv(a, one, true);
  write_sweep_csv(b, two, true);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("b,ratio,fidelity,t_w_ns,trunc_ok,step_ok,wall_s\n6,0,", 0) == 0);
  CHECK(one.rows[1].b == 6.0);
  CHECK(one.rows[1].ratio == 1.0);
  CHECK(one.rows[2].b == 10.0);
  // Disabled checks leave the flag unset.
  CHECK(!one.rows[0].step_ok);
}

TEST_CASE("metadata carries version, hash and diagnostics") {
  auto cfg = default_config();
  cfg.sweep.b_grid = {8.0};
  cfg.sweep.ratios = {0.0};
  const auto res = run_sweep(cfg, 1);
  std::ostringstream os;
  write_sweep_metadata(os, res, cfg);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j["version"] == version_string());
  CHECK(j["parameter_hash"].get<std::string>().size() == 16);
  CHECK(j["rows"].size() == 1);
  CHECK(j["rows"][0]["wall_s"].get<double>() > 0.0);
  CHECK(j["truncations"]["cavity_levels"] == 3);
  auto other = cfg;
  other.b = 9.0;
  CHECK(parameter_hash(other) != parameter_hash(cfg));
}

TEST_CASE("step check refines until two successive steps agree") {
  // At b = 6 and full crosstalk the default step misses the 1e-6 gate.
  const auto row = run_point(default_config(), 6.0, 1.0);
  CHECK(row.step_ok);
  CHECK(row.step_refinements >= 1);
  CHECK(row.step_refinements <= kMaxStepRefinements);
  CHECK(std::abs(row.fidelity_half_step - row.fidelity) < kStepTolerance);
  CHECK(row.fidelity == doctest::Approx(0.89196).epsilon(2e-5));
}
