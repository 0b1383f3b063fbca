#include <sstream>

#include "doctest.h"
#include "reference_fixture.hpp"
#include "wprep/config.hpp"
#include "wprep/errors.hpp"

using namespace wprep;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped reference config equals the built-in defaults") {
  const auto cfg = load_config(WPREP_SOURCE_DIR "/configs/paper_fig4.cfg");
  CHECK(canonical_text(cfg) == canonical_text(default_config()));
}

TEST_CASE("units convert to SI and rad/s") {
  const auto c = parse("[device]\ndelta = -500 MHz, -1 GHz, -1.5e9 Hz\n[decoherence]\nkappa_inv = 5000 ns\n"
                       "gamma10_inv = 0.01 ms\n[crosstalk]\nself_cap = 0.097 pF\n");
  CHECK(c.delta == std::vector<double>{kTwoPi * -0.5e9, kTwoPi * -1e9, kTwoPi * -1.5e9});
  CHECK(c.losses.kappa_inv == std::vector<double>{5e-6});
  CHECK(c.losses.gamma10_inv == std::vector<double>{1e-5});
  CHECK(c.self_cap == 97e-15);
}

TEST_CASE("decimal units parse to the same double as the literal") {
  const auto c = parse("[decoherence]\ngamma21_inv = 7.5 us\ngamma_phi1_inv = 2.5us\n");
  CHECK(c.losses.gamma21_inv[0] == 7.5e-6);
  CHECK(c.losses.gamma_phi1_inv[0] == 2.5e-6);
}

TEST_CASE("a unit on the last list element is shared") {
  const auto c = parse("[crosstalk]\ncoupling_caps = 1, 2 pF, 3 fF\n");
  CHECK(c.coupling_caps == std::vector<double>{1e-15, 2e-12, 3e-15});
}

TEST_CASE("config errors name the file and line") {
  CHECK(error_of("[device]\nfoo = 1\n").find("test.cfg:2: unknown key 'foo'") == 0);
  CHECK(error_of("[nope]\n").find("test.cfg:1: unknown section") == 0);
  CHECK(error_of("[device]\ndelta = -0.5, -1, -1.5 us\n").find("wrong dimension") != std::string::npos);
  CHECK(error_of("[device]\ndelta = -0.5, -1, -1.5\n").find("missing unit") != std::string::npos);
  CHECK(error_of("[device]\nb = 8 GHz\n").find("unexpected unit") != std::string::npos);
  CHECK(error_of("[device]\nb = 8\nb = 9\n").find("test.cfg:3: duplicate key") == 0);
  CHECK(error_of("n = 3\n").find("outside of any section") != std::string::npos);
  CHECK(error_of("[device]\nn = 2.5\n").find("non-negative integer") != std::string::npos);
  CHECK(error_of("[device]\nn = 2\n").find("delta needs") != std::string::npos);
  CHECK(error_of("[sweep]\ninclude_theta = maybe\n").find("boolean") != std::string::npos);
  CHECK(error_of("[integrator]\nmethod = euler\n").find("test.cfg:2:") == 0);
  CHECK(error_of("[decoherence]\nkappa_inv = -1 us\n").find(">= 0") != std::string::npos);
  CHECK(error_of("[decoherence]\nkappa_inv = 1 nope\n").find("unknown unit") != std::string::npos);
  CHECK(error_of("[device]\nb = abc\n").find("expected a number") != std::string::npos);
}

TEST_CASE("comments and blank lines are ignored") {
  const auto c = parse("# header\n\n[device]  # trailing\nb = 6  # six\n");
  CHECK(c.b == 6.0);
}

TEST_CASE("grid parsing") {
  const auto g = parse_grid("4:12:0.5");
  REQUIRE(g.size() == 17);
  CHECK(g.front() == 4.0);
  CHECK(g.back() == 12.0);
  CHECK(parse_grid("6, 8,10") == std::vector<double>{6, 8, 10});
  CHECK(parse_grid("5:5:1") == std::vector<double>{5});
  CHECK_THROWS_AS(parse_grid("4:12"), ConfigError);
  CHECK_THROWS_AS(parse_grid("12:4:1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("4:12:0"), ConfigError);
  CHECK_THROWS_AS(parse_grid("a,b"), ConfigError);
}

TEST_CASE("build_device applies losses, cavity frequencies and crosstalk") {
  const auto cfg = default_config();
  const auto dev = build_device(cfg, 8.0, 0.2);
  const auto ref = reference_device(8.0);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(dev.params.g[j] == doctest::Approx(ref.params.g[j]).epsilon(1e-14));
    CHECK(dev.params.kappa[j] == doctest::Approx(1.0 / 5e-6));
    CHECK(dev.params.omega_c[j] == doctest::Approx(kTwoPi * (6.0 - 0.5 * j) * 1e9));
  }
  CHECK(dev.params.rates[3].gamma_phi2 == doctest::Approx(1.0 / 2.5e-6));
  const double gmax = *std::max_element(dev.params.g_A.begin(), dev.params.g_A.end());
  CHECK(dev.params.g_cross[0][1] == doctest::Approx(0.2 * gmax));
  CHECK(dev.params.g_cross[1][1] == 0.0);

  const auto lossless = build_device(cfg, 8.0, 0.0, false);
  CHECK(lossless.params.kappa[0] == 0.0);
  CHECK(lossless.params.rates[0].gamma10 == 0.0);
  CHECK(lossless.params.g_cross[0][2] == 0.0);
}

TEST_CASE("g1 overrides b") {
  auto cfg = default_config();
  cfg.g1 = std::abs(cfg.delta[0]) / 10.0;
  CHECK(build_device(cfg).params.g[0] == doctest::Approx(cfg.g1.value()));
}

TEST_CASE("zero lifetimes disable channels") {
  const auto c = parse("[decoherence]\ngamma20_inv = 0 us\n");
  CHECK(build_device(c).params.rates[1].gamma20 == 0.0);
}

TEST_CASE("canonical text distinguishes configs") {
  auto a = default_config();
  auto b = a;
  b.sweep.ratios.back() = 0.9;
  CHECK(canonical_text(a) != canonical_text(b));
}
