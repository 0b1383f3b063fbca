#include <sstream>

#include "doctest.h"
#include "wprep/entanglement.hpp"
#include "wprep/snapshot.hpp"

using namespace wprep;

TEST_CASE("ket snapshot round trip is bit exact") {
  const auto l = HilbertLayout::protocol(2, 3, 2);
  KetVector v(l.total_dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(std::sin(1.0 + i), std::cos(0.3 * i));
  const auto s = QuantumState::ket(l, v);
  std::stringstream buf;
  write_snapshot(buf, s);
  const auto r = read_snapshot(buf);
  CHECK(r.layout() == l);
  REQUIRE(r.is_ket());
  CHECK(r.amplitudes() == s.amplitudes());
}

TEST_CASE("density snapshot round trip") {
  const auto l = HilbertLayout::protocol(1, 3, 3);
  const auto rho = protocol_target(l, 1).to_density();
  std::stringstream buf;
  write_snapshot(buf, rho);
  const auto r = read_snapshot(buf);
  REQUIRE(!r.is_ket());
  CHECK(r.matrix() == rho.matrix());
  CHECK(r.layout().subsystems()[1].label == "A");
}

TEST_CASE("corrupt snapshots are rejected") {
  const auto l = HilbertLayout::protocol(1, 2, 2);
  std::stringstream buf;
  write_snapshot(buf, protocol_initial(l));
  const std::string good = buf.str();

  auto reject = [](std::string bytes) {
    std::istringstream in(bytes);
    CHECK_THROWS_AS(read_snapshot(in), std::runtime_error);
  };
  reject(good.substr(0, good.size() - 3));
  reject(good.substr(0, 10));
  std::string bad = good;
  bad[0] = 'X';
  reject(bad);
  bad = good;
  bad[8] = 9;  // version
  reject(bad);
  bad = good;
  bad[12] = 7;  // form
  reject(bad);
}
