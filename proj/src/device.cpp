#include "wprep/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wprep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string idx(std::size_t j) { return std::to_string(j + 1); }

}  // namespace

MatchedDevice derive_matched_params(const MatchInputs& in) {
  const std::size_t n = in.delta.size();
  if (n == 0) throw std::invalid_argument("derive_matched_params: no detunings given");
  if (!(in.g1 > 0.0)) throw std::invalid_argument("derive_matched_params: g1 must be positive");
  for (double d : in.delta) {
    if (d == 0.0) throw std::invalid_argument("derive_matched_params: zero detuning");
    if ((d > 0.0) != (in.delta[0] > 0.0))
      throw std::invalid_argument("derive_matched_params: detunings of mixed sign cannot share one Stark shift");
  }
  if (in.omega10.size() != n + 1)
    throw std::invalid_argument("derive_matched_params: expected n+1 qutrit frequencies");

  DeviceParams p;
  p.n = n;
  p.delta = in.delta;
  p.delta_A = in.delta;
  p.g.resize(n);
  p.g_A.resize(n);
  p.gt.resize(n);
  p.gt_A.resize(n);
  p.deltat.resize(n);
  p.deltat_A.resize(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double omega10_A = in.omega10[n];
  for (std::size_t j = 0; j < n; ++j) {
    p.g[j] = in.g1 * std::sqrt(in.delta[j] / in.delta[0]);
    p.g_A[j] = p.g[j] * inv_sqrt_n;
    p.gt[j] = std::numbers::sqrt2 * p.g[j];
    p.gt_A[j] = std::numbers::sqrt2 * p.g_A[j];
    p.deltat[j] = p.delta[j] - in.anharmonic_fraction * in.omega10[j];
    p.deltat_A[j] = p.delta_A[j] - in.anharmonic_fraction * omega10_A;
  }
  // Differenced in cycles/s so detunings that are exact in Hz give Delta/2pi
  // exact as well.
  p.Delta.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) p.Delta[k][l] = kTwoPi * (p.delta[l] / kTwoPi - p.delta[k] / kTwoPi);
  p.g_cross = uniform_crosstalk(n, 0.0);
  p.omega10 = in.omega10;
  p.omega_c.resize(n);
  for (std::size_t j = 0; j < n; ++j) p.omega_c[j] = in.omega10[j] - in.delta[j];
  p.kappa.assign(n, 0.0);
  p.rates.assign(n + 1, QutritRates{});

  MatchedDevice out{p, derive_quantities(p)};
  return out;
}

MatchedDevice derive_matched_params_b(MatchInputs in, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("normalized detuning b must be positive");
  if (in.delta.empty()) throw std::invalid_argument("derive_matched_params: no detunings given");
  in.g1 = std::abs(in.delta[0]) / b;
  return derive_matched_params(in);
}

DerivedQuantities derive_quantities(const DeviceParams& p) {
  if (p.n == 0 || p.g.empty() || p.g_A.empty() || p.delta.empty())
    throw std::invalid_argument("derive_quantities: parameters not populated");
  DerivedQuantities d;
  d.n = p.n;
  d.chi = p.g[0] * p.g[0] / p.delta[0];
  d.lambda = p.g[0] * p.g_A[0] / p.delta[0];
  d.t_w = d.lambda != 0.0 ? preparation_time(p.n, d.lambda) : kInf;
  return d;
}

double preparation_time(std::size_t n, double lambda) {
  if (n == 0) throw std::invalid_argument("preparation_time: n must be >= 1");
  if (lambda == 0.0) throw std::invalid_argument("preparation_time: lambda is zero");
  return std::numbers::pi / (2.0 * std::sqrt(static_cast<double>(n)) * std::abs(lambda));
}

SquareTable uniform_crosstalk(std::size_t n, double value) {
  SquareTable t(n, std::vector<double>(n, value));
  for (std::size_t k = 0; k < n; ++k) t[k][k] = 0.0;
  return t;
}

std::vector<ConditionEntry> condition_report(const DeviceParams& p, const DerivedQuantities& derived,
                                             const ConditionThresholds& th) {
  std::vector<ConditionEntry> out;
  const std::size_t n = p.n;
  auto ratio = [](double num, double den) { return den == 0.0 ? kInf : num / den; };

  for (std::size_t j = 0; j < n; ++j) {
    const double v = ratio(std::abs(p.delta[j]), p.g[j]);
    out.push_back({"dispersive |delta_" + idx(j) + "|/g_" + idx(j), v, th.dispersive, v >= th.dispersive});
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double v = ratio(std::abs(p.delta_A[j]), p.g_A[j]);
    out.push_back({"dispersive |delta_A" + idx(j) + "|/g_A" + idx(j), v, th.dispersive, v >= th.dispersive});
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double inv_sum = std::abs(1.0 / p.delta_A[j] + 1.0 / p.delta_A[j + 1]);
    const double v = ratio(std::abs(p.delta_A[j + 1] - p.delta_A[j]), inv_sum * p.g_A[j] * p.g_A[j + 1]);
    out.push_back({"cavity isolation c" + idx(j) + "-c" + idx(j + 1), v, th.isolation, v >= th.isolation});
  }

  double min_cavity_life = kInf;
  for (double k : p.kappa)
    if (k > 0.0) min_cavity_life = std::min(min_cavity_life, 1.0 / k);
  const double t_cav = min_cavity_life / static_cast<double>(n);
  out.push_back({"cavity lifetime T_cav [s]", t_cav, th.lifetime * derived.t_w, t_cav >= th.lifetime * derived.t_w});

  double min_qutrit_life = kInf;
  for (const auto& r : p.rates)
    for (double g : {r.gamma10, r.gamma21, r.gamma20, r.gamma_phi1, r.gamma_phi2})
      if (g > 0.0) min_qutrit_life = std::min(min_qutrit_life, 1.0 / g);
  out.push_back({"qutrit lifetime min 1/gamma [s]", min_qutrit_life, th.lifetime * derived.t_w,
                 min_qutrit_life >= th.lifetime * derived.t_w});
  return out;
}

bool all_pass(const std::vector<ConditionEntry>& report) {
  return std::all_of(report.begin(), report.end(), [](const ConditionEntry& e) { return e.pass; });
}

SquareTable estimate_crosstalk(const std::vector<double>& caps, double self_cap, const std::vector<double>& g_A) {
  if (caps.size() != g_A.size()) throw std::invalid_argument("estimate_crosstalk: capacitance/coupling count mismatch");
  if (!(self_cap > 0.0)) throw std::invalid_argument("estimate_crosstalk: self capacitance must be positive");
  double c_sum = self_cap;
  for (double c : caps) {
    if (c < 0.0 || !std::isfinite(c)) throw std::invalid_argument("estimate_crosstalk: negative coupling capacitance");
    c_sum += c;
  }
  const std::size_t n = caps.size();
  SquareTable g(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l)
      if (k != l) g[k][l] = std::max(g_A[k] * caps[l], g_A[l] * caps[k]) / c_sum;
  return g;
}

double quality_factor(double omega_c, double kappa_inv) {
  if (!(omega_c > 0.0) || !(kappa_inv > 0.0)) throw std::invalid_argument("quality_factor: inputs must be positive");
  return omega_c * kappa_inv;
}

}  // namespace wprep
