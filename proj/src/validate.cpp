#include "wprep/validate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/MatrixFunctions>

#include "wprep/entanglement.hpp"

namespace wprep {

namespace {

constexpr double kTraceTol = 1e-8;
constexpr double kPositivityFloor = -1e-7;
constexpr double kHermiticityTol = 1e-12;
constexpr double kFrameTol = 1e-10;
constexpr double kDecayTol = 1e-6;
constexpr double kDephasingTol = 1e-6;

std::vector<double> sample_times(double t_end, int count) {
  std::vector<double> t;
  for (int k = 0; k <= count; ++k) t.push_back(t_end * k / count);
  t.push_back(t_end / std::numbers::sqrt2);
  return t;
}

DeviceParams without_losses(DeviceParams p) {
  for (auto& k : p.kappa) k = 0.0;
  for (auto& r : p.rates) r = QutritRates{};
  return p;
}

CheckResult hermiticity(const RunConfig& cfg) {
  const auto dev = build_device(cfg);
  const auto& p = dev.params;
  const auto layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  const auto reg = HilbertLayout::register_only(p.n, 2);
  double worst = 0.0;
  auto rel = [](double defect, double scale) { return scale > 0.0 ? defect / scale : defect; };
  for (const auto& H : {build_H_I(p, layout), build_Theta_I(p, layout), build_h_I(p, layout), build_H_eff(p, layout)})
    for (double t : sample_times(dev.derived.t_w, 8)) worst = std::max(worst, rel(H.hermiticity_defect(t), H.at(t).max_abs()));
  for (const auto& H : {build_H_tilde_int(p, reg), build_H0(p, reg)}) worst = std::max(worst, rel(H.hermiticity_defect(), H.max_abs()));
  return {"hamiltonian hermiticity", worst < kHermiticityTol, worst, kHermiticityTol,
          "max |H - H^+| / max |H| over H_I, Theta_I, h_I, H_eff, H_tilde_int, H0", 0.0};
}

CheckResult excitation_commutator(const RunConfig& cfg) {
  const auto dev = build_device(cfg);
  const auto& p = dev.params;
  const auto layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  const auto N = excitation_number(layout);
  const auto h = build_h_I(p, layout);
  double worst = 0.0;
  for (double t : sample_times(dev.derived.t_w, 8)) worst = std::max(worst, mat_commutator_norm(h.at(t), N));
  return {"[h_I, N_exc] = 0", worst == 0.0, worst, 0.0, "max entry of the commutator, exact", 0.0};
}

CheckResult frame_invariance(const RunConfig& cfg) {
  const auto dev = build_device(cfg);
  const auto reg = HilbertLayout::register_only(dev.params.n, 2);
  const LocalMatrix h0 = build_H0(dev.params, reg).to_dense();
  const LocalMatrix hi = build_H_tilde_int(dev.params, reg).to_dense();
  double worst = 0.0;
  for (double t : sample_times(dev.derived.t_w, 8)) {
    const LocalMatrix U = (Complex(0, 1) * t * h0).exp();
    worst = std::max(worst, (U * hi * U.adjoint() - hi).norm() / hi.norm());
  }
  return {"interaction-frame invariance", worst < kFrameTol, worst, kFrameTol,
          "||e^{iH0 t} H_int e^{-iH0 t} - H_int||_F / ||H_int||_F", 0.0};
}

struct MasterStats {
  double trace_drift = 0.0;
  double min_eig = 0.0;
};

MasterStats master_stats(const RunConfig& cfg, bool reduce) {
  const auto dev = build_device(cfg);
  const auto& p = dev.params;
  const auto layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  const auto H = build_H_I(p, layout);
  const auto theta = build_Theta_I(p, layout);
  IntegratorConfig ic = cfg.integrator;
  ic.method = IntegratorMethod::FixedRk4;
  ic.restrict_to_reachable = reduce;
  for (int k = 1; k < 10; ++k) ic.checkpoint_times.push_back(dev.derived.t_w * k / 10.0);
  const auto r = evolve_master(protocol_initial(layout), H, &theta, build_collapse_set(p, layout), dev.derived.t_w, ic);
  MasterStats s;
  s.min_eig = 1.0;
  for (const auto& c : r.checkpoints) {
    s.trace_drift = std::max(s.trace_drift, std::abs(c.trace - 1.0));
    s.min_eig = std::min(s.min_eig, c.min_eigenvalue);
  }
  return s;
}

// The reference point on its exact reachable subspace, plus a two-register
// device with cavity truncation 2 integrated on the full space.
std::vector<MasterStats> master_runs(const RunConfig& cfg) {
  RunConfig small = cfg;
  small.n = 2;
  small.cavity_levels = 2;
  small.delta.resize(2);
  if (small.omega10.size() > 1) small.omega10 = {cfg.omega10[0], cfg.omega10[1], cfg.omega10.back()};
  if (!small.cavity_freq.empty()) small.cavity_freq.resize(2);
  if (!small.coupling_caps.empty()) small.coupling_caps.resize(2);
  if (small.losses.kappa_inv.size() > 1) small.losses.kappa_inv.resize(2);
  for (auto* v : {&small.losses.gamma10_inv, &small.losses.gamma21_inv, &small.losses.gamma20_inv,
                  &small.losses.gamma_phi1_inv, &small.losses.gamma_phi2_inv})
    if (v->size() > 1) *v = {(*v)[0], (*v)[1], v->back()};
  return {master_stats(cfg, true), master_stats(small, false)};
}

CheckResult cavity_decay(const RunConfig& cfg) {
  const auto dev = build_device(cfg);
  DeviceParams p = without_losses(dev.params);
  p.kappa[0] = dev.params.kappa[0];
  if (p.kappa[0] == 0.0) p.kappa[0] = 1.0 / 5e-6;
  const double kappa = p.kappa[0];
  const auto layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  std::vector<std::size_t> levels(layout.size(), 0);
  levels[layout.index_of(HilbertLayout::cavity_label(0))] = 1;
  const auto one = QuantumState::basis(layout, levels);
  IntegratorConfig ic;
  ic.max_step = 2e-3 / kappa;
  ic.restrict_to_reachable = true;
  const std::vector<double> kt = {0.25, 0.5, 1.0, 2.0};
  for (double x : kt)
    if (x < 2.0) ic.checkpoint_times.push_back(x / kappa);
  const auto r = evolve_master(one, TimeDependentOperator(layout, {}), nullptr, build_collapse_set(p, layout), 2.0 / kappa, ic, &one);
  double worst = 0.0;
  for (std::size_t i = 0; i < kt.size(); ++i) worst = std::max(worst, std::abs(r.checkpoints[i].fidelity - std::exp(-kt[i])));
  return {"single-cavity decay e^{-kappa t}", worst < kDecayTol, worst, kDecayTol,
          "max |P_1(t) - e^{-kappa t}| at kappa t = 0.25, 0.5, 1, 2", 0.0};
}

CheckResult dephasing(const RunConfig& cfg) {
  const auto dev = build_device(cfg);
  DeviceParams p = without_losses(dev.params);
  double gphi = dev.params.rates[0].gamma_phi1;
  if (gphi == 0.0) gphi = 1.0 / 2.5e-6;
  p.rates[0].gamma_phi1 = gphi;
  const auto layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  std::vector<std::size_t> lv(layout.size(), 0);
  const auto i0 = layout.basis_index(lv);
  lv[layout.index_of(HilbertLayout::qubit_label(0))] = 1;
  const auto i1 = layout.basis_index(lv);
  KetVector plus = KetVector::Zero(Eigen::Index(layout.total_dim()));
  plus(Eigen::Index(i0)) = plus(Eigen::Index(i1)) = 1.0;
  const auto psi = QuantumState::ket(layout, plus);
  double worst = 0.0;
  for (double x : {0.5, 1.0, 2.0}) {
    IntegratorConfig ic;
    ic.max_step = 2e-3 / gphi;
    ic.restrict_to_reachable = true;
    const double t = x / gphi;
    const auto r = evolve_master(psi, TimeDependentOperator(layout, {}), nullptr, build_collapse_set(p, layout), t, ic);
    const double coherence = std::abs(r.rho.matrix()(Eigen::Index(i0), Eigen::Index(i1)));
    const double rate = -std::log(2.0 * coherence) / t;
    worst = std::max(worst, std::abs(rate / (gphi / 2.0) - 1.0));
  }
  return {"dephasing coherence rate gamma_phi/2", worst < kDephasingTol, worst, kDephasingTol,
          "max relative error of -ln(2|rho_01(t)|)/t against gamma_phi/2", 0.0};
}

CheckResult dispersive_convergence(const RunConfig& cfg) {
  const std::vector<double> bs = {4, 6, 8, 10, 12};
  std::vector<double> gaps;
  RunConfig c = cfg;
  c.qutrit_levels = 2;
  c.cavity_levels = 2;
  for (double b : bs) {
    const auto dev = build_device(c, b, 0.0, false);
    const auto layout = HilbertLayout::protocol(c.n, 2, 2);
    const auto target = protocol_target(layout, c.n);
    IntegratorConfig ic;
    ic.method = IntegratorMethod::AdaptiveDopri5;
    const auto r = evolve_schrodinger(protocol_initial(layout), build_H_I(dev.params, layout), dev.derived.t_w, ic, &target);
    gaps.push_back(1.0 - r.samples.back().fidelity);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] < gaps[i - 1];
  std::string detail = "1 - F at b = 4, 6, 8, 10, 12:";
  char buf[32];
  for (double g : gaps) {
    std::snprintf(buf, sizeof buf, " %.3e", g);
    detail += buf;
  }
  return {"dispersive-limit convergence", monotone && gaps.back() > 0.0, gaps.back(), 0.0, detail, 0.0};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const RunConfig& cfg) {
  check_config(cfg);
  std::vector<CheckResult> out;
  auto timed = [&](const std::string& name, const std::function<std::vector<CheckResult>()>& f) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<CheckResult> r;
    try {
      r = f();
    } catch (const std::exception& e) {
      r = {{name, false, std::nan(""), 0.0, std::string("error: ") + e.what(), 0.0}};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& c : r) {
      c.seconds = s / double(r.size());
      out.push_back(std::move(c));
    }
  };
  timed("hamiltonian hermiticity", [&] { return std::vector{hermiticity(cfg)}; });
  timed("[h_I, N_exc] = 0", [&] { return std::vector{excitation_commutator(cfg)}; });
  timed("interaction-frame invariance", [&] { return std::vector{frame_invariance(cfg)}; });
  timed("master equation", [&] {
    const auto runs = master_runs(cfg);
    double drift = 0.0, eig = 1.0;
    for (const auto& s : runs) {
      drift = std::max(drift, s.trace_drift);
      eig = std::min(eig, s.min_eig);
    }
    return std::vector<CheckResult>{
        {"trace conservation", drift < kTraceTol, drift, kTraceTol, "max |tr rho - 1| at checkpoints", 0.0},
        {"checkpoint positivity", eig >= kPositivityFloor, eig, kPositivityFloor, "min eigenvalue of rho at checkpoints", 0.0}};
  });
  timed("single-cavity decay e^{-kappa t}", [&] { return std::vector{cavity_decay(cfg)}; });
  timed("dephasing coherence rate gamma_phi/2", [&] { return std::vector{dephasing(cfg)}; });
  timed("dispersive-limit convergence", [&] { return std::vector{dispersive_convergence(cfg)}; });
  return out;
}

bool print_check_report(std::ostream& os, const std::vector<CheckResult>& results) {
  std::size_t passed = 0;
  char buf[256];
  for (const auto& r : results) {
    passed += r.pass;
    std::snprintf(buf, sizeof buf, "%-4s  %-38s  value %-11.3e limit %-10.3e %6.2f s  ", r.pass ? "PASS" : "FAIL",
                  r.name.c_str(), r.value, r.threshold, r.seconds);
    os << buf << r.detail << '\n';
  }
  os << passed << '/' << results.size() << " checks passed\n";
  return passed == results.size();
}

}  // namespace wprep
