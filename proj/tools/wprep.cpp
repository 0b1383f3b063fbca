// wprep: derive device parameters, evolve single trajectories, run fidelity
// sweeps, check physics invariants and dump operators.
//
// Exit codes: 0 success, 1 validation or integration failure, 2 usage or
// configuration error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "wprep/config.hpp"
#include "wprep/entanglement.hpp"
#include "wprep/errors.hpp"
#include "wprep/snapshot.hpp"
#include "wprep/sweep.hpp"
#include "wprep/validate.hpp"

using namespace wprep;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<double> b;
  std::optional<double> ratio;

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (b) {
      cfg.b = *b;
      cfg.g1.reset();
    }
    if (ratio) cfg.crosstalk_ratio = *ratio;
    check_config(cfg);
    return cfg;
  }
};

void add_common(CLI::App* app, CommonOptions& o, bool point = true) {
  app->add_option("-c,--config", o.config_path, "Parameter file (default: built-in reference device)")
      ->check(CLI::ExistingFile);
  if (point) {
    app->add_option("--b", o.b, "Normalized detuning |delta_1|/g_1 (overrides the config)")->check(CLI::PositiveNumber);
    app->add_option("--ratio", o.ratio, "Crosstalk g_kl / max_j g_Aj (overrides the config)")
        ->check(CLI::NonNegativeNumber);
  }
}

// Opens `path` for writing, or returns std::cout for "-" / empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

double hz(double omega) { return omega / kTwoPi; }

std::string fixed(double v, int prec) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// derive

nlohmann::json derive_json(const RunConfig& cfg, const MatchedDevice& dev, const std::vector<ConditionEntry>& report) {
  using nlohmann::json;
  const auto& p = dev.params;
  auto scaled = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(hz(x));
    return a;
  };
  json j;
  j["version"] = version_string();
  j["n"] = p.n;
  j["b"] = std::abs(p.delta[0]) / p.g[0];
  j["crosstalk_ratio"] = cfg.crosstalk_ratio;
  j["g_hz"] = scaled(p.g);
  j["g_A_hz"] = scaled(p.g_A);
  j["gt_hz"] = scaled(p.gt);
  j["gt_A_hz"] = scaled(p.gt_A);
  j["delta_hz"] = scaled(p.delta);
  j["delta_A_hz"] = scaled(p.delta_A);
  j["deltat_hz"] = scaled(p.deltat);
  j["deltat_A_hz"] = scaled(p.deltat_A);
  j["omega10_hz"] = scaled(p.omega10);
  j["omega_c_hz"] = scaled(p.omega_c);
  json Delta = json::array(), gx = json::array();
  for (std::size_t k = 0; k < p.n; ++k) {
    Delta.push_back(scaled(p.Delta[k]));
    gx.push_back(scaled(p.g_cross[k]));
  }
  j["Delta_hz"] = Delta;
  j["g_cross_hz"] = gx;
  json q = json::array(), kinv = json::array();
  for (std::size_t i = 0; i < p.n; ++i) {
    const double ki = p.kappa[i] > 0.0 ? 1.0 / p.kappa[i] : 0.0;
    kinv.push_back(ki);
    q.push_back(ki > 0.0 ? json(quality_factor(p.omega_c[i], ki)) : json(nullptr));
  }
  j["kappa_inv_s"] = kinv;
  j["q_factor"] = q;
  j["chi_hz"] = hz(dev.derived.chi);
  j["lambda_hz"] = hz(dev.derived.lambda);
  j["t_w_s"] = dev.derived.t_w;
  if (!cfg.coupling_caps.empty()) {
    const auto est = estimate_crosstalk(cfg.coupling_caps, cfg.self_cap, p.g_A);
    double worst = 0.0;
    for (const auto& row : est)
      for (double x : row) worst = std::max(worst, x);
    json e = json::array();
    for (const auto& row : est) e.push_back(scaled(row));
    j["crosstalk_estimate_hz"] = e;
    j["crosstalk_estimate_ratio"] = worst / *std::max_element(p.g_A.begin(), p.g_A.end());
  }
  json cond = json::array();
  for (const auto& c : report) cond.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
  j["conditions"] = cond;
  j["conditions_pass"] = all_pass(report);
  return j;
}

void print_derive_table(std::ostream& os, const RunConfig& cfg, const MatchedDevice& dev,
                        const std::vector<ConditionEntry>& report) {
  const auto& p = dev.params;
  char buf[128];
  auto row = [&](const char* name, const char* unit, const std::vector<double>& v, double scale, int prec) {
    std::snprintf(buf, sizeof buf, "%-16s %-5s", name, unit);
    os << buf;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %12s", fixed(x * scale, prec).c_str());
      os << buf;
    }
    os << '\n';
  };
  std::snprintf(buf, sizeof buf, "%-16s %-5s", "", "");
  os << buf;
  for (std::size_t j = 0; j < p.n; ++j) {
    std::snprintf(buf, sizeof buf, " %12s", HilbertLayout::qubit_label(j).c_str());
    os << buf;
  }
  os << "            A\n";
  const double mhz = 1e-6 / kTwoPi, ghz = 1e-9 / kTwoPi;
  row("g/2pi", "MHz", p.g, mhz, 3);
  row("g_A/2pi", "MHz", p.g_A, mhz, 3);
  row("gt/2pi", "MHz", p.gt, mhz, 3);
  row("gt_A/2pi", "MHz", p.gt_A, mhz, 3);
  row("delta/2pi", "GHz", p.delta, ghz, 4);
  row("delta_A/2pi", "GHz", p.delta_A, ghz, 4);
  row("deltat/2pi", "GHz", p.deltat, ghz, 4);
  row("deltat_A/2pi", "GHz", p.deltat_A, ghz, 4);
  row("omega10/2pi", "GHz", p.omega10, ghz, 4);
  row("omega_c/2pi", "GHz", p.omega_c, ghz, 4);
  std::vector<double> kinv, q;
  for (std::size_t i = 0; i < p.n; ++i) {
    kinv.push_back(p.kappa[i] > 0.0 ? 1.0 / p.kappa[i] : 0.0);
    q.push_back(kinv.back() > 0.0 ? quality_factor(p.omega_c[i], kinv.back()) : 0.0);
  }
  row("kappa^-1", "us", kinv, 1e6, 3);
  row("Q", "1e5", q, 1e-5, 3);

  os << '\n';
  for (std::size_t k = 0; k < p.n; ++k)
    for (std::size_t l = k + 1; l < p.n; ++l) {
      std::snprintf(buf, sizeof buf, "Delta_%zu%zu/2pi      GHz   %12s   g_%zu%zu/2pi %10s MHz\n", k + 1, l + 1,
                    fixed(p.Delta[k][l] * ghz, 4).c_str(), k + 1, l + 1, fixed(p.g_cross[k][l] * mhz, 3).c_str());
      os << buf;
    }
  std::snprintf(buf, sizeof buf, "b = %.4g   chi/2pi = %s MHz   lambda/2pi = %s MHz   t_W = %s ns\n",
                std::abs(p.delta[0]) / p.g[0], fixed(dev.derived.chi * mhz, 4).c_str(),
                fixed(dev.derived.lambda * mhz, 4).c_str(), fixed(dev.derived.t_w * 1e9, 3).c_str());
  os << buf;
  if (!cfg.coupling_caps.empty()) {
    const auto est = estimate_crosstalk(cfg.coupling_caps, cfg.self_cap, p.g_A);
    double worst = 0.0;
    for (const auto& r : est)
      for (double x : r) worst = std::max(worst, x);
    std::snprintf(buf, sizeof buf, "capacitive crosstalk estimate: max g_kl/2pi = %s MHz (%.3f g_max)\n",
                  fixed(worst * mhz, 3).c_str(), worst / *std::max_element(p.g_A.begin(), p.g_A.end()));
    os << buf;
  }

  os << "\nconditions\n";
  for (const auto& c : report) {
    std::snprintf(buf, sizeof buf, "  %-4s %-40s %12.4g  (>= %g)\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value,
                  c.threshold);
    os << buf;
  }
}

int cmd_derive(const CommonOptions& common, const std::string& json_path) {
  const RunConfig cfg = common.load();
  const MatchedDevice dev = build_device(cfg);
  const auto report = condition_report(dev.params, dev.derived, cfg.thresholds);
  if (json_path == "-") {
    std::cout << derive_json(cfg, dev, report).dump(2) << '\n';
    return 0;
  }
  print_derive_table(std::cout, cfg, dev, report);
  if (!json_path.empty()) {
    Output out(json_path);
    out.stream() << derive_json(cfg, dev, report).dump(2) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evolve

struct EvolveOptions {
  std::string model = "full";
  std::string out;
  std::string snapshot;
  std::size_t points = 50;
  double t_ns = 0.0;
  bool no_theta = false;
  bool no_losses = false;
  bool full_space = false;
};

int cmd_evolve(const CommonOptions& common, const EvolveOptions& o) {
  const RunConfig cfg = common.load();
  const double b = cfg.g1 ? std::abs(cfg.delta[0]) / *cfg.g1 : cfg.b;
  const MatchedDevice dev = build_device(cfg, b, cfg.crosstalk_ratio, !o.no_losses);
  const auto& p = dev.params;
  const double t_final = o.t_ns > 0.0 ? o.t_ns * 1e-9 : dev.derived.t_w;

  IntegratorConfig ic = cfg.integrator;
  ic.method = IntegratorMethod::FixedRk4;
  ic.restrict_to_reachable = !o.full_space;
  for (std::size_t k = 0; k < o.points; ++k) ic.checkpoint_times.push_back(t_final * double(k) / double(o.points));

  MasterResult r;
  if (o.model == "ideal") {
    // Static and tiny; a fine step keeps the trajectory at analytic accuracy.
    if (ic.max_step == 0.0) ic.max_step = t_final / 4000.0;
    const auto reg = HilbertLayout::register_only(p.n, 2);
    std::vector<std::size_t> lv(reg.size(), 0);
    lv.back() = 1;
    const auto target = protocol_target(reg, p.n);
    const auto H = static_operator(build_H0(p, reg) + build_H_tilde_int(p, reg));
    r = evolve_master(QuantumState::basis(reg, lv), H, nullptr, CollapseSet(reg), t_final, ic, &target);
  } else {
    const auto layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
    const auto target = protocol_target(layout, p.n);
    const auto collapse = build_collapse_set(p, layout);
    if (o.model == "effective") {
      r = evolve_master(protocol_initial(layout), build_H_eff(p, layout), nullptr, collapse, t_final, ic, &target);
    } else {
      const auto theta = build_Theta_I(p, layout);
      r = evolve_master(protocol_initial(layout), build_H_I(p, layout), o.no_theta ? nullptr : &theta, collapse, t_final,
                        ic, &target);
    }
  }
  Output out(o.out);
  write_trajectory_csv(out.stream(), r.checkpoints);
  if (!o.snapshot.empty()) save_snapshot(o.snapshot, r.rho);
  std::fprintf(stderr, "model %s: F(t = %.4f ns) = %.10f  (%zu steps of %.4g ps, active dim %zu)\n", o.model.c_str(),
               t_final * 1e9, r.checkpoints.back().fidelity, r.steps, r.step * 1e12, r.active_dim);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string b_grid;
  std::string ratios;
  std::string out;
  std::string meta;
  std::optional<std::size_t> workers;
  int precision = 12;
  bool reproducible = false;
  bool full_space = false;
  bool no_theta = false;
  bool no_losses = false;
  bool no_step_check = false;
  bool no_trunc_check = false;
  bool quiet = false;
};

int cmd_sweep(const CommonOptions& common, const SweepOptions& o) {
  RunConfig cfg = common.load();
  if (!o.b_grid.empty()) cfg.sweep.b_grid = parse_grid(o.b_grid);
  if (!o.ratios.empty()) cfg.sweep.ratios = parse_grid(o.ratios);
  if (o.full_space) cfg.sweep.reduce_subspace = false;
  if (o.no_theta) cfg.sweep.include_theta = false;
  if (o.no_losses) cfg.sweep.include_losses = false;
  if (o.no_step_check) cfg.sweep.step_check = false;
  if (o.no_trunc_check) cfg.sweep.truncation_check = false;
  if (o.workers) cfg.sweep.workers = *o.workers;
  check_config(cfg);

  Output out(o.out);
  const ProgressFn progress = [&](const SweepRow& r, std::size_t done, std::size_t total) {
    if (o.quiet) return;
    std::fprintf(stderr, "[%zu/%zu] b=%g ratio=%g F=%.8f trunc_ok=%d step_ok=%d %.2fs%s%s\n", done, total, r.b, r.ratio,
                 r.fidelity, int(r.trunc_ok), int(r.step_ok), r.wall_s, r.error.empty() ? "" : " error: ",
                 r.error.c_str());
  };
  const SweepResult result = run_sweep(cfg, std::max<std::size_t>(1, cfg.sweep.workers), progress);
  write_sweep_csv(out.stream(), result, o.reproducible, o.precision);

  std::string meta = o.meta;
  if (meta.empty() && !o.out.empty() && o.out != "-") meta = o.out + ".json";
  if (!meta.empty()) {
    Output m(meta);
    write_sweep_metadata(m.stream(), result, cfg);
  }
  for (const auto& r : result.rows)
    if (!r.error.empty()) return kExitFailure;
  return 0;
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const CommonOptions& common) {
  const RunConfig cfg = common.load();
  const auto results = run_invariant_suite(cfg);
  return print_check_report(std::cout, results) ? 0 : kExitFailure;
}

// ---------------------------------------------------------------------------
// dump

int cmd_dump(const CommonOptions& common, const std::string& op, double t_ns, const std::string& out_path) {
  const RunConfig cfg = common.load();
  const MatchedDevice dev = build_device(cfg);
  const auto& p = dev.params;
  const auto layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  const auto reg = HilbertLayout::register_only(p.n, 2);
  const double t = t_ns * 1e-9;
  SparseOperator m;
  if (op == "H_I") m = build_H_I(p, layout).at(t);
  else if (op == "Theta_I") m = build_Theta_I(p, layout).at(t);
  else if (op == "h_I") m = build_h_I(p, layout).at(t);
  else if (op == "H_eff") m = build_H_eff(p, layout).at(t);
  else if (op == "H_tilde_int") m = build_H_tilde_int(p, reg);
  else if (op == "H0") m = build_H0(p, reg);
  else if (op == "N_exc") m = excitation_number(layout);
  else throw UsageError("unknown operator '" + op + "'");

  Output out(out_path);
  auto& os = out.stream();
  os << "# " << op << " t_ns=" << t_ns << " dim=" << m.dim() << " nnz=" << m.nnz() << " units=rad/s\n# layout";
  for (const auto& s : m.layout().subsystems()) os << ' ' << s.label << ':' << s.dim;
  os << "\n# row col re im\n";
  char buf[96];
  for (const auto& e : m.entries()) {
    std::snprintf(buf, sizeof buf, "%zu %zu %.17g %.17g\n", e.row, e.col, e.value.real(), e.value.imag());
    os << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"W-state preparation via a cavity-coupled coupler qutrit: derive, evolve, sweep, validate, dump"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);

  CommonOptions derive_common, evolve_common, sweep_common, validate_common, dump_common;

  auto* derive = app.add_subcommand("derive", "Print the matched parameter table and condition report");
  add_common(derive, derive_common);
  std::string derive_json_path;
  derive->add_option("--json", derive_json_path, "Also write JSON to this path ('-' writes only JSON to stdout)");

  auto* evolve = app.add_subcommand("evolve", "Evolve one trajectory and write time_ns,trace,min_eig,fidelity CSV");
  add_common(evolve, evolve_common);
  EvolveOptions eo;
  evolve->add_option("--model", eo.model, "ideal | effective | full")
      ->check(CLI::IsMember({"ideal", "effective", "full"}))
      ->capture_default_str();
  evolve->add_option("-o,--out", eo.out, "CSV output path (default stdout)");
  evolve->add_option("--points", eo.points, "Number of checkpoints before t_final")->capture_default_str();
  evolve->add_option("--t-ns", eo.t_ns, "Final time in ns (default t_W)")->check(CLI::NonNegativeNumber);
  evolve->add_option("--snapshot", eo.snapshot, "Write the final density matrix as a binary snapshot");
  evolve->add_flag("--no-theta", eo.no_theta, "Drop Theta_I (|1>-|2> terms and crosstalk) from the full model");
  evolve->add_flag("--no-losses", eo.no_losses, "Closed-system evolution");
  evolve->add_flag("--full-space", eo.full_space, "Integrate on the full space instead of the reachable subspace");

  auto* sweep = app.add_subcommand("sweep", "Fidelity at t_W over a grid of b and crosstalk ratios");
  add_common(sweep, sweep_common, false);
  SweepOptions so;
  sweep->add_option("--b", so.b_grid, "b grid: start:stop:step or a comma list (default from config)");
  sweep->add_option("--ratios", so.ratios, "Crosstalk ratios: comma list or start:stop:step");
  sweep->add_option("-o,--out", so.out, "CSV output path (default stdout)");
  sweep->add_option("--meta", so.meta, "Metadata JSON path (default <out>.json)");
  sweep->add_option("-j,--workers", so.workers, "Worker threads (default from config)")
      ->envname("WPREP_WORKERS")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--precision", so.precision, "Significant digits in the CSV")
      ->envname("WPREP_PRECISION")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();
  sweep->add_flag("--reproducible", so.reproducible, "Write wall_s as 0 so the CSV depends only on the inputs");
  sweep->add_flag("--full-space", so.full_space, "Integrate on the full space instead of the reachable subspace");
  sweep->add_flag("--no-theta", so.no_theta, "Drop Theta_I");
  sweep->add_flag("--no-losses", so.no_losses, "Closed-system evolution");
  sweep->add_flag("--no-step-check", so.no_step_check, "Skip the step-halving rerun (step_ok stays 0)");
  sweep->add_flag("--no-trunc-check", so.no_trunc_check, "Skip the Fock-truncation rerun (trunc_ok stays 0)");
  sweep->add_flag("-q,--quiet", so.quiet, "No per-point progress on stderr");

  auto* validate = app.add_subcommand("validate", "Run the physics invariant suite");
  add_common(validate, validate_common);

  auto* dump = app.add_subcommand("dump", "Write an operator as row col re im triplets");
  add_common(dump, dump_common);
  std::string dump_op = "h_I", dump_out;
  double dump_t = 0.0;
  dump->add_option("--op", dump_op, "H_I | Theta_I | h_I | H_eff | H_tilde_int | H0 | N_exc")->capture_default_str();
  dump->add_option("--t", dump_t, "Time in ns")->capture_default_str();
  dump->add_option("-o,--out", dump_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*derive) return cmd_derive(derive_common, derive_json_path);
    if (*evolve) return cmd_evolve(evolve_common, eo);
    if (*sweep) return cmd_sweep(sweep_common, so);
    if (*validate) return cmd_validate(validate_common);
    if (*dump) return cmd_dump(dump_common, dump_op, dump_t, dump_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
