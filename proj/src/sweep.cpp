#include "wprep/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "wprep/entanglement.hpp"

namespace wprep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointRun {
  double fidelity = kNaN;
  MasterResult master;
};

PointRun evolve_point(const RunConfig& cfg, double b, double ratio, std::size_t cavity_levels, double max_step) {
  RunConfig c = cfg;
  c.cavity_levels = cavity_levels;
  const MatchedDevice dev = build_device(c, b, ratio, cfg.sweep.include_losses);
  const auto& p = dev.params;
  const HilbertLayout layout = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  const auto H = build_H_I(p, layout);
  const auto theta = build_Theta_I(p, layout);
  const auto collapse = build_collapse_set(p, layout);
  const auto target = protocol_target(layout, p.n);

  IntegratorConfig ic = cfg.integrator;
  ic.method = IntegratorMethod::FixedRk4;
  ic.max_step = max_step;
  ic.checkpoint_times.clear();
  ic.restrict_to_reachable = cfg.sweep.reduce_subspace;
  PointRun out;
  out.master = evolve_master(protocol_initial(layout), H, cfg.sweep.include_theta ? &theta : nullptr, collapse,
                             dev.derived.t_w, ic, &target);
  out.fidelity = out.master.checkpoints.back().fidelity;
  return out;
}

std::string format_number(double v, int precision) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

const char* version_string() { return WPREP_VERSION; }

SweepRow run_point(const RunConfig& cfg, double b, double ratio) {
  const auto start = std::chrono::steady_clock::now();
  SweepRow row;
  row.b = b;
  row.ratio = ratio;
  row.fidelity = row.fidelity_half_step = row.fidelity_alt_truncation = row.min_eigenvalue = kNaN;
  row.alt_cavity_levels = cfg.cavity_levels >= 3 ? 2 : 3;
  try {
    const MatchedDevice dev = build_device(cfg, b, ratio, cfg.sweep.include_losses);
    row.t_w = dev.derived.t_w;
    row.conditions_ok = all_pass(condition_report(dev.params, dev.derived, cfg.thresholds));

    PointRun main = evolve_point(cfg, b, ratio, cfg.cavity_levels, cfg.integrator.max_step);
    if (cfg.sweep.step_check) {
      // Halve until two successive steps agree; the coarser of the pair is
      // reported so the row's fidelity is the one that passed the check.
      for (std::size_t refine = 0;; ++refine) {
        const PointRun half = evolve_point(cfg, b, ratio, cfg.cavity_levels, main.master.step / 2.0);
        row.fidelity_half_step = half.fidelity;
        row.step_ok = std::abs(half.fidelity - main.fidelity) < kStepTolerance;
        if (row.step_ok || refine == kMaxStepRefinements) break;
        main = half;
        row.step_refinements = refine + 1;
      }
    }
    row.fidelity = main.fidelity;
    row.step = main.master.step;
    row.steps = main.master.steps;
    row.active_dim = main.master.active_dim;
    row.max_trace_drift = main.master.max_trace_drift;
    row.min_eigenvalue = main.master.checkpoints.back().min_eigenvalue;

    if (cfg.sweep.truncation_check) {
      const double h = cfg.sweep.step_check ? row.step : cfg.integrator.max_step;
      row.fidelity_alt_truncation = evolve_point(cfg, b, ratio, row.alt_cavity_levels, h).fidelity;
      row.trunc_ok = std::abs(row.fidelity_alt_truncation - row.fidelity) < kTruncationTolerance;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.fidelity = kNaN;
    row.trunc_ok = row.step_ok = false;
  }
  row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

SweepResult run_sweep(const RunConfig& cfg, std::size_t workers, const ProgressFn& progress) {
  check_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<double, double>> points;
  for (double b : cfg.sweep.b_grid)
    for (double r : cfg.sweep.ratios) points.emplace_back(b, r);

  SweepResult result;
  result.workers = std::max<std::size_t>(1, std::min(workers, points.size()));
  result.rows.resize(points.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      result.rows[i] = run_point(cfg, points[i].first, points[i].second);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(result.rows[i], ++done, points.size());
      }
    }
  };
  if (result.workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < result.workers; ++w) pool.emplace_back(work);
  }
  result.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result, bool reproducible, int precision) {
  os << "b,ratio,fidelity,t_w_ns,trunc_ok,step_ok,wall_s\n";
  for (const auto& r : result.rows) {
    os << format_number(r.b, precision) << ',' << format_number(r.ratio, precision) << ','
       << format_number(r.fidelity, precision) << ',' << format_number(r.t_w * 1e9, precision) << ',' << int(r.trunc_ok)
       << ',' << int(r.step_ok) << ',' << format_number(reproducible ? 0.0 : r.wall_s, precision) << '\n';
  }
}

std::uint64_t parameter_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_sweep_metadata(std::ostream& os, const SweepResult& result, const RunConfig& cfg) {
  using nlohmann::json;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(parameter_hash(cfg)));
  json meta;
  meta["version"] = version_string();
  meta["parameter_hash"] = hash;
  meta["integrator"] = {{"method", "rk4"},
                        {"steps_per_period", cfg.integrator.steps_per_period},
                        {"max_step_s", cfg.integrator.max_step},
                        {"step_rule", "min(1/(steps_per_period*f_max), 1/||H||_bound)"},
                        {"step_halving_tolerance", kStepTolerance},
                        {"max_step_refinements", kMaxStepRefinements},
                        {"symmetrize_each_step", true}};
  meta["truncations"] = {{"qutrit_levels", cfg.qutrit_levels},
                         {"cavity_levels", cfg.cavity_levels},
                         {"truncation_tolerance", kTruncationTolerance}};
  meta["toggles"] = {{"include_theta", cfg.sweep.include_theta},
                     {"include_losses", cfg.sweep.include_losses},
                     {"reduce_subspace", cfg.sweep.reduce_subspace},
                     {"truncation_check", cfg.sweep.truncation_check},
                     {"step_check", cfg.sweep.step_check}};
  meta["config"] = canonical_text(cfg);
  meta["workers"] = result.workers;
  meta["wall_s"] = result.wall_s;
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"b", r.b},
                    {"ratio", r.ratio},
                    {"fidelity", number_or_null(r.fidelity)},
                    {"t_w_ns", number_or_null(r.t_w * 1e9)},
                    {"trunc_ok", r.trunc_ok},
                    {"step_ok", r.step_ok},
                    {"conditions_ok", r.conditions_ok},
                    {"fidelity_half_step", number_or_null(r.fidelity_half_step)},
                    {"fidelity_alt_truncation", number_or_null(r.fidelity_alt_truncation)},
                    {"alt_cavity_levels", r.alt_cavity_levels},
                    {"step_s", r.step},
                    {"step_refinements", r.step_refinements},
                    {"steps", r.steps},
                    {"active_dim", r.active_dim},
                    {"max_trace_drift", r.max_trace_drift},
                    {"min_eigenvalue", number_or_null(r.min_eigenvalue)},
                    {"wall_s", r.wall_s},
                    {"error", r.error}});
  }
  meta["rows"] = std::move(rows);
  os << meta.dump(2) << '\n';
}

}  // namespace wprep
