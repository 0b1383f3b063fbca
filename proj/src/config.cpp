#include "wprep/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "wprep/errors.hpp"

namespace wprep {

namespace {

enum class Dim { None, Frequency, Time, Capacitance };

// Units are decimal exponents so that "2.5 us" parses to the same double as
// 2.5e-6; frequencies are then converted to rad/s.
struct Unit {
  const char* name;
  Dim dim;
  int exp10;
};

constexpr Unit kUnits[] = {
    {"GHz", Dim::Frequency, 9}, {"MHz", Dim::Frequency, 6},     {"kHz", Dim::Frequency, 3},
    {"Hz", Dim::Frequency, 0},  {"s", Dim::Time, 0},            {"ms", Dim::Time, -3},
    {"us", Dim::Time, -6},      {"ns", Dim::Time, -9},          {"ps", Dim::Time, -12},
    {"F", Dim::Capacitance, 0}, {"pF", Dim::Capacitance, -12},  {"fF", Dim::Capacitance, -15},
};

const char* dim_name(Dim d) {
  switch (d) {
    case Dim::Frequency: return "a frequency unit (GHz, MHz, kHz, Hz)";
    case Dim::Time: return "a time unit (s, ms, us, ns, ps)";
    case Dim::Capacitance: return "a capacitance unit (F, pF, fF)";
    case Dim::None: break;
  }
  return "no unit";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Located {
  std::string source;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
  }
};

struct Quantity {
  std::string mantissa;  // digits and sign, without exponent
  long exponent = 0;
  std::string unit;
};

// Number with an optional trailing unit.
Quantity parse_quantity(const std::string& text, const Located& at) {
  const std::string t = trim(text);
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (first != last && *first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr == first) at.fail("expected a number, got '" + t + "'");
  if (!std::isfinite(v)) at.fail("value '" + t + "' is not finite");
  Quantity q;
  const std::string num(first, ptr);
  const auto e = num.find_first_of("eE");
  q.mantissa = num.substr(0, e);
  if (e != std::string::npos) {
    const std::string ex = num.substr(e + 1);
    const char* b = ex.data() + (!ex.empty() && ex[0] == '+' ? 1 : 0);
    std::from_chars(b, ex.data() + ex.size(), q.exponent);
  }
  q.unit = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
  return q;
}

double to_double(const Quantity& q, long shift, const Located& at) {
  const std::string s = q.mantissa + "e" + std::to_string(q.exponent + shift);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || !std::isfinite(v)) at.fail("value '" + s + "' is out of range");
  return v;
}

double apply_unit(const Quantity& q, const std::string& unit, Dim want, const Located& at) {
  if (want == Dim::None) {
    if (!unit.empty()) at.fail("unexpected unit '" + unit + "' on a dimensionless value");
    return to_double(q, 0, at);
  }
  if (unit.empty()) at.fail(std::string("missing unit; expected ") + dim_name(want));
  for (const auto& u : kUnits)
    if (unit == u.name) {
      if (u.dim != want) at.fail("unit '" + unit + "' has the wrong dimension; expected " + dim_name(want));
      const double v = to_double(q, u.exp10, at);
      return u.dim == Dim::Frequency ? kTwoPi * v : v;
    }
  at.fail("unknown unit '" + unit + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<double> parse_list(const std::string& text, Dim want, const Located& at) {
  const auto parts = split(text, ',');
  std::vector<Quantity> raw(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) at.fail("empty list element");
    raw[i] = parse_quantity(parts[i], at);
  }
  const std::string shared = raw.back().unit;
  std::vector<double> out(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    out[i] = apply_unit(raw[i], raw[i].unit.empty() ? shared : raw[i].unit, want, at);
  return out;
}

double parse_scalar(const std::string& text, Dim want, const Located& at) {
  const auto v = parse_list(text, want, at);
  if (v.size() != 1) at.fail("expected a single value");
  return v[0];
}

std::size_t parse_count(const std::string& text, const Located& at) {
  const double v = parse_scalar(text, Dim::None, at);
  if (v < 0.0 || v != std::floor(v) || v > 1e6) at.fail("expected a non-negative integer, got '" + trim(text) + "'");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& text, const Located& at) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "on" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "off" || t == "no" || t == "0") return false;
  at.fail("expected a boolean (true/false), got '" + t + "'");
}

std::vector<double> expand(const std::vector<double>& v, std::size_t n) {
  return v.size() == 1 ? std::vector<double>(n, v[0]) : v;
}

double inverse_or_zero(double t) { return t > 0.0 ? 1.0 / t : 0.0; }

void fmt_list(std::ostringstream& os, const char* key, const std::vector<double>& v) {
  os << key << '=';
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    os << (i ? "," : "") << buf;
  }
  os << '\n';
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const Located at{"grid", 0};
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError("grid '" + t + "': expected start:stop:step");
    double v[3];
    for (int i = 0; i < 3; ++i) {
      const Quantity q = parse_quantity(parts[i], at);
      if (!q.unit.empty()) throw ConfigError("grid '" + t + "': values are dimensionless");
      v[i] = to_double(q, 0, at);
    }
    const double a = v[0], b = v[1], s = v[2];
    if (!(s > 0.0) || b < a) throw ConfigError("grid '" + t + "': need step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9)) + 1;
    if (count > 100000) throw ConfigError("grid '" + t + "' has too many points");
    std::vector<double> out(count);
    // Computed from the index so every grid point is reproducible.
    for (std::size_t i = 0; i < count; ++i) out[i] = a + s * static_cast<double>(i);
    return out;
  }
  try {
    return parse_list(t, Dim::None, at);
  } catch (const ConfigError&) {
    throw ConfigError("grid '" + t + "': expected start:stop:step or a comma-separated list");
  }
}

RunConfig default_config() {
  auto ghz = [](double f) { return kTwoPi * (f * 1e9); };
  RunConfig c;
  c.n = 3;
  c.qutrit_levels = 3;
  c.cavity_levels = 3;
  c.delta = {ghz(-0.5), ghz(-1.0), ghz(-1.5)};
  c.omega10 = {ghz(6.5)};
  c.anharmonic_fraction = 0.05;
  c.b = 8.0;
  c.cavity_freq = {ghz(6.0), ghz(5.5), ghz(5.0)};
  c.losses.kappa_inv = {5e-6};
  c.losses.gamma10_inv = {10e-6};
  c.losses.gamma21_inv = {7.5e-6};
  c.losses.gamma20_inv = {30e-6};
  c.losses.gamma_phi1_inv = {2.5e-6};
  c.losses.gamma_phi2_inv = {2.5e-6};
  c.crosstalk_ratio = 0.2;
  c.coupling_caps = {1e-15, 1e-15, 1e-15};
  c.self_cap = 97e-15;
  c.sweep.b_grid = parse_grid("4:12:0.5");
  c.sweep.ratios = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  return c;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c = default_config();
  using Handler = std::function<void(const std::string&, const Located&)>;
  std::map<std::string, Handler> handlers;
  auto on = [&](const std::string& key, Handler h) { handlers.emplace(key, std::move(h)); };

  on("device.n", [&](auto& v, auto& at) { c.n = parse_count(v, at); });
  on("device.qutrit_levels", [&](auto& v, auto& at) { c.qutrit_levels = parse_count(v, at); });
  on("device.cavity_levels", [&](auto& v, auto& at) { c.cavity_levels = parse_count(v, at); });
  on("device.delta", [&](auto& v, auto& at) { c.delta = parse_list(v, Dim::Frequency, at); });
  on("device.omega10", [&](auto& v, auto& at) { c.omega10 = parse_list(v, Dim::Frequency, at); });
  on("device.anharmonic_fraction", [&](auto& v, auto& at) { c.anharmonic_fraction = parse_scalar(v, Dim::None, at); });
  on("device.b", [&](auto& v, auto& at) { c.b = parse_scalar(v, Dim::None, at); });
  on("device.g1", [&](auto& v, auto& at) { c.g1 = parse_scalar(v, Dim::Frequency, at); });
  on("device.cavity_freq", [&](auto& v, auto& at) { c.cavity_freq = parse_list(v, Dim::Frequency, at); });

  on("decoherence.kappa_inv", [&](auto& v, auto& at) { c.losses.kappa_inv = parse_list(v, Dim::Time, at); });
  on("decoherence.gamma10_inv", [&](auto& v, auto& at) { c.losses.gamma10_inv = parse_list(v, Dim::Time, at); });
  on("decoherence.gamma21_inv", [&](auto& v, auto& at) { c.losses.gamma21_inv = parse_list(v, Dim::Time, at); });
  on("decoherence.gamma20_inv", [&](auto& v, auto& at) { c.losses.gamma20_inv = parse_list(v, Dim::Time, at); });
  on("decoherence.gamma_phi1_inv", [&](auto& v, auto& at) { c.losses.gamma_phi1_inv = parse_list(v, Dim::Time, at); });
  on("decoherence.gamma_phi2_inv", [&](auto& v, auto& at) { c.losses.gamma_phi2_inv = parse_list(v, Dim::Time, at); });

  on("crosstalk.ratio", [&](auto& v, auto& at) { c.crosstalk_ratio = parse_scalar(v, Dim::None, at); });
  on("crosstalk.coupling_caps", [&](auto& v, auto& at) { c.coupling_caps = parse_list(v, Dim::Capacitance, at); });
  on("crosstalk.self_cap", [&](auto& v, auto& at) { c.self_cap = parse_scalar(v, Dim::Capacitance, at); });

  on("sweep.b", [&](auto& v, auto& at) {
    try {
      c.sweep.b_grid = parse_grid(v);
    } catch (const ConfigError& e) {
      at.fail(e.what());
    }
  });
  on("sweep.ratios", [&](auto& v, auto& at) { c.sweep.ratios = parse_list(v, Dim::None, at); });
  on("sweep.include_theta", [&](auto& v, auto& at) { c.sweep.include_theta = parse_bool(v, at); });
  on("sweep.include_losses", [&](auto& v, auto& at) { c.sweep.include_losses = parse_bool(v, at); });
  on("sweep.reduce_subspace", [&](auto& v, auto& at) { c.sweep.reduce_subspace = parse_bool(v, at); });
  on("sweep.truncation_check", [&](auto& v, auto& at) { c.sweep.truncation_check = parse_bool(v, at); });
  on("sweep.step_check", [&](auto& v, auto& at) { c.sweep.step_check = parse_bool(v, at); });
  on("sweep.workers", [&](auto& v, auto& at) { c.sweep.workers = parse_count(v, at); });

  on("integrator.method", [&](auto& v, auto& at) {
    try {
      c.integrator.method = integrator_method_from_string(trim(v));
    } catch (const std::invalid_argument& e) {
      at.fail(e.what());
    }
  });
  on("integrator.steps_per_period", [&](auto& v, auto& at) { c.integrator.steps_per_period = parse_scalar(v, Dim::None, at); });
  on("integrator.max_step", [&](auto& v, auto& at) { c.integrator.max_step = parse_scalar(v, Dim::Time, at); });
  on("integrator.rel_tol", [&](auto& v, auto& at) { c.integrator.rel_tol = parse_scalar(v, Dim::None, at); });
  on("integrator.abs_tol", [&](auto& v, auto& at) { c.integrator.abs_tol = parse_scalar(v, Dim::None, at); });

  on("thresholds.dispersive", [&](auto& v, auto& at) { c.thresholds.dispersive = parse_scalar(v, Dim::None, at); });
  on("thresholds.isolation", [&](auto& v, auto& at) { c.thresholds.isolation = parse_scalar(v, Dim::None, at); });
  on("thresholds.lifetime", [&](auto& v, auto& at) { c.thresholds.lifetime = parse_scalar(v, Dim::None, at); });

  std::set<std::string> sections;
  for (const auto& [key, h] : handlers) sections.insert(key.substr(0, key.find('.')));

  std::set<std::string> seen;
  std::string section;
  std::string line;
  Located at{source, 0};
  while (std::getline(in, line)) {
    ++at.line;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') at.fail("malformed section header '" + t + "'");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (!sections.count(section)) at.fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) at.fail("expected key = value, got '" + t + "'");
    if (section.empty()) at.fail("key outside of any section");
    const std::string key = section + "." + trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    const auto it = handlers.find(key);
    if (it == handlers.end()) at.fail("unknown key '" + trim(std::string_view(t).substr(0, eq)) + "' in [" + section + "]");
    if (!seen.insert(key).second) at.fail("duplicate key '" + key + "'");
    if (value.empty()) at.fail("empty value for '" + key + "'");
    it->second(value, at);
  }
  try {
    check_config(c);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void check_config(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  const std::size_t n = c.n;
  need(n >= 1, "n must be >= 1");
  need(c.qutrit_levels == 2 || c.qutrit_levels == 3, "qutrit_levels must be 2 or 3");
  need(c.cavity_levels >= 2, "cavity_levels must be >= 2");
  need(c.delta.size() == n, "delta needs n = " + std::to_string(n) + " entries");
  need(c.omega10.size() == 1 || c.omega10.size() == n + 1, "omega10 needs 1 or n+1 entries");
  for (double w : c.omega10) need(w > 0.0, "omega10 must be positive");
  need(c.cavity_freq.empty() || c.cavity_freq.size() == n, "cavity_freq needs n entries");
  for (double w : c.cavity_freq) need(w > 0.0, "cavity_freq must be positive");
  need(c.b > 0.0, "b must be positive");
  need(!c.g1 || *c.g1 > 0.0, "g1 must be positive");
  need(c.anharmonic_fraction >= 0.0, "anharmonic_fraction must be >= 0");

  need(c.losses.kappa_inv.size() == 1 || c.losses.kappa_inv.size() == n, "kappa_inv needs 1 or n entries");
  for (const auto* v : {&c.losses.kappa_inv, &c.losses.gamma10_inv, &c.losses.gamma21_inv, &c.losses.gamma20_inv,
                        &c.losses.gamma_phi1_inv, &c.losses.gamma_phi2_inv}) {
    for (double t : *v) need(t >= 0.0, "lifetimes must be >= 0 (0 disables a channel)");
  }
  for (const auto* v : {&c.losses.gamma10_inv, &c.losses.gamma21_inv, &c.losses.gamma20_inv, &c.losses.gamma_phi1_inv,
                        &c.losses.gamma_phi2_inv})
    need(v->size() == 1 || v->size() == n + 1, "qutrit lifetimes need 1 or n+1 entries");

  need(c.crosstalk_ratio >= 0.0, "crosstalk ratio must be >= 0");
  need(c.coupling_caps.empty() || c.coupling_caps.size() == n, "coupling_caps needs n entries");
  for (double x : c.coupling_caps) need(x >= 0.0, "coupling capacitances must be >= 0");
  need(c.coupling_caps.empty() || c.self_cap > 0.0, "self_cap must be positive when coupling_caps are given");

  need(!c.sweep.b_grid.empty(), "sweep b grid is empty");
  for (double b : c.sweep.b_grid) need(b > 1.0, "sweep b values must be > 1");
  need(!c.sweep.ratios.empty(), "sweep ratio list is empty");
  for (double r : c.sweep.ratios) need(r >= 0.0, "sweep ratios must be >= 0");
  need(c.integrator.steps_per_period > 0.0, "steps_per_period must be positive");
  need(c.integrator.max_step >= 0.0, "max_step must be >= 0");
  need(c.integrator.rel_tol > 0.0 && c.integrator.abs_tol > 0.0, "tolerances must be positive");
}

MatchedDevice build_device(const RunConfig& c, double b, double ratio, bool include_losses) {
  check_config(c);
  MatchInputs in{c.delta, 0.0, expand(c.omega10, c.n + 1), c.anharmonic_fraction};
  MatchedDevice dev = derive_matched_params_b(in, b);
  DeviceParams& p = dev.params;
  p.qutrit_levels = c.qutrit_levels;
  p.cavity_levels = c.cavity_levels;
  if (!c.cavity_freq.empty()) p.omega_c = c.cavity_freq;
  if (include_losses) {
    const auto kinv = expand(c.losses.kappa_inv, c.n);
    for (std::size_t j = 0; j < c.n; ++j) p.kappa[j] = inverse_or_zero(kinv[j]);
    const auto g10 = expand(c.losses.gamma10_inv, c.n + 1), g21 = expand(c.losses.gamma21_inv, c.n + 1),
               g20 = expand(c.losses.gamma20_inv, c.n + 1), p1 = expand(c.losses.gamma_phi1_inv, c.n + 1),
               p2 = expand(c.losses.gamma_phi2_inv, c.n + 1);
    for (std::size_t q = 0; q <= c.n; ++q)
      p.rates[q] = {inverse_or_zero(g10[q]), inverse_or_zero(g21[q]), inverse_or_zero(g20[q]), inverse_or_zero(p1[q]),
                    inverse_or_zero(p2[q])};
  }
  const double g_max = *std::max_element(p.g_A.begin(), p.g_A.end());
  p.g_cross = uniform_crosstalk(c.n, ratio * g_max);
  return dev;
}

MatchedDevice build_device(const RunConfig& c) {
  const double b = c.g1 ? std::abs(c.delta.at(0)) / *c.g1 : c.b;
  return build_device(c, b, c.crosstalk_ratio, true);
}

std::string canonical_text(const RunConfig& c) {
  std::ostringstream os;
  os << "n=" << c.n << "\nqutrit_levels=" << c.qutrit_levels << "\ncavity_levels=" << c.cavity_levels << '\n';
  fmt_list(os, "delta", c.delta);
  fmt_list(os, "omega10", c.omega10);
  fmt_list(os, "anharmonic_fraction", {c.anharmonic_fraction});
  fmt_list(os, "b", {c.b});
  fmt_list(os, "g1", c.g1 ? std::vector<double>{*c.g1} : std::vector<double>{});
  fmt_list(os, "cavity_freq", c.cavity_freq);
  fmt_list(os, "kappa_inv", c.losses.kappa_inv);
  fmt_list(os, "gamma10_inv", c.losses.gamma10_inv);
  fmt_list(os, "gamma21_inv", c.losses.gamma21_inv);
  fmt_list(os, "gamma20_inv", c.losses.gamma20_inv);
  fmt_list(os, "gamma_phi1_inv", c.losses.gamma_phi1_inv);
  fmt_list(os, "gamma_phi2_inv", c.losses.gamma_phi2_inv);
  fmt_list(os, "crosstalk_ratio", {c.crosstalk_ratio});
  fmt_list(os, "coupling_caps", c.coupling_caps);
  fmt_list(os, "self_cap", {c.self_cap});
  fmt_list(os, "sweep_b", c.sweep.b_grid);
  fmt_list(os, "sweep_ratios", c.sweep.ratios);
  os << "include_theta=" << c.sweep.include_theta << "\ninclude_losses=" << c.sweep.include_losses
     << "\nreduce_subspace=" << c.sweep.reduce_subspace << "\ntruncation_check=" << c.sweep.truncation_check
     << "\nstep_check=" << c.sweep.step_check << '\n';
  os << "method=" << to_string(c.integrator.method) << '\n';
  fmt_list(os, "steps_per_period", {c.integrator.steps_per_period});
  fmt_list(os, "max_step", {c.integrator.max_step});
  fmt_list(os, "rel_tol", {c.integrator.rel_tol});
  fmt_list(os, "abs_tol", {c.integrator.abs_tol});
  fmt_list(os, "thresholds", {c.thresholds.dispersive, c.thresholds.isolation, c.thresholds.lifetime});
  return os.str();
}

}  // namespace wprep
