#pragma once

// Physical parameters of the n-register / one-coupler device, the matched
// coupling set that makes every register see the same Stark shift and
// mediated exchange rate, and the validity report for the dispersive
// approximation. All frequencies and rates are angular (rad/s), times in s.

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace wprep {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Decoherence rates of one qutrit (rad/s). Zero disables a channel.
struct QutritRates {
  double gamma10 = 0.0;     // |1> -> |0>
  double gamma21 = 0.0;     // |2> -> |1>
  double gamma20 = 0.0;     // |2> -> |0>
  double gamma_phi1 = 0.0;  // dephasing of |1>
  double gamma_phi2 = 0.0;  // dephasing of |2>

  bool operator==(const QutritRates&) const = default;
};

using SquareTable = std::vector<std::vector<double>>;

// One protocol instance. Index j runs over registers 0..n-1; per-qutrit
// tables (omega10, rates) have n+1 entries with the coupler last.
struct DeviceParams {
  std::size_t n = 0;
  std::size_t qutrit_levels = 3;
  std::size_t cavity_levels = 3;

  std::vector<double> delta;     // register detuning omega_10j - omega_cj
  std::vector<double> delta_A;   // coupler detuning omega_10A - omega_cj
  std::vector<double> g;         // register |0>-|1> coupling
  std::vector<double> g_A;       // coupler |0>-|1> coupling to cavity j
  std::vector<double> gt;        // register |1>-|2> coupling
  std::vector<double> gt_A;      // coupler |1>-|2> coupling
  std::vector<double> deltat;    // register |1>-|2> detuning
  std::vector<double> deltat_A;  // coupler |1>-|2> detuning
  SquareTable Delta;             // Delta[k][l] = delta[l] - delta[k]
  SquareTable g_cross;           // direct cavity-cavity coupling, symmetric

  std::vector<double> omega10;   // n+1 qutrit |0>-|1> frequencies
  std::vector<double> omega_c;   // n cavity frequencies (only used for Q)
  std::vector<double> kappa;     // n cavity decay rates
  std::vector<QutritRates> rates;  // n+1

  bool operator==(const DeviceParams&) const = default;
};

struct DerivedQuantities {
  std::size_t n = 0;
  double chi = 0.0;     // common Stark shift g_j^2/delta_j
  double lambda = 0.0;  // mediated exchange rate g_j g_Aj/delta_j
  double t_w = 0.0;     // pi / (2 sqrt(n) |lambda|)

  bool operator==(const DerivedQuantities&) const = default;
};

struct MatchInputs {
  std::vector<double> delta;    // delta_1..delta_n, one sign, nonzero
  double g1 = 0.0;              // register-1 coupling, > 0
  std::vector<double> omega10;  // n+1 entries (registers then coupler)
  // Fraction of omega_10 separating the |1>-|2> transition from |0>-|1>.
  double anharmonic_fraction = 0.05;
};

struct MatchedDevice {
  DeviceParams params;
  DerivedQuantities derived;
};

// Sets g_j = g1 sqrt(delta_j/delta_1), g_Aj = g_j/sqrt(n), delta_Aj = delta_j,
// g~ = sqrt(2) g, delta~ = delta - fraction*omega_10 and Delta_kl = delta_l -
// delta_k. Crosstalk, decay rates and cavity frequencies are left empty
// (zero / omega_10 - delta) for the caller to fill in.
MatchedDevice derive_matched_params(const MatchInputs& in);

// Same but parameterized by the normalized detuning b = |delta_1| / g_1.
MatchedDevice derive_matched_params_b(MatchInputs in, double b);

// chi, lambda, t_W from the register-1 couplings.
DerivedQuantities derive_quantities(const DeviceParams& p);

double preparation_time(std::size_t n, double lambda);

// Uniform direct cavity-cavity coupling g_kl = value for all k != l.
SquareTable uniform_crosstalk(std::size_t n, double value);

struct ConditionEntry {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ConditionThresholds {
  double dispersive = 5.0;  // |delta|/g >= this
  double isolation = 5.0;   // coupler-induced cavity-cavity ratio >= this
  double lifetime = 5.0;    // T_cav and qutrit lifetimes >= this * t_W
};

// Dispersive ratios per register and per coupler branch, the coupler-induced
// cavity-cavity isolation ratios for neighbouring cavities, the effective
// cavity lifetime (1/n) min_i kappa_i^-1 and the shortest qutrit lifetime,
// both compared against t_W.
std::vector<ConditionEntry> condition_report(const DeviceParams& params, const DerivedQuantities& derived,
                                             const ConditionThresholds& thresholds = {});

bool all_pass(const std::vector<ConditionEntry>& report);

// Capacitive crosstalk estimate g_kl = max(g_Ak C_l, g_Al C_k) / C_sum with
// C_sum = sum(C) + C_q. Coupling capacitances may be zero (no path); C_q must
// be positive.
SquareTable estimate_crosstalk(const std::vector<double>& coupling_caps, double self_cap,
                               const std::vector<double>& g_A);

// Q = omega_c * kappa^-1.
double quality_factor(double omega_c, double kappa_inv);

}  // namespace wprep
