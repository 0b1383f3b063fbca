#include "wprep/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "wprep/entanglement.hpp"
#include "wprep/errors.hpp"

namespace wprep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTraceAbort = 1e-6;
// h * ||H|| kept at or below this; RK4 is stable up to about 2.8.
constexpr double kStabilityProduct = 1.0;

// y += a * x on interleaved complex arrays.
inline void axpy(Complex a, const Complex* x, Complex* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  const double* xs = reinterpret_cast<const double*>(x);
  double* ys = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = xs[2 * i], xi = xs[2 * i + 1];
    ys[2 * i] += ar * xr - ai * xi;
    ys[2 * i + 1] += ar * xi + ai * xr;
  }
}

std::vector<double> sample_times(const std::vector<double>& checkpoints, double t_final) {
  std::vector<double> times;
  for (double t : checkpoints)
    if (t > 0.0 && t < t_final) times.push_back(t);
  times.push_back(t_final);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

std::size_t segment_steps(double length, double max_step) {
  if (length <= 0.0) return 0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / max_step * (1.0 - 1e-12))));
}

// acc (+)= a k and tmp = rho + b k in one pass.
void rk4_stage(const DenseMatrix& rho, const DenseMatrix& k, double a, double b, DenseMatrix& acc, DenseMatrix& tmp,
               bool first) {
  const auto n = static_cast<std::size_t>(rho.size());
  const Complex* r = rho.data();
  const Complex* kk = k.data();
  Complex* ac = acc.data();
  Complex* tm = tmp.data();
  if (first) {
    for (std::size_t i = 0; i < n; ++i) {
      ac[i] = r[i] + a * kk[i];
      tm[i] = r[i] + b * kk[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      ac[i] += a * kk[i];
      tm[i] = r[i] + b * kk[i];
    }
  }
}

// rho <- (rho + rho^+)/2; returns the largest |rho - rho^+| removed.
double symmetrize(DenseMatrix& m) {
  const auto d = static_cast<std::size_t>(m.rows());
  Complex* p = m.data();
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    worst = std::max(worst, 2.0 * std::abs(p[i * d + i].imag()));
    p[i * d + i] = Complex(p[i * d + i].real(), 0.0);
    for (std::size_t j = i + 1; j < d; ++j) {
      const Complex a = p[i * d + j];
      const Complex b = std::conj(p[j * d + i]);
      worst = std::max(worst, std::abs(a - b));
      const Complex avg = 0.5 * (a + b);
      p[i * d + j] = avg;
      p[j * d + i] = std::conj(avg);
    }
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------

void CollapseSet::add(std::string label, SparseOperator op, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::invalid_argument("collapse rate for '" + label + "' must be >= 0");
  if (!(op.layout() == layout_)) throw LayoutMismatch("collapse operator '" + label + "' is on a different layout");
  if (rate == 0.0) return;
  channels_.push_back({std::move(label), std::move(op), rate});
}

double CollapseSet::total_rate() const {
  double s = 0.0;
  for (const auto& c : channels_) s += c.rate;
  return s;
}

CollapseSet build_collapse_set(const DeviceParams& p, const HilbertLayout& layout) {
  if (p.kappa.size() != p.n || p.rates.size() != p.n + 1)
    throw std::invalid_argument("build_collapse_set: decay tables are not populated");
  CollapseSet set(layout);
  for (std::size_t j = 0; j < p.n; ++j) {
    const auto c = HilbertLayout::cavity_label(j);
    set.add("kappa_" + c, embed(annihilation(layout.dim_of(c)), c, layout), p.kappa[j]);
  }
  for (std::size_t q = 0; q <= p.n; ++q) {
    const std::string label = q < p.n ? HilbertLayout::qubit_label(q) : std::string(HilbertLayout::coupler_label);
    const std::size_t d = layout.dim_of(label);
    const QutritRates& r = p.rates[q];
    set.add("gamma10_" + label, embed(transition(d, 0, 1), label, layout), r.gamma10);
    set.add("gamma_phi1_" + label, embed(projector(d, 1), label, layout), r.gamma_phi1);
    if (d >= 3) {
      set.add("gamma21_" + label, embed(transition(d, 1, 2), label, layout), r.gamma21);
      set.add("gamma20_" + label, embed(transition(d, 0, 2), label, layout), r.gamma20);
      set.add("gamma_phi2_" + label, embed(projector(d, 2), label, layout), r.gamma_phi2);
    }
  }
  return set;
}

std::string to_string(IntegratorMethod m) { return m == IntegratorMethod::FixedRk4 ? "rk4" : "dopri5"; }

IntegratorMethod integrator_method_from_string(const std::string& s) {
  if (s == "rk4") return IntegratorMethod::FixedRk4;
  if (s == "dopri5") return IntegratorMethod::AdaptiveDopri5;
  throw std::invalid_argument("unknown integrator method '" + s + "' (expected rk4 or dopri5)");
}

double fastest_frequency_hz(const TimeDependentOperator& H, const CollapseSet* collapse) {
  double omega = H.max_frequency();
  if (collapse) omega = std::max(omega, collapse->total_rate());
  if (omega == 0.0) omega = H.norm_bound();
  return omega / kTwoPi;
}

double stability_step(const TimeDependentOperator& H) {
  const double bound = H.norm_bound();
  return bound > 0.0 ? kStabilityProduct / bound : std::numeric_limits<double>::infinity();
}

double resolve_max_step(const IntegratorConfig& cfg, double f_max_hz) {
  if (!(cfg.steps_per_period > 0.0)) throw std::invalid_argument("steps_per_period must be positive");
  const double bound = f_max_hz > 0.0 ? 1.0 / (cfg.steps_per_period * f_max_hz) : std::numeric_limits<double>::infinity();
  if (cfg.max_step < 0.0) throw std::invalid_argument("max_step must be >= 0");
  if (cfg.max_step > 0.0) {
    if (cfg.max_step > bound * (1.0 + 1e-12))
      throw std::invalid_argument("max_step exceeds 1/(steps_per_period * f_max) for this Hamiltonian");
    return cfg.max_step;
  }
  if (!std::isfinite(bound)) throw std::invalid_argument("no time scale to derive a step from; set max_step");
  return bound;
}

double resolve_step(const IntegratorConfig& cfg, const TimeDependentOperator& H, const CollapseSet* collapse) {
  const double h = resolve_max_step(cfg, fastest_frequency_hz(H, collapse));
  return cfg.max_step > 0.0 ? h : std::min(h, stability_step(H));
}

// ---------------------------------------------------------------------------

Subspace reachable_subspace(const HilbertLayout& parent, const std::vector<std::size_t>& seeds,
                            const std::vector<const SparseOperator*>& generators) {
  const std::size_t d = parent.total_dim();
  // column -> rows adjacency
  std::vector<std::vector<std::size_t>> adjacency(d);
  for (const auto* op : generators) {
    if (!(op->layout() == parent)) throw LayoutMismatch("reachable_subspace: generator on a different layout");
    for (const auto& e : op->entries()) adjacency[e.col].push_back(e.row);
  }
  std::vector<bool> seen(d, false);
  std::deque<std::size_t> frontier;
  for (auto s : seeds) {
    if (s >= d) throw std::out_of_range("reachable_subspace: seed outside the layout");
    if (!seen[s]) {
      seen[s] = true;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const std::size_t c = frontier.front();
    frontier.pop_front();
    for (auto r : adjacency[c])
      if (!seen[r]) {
        seen[r] = true;
        frontier.push_back(r);
      }
  }
  Subspace s;
  s.parent = parent;
  for (std::size_t i = 0; i < d; ++i)
    if (seen[i]) s.indices.push_back(i);
  s.layout = HilbertLayout({{"subspace", SubsystemKind::Generic, std::max<std::size_t>(1, s.indices.size())}});
  return s;
}

Subspace reachable_subspace(const QuantumState& initial, const TimeDependentOperator& H, const CollapseSet& collapse) {
  const HilbertLayout& layout = initial.layout();
  std::vector<std::size_t> seeds;
  if (initial.is_ket()) {
    for (Eigen::Index i = 0; i < initial.amplitudes().size(); ++i)
      if (initial.amplitudes()(i) != Complex(0.0, 0.0)) seeds.push_back(std::size_t(i));
  } else {
    const DenseMatrix& rho = initial.matrix();
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      if (rho.row(i).cwiseAbs().maxCoeff() > 0.0) seeds.push_back(std::size_t(i));
  }
  std::vector<SparseOperator> owned;
  for (const auto& t : H.terms()) {
    owned.push_back(t.op);
    owned.push_back(t.op.adjoint());
  }
  for (const auto& c : collapse.channels()) {
    owned.push_back(c.op);
    owned.push_back(c.op.adjoint() * c.op);
  }
  std::vector<const SparseOperator*> gens;
  for (const auto& o : owned) gens.push_back(&o);
  return reachable_subspace(layout, seeds, gens);
}

namespace {

std::vector<std::ptrdiff_t> reverse_index(const Subspace& s) {
  std::vector<std::ptrdiff_t> rev(s.parent.total_dim(), -1);
  for (std::size_t k = 0; k < s.indices.size(); ++k) rev[s.indices[k]] = static_cast<std::ptrdiff_t>(k);
  return rev;
}

}  // namespace

SparseOperator restrict_to(const SparseOperator& op, const Subspace& s) {
  if (!(op.layout() == s.parent)) throw LayoutMismatch("restrict_to: operator not on the parent layout");
  const auto rev = reverse_index(s);
  std::vector<Triplet> e;
  for (const auto& t : op.entries()) {
    const auto r = rev[t.row], c = rev[t.col];
    if (r >= 0 && c >= 0) e.push_back({std::size_t(r), std::size_t(c), t.value});
  }
  return SparseOperator(s.layout, std::move(e));
}

TimeDependentOperator restrict_to(const TimeDependentOperator& op, const Subspace& s) {
  std::vector<HamiltonianTerm> terms;
  for (const auto& t : op.terms()) {
    HamiltonianTerm r = t;
    r.op = restrict_to(t.op, s);
    if (!r.op.is_zero()) terms.push_back(std::move(r));
  }
  return TimeDependentOperator(s.layout, std::move(terms));
}

CollapseSet restrict_to(const CollapseSet& c, const Subspace& s) {
  CollapseSet out(s.layout);
  for (const auto& ch : c.channels()) {
    SparseOperator r = restrict_to(ch.op, s);
    if (!r.is_zero()) out.add(ch.label, std::move(r), ch.rate);
  }
  return out;
}

QuantumState restrict_to(const QuantumState& state, const Subspace& s) {
  if (!(state.layout() == s.parent)) throw LayoutMismatch("restrict_to: state not on the parent layout");
  const auto m = static_cast<Eigen::Index>(s.layout.total_dim());
  if (state.is_ket()) {
    KetVector v = KetVector::Zero(m);
    for (std::size_t k = 0; k < s.indices.size(); ++k) v(Eigen::Index(k)) = state.amplitudes()(Eigen::Index(s.indices[k]));
    return QuantumState::ket(s.layout, std::move(v), false);
  }
  DenseMatrix rho = DenseMatrix::Zero(m, m);
  for (std::size_t a = 0; a < s.indices.size(); ++a)
    for (std::size_t b = 0; b < s.indices.size(); ++b)
      rho(Eigen::Index(a), Eigen::Index(b)) = state.matrix()(Eigen::Index(s.indices[a]), Eigen::Index(s.indices[b]));
  return QuantumState::density(s.layout, std::move(rho));
}

QuantumState lift(const QuantumState& reduced, const Subspace& s) {
  if (!(reduced.layout() == s.layout)) throw LayoutMismatch("lift: state not on the subspace layout");
  const auto d = static_cast<Eigen::Index>(s.parent.total_dim());
  if (reduced.is_ket()) {
    KetVector v = KetVector::Zero(d);
    for (std::size_t k = 0; k < s.indices.size(); ++k) v(Eigen::Index(s.indices[k])) = reduced.amplitudes()(Eigen::Index(k));
    return QuantumState::ket(s.parent, std::move(v), false);
  }
  DenseMatrix rho = DenseMatrix::Zero(d, d);
  for (std::size_t a = 0; a < s.indices.size(); ++a)
    for (std::size_t b = 0; b < s.indices.size(); ++b)
      rho(Eigen::Index(s.indices[a]), Eigen::Index(s.indices[b])) = reduced.matrix()(Eigen::Index(a), Eigen::Index(b));
  return QuantumState::density(s.parent, std::move(rho));
}

// ---------------------------------------------------------------------------

LindbladGenerator::LindbladGenerator(TimeDependentOperator H, const CollapseSet& collapse)
    : dim_(H.layout().total_dim()), hamiltonian_(std::move(H)) {
  if (!collapse.empty() && !(collapse.layout() == hamiltonian_.layout()))
    throw LayoutMismatch("LindbladGenerator: Hamiltonian and collapse set layouts differ");
  h_values_.resize(hamiltonian_.pattern().nnz());

  SparseOperator damping = SparseOperator::zero(hamiltonian_.layout());
  for (const auto& ch : collapse.channels()) {
    damping += Complex(0.0, -0.5 * ch.rate) * (ch.op.adjoint() * ch.op);
    Jump j;
    const double s = std::sqrt(ch.rate);
    bool real = true;
    for (const auto& e : ch.op.entries()) {
      if (!j.rows.empty() && e.row == j.rows.back() + 1 && e.col == j.cols.back() + 1)
        ++j.runs.back().length;
      else
        j.runs.push_back({e.row, e.col, j.rows.size(), 1});
      j.rows.push_back(e.row);
      j.cols.push_back(e.col);
      j.vals.push_back(s * e.value);
      real = real && e.value.imag() == 0.0;
    }
    if (real)
      for (const auto& v : j.vals) j.real_vals.push_back(v.real());
    jumps_.push_back(std::move(j));
  }
  damping_ = damping.entries();
}

void LindbladGenerator::apply(double t, const DenseMatrix& rho, DenseMatrix& out) {
  const std::size_t d = dim_;
  if (static_cast<std::size_t>(rho.rows()) != d || rho.rows() != rho.cols())
    throw LayoutMismatch("lindblad: density matrix does not match the generator dimension");
  const auto de = static_cast<Eigen::Index>(d);
  if (out.rows() != de || out.cols() != de) out.resize(de, de);
  if (scratch_.rows() != de || scratch_.cols() != de) scratch_.resize(de, de);
  scratch_.setZero();

  // A = (H - i/2 sum rate L^+L) rho
  hamiltonian_.evaluate(t, h_values_);
  const auto& pat = hamiltonian_.pattern();
  const Complex* in = rho.data();
  Complex* a = scratch_.data();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t k = pat.row_ptr[r]; k < pat.row_ptr[r + 1]; ++k) axpy(h_values_[k], in + pat.cols[k] * d, a + r * d, d);
  for (const auto& e : damping_) axpy(e.value, in + e.col * d, a + e.row * d, d);

  // -i (A - A^+), i.e. -i(G rho - rho G^+) using rho = rho^+.
  Complex* o = out.data();
  constexpr std::size_t block = 64;
  for (std::size_t ib = 0; ib < d; ib += block) {
    const std::size_t ie = std::min(d, ib + block);
    for (std::size_t jb = 0; jb < d; jb += block) {
      const std::size_t je = std::min(d, jb + block);
      for (std::size_t i = ib; i < ie; ++i)
        for (std::size_t j = jb; j < je; ++j) {
          const Complex x = a[i * d + j] - std::conj(a[j * d + i]);
          o[i * d + j] = Complex(x.imag(), -x.real());
        }
    }
  }

  // + sum L rho L^+
  for (const auto& jump : jumps_) {
    const std::size_t m = jump.rows.size();
    if (!jump.real_vals.empty()) {
      const double* w = jump.real_vals.data();
      for (std::size_t p = 0; p < m; ++p) {
        double* orow = reinterpret_cast<double*>(o + jump.rows[p] * d);
        const double* irow = reinterpret_cast<const double*>(in + jump.cols[p] * d);
        const double v1 = w[p];
        for (const auto& run : jump.runs) {
          double* y = orow + 2 * run.row;
          const double* x = irow + 2 * run.col;
          const double* wr = w + run.begin;
          for (std::size_t i = 0; i < run.length; ++i) {
            const double f = v1 * wr[i];
            y[2 * i] += f * x[2 * i];
            y[2 * i + 1] += f * x[2 * i + 1];
          }
        }
      }
    } else {
      for (std::size_t p = 0; p < m; ++p) {
        Complex* orow = o + jump.rows[p] * d;
        const Complex* irow = in + jump.cols[p] * d;
        const Complex v1 = jump.vals[p];
        for (std::size_t q = 0; q < m; ++q) orow[jump.rows[q]] += v1 * std::conj(jump.vals[q]) * irow[jump.cols[q]];
      }
    }
  }
}

DenseMatrix lindblad_rhs(const DenseMatrix& rho, double t, const TimeDependentOperator& H, const CollapseSet& C) {
  LindbladGenerator gen(H, C);
  DenseMatrix out;
  gen.apply(t, rho, out);
  return out;
}

MasterResult evolve_master(const QuantumState& rho0_in, const TimeDependentOperator& H, const TimeDependentOperator* theta,
                           const CollapseSet& collapse, double t_final, const IntegratorConfig& cfg,
                           const QuantumState* target) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("evolve_master: t_final must be >= 0");
  if (cfg.method != IntegratorMethod::FixedRk4)
    throw std::invalid_argument("evolve_master: density matrices are propagated with fixed-step rk4 only");
  const HilbertLayout& layout = H.layout();
  if (!(rho0_in.layout() == layout)) throw LayoutMismatch("evolve_master: initial state and Hamiltonian layouts differ");
  if (!collapse.empty() && !(collapse.layout() == layout))
    throw LayoutMismatch("evolve_master: collapse set and Hamiltonian layouts differ");
  if (target && !(target->layout() == layout)) throw LayoutMismatch("evolve_master: target on a different layout");

  // A ket is positive by construction; a density input is checked on the
  // active subspace below, where its whole support lives.
  if (rho0_in.is_ket()) rho0_in.validate(1e-10);
  const QuantumState rho0 = rho0_in.to_density();

  const TimeDependentOperator total = theta ? H + *theta : H;
  const double h_max = resolve_step(cfg, total, &collapse);

  std::optional<Subspace> sub;
  if (cfg.restrict_to_reachable) sub = reachable_subspace(rho0, total, collapse);

  const TimeDependentOperator work_h = sub ? restrict_to(total, *sub) : total;
  const CollapseSet work_c = sub ? restrict_to(collapse, *sub) : collapse;
  QuantumState state = sub ? restrict_to(rho0, *sub) : rho0;
  std::optional<QuantumState> work_target;
  if (target) work_target = sub ? restrict_to(*target, *sub) : *target;

  if (!rho0_in.is_ket())
    state.validate(1e-10, 1e-12, cfg.check_positivity ? -1e-7 : -std::numeric_limits<double>::infinity());

  LindbladGenerator gen(work_h, work_c);
  DenseMatrix& rho = state.matrix();
  const auto de = rho.rows();
  DenseMatrix acc(de, de), tmp(de, de), k(de, de);
  const Complex trace0 = rho.trace();

  MasterResult result;
  result.active_dim = static_cast<std::size_t>(de);

  auto checkpoint = [&](double t) {
    MasterCheckpoint cp;
    cp.time = t;
    cp.trace = rho.trace().real();
    cp.min_eigenvalue = kNaN;
    if (cfg.check_positivity) {
      cp.min_eigenvalue = state.min_eigenvalue();
      if (sub && sub->indices.size() < layout.total_dim()) cp.min_eigenvalue = std::min(cp.min_eigenvalue, 0.0);
    }
    cp.fidelity = work_target ? fidelity(state, *work_target) : kNaN;
    result.checkpoints.push_back(cp);
  };

  double t = 0.0;
  for (double t_next : sample_times(cfg.checkpoint_times, t_final)) {
    const std::size_t n = segment_steps(t_next - t, h_max);
    const double h = n ? (t_next - t) / static_cast<double>(n) : 0.0;
    result.step = std::max(result.step, h);
    for (std::size_t s = 0; s < n; ++s) {
      const double t0 = t + static_cast<double>(s) * h;
      gen.apply(t0, rho, k);
      rk4_stage(rho, k, h / 6.0, h / 2.0, acc, tmp, true);
      gen.apply(t0 + h / 2.0, tmp, k);
      rk4_stage(rho, k, h / 3.0, h / 2.0, acc, tmp, false);
      gen.apply(t0 + h / 2.0, tmp, k);
      rk4_stage(rho, k, h / 3.0, h, acc, tmp, false);
      gen.apply(t0 + h, tmp, k);
      acc += (h / 6.0) * k;
      rho.swap(acc);
      result.max_symmetrization = std::max(result.max_symmetrization, symmetrize(rho));
      const double drift = std::abs(rho.trace() - trace0);
      result.max_trace_drift = std::max(result.max_trace_drift, drift);
      if (!(drift <= kTraceAbort))
        throw IntegrationError("evolve_master: trace drifted by " + std::to_string(drift) + " at t = " +
                               std::to_string(t0 + h) + " s");
    }
    result.steps += n;
    t = t_next;
    checkpoint(t);
  }
  result.rho = sub ? lift(state, *sub) : std::move(state);
  return result;
}

// ---------------------------------------------------------------------------

TimeDependentOperator static_operator(const SparseOperator& H, std::string label) {
  return TimeDependentOperator(H.layout(), {{std::move(label), H, 0.0, 1.0, true}});
}

namespace {

using OdeState = std::vector<Complex>;

struct SchrodingerSystem {
  const TimeDependentOperator* H;
  std::vector<Complex>* values;

  void operator()(const OdeState& psi, OdeState& dpsi, double t) const {
    H->evaluate(t, *values);
    const auto& pat = H->pattern();
    for (std::size_t r = 0; r < pat.dim; ++r) {
      Complex acc(0.0, 0.0);
      for (std::size_t k = pat.row_ptr[r]; k < pat.row_ptr[r + 1]; ++k) acc += (*values)[k] * psi[pat.cols[k]];
      dpsi[r] = Complex(acc.imag(), -acc.real());  // -i * acc
    }
  }
};

}  // namespace

SchrodingerResult evolve_schrodinger(const QuantumState& psi0, const TimeDependentOperator& H, double t_final,
                                     const IntegratorConfig& cfg, const QuantumState* target, bool keep_amplitudes) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("evolve_schrodinger: t_final must be >= 0");
  if (!psi0.is_ket()) throw std::invalid_argument("evolve_schrodinger: initial state must be a ket");
  if (!(psi0.layout() == H.layout())) throw LayoutMismatch("evolve_schrodinger: state and Hamiltonian layouts differ");
  if (target && !(target->layout() == H.layout())) throw LayoutMismatch("evolve_schrodinger: target on a different layout");
  psi0.validate(1e-10);

  const double h_max = resolve_step(cfg, H, nullptr);
  const std::size_t d = H.layout().total_dim();
  std::vector<Complex> values(H.pattern().nnz());
  SchrodingerSystem system{&H, &values};
  OdeState psi(psi0.amplitudes().data(), psi0.amplitudes().data() + d);

  SchrodingerResult result;
  auto record = [&](double t) {
    KetSample s;
    s.time = t;
    double n2 = 0.0;
    for (const auto& a : psi) n2 += std::norm(a);
    s.norm = std::sqrt(n2);
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(s.norm - 1.0));
    KetVector v = Eigen::Map<const KetVector>(psi.data(), Eigen::Index(d));
    if (target) s.fidelity = std::norm(target->amplitudes().dot(v));
    else s.fidelity = kNaN;
    if (keep_amplitudes) s.amplitudes = std::move(v);
    result.samples.push_back(std::move(s));
  };

  const std::vector<double> times = sample_times(cfg.checkpoint_times, t_final);
  namespace ode = boost::numeric::odeint;
  if (cfg.method == IntegratorMethod::FixedRk4) {
    ode::runge_kutta4<OdeState> stepper;
    double t = 0.0;
    for (double t_next : times) {
      const std::size_t n = segment_steps(t_next - t, h_max);
      const double h = n ? (t_next - t) / static_cast<double>(n) : 0.0;
      for (std::size_t s = 0; s < n; ++s) stepper.do_step(system, psi, t + static_cast<double>(s) * h, h);
      result.steps += n;
      t = t_next;
      record(t);
    }
  } else {
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) throw std::invalid_argument("adaptive tolerances must be positive");
    auto stepper = ode::make_controlled(cfg.abs_tol, cfg.rel_tol, h_max, ode::runge_kutta_dopri5<OdeState>());
    std::vector<double> grid{0.0};
    grid.insert(grid.end(), times.begin(), times.end());
    if (t_final == 0.0) grid.pop_back();
    std::size_t seen = 0;
    try {
      result.steps = ode::integrate_times(stepper, system, psi, grid.begin(), grid.end(), std::min(h_max, t_final / 16.0 + 1e-30),
                                          [&](const OdeState&, double t) {
                                            if (seen++ > 0) record(t);
                                          });
    } catch (const ode::odeint_error& e) {
      throw IntegrationError(std::string("evolve_schrodinger: step-size control failed: ") + e.what());
    }
    if (t_final == 0.0) record(0.0);
  }

  KetVector out = Eigen::Map<const KetVector>(psi.data(), Eigen::Index(d));
  result.psi = QuantumState::ket(H.layout(), std::move(out), false);
  return result;
}

// ---------------------------------------------------------------------------

AnalyticIdealState analytic_evolution(std::size_t n, double chi, double lambda, double t) {
  if (n == 0) throw std::invalid_argument("analytic_evolution: n must be >= 1");
  const double theta = std::sqrt(static_cast<double>(n)) * lambda * t;
  const Complex global = std::polar(1.0, -chi * t);
  return {global * std::cos(theta), Complex(0.0, -1.0) * global * std::sin(theta)};
}

void write_trajectory_csv(std::ostream& os, const std::vector<MasterCheckpoint>& checkpoints, int precision) {
  os << "time_ns,trace,min_eig,fidelity\n";
  os << std::setprecision(precision);
  for (const auto& c : checkpoints)
    os << c.time * 1e9 << ',' << c.trace << ',' << c.min_eigenvalue << ',' << c.fidelity << '\n';
}

}  // namespace wprep
