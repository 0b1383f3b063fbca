#include "wprep/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wprep/errors.hpp"

namespace wprep {

namespace {

constexpr double kMatchTolerance = 1e-9;

void check_protocol_layout(const DeviceParams& p, const HilbertLayout& layout) {
  const HilbertLayout expected = HilbertLayout::protocol(p.n, p.qutrit_levels, p.cavity_levels);
  if (!(layout == expected))
    throw LayoutMismatch("layout " + layout.describe() + " does not match parameters (" + expected.describe() + ")");
}

void check_sizes(const DeviceParams& p) {
  const std::size_t n = p.n;
  for (const auto* v : {&p.delta, &p.delta_A, &p.g, &p.g_A, &p.gt, &p.gt_A, &p.deltat, &p.deltat_A})
    if (v->size() != n) throw std::invalid_argument("device parameters are not fully populated");
}

SparseOperator raise(const HilbertLayout& layout, const std::string& label, std::size_t from) {
  return embed(transition(layout.dim_of(label), from + 1, from), label, layout);
}

SparseOperator cavity_a(const HilbertLayout& layout, std::size_t j) {
  const auto label = HilbertLayout::cavity_label(j);
  return embed(annihilation(layout.dim_of(label)), label, layout);
}

double relative_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  return scale == 0.0 ? 0.0 : (*hi - *lo) / scale;
}

}  // namespace

TimeDependentOperator::TimeDependentOperator(HilbertLayout layout, std::vector<HamiltonianTerm> terms)
    : layout_(std::move(layout)), terms_(std::move(terms)) {
  const std::size_t d = layout_.total_dim();
  for (const auto& t : terms_) {
    if (!(t.op.layout() == layout_)) throw LayoutMismatch("term '" + t.label + "' is on a different layout");
    if (t.self_conjugate) {
      const SparseOperator scaled = t.amplitude * t.op;
      if (scaled.hermiticity_defect() > 1e-12 * std::max(1.0, scaled.max_abs()))
        throw std::invalid_argument("self-conjugate term '" + t.label + "' is not Hermitian");
      if (t.frequency != 0.0) throw std::invalid_argument("self-conjugate term '" + t.label + "' must be static");
    }
  }

  // Union pattern of all entries and their transposes.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (const auto& t : terms_) {
    for (const auto& e : t.op.entries()) {
      coords.emplace_back(e.row, e.col);
      if (!t.self_conjugate) coords.emplace_back(e.col, e.row);
    }
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

  pattern_.dim = d;
  pattern_.row_ptr.assign(d + 1, 0);
  pattern_.cols.reserve(coords.size());
  for (const auto& [r, c] : coords) {
    ++pattern_.row_ptr[r + 1];
    pattern_.cols.push_back(c);
  }
  for (std::size_t r = 0; r < d; ++r) pattern_.row_ptr[r + 1] += pattern_.row_ptr[r];

  auto slot = [&](std::size_t r, std::size_t c) {
    auto first = pattern_.cols.begin() + static_cast<std::ptrdiff_t>(pattern_.row_ptr[r]);
    auto last = pattern_.cols.begin() + static_cast<std::ptrdiff_t>(pattern_.row_ptr[r + 1]);
    return static_cast<std::size_t>(std::lower_bound(first, last, c) - pattern_.cols.begin());
  };
  slots_.resize(terms_.size());
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    for (const auto& e : terms_[k].op.entries()) {
      slots_[k].direct.push_back(slot(e.row, e.col));
      if (!terms_[k].self_conjugate) slots_[k].conjugate.push_back(slot(e.col, e.row));
    }
  }
}

double TimeDependentOperator::max_frequency() const {
  double f = 0.0;
  for (const auto& t : terms_) f = std::max(f, std::abs(t.frequency));
  return f;
}

double TimeDependentOperator::norm_bound() const {
  // ||O||_2 <= sqrt(||O||_1 ||O||_inf); each non-self-conjugate term contributes twice.
  double bound = 0.0;
  const std::size_t d = layout_.total_dim();
  for (const auto& t : terms_) {
    std::vector<double> row(d, 0.0), col(d, 0.0);
    for (const auto& e : t.op.entries()) {
      row[e.row] += std::abs(e.value);
      col[e.col] += std::abs(e.value);
    }
    const double r = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
    const double c = col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
    bound += (t.self_conjugate ? 1.0 : 2.0) * std::abs(t.amplitude) * std::sqrt(r * c);
  }
  return bound;
}

void TimeDependentOperator::evaluate(double t, std::span<Complex> values) const {
  if (values.size() != pattern_.nnz()) throw std::invalid_argument("evaluate: value buffer has the wrong size");
  std::fill(values.begin(), values.end(), Complex(0.0, 0.0));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& term = terms_[k];
    const Complex phase = term.frequency == 0.0 ? Complex(1.0, 0.0) : std::polar(1.0, term.frequency * t);
    const Complex c = term.amplitude * phase;
    const auto& entries = term.op.entries();
    const auto& s = slots_[k];
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Complex v = c * entries[i].value;
      values[s.direct[i]] += v;
      if (!term.self_conjugate) values[s.conjugate[i]] += std::conj(v);
    }
  }
}

SparseOperator TimeDependentOperator::at(double t) const {
  std::vector<Complex> values(pattern_.nnz());
  evaluate(t, values);
  std::vector<Triplet> e;
  e.reserve(values.size());
  for (std::size_t r = 0; r < pattern_.dim; ++r)
    for (std::size_t k = pattern_.row_ptr[r]; k < pattern_.row_ptr[r + 1]; ++k) e.push_back({r, pattern_.cols[k], values[k]});
  return SparseOperator(layout_, std::move(e));
}

double TimeDependentOperator::hermiticity_defect(double t) const { return at(t).hermiticity_defect(); }

TimeDependentOperator operator+(const TimeDependentOperator& a, const TimeDependentOperator& b) {
  if (!(a.layout_ == b.layout_)) throw LayoutMismatch("operator+: time-dependent operators on different layouts");
  std::vector<HamiltonianTerm> terms = a.terms_;
  terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
  return TimeDependentOperator(a.layout_, std::move(terms));
}

// ---------------------------------------------------------------------------

TimeDependentOperator build_H_I(const DeviceParams& p, const HilbertLayout& layout) {
  check_protocol_layout(p, layout);
  check_sizes(p);
  const std::string A = HilbertLayout::coupler_label;
  const SparseOperator sA_plus = raise(layout, A, 0);
  std::vector<HamiltonianTerm> terms;
  for (std::size_t j = 0; j < p.n; ++j) {
    const SparseOperator a = cavity_a(layout, j);
    const auto q = HilbertLayout::qubit_label(j);
    terms.push_back({"g" + q, a * raise(layout, q, 0), p.delta[j], p.g[j], false});
    terms.push_back({"gA" + HilbertLayout::cavity_label(j), a * sA_plus, p.delta_A[j], p.g_A[j], false});
  }
  return TimeDependentOperator(layout, std::move(terms));
}

TimeDependentOperator build_Theta_I(const DeviceParams& p, const HilbertLayout& layout) {
  check_protocol_layout(p, layout);
  check_sizes(p);
  if (p.g_cross.size() != p.n) throw std::invalid_argument("crosstalk table is not n x n");
  for (std::size_t k = 0; k < p.n; ++k) {
    if (p.g_cross[k].size() != p.n) throw std::invalid_argument("crosstalk table is not n x n");
    for (std::size_t l = 0; l < k; ++l)
      if (p.g_cross[k][l] != p.g_cross[l][k])
        throw std::invalid_argument("crosstalk table is not symmetric (g_kl != g_lk)");
  }

  std::vector<HamiltonianTerm> terms;
  if (p.qutrit_levels >= 3) {
    const std::string A = HilbertLayout::coupler_label;
    const SparseOperator sA21 = raise(layout, A, 1);
    for (std::size_t j = 0; j < p.n; ++j) {
      const SparseOperator a = cavity_a(layout, j);
      const auto q = HilbertLayout::qubit_label(j);
      terms.push_back({"gt" + q, a * raise(layout, q, 1), p.deltat[j], p.gt[j], false});
      terms.push_back({"gtA" + HilbertLayout::cavity_label(j), a * sA21, p.deltat_A[j], p.gt_A[j], false});
    }
  }
  // One term per unordered pair; the (l,k) ordering is the conjugate of (k,l).
  for (std::size_t k = 0; k < p.n; ++k) {
    for (std::size_t l = k + 1; l < p.n; ++l) {
      if (p.g_cross[k][l] == 0.0) continue;
      const SparseOperator hop = cavity_a(layout, k) * cavity_a(layout, l).adjoint();
      terms.push_back({"g" + HilbertLayout::cavity_label(k) + HilbertLayout::cavity_label(l), hop, -p.Delta[k][l],
                       p.g_cross[k][l], false});
    }
  }
  return TimeDependentOperator(layout, std::move(terms));
}

TimeDependentOperator build_h_I(const DeviceParams& p, const HilbertLayout& layout) {
  return build_H_I(p, layout) + build_Theta_I(p, layout);
}

TimeDependentOperator build_H_eff(const DeviceParams& p, const HilbertLayout& layout) {
  check_protocol_layout(p, layout);
  check_sizes(p);
  const std::string A = HilbertLayout::coupler_label;
  const std::size_t qd = layout.dim_of(A);
  const SparseOperator P0A = embed(projector(qd, 0), A, layout);
  const SparseOperator P1A = embed(projector(qd, 1), A, layout);
  const SparseOperator sA_minus = raise(layout, A, 0).adjoint();

  std::vector<HamiltonianTerm> terms;
  for (std::size_t j = 0; j < p.n; ++j) {
    const auto q = HilbertLayout::qubit_label(j);
    const auto c = HilbertLayout::cavity_label(j);
    const SparseOperator a = cavity_a(layout, j);
    const SparseOperator n_op = a.adjoint() * a;
    const SparseOperator aad = a * a.adjoint();
    const SparseOperator P0 = embed(projector(qd, 0), q, layout);
    const SparseOperator P1 = embed(projector(qd, 1), q, layout);

    const SparseOperator stark_q = P0 * n_op - P1 * aad;
    const SparseOperator stark_A = P0A * n_op - P1A * aad;
    terms.push_back({"stark" + q, stark_q, 0.0, -p.g[j] * p.g[j] / p.delta[j], true});
    terms.push_back({"starkA" + c, stark_A, 0.0, -p.g_A[j] * p.g_A[j] / p.delta_A[j], true});

    const double lambda_j = 0.5 * p.g[j] * p.g_A[j] * (1.0 / p.delta[j] + 1.0 / p.delta_A[j]);
    terms.push_back({"lambda" + q, raise(layout, q, 0) * sA_minus, p.delta[j] - p.delta_A[j], lambda_j, false});
  }
  return TimeDependentOperator(layout, std::move(terms));
}

SparseOperator build_H_tilde_int(const DeviceParams& p, const HilbertLayout& layout) {
  check_sizes(p);
  std::vector<double> lambdas(p.n);
  for (std::size_t j = 0; j < p.n; ++j) lambdas[j] = p.g[j] * p.g_A[j] / p.delta[j];
  if (relative_spread(lambdas) > kMatchTolerance)
    throw std::invalid_argument("build_H_tilde_int: register rates g_j g_Aj/delta_j are not matched");
  const double lambda = lambdas[0];

  const std::string A = HilbertLayout::coupler_label;
  const SparseOperator sA_plus = raise(layout, A, 0);
  const SparseOperator sA_minus = sA_plus.adjoint();
  SparseOperator J_plus = SparseOperator::zero(layout);
  for (std::size_t j = 0; j < p.n; ++j) J_plus += raise(layout, HilbertLayout::qubit_label(j), 0);
  const SparseOperator J_minus = J_plus.adjoint();
  return Complex(lambda) * (J_plus * sA_minus + J_minus * sA_plus);
}

SparseOperator build_H0(const DeviceParams& p, const HilbertLayout& layout) {
  check_sizes(p);
  std::vector<double> shifts(p.n);
  double coupler_shift = 0.0;
  for (std::size_t j = 0; j < p.n; ++j) {
    shifts[j] = p.g[j] * p.g[j] / p.delta[j];
    coupler_shift += p.g_A[j] * p.g_A[j] / p.delta_A[j];
  }
  if (relative_spread(shifts) > kMatchTolerance || std::abs(coupler_shift - shifts[0]) > kMatchTolerance * std::abs(shifts[0]))
    throw std::invalid_argument("build_H0: Stark shifts are not matched");
  const double chi = shifts[0];

  const std::string A = HilbertLayout::coupler_label;
  SparseOperator out = embed(projector(layout.dim_of(A), 1), A, layout);
  for (std::size_t j = 0; j < p.n; ++j) {
    const auto q = HilbertLayout::qubit_label(j);
    out += embed(projector(layout.dim_of(q), 1), q, layout);
  }
  return Complex(chi) * out;
}

SparseOperator excitation_number(const HilbertLayout& layout) {
  std::vector<Triplet> e;
  for (std::size_t i = 0; i < layout.total_dim(); ++i) {
    std::size_t count = 0;
    for (std::size_t s = 0; s < layout.size(); ++s) count += layout.level_of(i, s);
    if (count) e.push_back({i, i, static_cast<double>(count)});
  }
  return SparseOperator(layout, std::move(e));
}

}  // namespace wprep
