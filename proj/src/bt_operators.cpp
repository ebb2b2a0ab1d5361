#include "so3bt/bt_operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "so3bt/detail/theta_series.hpp"
#include "so3bt/parallel.hpp"

namespace so3bt {

namespace {

constexpr double kPi = std::numbers::pi;
using Wide = boost::multiprecision::cpp_bin_float_100;
constexpr double kWideTol = 1e-105;
// Decay sweeps only need headroom for the tail, not 100 digits.
using Mid = boost::multiprecision::cpp_bin_float_50;
constexpr double kMidTol = 1e-55;

// Fixed base points for the kernel checks. The kernel modulus is translation
// invariant, so these only guard against accidental structure at one point.
constexpr std::pair<double, double> kBasePoints[] = {{0.13, 0.37}, {0.71, 0.59}, {0.42, 0.05}};

template <typename Real>
Real kernel_norm(int n_dim, const ComplexStructure& cs, const Real& zp, const Real& zq,
                 const Real& wp, const Real& wq, int terms) {
  using std::sqrt;
  const Real tr = cs.re;
  const Real ti = cs.im;
  Real re = 0;
  Real im = 0;
  for (int l = 0; l < n_dim; ++l) {
    const auto fz = detail::theta_frame<Real>(n_dim, tr, ti, l, zp, zq, terms);
    const auto fw = detail::theta_frame<Real>(n_dim, tr, ti, l, wp, wq, terms);
    // fz * conj(fw)
    re += fz.re * fw.re + fz.im * fw.im;
    im += fz.im * fw.re - fz.re * fw.im;
  }
  return sqrt(re * re + im * im);
}

template <typename Real>
Real gaussian_model(int n_dim, const ComplexStructure& cs, const Real& dp, const Real& dq) {
  using std::exp;
  const Real pi = boost::math::constants::pi<Real>();
  const Real n = n_dim;
  const Real x = dp + Real(cs.re) * dq;
  const Real y = Real(cs.im) * dq;
  return n / (4 * pi) * exp(-(pi * n / (2 * Real(cs.im))) * (x * x + y * y));
}

bool increasing(const std::vector<int>& levels) {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) return false;
  }
  return true;
}

}  // namespace

// ---- TrigSymbol ----

TrigSymbol TrigSymbol::constant(cplx c) { return mode(0, 0, c); }

TrigSymbol TrigSymbol::mode(int a, int b, cplx c) {
  TrigSymbol f;
  f.add_term(a, b, c);
  return f;
}

TrigSymbol TrigSymbol::curve(LatticeVector v) {
  TrigSymbol f;
  f.add_term(v.a, v.b, -1.0);
  f.add_term(-v.a, -v.b, -1.0);
  return f;
}

void TrigSymbol::add_term(int a, int b, cplx c) {
  auto [it, inserted] = terms_.try_emplace({a, b}, c);
  if (!inserted) it->second += c;
  if (it->second == cplx{}) terms_.erase(it);
}

TrigSymbol& TrigSymbol::operator+=(const TrigSymbol& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.a, k.b, c);
  return *this;
}

TrigSymbol operator*(cplx s, const TrigSymbol& x) {
  TrigSymbol out;
  for (const auto& [k, c] : x.terms_) out.add_term(k.a, k.b, s * c);
  return out;
}

cplx TrigSymbol::evaluate(double p, double q) const {
  cplx sum{};
  for (const auto& [k, c] : terms_) sum += c * std::polar(1.0, -2.0 * kPi * (k.a * q - k.b * p));
  return sum;
}

int TrigSymbol::max_frequency() const {
  int m = 0;
  for (const auto& [k, c] : terms_) m = std::max({m, std::abs(k.a), std::abs(k.b)});
  return m;
}

bool TrigSymbol::is_real(double tol) const {
  for (const auto& [k, c] : terms_) {
    auto it = terms_.find({-k.a, -k.b});
    const cplx partner = it == terms_.end() ? cplx{} : it->second;
    if (std::abs(partner - std::conj(c)) > tol) return false;
  }
  return true;
}

bool TrigSymbol::is_even(double tol) const {
  for (const auto& [k, c] : terms_) {
    auto it = terms_.find({-k.a, -k.b});
    const cplx partner = it == terms_.end() ? cplx{} : it->second;
    if (std::abs(partner - c) > tol) return false;
  }
  return true;
}

int default_grid(const QuantizationLevel& level, const TrigSymbol& f) {
  return std::max({128, 8 * level.dim(), 4 * level.dim() + 2 * f.max_frequency()});
}

// ---- Toeplitz operators ----

OperatorMatrix toeplitz_matrix(const QuantizationLevel& level, const ComplexStructure& cs,
                               const TrigSymbol& f, int grid_n) {
  cs.validate();
  const int need = 4 * level.dim() + 2 * f.max_frequency();
  if (grid_n < need) {
    throw GridTooCoarse("grid_n = " + std::to_string(grid_n) + " < 4N + 2 max_frequency = " +
                        std::to_string(need));
  }
  std::vector<FourierMode> modes;
  for (const auto& [k, c] : f.terms()) modes.push_back({k.a, k.b, c});
  return {Basis::Full, section_quadrature(level, cs, modes, grid_n)};
}

OperatorMatrix toeplitz_matrix_alt(const QuantizationLevel& level, const ComplexStructure& cs,
                                   const TrigSymbol& f, int grid_n) {
  if (!f.is_even()) throw SymbolNotEven("symbol is not invariant under z -> -z");
  return restrict_alternating(level, toeplitz_matrix(level, cs, f, grid_n));
}

// ---- kernel ----

double projector_kernel_norm(const QuantizationLevel& level, const ComplexStructure& cs,
                             ModuliPoint z, ModuliPoint w, double tol) {
  const int terms = theta_truncation(level, cs, tol);
  return kernel_norm<double>(level.dim(), cs, z.p, z.q, w.p, w.q, terms);
}

double kernel_trace(const QuantizationLevel& level, const ComplexStructure& cs, int grid_n) {
  cs.validate();
  if (grid_n < 4 * level.dim()) {
    throw GridTooCoarse("grid_n = " + std::to_string(grid_n) + " < 4N");
  }
  std::vector<double> row_sums(static_cast<std::size_t>(grid_n), 0.0);
  parallel_for(row_sums.size(), [&](std::size_t j) {
    const double q = static_cast<double>(j) / grid_n;
    double s = 0.0;
    for (int i = 0; i < grid_n; ++i) {
      const ModuliPoint z{static_cast<double>(i) / grid_n, q};
      s += projector_kernel_norm(level, cs, z, z);
    }
    row_sums[j] = s;
  });
  double total = 0.0;
  for (double s : row_sums) total += s;
  return 4.0 * kPi * total / (static_cast<double>(grid_n) * grid_n);
}

double kernel_gaussian_model(const QuantizationLevel& level, const ComplexStructure& cs, double dp,
                             double dq) {
  cs.validate();
  return gaussian_model<double>(level.dim(), cs, dp, dq);
}

std::vector<ReportRow> GaussianCheckReport::rows() const {
  std::vector<ReportRow> out;
  for (const auto& e : entries) {
    if (!e.in_neighborhood) continue;
    std::ostringstream name;
    name << "gaussian_rel_error(" << e.dp << ";" << e.dq << ")";
    out.push_back({e.r, name.str(), e.max_rel_error});
  }
  return out;
}

GaussianCheckReport kernel_gaussian_check(const std::vector<int>& levels, const ComplexStructure& cs,
                                          const std::vector<std::pair<double, double>>& offsets) {
  cs.validate();
  GaussianCheckReport report;
  for (int r : levels) {
    for (auto [dp, dq] : offsets) {
      GaussianCheckEntry e{r, dp, dq, std::abs(dp) <= 0.1 && std::abs(dq) <= 0.1, 0.0};
      report.entries.push_back(e);
    }
  }
  parallel_for(report.entries.size(), [&](std::size_t i) {
    GaussianCheckEntry& e = report.entries[i];
    if (!e.in_neighborhood) return;
    const QuantizationLevel level(e.r);
    const int terms = detail::theta_terms(level.dim(), cs.im, kWideTol);
    const Wide model = gaussian_model<Wide>(level.dim(), cs, Wide(e.dp), Wide(e.dq));
    Wide worst = 0;
    for (auto [p, q] : kBasePoints) {
      const Wide zp = p, zq = q;
      const Wide wp = zp - Wide(e.dp), wq = zq - Wide(e.dq);
      const Wide exact = kernel_norm<Wide>(level.dim(), cs, zp, zq, wp, wq, terms);
      worst = std::max(worst, Wide(abs(exact - model) / model));
    }
    e.max_rel_error = static_cast<double>(worst);
  });
  return report;
}

std::vector<ReportRow> DecayReport::rows() const {
  std::vector<ReportRow> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out.push_back({levels[i], "log_kernel_norm", log_norms[i]});
  }
  out.push_back({0, "slope", slope});
  return out;
}

DecayReport kernel_decay_check(const std::vector<int>& levels, const ComplexStructure& cs,
                               double separation) {
  cs.validate();
  if (!(separation >= 0.1 && separation <= 0.5)) {
    throw DomainError("separation must lie in [0.1, 0.5]");
  }
  if (levels.size() < 3 || !increasing(levels)) {
    throw DomainError("kernel_decay_check needs at least 3 increasing levels");
  }
  DecayReport report{separation, levels, std::vector<double>(levels.size()), 0.0};
  parallel_for(levels.size(), [&](std::size_t i) {
    const QuantizationLevel level(levels[i]);
    const int terms = detail::theta_terms(level.dim(), cs.im, kMidTol);
    Mid best = 0;
    // Sup over base points on an 8 x 4 grid, w shifted in q only.
    for (int ip = 0; ip < 8; ++ip) {
      for (int iq = 0; iq < 4; ++iq) {
        const Mid zp = Mid(ip) / 8 + Mid(1) / 37;
        const Mid zq = Mid(iq) / 4 + Mid(1) / 29;
        const Mid wq = zq + Mid(separation);
        best = std::max(best, kernel_norm<Mid>(level.dim(), cs, zp, zq, zp, wq, terms));
      }
    }
    report.log_norms[i] = static_cast<double>(log(best));
  });
  // Least squares slope of log_norms against r.
  const double n = static_cast<double>(levels.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double x = levels[i];
    const double y = report.log_norms[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!(report.slope < 0.0)) {
    throw NonDecaying("kernel norm does not decay: slope " + std::to_string(report.slope));
  }
  return report;
}

// ---- norms and sweeps ----

double operator_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

double operator_norm(const OperatorMatrix& t) { return operator_norm(t.m); }

double symbol_sup(const TrigSymbol& f) {
  constexpr int kGrid = 512;
  double best = -1.0;
  double bp = 0.0, bq = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double p = static_cast<double>(i) / kGrid;
      const double q = static_cast<double>(j) / kGrid;
      const double v = std::abs(f.evaluate(p, q));
      if (v > best) {
        best = v;
        bp = p;
        bq = q;
      }
    }
  }
  // One refinement pass on a 65 x 65 grid spanning the neighbouring cells.
  constexpr int kFine = 64;
  const double h = 1.0 / kGrid;
  for (int i = 0; i <= kFine; ++i) {
    for (int j = 0; j <= kFine; ++j) {
      const double p = bp - h + 2.0 * h * i / kFine;
      const double q = bq - h + 2.0 * h * j / kFine;
      best = std::max(best, std::abs(f.evaluate(p, q)));
    }
  }
  return best;
}

std::vector<ReportRow> NormLimitReport::rows() const {
  std::vector<ReportRow> out;
  out.push_back({0, "sup", sup});
  for (const auto& e : entries) {
    out.push_back({e.r, "norm", e.norm});
    out.push_back({e.r, "gap", e.gap});
  }
  return out;
}

NormLimitReport norm_limit_check(const ComplexStructure& cs, const TrigSymbol& f,
                                 const std::vector<int>& levels) {
  cs.validate();
  if (!f.is_real()) throw DomainError("norm_limit_check needs a real symbol");
  if (!f.is_even()) throw SymbolNotEven("symbol is not invariant under z -> -z");
  NormLimitReport report;
  report.sup = symbol_sup(f);
  report.entries.resize(levels.size());
  parallel_for(levels.size(), [&](std::size_t i) {
    const QuantizationLevel level(levels[i]);
    const double norm = operator_norm(toeplitz_matrix_alt(level, cs, f, default_grid(level, f)));
    report.entries[i] = {levels[i], norm, std::abs(report.sup - norm)};
  });
  return report;
}

std::vector<double> symbol_residual(const std::vector<int>& levels, const ComplexStructure& cs,
                                    LatticeVector v) {
  cs.validate();
  if (!increasing(levels)) throw DomainError("levels must be increasing");
  std::vector<double> out(levels.size());
  const TrigSymbol f = TrigSymbol::curve(v);
  parallel_for(levels.size(), [&](std::size_t i) {
    const QuantizationLevel level(levels[i]);
    const OperatorMatrix curve = restrict_alternating(level, curve_operator_full(level, v));
    const OperatorMatrix bt = toeplitz_matrix_alt(level, cs, f, default_grid(level, f));
    out[i] = operator_norm((curve - bt).m);
  });
  return out;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = "r,quantity,value\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.value);
    out += std::to_string(row.r) + "," + row.quantity + "," + buf + "\n";
  }
  return out;
}

}  // namespace so3bt
