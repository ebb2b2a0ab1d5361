#pragma once

// Berezin-Toeplitz operators on the quantized torus, the Szego kernel, and the
// level sweeps that compare them with curve operators.

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "so3bt/quantum_torus.hpp"
#include "so3bt/torus_quantization.hpp"

namespace so3bt {

// f(p,q) = sum c_{a,b} chi_{a,b}(p,q), chi_{a,b} = exp(-2 pi i (a q - b p)).
class TrigSymbol {
 public:
  TrigSymbol() = default;
  static TrigSymbol constant(cplx c);
  static TrigSymbol mode(int a, int b, cplx c = 1.0);
  // F_v = -(chi_v + chi_{-v}) = -2 cos(2 pi (a q - b p)).
  static TrigSymbol curve(LatticeVector v);

  const std::map<LatticeKey, cplx>& terms() const { return terms_; }
  void add_term(int a, int b, cplx c);
  TrigSymbol& operator+=(const TrigSymbol& o);
  friend TrigSymbol operator+(TrigSymbol x, const TrigSymbol& y) { return x += y; }
  friend TrigSymbol operator*(cplx s, const TrigSymbol& x);

  cplx evaluate(double p, double q) const;
  // max(|a|, |b|) over the support.
  int max_frequency() const;
  // c_{-a,-b} == conj(c_{a,b}) to tol.
  bool is_real(double tol = 1e-12) const;
  // c_{-a,-b} == c_{a,b} to tol.
  bool is_even(double tol = 1e-12) const;

 private:
  std::map<LatticeKey, cplx> terms_;
};

// max(128, 8N, 4N + 2 max_frequency(f)).
int default_grid(const QuantizationLevel& level, const TrigSymbol& f);

// Row-convention matrix, entry (k,l) = 4 pi * quadrature of h(f Psi_k, Psi_l)
// (pointwise product conj(Psi_l) f Psi_k). Throws GridTooCoarse if
// grid_n < 4N + 2 max_frequency(f).
OperatorMatrix toeplitz_matrix(const QuantizationLevel& level, const ComplexStructure& cs,
                               const TrigSymbol& f, int grid_n);

// Restriction to H^alt. Throws SymbolNotEven unless f is involution-even.
OperatorMatrix toeplitz_matrix_alt(const QuantizationLevel& level, const ComplexStructure& cs,
                                   const TrigSymbol& f, int grid_n);

// Pointwise norm |sum_l Psi_l(z) conj(Psi_l(w))| in the unitary frames at z, w.
double projector_kernel_norm(const QuantizationLevel& level, const ComplexStructure& cs,
                             ModuliPoint z, ModuliPoint w, double tol = kDefaultSeriesTol);

// 4 pi * trapezoid integral of projector_kernel_norm(z, z); equals N.
double kernel_trace(const QuantizationLevel& level, const ComplexStructure& cs, int grid_n);

// Near-diagonal closed form (N / 4pi) exp(-(pi N / 2b) |z - w|^2), z = p + tau q.
double kernel_gaussian_model(const QuantizationLevel& level, const ComplexStructure& cs,
                             double dp, double dq);

struct ReportRow {
  int r = 0;
  std::string quantity;
  double value = 0.0;
};

struct GaussianCheckEntry {
  int r = 0;
  double dp = 0.0;
  double dq = 0.0;
  // Offsets with |dp| or |dq| above 0.1 are outside the near-diagonal region
  // and are not evaluated.
  bool in_neighborhood = true;
  double max_rel_error = 0.0;
};

struct GaussianCheckReport {
  std::vector<GaussianCheckEntry> entries;
  std::vector<ReportRow> rows() const;
};

// For every level and offset, the largest relative error between the kernel
// norm and the closed form over a fixed set of base points. Evaluated in
// 100-digit arithmetic so that errors below double rounding remain visible.
GaussianCheckReport kernel_gaussian_check(const std::vector<int>& levels, const ComplexStructure& cs,
                                          const std::vector<std::pair<double, double>>& offsets);

struct DecayReport {
  double separation = 0.0;
  std::vector<int> levels;
  // log of the largest kernel norm over base points, per level.
  std::vector<double> log_norms;
  double slope = 0.0;
  std::vector<ReportRow> rows() const;
};

// Least-squares slope of log ||Pi(z,w)|| against r at q-separation `separation`.
// Throws DomainError unless separation is in [0.1, 0.5] and levels are
// increasing with at least 3 entries; throws NonDecaying if slope >= 0.
DecayReport kernel_decay_check(const std::vector<int>& levels, const ComplexStructure& cs,
                               double separation);

// Largest singular value.
double operator_norm(const OperatorMatrix& t);
double operator_norm(const Eigen::MatrixXcd& m);

// sup |f| on a 512 x 512 grid, refined once around the best grid point.
double symbol_sup(const TrigSymbol& f);

struct NormLimitEntry {
  int r = 0;
  double norm = 0.0;
  double gap = 0.0;
};

struct NormLimitReport {
  double sup = 0.0;
  std::vector<NormLimitEntry> entries;
  std::vector<ReportRow> rows() const;
};

// ||toeplitz_matrix_alt(f)|| per level against sup |f|. Throws DomainError
// unless f is real, SymbolNotEven unless it is even.
NormLimitReport norm_limit_check(const ComplexStructure& cs, const TrigSymbol& f,
                                 const std::vector<int>& levels);

// ||restrict(curve_operator_full(v)) - toeplitz_matrix_alt(F_v)|| per level.
std::vector<double> symbol_residual(const std::vector<int>& levels, const ComplexStructure& cs,
                                    LatticeVector v);

// Header "r,quantity,value" followed by one line per row.
std::string rows_to_csv(const std::vector<ReportRow>& rows);

}  // namespace so3bt
