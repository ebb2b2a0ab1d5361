#pragma once

// A-polynomials of the preset knots, their symbols on the moduli torus,
// colored-Jones knot states, and the AJ / volume / Mahler experiments.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "so3bt/bt_operators.hpp"
#include "so3bt/torus_quantization.hpp"

namespace so3bt {

// Laurent polynomial in m, l with exact integer coefficients.
class LaurentML {
 public:
  using Key = std::pair<int, int>;  // (alpha, beta) for m^alpha l^beta

  LaurentML() = default;
  LaurentML(std::int64_t constant);  // NOLINT(google-explicit-constructor)
  static LaurentML monomial(std::int64_t coeff, int alpha, int beta);
  static LaurentML m() { return monomial(1, 1, 0); }
  static LaurentML l() { return monomial(1, 0, 1); }
  // Sums of products of integers, m, l and integer powers ("m^-1", "l^2"),
  // e.g. "1+m+l", "l*m^6 + 1", "-2*m^2*l". Throws DomainError on bad input.
  static LaurentML parse(const std::string& text);

  const std::map<Key, std::int64_t>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  void add_term(int alpha, int beta, std::int64_t coeff);

  LaurentML& operator+=(const LaurentML& o);
  LaurentML& operator-=(const LaurentML& o);
  friend LaurentML operator+(LaurentML x, const LaurentML& y) { return x += y; }
  friend LaurentML operator-(LaurentML x, const LaurentML& y) { return x -= y; }
  friend LaurentML operator*(const LaurentML& x, const LaurentML& y);
  bool operator==(const LaurentML&) const = default;

  // P(m^-1, l^-1).
  LaurentML inverted() const;
  cplx evaluate(cplx m, cplx l) const;
  // gcd of the coefficients.
  std::int64_t content() const;
  std::string to_string() const;

 private:
  std::map<Key, std::int64_t> terms_;
};

enum class Knot { Unknot, Trefoil, FigureEight };

// "unknot", "trefoil", "figure_eight". Throws UnknownKnot.
Knot knot_from_name(const std::string& name);
std::string knot_name(Knot k);

// Directory holding apolynomials.json: $SO3BT_DATA_DIR if set, otherwise the
// data directory of the source tree.
std::string data_directory();

// Nonabelian components as stored in the data file.
std::map<std::string, LaurentML> load_apolynomial_table(const std::string& path);

// A-polynomial of a preset. With include_abelian the factor (l - 1) is
// multiplied in for knots that have a nonabelian component. Throws UnknownKnot.
LaurentML builtin_apolynomial(const std::string& name, bool include_abelian = true);
LaurentML builtin_apolynomial(Knot k, bool include_abelian = true);

// A(p,q) = -(P(e^{-2 pi i q}, e^{-2 pi i p}) + P(e^{2 pi i q}, e^{2 pi i p})):
// m^alpha l^beta with coefficient c gives -c at chi_{alpha,-beta} and at chi_{-alpha,beta}.
TrigSymbol apoly_to_symbol(const LaurentML& p);

// Reduced colored Jones J'_n at q = a^4 (a is a fourth root of q), unknot = 1.
// The trefoil is the right-handed one in the knot-table convention
// (J'_2 = -q^-4 + q^-3 + q^-1); mirror sends q to q^-1.
cplx colored_jones_at(Knot k, int n, cplx a, bool mirror = false);

// Which root of unity q is at level r.
//   A4: q = A^4 = exp(4 pi i / N), the root for which [n]_q = sin(2 pi n / N) / sin(2 pi / N).
//   A2: q = A^2 = exp(2 pi i / N).
enum class QRoot { A4, A2 };

// J'_n at the level root, phases reduced exactly before evaluation.
// Throws ColorOutOfRange unless 1 <= n <= r.
cplx colored_jones(Knot k, int n, const QuantizationLevel& level, bool mirror = false,
                   QRoot root = QRoot::A4);

// Trefoil through its cyclotomic expansion
//   sum_k (-1)^k q^{-k(k+3)/2} prod_{j=1..k} (q^n + q^-n - q^j - q^-j);
// kept as a cross-check of the closed form used by colored_jones (the sum
// cancels catastrophically at large n).
cplx trefoil_cyclotomic(int n, cplx a);

enum class Weighting { Flat, QuantumDimension };

struct KnotStateOptions {
  Weighting weighting = Weighting::QuantumDimension;
  // Multiply by eta = 2 sin(2 pi / N) / sqrt(N), the value of the closed
  // 3-sphere, so that the unknot state is a unit vector.
  bool tqft_normalization = true;
  bool mirror = false;
  QRoot root = QRoot::A4;
};

struct KnotState {
  int r = 0;
  // Coordinate n-1 is the Phi_n coordinate, n = 1..r.
  Eigen::VectorXcd coords;
};

// Coordinates w_n J'_n with w_n = [n]_q (or 1), times eta if requested.
// Throws DomainError if r < 1.
KnotState knot_state(Knot k, int r, const KnotStateOptions& opts = {});

// ||T v|| / (||T|| ||v||) with T = toeplitz_matrix_alt(apoly_to_symbol(p)).
// grid_n <= 0 selects default_grid. Throws DomainError if r < 2.
double aj_residual(const LaurentML& p, const KnotState& state, const ComplexStructure& cs = {},
                   int grid_n = 0);
double aj_residual(Knot k, int r, const ComplexStructure& cs = {}, int grid_n = 0,
                   const KnotStateOptions& opts = {}, bool include_abelian = true);

// (pi / r) log ||Z'_r||^2 per level. Throws DomainError unless levels increase.
std::vector<double> volume_sequence(Knot k, const std::vector<int>& levels,
                                    const KnotStateOptions& opts = {});

// 2 Cl_2(pi/3) for the figure-eight, 0 for the others.
double clausen_cl2(double theta);
double simplicial_volume_oracle(const std::string& name);
double simplicial_volume_oracle(Knot k);

struct MahlerResult {
  double value = 0.0;            // Richardson-extrapolated
  std::vector<double> raw;       // midpoint sums at grid_n, 2 grid_n, ...
};

// Midpoint-rule Mahler measure with `refinements` grid doublings. Throws
// DegeneratePolynomial if p is zero, DomainError if grid_n < 64 or
// refinements < 0.
MahlerResult mahler_measure(const LaurentML& p, int grid_n = 512, int refinements = 1);

}  // namespace so3bt
