#pragma once

// Exact arithmetic in the quantum torus Z[A^{+-1}]<e_{a,b}> with product
//   e_{a,b} * e_{c,d} = A^{ad-bc} e_{a+c,b+d},
// its sigma-invariant part, and the representation on H^alt by curve operators.

#include <compare>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "json.hpp"

#include "so3bt/torus_quantization.hpp"

namespace so3bt {

// Laurent polynomial in A with exact integer coefficients. Zero coefficients
// are never stored. Arithmetic throws std::overflow_error on int64 overflow.
class LaurentA {
 public:
  LaurentA() = default;
  LaurentA(std::int64_t constant);  // NOLINT(google-explicit-constructor)
  static LaurentA monomial(std::int64_t coeff, int exponent);

  const std::map<int, std::int64_t>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  // +-A^k.
  bool is_unit() const;
  // c A^k with c != 0, a unit once coefficients are complex.
  bool is_monomial() const;
  std::int64_t coeff(int exponent) const;

  LaurentA& operator+=(const LaurentA& o);
  LaurentA& operator-=(const LaurentA& o);
  friend LaurentA operator+(LaurentA x, const LaurentA& y) { return x += y; }
  friend LaurentA operator-(LaurentA x, const LaurentA& y) { return x -= y; }
  friend LaurentA operator*(const LaurentA& x, const LaurentA& y);
  LaurentA operator-() const;
  // Multiply by A^k.
  LaurentA shifted(int k) const;

  bool operator==(const LaurentA&) const = default;

  // Value at the root A = exp(i pi / N) of the given level.
  cplx evaluate(const QuantizationLevel& level) const;
  cplx evaluate(cplx a) const;

  std::string to_string() const;

 private:
  void add_term(int exponent, std::int64_t coeff);
  std::map<int, std::int64_t> terms_;
};

struct LatticeKey {
  int a = 0;
  int b = 0;
  auto operator<=>(const LatticeKey&) const = default;
};

// Finitely supported map (a,b) -> LaurentA.
class QTElement {
 public:
  QTElement() = default;
  // coeff * e_{a,b}
  static QTElement basis(int a, int b, LaurentA coeff = 1);
  static QTElement unit() { return basis(0, 0); }

  const std::map<LatticeKey, LaurentA>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  LaurentA coeff(int a, int b) const;
  void add_term(int a, int b, const LaurentA& coeff);

  QTElement& operator+=(const QTElement& o);
  QTElement& operator-=(const QTElement& o);
  friend QTElement operator+(QTElement x, const QTElement& y) { return x += y; }
  friend QTElement operator-(QTElement x, const QTElement& y) { return x -= y; }
  friend QTElement operator*(const LaurentA& s, const QTElement& x);
  bool operator==(const QTElement&) const = default;

  std::string to_string() const;

 private:
  std::map<LatticeKey, LaurentA> terms_;
};

QTElement qt_multiply(const QTElement& x, const QTElement& y);

// sigma(e_{a,b}) = e_{-a,-b}.
QTElement sigma(const QTElement& x);

// An element fixed by sigma. Construct through symmetrize() or checked().
class SigmaInvariantElement {
 public:
  // Throws NotInvariant unless sigma(x) == x.
  static SigmaInvariantElement checked(QTElement x);
  const QTElement& element() const { return x_; }

 private:
  explicit SigmaInvariantElement(QTElement x) : x_(std::move(x)) {}
  QTElement x_;
  friend SigmaInvariantElement symmetrize(const QTElement& x);
};

// x + sigma(x).
SigmaInvariantElement symmetrize(const QTElement& x);

// Linear extension of e_{a,b} + e_{-a,-b} -> -restrict(curve_operator_full(a,b)),
// with A specialized to exp(i pi / N).
OperatorMatrix represent(const QuantizationLevel& level, const SigmaInvariantElement& x);
// Same, checking invariance first (throws NotInvariant).
OperatorMatrix represent(const QuantizationLevel& level, const QTElement& x);

// Random element: `points` support points uniform in [-bound, bound]^2 with
// coefficients drawn from {-3..3} times A^k, k in {-2..2}; then symmetrized.
SigmaInvariantElement random_invariant(std::mt19937_64& rng, int bound, int points = 3);

struct IsomorphismReport {
  int level = 0;
  int trials = 0;
  double max_deviation = 0.0;
};

// Checks represent(x*y) == represent(y) * represent(x) on random invariant
// pairs (matrix product in the row convention of OperatorMatrix). Throws
// IsomorphismViolation with the witness pair when the deviation exceeds tol.
IsomorphismReport verify_isomorphism(const QuantizationLevel& level, int trials, int support_bound,
                                     std::uint64_t seed, double tol = 1e-10);

// Lattice classes reachable from the generators e_{1,0}, e_{0,1}, e_{1,1}
// (symmetrized) by words of length 1..degree: the pivots of a reduced echelon
// basis of their span, pivoting only on monomial coefficients c A^k. Both
// sigma-images of every class are returned. Throws DomainError if degree < 1.
std::set<std::pair<int, int>> span_closure(int degree);

// Canonical JSON: sorted list of {a, b, laurent: [[exp, coeff], ...]}.
nlohmann::json to_json(const QTElement& x);
QTElement qt_from_json(const nlohmann::json& j);

}  // namespace so3bt
