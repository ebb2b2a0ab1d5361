#include "so3bt/quantum_torus.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace so3bt {

namespace {

std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t out;
  if (__builtin_add_overflow(x, y, &out)) throw std::overflow_error("LaurentA coefficient overflow");
  return out;
}

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t out;
  if (__builtin_mul_overflow(x, y, &out)) throw std::overflow_error("LaurentA coefficient overflow");
  return out;
}

int checked_exponent(std::int64_t e) {
  if (e > std::numeric_limits<int>::max() || e < std::numeric_limits<int>::min()) {
    throw std::overflow_error("exponent overflow");
  }
  return static_cast<int>(e);
}

}  // namespace

// ---- LaurentA ----

LaurentA::LaurentA(std::int64_t constant) { add_term(0, constant); }

LaurentA LaurentA::monomial(std::int64_t coeff, int exponent) {
  LaurentA x;
  x.add_term(exponent, coeff);
  return x;
}

void LaurentA::add_term(int exponent, std::int64_t coeff) {
  if (coeff == 0) return;
  auto it = terms_.find(exponent);
  if (it == terms_.end()) {
    terms_.emplace(exponent, coeff);
    return;
  }
  it->second = checked_add(it->second, coeff);
  if (it->second == 0) terms_.erase(it);
}

bool LaurentA::is_unit() const {
  return terms_.size() == 1 && std::llabs(terms_.begin()->second) == 1;
}

bool LaurentA::is_monomial() const { return terms_.size() == 1; }

std::int64_t LaurentA::coeff(int exponent) const {
  auto it = terms_.find(exponent);
  return it == terms_.end() ? 0 : it->second;
}

LaurentA& LaurentA::operator+=(const LaurentA& o) {
  for (auto [e, c] : o.terms_) add_term(e, c);
  return *this;
}

LaurentA& LaurentA::operator-=(const LaurentA& o) {
  for (auto [e, c] : o.terms_) add_term(e, checked_mul(c, -1));
  return *this;
}

LaurentA operator*(const LaurentA& x, const LaurentA& y) {
  LaurentA out;
  for (auto [e1, c1] : x.terms_) {
    for (auto [e2, c2] : y.terms_) {
      out.add_term(checked_exponent(std::int64_t{e1} + e2), checked_mul(c1, c2));
    }
  }
  return out;
}

LaurentA LaurentA::operator-() const { return LaurentA{} - *this; }

LaurentA LaurentA::shifted(int k) const {
  LaurentA out;
  for (auto [e, c] : terms_) out.terms_.emplace(checked_exponent(std::int64_t{e} + k), c);
  return out;
}

cplx LaurentA::evaluate(const QuantizationLevel& level) const {
  cplx sum{};
  for (auto [e, c] : terms_) sum += static_cast<double>(c) * level.a_power(e);
  return sum;
}

cplx LaurentA::evaluate(cplx a) const {
  cplx sum{};
  for (auto [e, c] : terms_) sum += static_cast<double>(c) * std::pow(a, e);
  return sum;
}

std::string LaurentA::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto [e, c] : terms_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    const std::int64_t mag = std::llabs(c);
    if (e == 0) {
      os << mag;
      continue;
    }
    if (mag != 1) os << mag << "*";
    os << "A";
    if (e != 1) os << "^" << e;
  }
  return os.str();
}

// ---- QTElement ----

QTElement QTElement::basis(int a, int b, LaurentA coeff) {
  QTElement x;
  x.add_term(a, b, coeff);
  return x;
}

LaurentA QTElement::coeff(int a, int b) const {
  auto it = terms_.find({a, b});
  return it == terms_.end() ? LaurentA{} : it->second;
}

void QTElement::add_term(int a, int b, const LaurentA& coeff) {
  if (coeff.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace({a, b}, coeff);
  if (inserted) return;
  it->second += coeff;
  if (it->second.is_zero()) terms_.erase(it);
}

QTElement& QTElement::operator+=(const QTElement& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.a, k.b, c);
  return *this;
}

QTElement& QTElement::operator-=(const QTElement& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.a, k.b, -c);
  return *this;
}

QTElement operator*(const LaurentA& s, const QTElement& x) {
  QTElement out;
  for (const auto& [k, c] : x.terms_) out.add_term(k.a, k.b, s * c);
  return out;
}

std::string QTElement::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.to_string() << ")*e[" << k.a << "," << k.b << "]";
  }
  return os.str();
}

QTElement qt_multiply(const QTElement& x, const QTElement& y) {
  QTElement out;
  for (const auto& [k1, c1] : x.terms()) {
    for (const auto& [k2, c2] : y.terms()) {
      const std::int64_t phase = std::int64_t{k1.a} * k2.b - std::int64_t{k1.b} * k2.a;
      out.add_term(checked_exponent(std::int64_t{k1.a} + k2.a),
                   checked_exponent(std::int64_t{k1.b} + k2.b),
                   (c1 * c2).shifted(checked_exponent(phase)));
    }
  }
  return out;
}

QTElement sigma(const QTElement& x) {
  QTElement out;
  for (const auto& [k, c] : x.terms()) out.add_term(-k.a, -k.b, c);
  return out;
}

SigmaInvariantElement SigmaInvariantElement::checked(QTElement x) {
  if (!(sigma(x) == x)) throw NotInvariant("element is not sigma-invariant: " + x.to_string());
  return SigmaInvariantElement(std::move(x));
}

SigmaInvariantElement symmetrize(const QTElement& x) { return SigmaInvariantElement(x + sigma(x)); }

OperatorMatrix represent(const QuantizationLevel& level, const SigmaInvariantElement& x) {
  // Pairs (a,b), (-a,-b) carry equal coefficients, so the full-basis sum
  // commutes with parity and restricts.
  const int n = level.dim();
  OperatorMatrix full{Basis::Full, Eigen::MatrixXcd::Zero(n, n)};
  double scale = 0.0;  // terms can cancel at small r
  for (const auto& [k, c] : x.element().terms()) {
    const cplx v = c.evaluate(level);
    scale += std::abs(v);
    full.m += v * translation_matrix(level, {k.a, k.b}).m;
  }
  return restrict_alternating(level, full, scale);
}

OperatorMatrix represent(const QuantizationLevel& level, const QTElement& x) {
  return represent(level, SigmaInvariantElement::checked(x));
}

SigmaInvariantElement random_invariant(std::mt19937_64& rng, int bound, int points) {
  if (bound < 0 || points < 1) throw DomainError("random_invariant needs bound >= 0, points >= 1");
  std::uniform_int_distribution<int> pos(-bound, bound);
  std::uniform_int_distribution<int> coeff(-3, 3);
  std::uniform_int_distribution<int> expo(-2, 2);
  QTElement x;
  for (int i = 0; i < points; ++i) {
    const int a = pos(rng);
    const int b = pos(rng);
    const int c = coeff(rng);
    const int e = expo(rng);
    x.add_term(a, b, LaurentA::monomial(c, e));
  }
  return symmetrize(x);
}

IsomorphismReport verify_isomorphism(const QuantizationLevel& level, int trials, int support_bound,
                                     std::uint64_t seed, double tol) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  std::mt19937_64 rng(seed);
  IsomorphismReport report{level.r(), trials, 0.0};
  for (int t = 0; t < trials; ++t) {
    const SigmaInvariantElement x = random_invariant(rng, support_bound);
    const SigmaInvariantElement y = random_invariant(rng, support_bound);
    const SigmaInvariantElement xy =
        SigmaInvariantElement::checked(qt_multiply(x.element(), y.element()));
    const OperatorMatrix lhs = represent(level, xy);
    const OperatorMatrix rhs = represent(level, y) * represent(level, x);
    const double dev = max_abs(lhs.m - rhs.m);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (!(dev < tol)) {
      throw IsomorphismViolation("represent(x*y) != represent(y)*represent(x) at r = " +
                                 std::to_string(level.r()) + ", deviation " + std::to_string(dev) +
                                 "; x = " + to_json(x.element()).dump() +
                                 "; y = " + to_json(y.element()).dump());
    }
  }
  return report;
}

// ---- span closure ----

namespace {

// Class representative of {(a,b), (-a,-b)}.
LatticeKey orbit_key(LatticeKey k) {
  if (k.a < 0 || (k.a == 0 && k.b < 0)) return {-k.a, -k.b};
  return k;
}

using ClassVector = std::map<LatticeKey, LaurentA>;

ClassVector to_classes(const QTElement& x) {
  ClassVector v;
  for (const auto& [k, c] : x.terms()) {
    if (orbit_key(k) == k) v.emplace(k, c);
  }
  return v;
}

std::int64_t content(const ClassVector& v) {
  std::int64_t g = 0;
  for (const auto& [k, c] : v) {
    for (auto [e, x] : c.terms()) g = std::gcd(g, x);
  }
  return g;
}

void normalize(ClassVector& v) {
  const std::int64_t g = content(v);
  if (g <= 1) return;
  for (auto& [k, c] : v) {
    LaurentA reduced;
    for (auto [e, x] : c.terms()) reduced += LaurentA::monomial(x / g, e);
    c = reduced;
  }
}

// v <- u * v - c * b, where u is b's pivot coefficient and c is v's entry at
// that pivot. Both u and c * (...) keep everything integral.
void eliminate(ClassVector& v, const ClassVector& b, LatticeKey pivot) {
  auto it = v.find(pivot);
  if (it == v.end()) return;
  const LaurentA c = it->second;
  const LaurentA& u = b.at(pivot);
  ClassVector out;
  for (const auto& [k, x] : v) {
    LaurentA y = u * x;
    if (!y.is_zero()) out.emplace(k, std::move(y));
  }
  for (const auto& [k, x] : b) {
    auto [jt, inserted] = out.try_emplace(k, LaurentA{});
    jt->second -= c * x;
    if (jt->second.is_zero()) out.erase(jt);
  }
  v = std::move(out);
  normalize(v);
}

// Monomial entry of largest |a| + |b|; ties broken by key order.
std::optional<LatticeKey> choose_pivot(const ClassVector& v) {
  std::optional<LatticeKey> best;
  int best_weight = -1;
  for (const auto& [k, c] : v) {
    if (!c.is_monomial()) continue;
    const int w = std::abs(k.a) + std::abs(k.b);
    if (w > best_weight) {
      best = k;
      best_weight = w;
    }
  }
  return best;
}

struct Echelon {
  std::map<LatticeKey, ClassVector> rows;  // pivot -> row
  std::vector<ClassVector> pending;        // nonzero remainders without a monomial entry

  void reduce(ClassVector& v) const {
    for (const auto& [p, row] : rows) eliminate(v, row, p);
  }

  // Returns true if a new pivot was created.
  bool insert(ClassVector v) {
    reduce(v);
    if (v.empty()) return false;
    const auto pivot = choose_pivot(v);
    if (!pivot) {
      pending.push_back(std::move(v));
      return false;
    }
    for (auto& [p, row] : rows) eliminate(row, v, *pivot);
    rows.emplace(*pivot, std::move(v));
    return true;
  }

  void settle() {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<ClassVector> retry;
      retry.swap(pending);
      for (auto& v : retry) changed = insert(std::move(v)) || changed;
    }
  }
};

}  // namespace

std::set<std::pair<int, int>> span_closure(int degree) {
  if (degree < 1) throw DomainError("span_closure needs degree >= 1");
  const std::vector<QTElement> gens = {symmetrize(QTElement::basis(1, 0)).element(),
                                       symmetrize(QTElement::basis(0, 1)).element(),
                                       symmetrize(QTElement::basis(1, 1)).element()};
  Echelon echelon;
  std::vector<QTElement> layer = {QTElement::unit()};
  for (int len = 1; len <= degree; ++len) {
    std::vector<QTElement> next;
    next.reserve(layer.size() * gens.size());
    for (const QTElement& w : layer) {
      for (const QTElement& g : gens) {
        QTElement p = qt_multiply(w, g);
        echelon.insert(to_classes(p));
        next.push_back(std::move(p));
      }
    }
    layer = std::move(next);
  }
  echelon.settle();
  std::set<std::pair<int, int>> out;
  for (const auto& [p, row] : echelon.rows) {
    out.emplace(p.a, p.b);
    out.emplace(-p.a, -p.b);
  }
  return out;
}

// ---- JSON ----

nlohmann::json to_json(const QTElement& x) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [k, c] : x.terms()) {
    nlohmann::json laurent = nlohmann::json::array();
    for (auto [e, v] : c.terms()) laurent.push_back({e, v});
    out.push_back({{"a", k.a}, {"b", k.b}, {"laurent", laurent}});
  }
  return out;
}

QTElement qt_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DomainError("quantum torus element must be a JSON array");
  QTElement x;
  for (const auto& term : j) {
    LaurentA c;
    for (const auto& pair : term.at("laurent")) {
      c += LaurentA::monomial(pair.at(1).get<std::int64_t>(), pair.at(0).get<int>());
    }
    x.add_term(term.at("a").get<int>(), term.at("b").get<int>(), c);
  }
  return x;
}

}  // namespace so3bt
