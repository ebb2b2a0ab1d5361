#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "so3bt/quantum_torus.hpp"

using namespace so3bt;

namespace {

constexpr double kPi = std::numbers::pi;

QTElement e(int a, int b, LaurentA c = 1) { return QTElement::basis(a, b, std::move(c)); }
LaurentA A(int k, std::int64_t c = 1) { return LaurentA::monomial(c, k); }

// Raw random element, not symmetrized.
QTElement random_element(std::mt19937_64& rng, int bound, int points) {
  std::uniform_int_distribution<int> pos(-bound, bound);
  std::uniform_int_distribution<int> coeff(-3, 3);
  std::uniform_int_distribution<int> expo(-3, 3);
  QTElement x;
  for (int i = 0; i < points; ++i) {
    LaurentA c;
    for (int j = 0; j < 2; ++j) c += A(expo(rng), coeff(rng));
    x.add_term(pos(rng), pos(rng), c);
  }
  return x;
}

}  // namespace

TEST_CASE("laurent arithmetic") {
  const LaurentA x = A(1) + A(-1);
  CHECK(x * x == A(2) + LaurentA(2) + A(-2));
  CHECK((x - x).is_zero());
  CHECK((x - x).terms().empty());
  CHECK(A(3).is_unit());
  CHECK(A(3, -1).is_unit());
  CHECK_FALSE(A(3, 2).is_unit());
  CHECK(A(3, 2).is_monomial());
  CHECK_FALSE(x.is_unit());
  CHECK(x.shifted(2) == A(3) + A(1));
  CHECK(LaurentA(0).is_zero());
  CHECK(std::abs(x.evaluate(QuantizationLevel(2)) - 2.0 * std::cos(kPi / 5)) < 1e-14);
  CHECK(std::abs(x.evaluate(std::polar(1.0, 0.3)) - 2.0 * std::cos(0.3)) < 1e-14);
  CHECK((A(2) - A(-1, 3)).to_string() == "-3*A^-1 + A^2");
}

TEST_CASE("laurent overflow is detected") {
  const LaurentA big = LaurentA::monomial(std::int64_t{1} << 62, 0);
  CHECK_THROWS_AS(big * LaurentA(4), std::overflow_error);
  CHECK_THROWS_AS(big + big, std::overflow_error);
}

TEST_CASE("qt_multiply examples") {
  CHECK(qt_multiply(e(1, 0), e(0, 1)) == e(1, 1, A(1)));
  CHECK(qt_multiply(e(0, 1), e(1, 0)) == e(1, 1, A(-1)));

  const QTElement x = e(1, 0) + e(-1, 0);
  const QTElement y = e(0, 1) + e(0, -1);
  const QTElement expected = A(1) * (e(1, 1) + e(-1, -1)) + A(-1) * (e(1, -1) + e(-1, 1));
  CHECK(qt_multiply(x, y) == expected);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const QTElement z = random_element(rng, 4, 5);
    CHECK(qt_multiply(z, QTElement::unit()) == z);
    CHECK(qt_multiply(QTElement::unit(), z) == z);
  }
}

TEST_CASE("qt_multiply general product of symmetric pairs") {
  // (e_{a,b} + e_{-a,-b}) * (e_{c,d} + e_{-c,-d})
  //   = A^{ad-bc} (e_{a+c,b+d} + sym) + A^{bc-ad} (e_{a-c,b-d} + sym)
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      for (int c = -2; c <= 2; ++c)
        for (int d = -2; d <= 2; ++d) {
          const QTElement lhs = qt_multiply(e(a, b) + e(-a, -b), e(c, d) + e(-c, -d));
          const int k = a * d - b * c;
          const QTElement rhs = A(k) * (e(a + c, b + d) + e(-a - c, -b - d)) +
                                A(-k) * (e(a - c, b - d) + e(c - a, d - b));
          CHECK(lhs == rhs);
        }
}

TEST_CASE("associativity and q-commutation") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const QTElement x = random_element(rng, 3, 3);
    const QTElement y = random_element(rng, 3, 3);
    const QTElement z = random_element(rng, 3, 3);
    CHECK(qt_multiply(qt_multiply(x, y), z) == qt_multiply(x, qt_multiply(y, z)));
  }
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      for (int c = -3; c <= 3; ++c)
        for (int d = -3; d <= 3; ++d) {
          const QTElement diff =
              qt_multiply(e(a, b), e(c, d)) - A(2 * (a * d - b * c)) * qt_multiply(e(c, d), e(a, b));
          CHECK(diff.is_zero());
        }
}

TEST_CASE("sigma") {
  CHECK(sigma(e(2, 3)) == e(-2, -3));
  CHECK(sigma(e(0, 0)) == e(0, 0));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const QTElement x = random_element(rng, 4, 4);
    const QTElement y = random_element(rng, 4, 4);
    CHECK(sigma(sigma(x)) == x);
    CHECK(sigma(qt_multiply(x, y)) == qt_multiply(sigma(x), sigma(y)));
  }
}

TEST_CASE("symmetrize") {
  CHECK(symmetrize(e(1, 0)).element() == e(1, 0) + e(-1, 0));
  const QTElement inv = e(2, 1, A(1)) + e(-2, -1, A(1));
  CHECK(symmetrize(inv).element() == LaurentA(2) * inv);
  CHECK(symmetrize(e(1, 2) - e(-1, -2)).element().is_zero());
  CHECK(symmetrize(e(0, 0)).element() == e(0, 0, 2));
  CHECK_THROWS_AS(SigmaInvariantElement::checked(e(1, 0)), NotInvariant);
  CHECK_NOTHROW(SigmaInvariantElement::checked(inv));
}

TEST_CASE("specialization commutes with multiplication") {
  std::mt19937_64 rng(5);
  for (int r : {1, 2, 7, 20}) {
    QuantizationLevel level(r);
    for (int t = 0; t < 30; ++t) {
      const QTElement x = random_element(rng, 3, 3);
      const QTElement y = random_element(rng, 3, 3);
      const QTElement xy = qt_multiply(x, y);
      // Numeric product of the specialized elements, keyed by lattice point.
      std::map<LatticeKey, cplx> numeric;
      for (const auto& [k1, c1] : x.terms())
        for (const auto& [k2, c2] : y.terms())
          numeric[{k1.a + k2.a, k1.b + k2.b}] += c1.evaluate(level) * c2.evaluate(level) *
                                                 std::polar(1.0, kPi * (k1.a * k2.b - k1.b * k2.a) / level.dim());
      for (const auto& [k, v] : numeric) {
        CHECK(std::abs(xy.coeff(k.a, k.b).evaluate(level) - v) < 1e-12);
      }
    }
  }
}

TEST_CASE("represent examples") {
  QuantizationLevel r1(1);
  const OperatorMatrix m = represent(r1, QTElement(LaurentA(-1) * (e(1, 0) + e(-1, 0))));
  CHECK(m.basis == Basis::Alternating);
  REQUIRE(m.size() == 1);
  CHECK(std::abs(m.m(0, 0) - 1.0) < 1e-14);

  for (int r : {1, 3, 6}) {
    QuantizationLevel level(r);
    const OperatorMatrix s = represent(level, e(0, 0, A(1) + A(1)));
    CHECK(max_abs(s.m - 2.0 * level.A() * Eigen::MatrixXcd::Identity(r, r)) < 1e-14);
  }

  CHECK_THROWS_AS(represent(r1, e(1, 0)), NotInvariant);
}

TEST_CASE("represent reverses products at r = 2") {
  QuantizationLevel level(2);
  // Hand-computed on Phi_1, Phi_2 (rows hold images).
  Eigen::MatrixXcd x(2, 2), y(2, 2);
  x << 2 * std::cos(2 * kPi / 5), 0, 0, 2 * std::cos(4 * kPi / 5);
  y << 0, 1, 1, -1;
  const QTElement ex = e(1, 0) + e(-1, 0);
  const QTElement ey = e(0, 1) + e(0, -1);
  CHECK(max_abs(represent(level, ex).m - x) < 1e-14);
  CHECK(max_abs(represent(level, ey).m - y) < 1e-14);
  const OperatorMatrix xy = represent(level, qt_multiply(ex, ey));
  CHECK(max_abs(xy.m - y * x) < 1e-13);
  CHECK(max_abs(xy.m - x * y) > 0.1);
}

TEST_CASE("verify_isomorphism") {
  const QTElement ex = e(1, 0) + e(-1, 0);
  const QTElement ey = e(0, 1) + e(0, -1);
  for (int r = 1; r <= 20; ++r) {
    QuantizationLevel level(r);
    const OperatorMatrix lhs = represent(level, qt_multiply(ex, ey));
    const OperatorMatrix rhs = represent(level, ey) * represent(level, ex);
    CHECK(max_abs(lhs.m - rhs.m) < 1e-10);
    const OperatorMatrix unit = represent(level, e(0, 0));
    CHECK(max_abs((represent(level, ex) * unit).m - represent(level, ex).m) < 1e-14);
  }

  const IsomorphismReport rep = verify_isomorphism(QuantizationLevel(5), 100, 4, 42);
  CHECK(rep.trials == 100);
  CHECK(rep.max_deviation < 1e-10);
  for (int r : {1, 2, 9}) {
    CHECK(verify_isomorphism(QuantizationLevel(r), 30, 5, 1000 + r).max_deviation < 1e-10);
  }

  CHECK_THROWS_AS(verify_isomorphism(QuantizationLevel(3), 0, 2, 1), DomainError);
  try {
    verify_isomorphism(QuantizationLevel(3), 1, 2, 1, -1.0);
    FAIL("expected a violation");
  } catch (const IsomorphismViolation& err) {
    CHECK(std::string(err.what()).find("laurent") != std::string::npos);
  }
}

TEST_CASE("random invariant elements are invariant and reproducible") {
  std::mt19937_64 a(9), b(9);
  for (int t = 0; t < 50; ++t) {
    const SigmaInvariantElement x = random_invariant(a, 4);
    CHECK(sigma(x.element()) == x.element());
    CHECK(random_invariant(b, 4).element() == x.element());
    for (const auto& [k, c] : x.element().terms()) {
      CHECK(std::abs(k.a) <= 4);
      CHECK(std::abs(k.b) <= 4);
    }
  }
}

TEST_CASE("span_closure") {
  using P = std::pair<int, int>;
  const auto d1 = span_closure(1);
  CHECK(d1 == std::set<P>{{1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0, -1}, {-1, -1}});

  const auto d2 = span_closure(2);
  CHECK(d2.count({2, 1}) == 1);
  CHECK(d2.count({-2, -1}) == 1);

  // Every nonzero class in the box. The unit class only ever appears with a
  // coefficient divisible by A^2 + A^-2 (see the next test case), so it is not
  // a monomial pivot.
  const auto d6 = span_closure(6);
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) {
      if (a == 0 && b == 0) continue;
      CHECK_MESSAGE(d6.count({a, b}) == 1, a, ",", b);
    }
  CHECK(d6.count({0, 0}) == 0);

  for (int d = 1; d <= 5; ++d) {
    const auto lo = span_closure(d);
    const auto hi = span_closure(d + 1);
    for (const auto& p : lo) CHECK(hi.count(p) == 1);
  }
  CHECK_THROWS_AS(span_closure(0), DomainError);
}

TEST_CASE("json round trip") {
  const QTElement x = e(1, -2, A(3, 2) - A(-1)) + e(0, 0, 5) + e(-4, 1, A(2));
  const nlohmann::json j = to_json(x);
  CHECK(j.dump() ==
        R"([{"a":-4,"b":1,"laurent":[[2,1]]},{"a":0,"b":0,"laurent":[[0,5]]},)"
        R"({"a":1,"b":-2,"laurent":[[-1,-1],[3,2]]}])");
  CHECK(qt_from_json(j) == x);
  CHECK(qt_from_json(nlohmann::json::parse(j.dump())) == x);
  CHECK(to_json(QTElement{}).dump() == "[]");
  CHECK_THROWS_AS(qt_from_json(nlohmann::json::object()), DomainError);
}

TEST_CASE("unit class is not reached with a monomial coefficient") {
  // Specialize at A = exp(i pi / 4), where A^2 + A^-2 = 0, and show e_{0,0} is
  // outside the numeric span of all words of length <= 6. A monomial multiple
  // of e_{0,0} in the exact span would survive this specialization.
  const cplx a = std::polar(1.0, kPi / 4);
  const std::vector<QTElement> gens = {e(1, 0) + e(-1, 0), e(0, 1) + e(0, -1), e(1, 1) + e(-1, -1)};
  std::vector<QTElement> words, layer = {QTElement::unit()};
  for (int len = 1; len <= 6; ++len) {
    std::vector<QTElement> next;
    for (const auto& w : layer)
      for (const auto& g : gens) next.push_back(qt_multiply(w, g));
    words.insert(words.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  std::map<LatticeKey, int> index;
  for (const auto& w : words)
    for (const auto& [k, c] : w.terms()) index.try_emplace(k, static_cast<int>(index.size()));
  Eigen::MatrixXcd m(index.size(), words.size());
  m.setZero();
  for (std::size_t j = 0; j < words.size(); ++j)
    for (const auto& [k, c] : words[j].terms()) m(index[k], static_cast<Eigen::Index>(j)) = c.evaluate(a);
  Eigen::VectorXcd target = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(index.size()));
  target(index.at({0, 0})) = 1.0;
  const Eigen::VectorXcd coeffs = m.completeOrthogonalDecomposition().solve(target);
  CHECK((m * coeffs - target).norm() > 0.1);

  // At a generic A it is in the span, so the obstruction is the ring, not the words.
  const cplx generic{0.3, 1.1};
  for (std::size_t j = 0; j < words.size(); ++j)
    for (const auto& [k, c] : words[j].terms()) m(index[k], static_cast<Eigen::Index>(j)) = c.evaluate(generic);
  const Eigen::VectorXcd c2 = m.completeOrthogonalDecomposition().solve(target);
  CHECK((m * c2 - target).norm() < 1e-8);
}

TEST_CASE("represent tolerates sums that cancel at small levels") {
  // At r = 1 many lattice classes coincide; some products represent to zero.
  const QuantizationLevel level(1);
  const QTElement zero = QTElement::basis(1, 0) + QTElement::basis(-1, 0) -
                         QTElement::basis(4, 0) - QTElement::basis(-4, 0);
  CHECK(max_abs(represent(level, zero).m) < 1e-14);
  CHECK_NOTHROW(verify_isomorphism(level, 1000, 4, 1001));
}
