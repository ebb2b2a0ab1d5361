#include <cmath>
#include <cstdlib>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "so3bt/bt_operators.hpp"
#include "so3bt/parallel.hpp"

using namespace so3bt;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force 2D trapezoid sum of 4 pi conj(Psi_l) f Psi_k over an n x n grid
// using only pointwise evaluation.
Eigen::MatrixXcd naive_toeplitz(const QuantizationLevel& level, const ComplexStructure& cs,
                                const TrigSymbol& f, int n) {
  const int dim = level.dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<cplx> frame(static_cast<std::size_t>(dim));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const ModuliPoint z{static_cast<double>(i) / n, static_cast<double>(j) / n};
      for (int l = 0; l < dim; ++l) frame[l] = theta_point_evaluate(level, cs, l, z).frame;
      const cplx fz = f.evaluate(z.p, z.q);
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) out(k, l) += std::conj(frame[l]) * fz * frame[k];
    }
  }
  return out * (4.0 * kPi / (static_cast<double>(n) * n));
}

TrigSymbol sample_symbol() {
  TrigSymbol f = TrigSymbol::constant(0.5);
  f.add_term(1, 0, {0.3, -0.2});
  f.add_term(0, 1, {-0.7, 0.1});
  f.add_term(2, -1, {0.25, 0.4});
  f.add_term(-1, -1, {0.1, 0.0});
  return f;
}

}  // namespace

TEST_CASE("trig symbol basics") {
  const TrigSymbol f = TrigSymbol::curve({1, 2});
  CHECK(f.is_real());
  CHECK(f.is_even());
  CHECK(f.max_frequency() == 2);
  for (double p : {0.0, 0.17, 0.6})
    for (double q : {0.0, 0.33, 0.9})
      CHECK(std::abs(f.evaluate(p, q) - (-2.0 * std::cos(2 * kPi * (q - 2 * p)))) < 1e-13);
  CHECK(TrigSymbol::curve({0, 0}).terms().at({0, 0}) == cplx(-2.0));
  CHECK_FALSE(TrigSymbol::mode(1, 0).is_real());
  CHECK_FALSE(TrigSymbol::mode(1, 0).is_even());
  const TrigSymbol g = TrigSymbol::mode(1, 0, {0, 1}) + TrigSymbol::mode(-1, 0, {0, -1});
  CHECK(g.is_real());
  CHECK_FALSE(g.is_even());
  CHECK((TrigSymbol::mode(1, 1) + TrigSymbol::mode(1, 1, -1.0)).terms().empty());
}

TEST_CASE("toeplitz matches brute-force quadrature") {
  for (const ComplexStructure cs : {ComplexStructure{0.0, 1.0}, ComplexStructure{0.3, 1.2}}) {
    const QuantizationLevel level(2);
    const TrigSymbol f = sample_symbol();
    const int n = default_grid(level, f);
    const Eigen::MatrixXcd fast = toeplitz_matrix(level, cs, f, n).m;
    const Eigen::MatrixXcd slow = naive_toeplitz(level, cs, f, n);
    CHECK(max_abs(fast - slow) < 1e-12);
  }
}

TEST_CASE("toeplitz of constants is the identity") {
  const ComplexStructure cs;
  for (int r : {1, 5, 10}) {
    const QuantizationLevel level(r);
    const int n = 8 * level.dim();
    CHECK(max_abs(toeplitz_matrix(level, cs, TrigSymbol::constant(1.0), n).m -
                  Eigen::MatrixXcd::Identity(level.dim(), level.dim())) < 1e-8);
    CHECK(max_abs(gram_matrix(level, cs, n).m - Eigen::MatrixXcd::Identity(level.dim(), level.dim())) <
          1e-8);
    CHECK(max_abs(toeplitz_matrix_alt(level, cs, TrigSymbol::constant(1.0), n).m -
                  Eigen::MatrixXcd::Identity(r, r)) < 1e-8);
  }
}

TEST_CASE("toeplitz of single modes") {
  // Gaussian Fourier transforms: T(chi_{a,0}) = exp(-pi a^2 / 2bN) M^a and, at
  // Re tau = 0, T(chi_{0,1}) = exp(-pi b / 2N) L.
  for (const ComplexStructure cs : {ComplexStructure{0.0, 1.0}, ComplexStructure{-0.4, 0.8}}) {
    for (int r : {3, 6}) {
      const QuantizationLevel level(r);
      const int n = level.dim();
      for (int a : {1, 2}) {
        const OperatorMatrix t = toeplitz_matrix(level, cs, TrigSymbol::mode(a, 0), default_grid(level, {}));
        const double c = std::exp(-kPi * a * a / (2 * cs.im * n));
        CHECK(max_abs(t.m - c * translation_matrix(level, {a, 0}).m) < 1e-12);
      }
    }
  }
  const ComplexStructure cs;
  const QuantizationLevel level(4);
  const OperatorMatrix t = toeplitz_matrix(level, cs, TrigSymbol::mode(0, 1), default_grid(level, {}));
  CHECK(max_abs(t.m - std::exp(-kPi / (2 * level.dim())) * translation_matrix(level, {0, 1}).m) < 1e-12);
}

TEST_CASE("toeplitz examples") {
  const ComplexStructure cs;
  {
    const QuantizationLevel level(3);
    const OperatorMatrix t = toeplitz_matrix(level, cs, TrigSymbol::mode(1, 0), 128);
    double off = 0.0, diag = 1e9;
    for (int k = 0; k < 7; ++k)
      for (int l = 0; l < 7; ++l) {
        if (k == l) diag = std::min(diag, std::abs(t.m(k, k)));
        else off = std::max(off, std::abs(t.m(k, l)));
      }
    CHECK(diag > 10 * off);
    // Phase follows translation_matrix(1,0), i.e. exp(+2 pi i l / 7).
    for (int l = 0; l < 7; ++l) {
      CHECK(std::abs(std::arg(t.m(l, l) * std::polar(1.0, -2 * kPi * l / 7))) < 1e-12);
    }
  }
  {
    const QuantizationLevel level(1);
    const OperatorMatrix t = toeplitz_matrix_alt(level, cs, TrigSymbol::curve({1, 0}), 128);
    REQUIRE(t.size() == 1);
    CHECK(std::abs(t.m(0, 0) - std::exp(-kPi / 6)) < 1e-12);
  }
  {
    const QuantizationLevel level(2);
    const OperatorMatrix t = toeplitz_matrix_alt(level, cs, TrigSymbol::curve({0, 1}), 128);
    Eigen::MatrixXcd expected(2, 2);
    expected << 0, -1, -1, 1;
    CHECK(max_abs(t.m - std::exp(-kPi / 10) * expected) < 1e-12);
  }
}

TEST_CASE("toeplitz properties") {
  const ComplexStructure cs{0.2, 0.9};
  const QuantizationLevel level(6);
  const int n = 8 * level.dim();
  const TrigSymbol f = TrigSymbol::curve({1, 0}) + 0.5 * TrigSymbol::curve({1, -2});
  const TrigSymbol g = sample_symbol();

  const OperatorMatrix tf = toeplitz_matrix(level, cs, f, n);
  CHECK(max_abs(tf.m - tf.m.adjoint()) < 1e-10);

  // |1 + chi_{1,0} + chi_{0,1}|^2 >= 0
  TrigSymbol pos = TrigSymbol::constant(3.0);
  for (auto [a, b] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}) pos.add_term(a, b, 1.0);
  const OperatorMatrix tp = toeplitz_matrix(level, cs, pos, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(tp.m);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);

  const cplx alpha{0.7, -1.1}, beta{-0.3, 0.25};
  const OperatorMatrix lin = toeplitz_matrix(level, cs, alpha * f + beta * g, n);
  CHECK(max_abs(lin.m - (alpha * tf.m + beta * toeplitz_matrix(level, cs, g, n).m)) < 1e-10);

  CHECK(operator_norm(tf) <= symbol_sup(f) + 1e-6);
  CHECK(operator_norm(tp) <= symbol_sup(pos) + 1e-6);

  for (int r : {10, 14}) {
    const QuantizationLevel lv(r);
    const cplx tr = toeplitz_matrix(lv, cs, g, default_grid(lv, g)).m.trace();
    // (N / 4pi) * integral of f against omega = 4 pi dp dq picks out c_{0,0}.
    CHECK(std::abs(tr - lv.dim() * 0.5) < 1e-2 * lv.dim() * 0.5);
  }
}

TEST_CASE("toeplitz errors") {
  const QuantizationLevel level(3);
  const ComplexStructure cs;
  CHECK_THROWS_AS(toeplitz_matrix(level, cs, TrigSymbol::constant(1.0), 27), GridTooCoarse);
  CHECK_NOTHROW(toeplitz_matrix(level, cs, TrigSymbol::constant(1.0), 28));
  CHECK_THROWS_AS(toeplitz_matrix(level, cs, TrigSymbol::mode(3, 0), 33), GridTooCoarse);
  CHECK_THROWS_AS(toeplitz_matrix_alt(level, cs, TrigSymbol::mode(1, 0), 128), SymbolNotEven);
  CHECK_THROWS_AS(toeplitz_matrix(level, ComplexStructure{0.0, 0.0}, TrigSymbol::constant(1.0), 128),
                  DegenerateModulus);
  CHECK(default_grid(QuantizationLevel(2), {}) == 128);
  CHECK(default_grid(QuantizationLevel(30), {}) == 8 * 61);
}

TEST_CASE("quadrature does not depend on thread count") {
  const QuantizationLevel level(7);
  const ComplexStructure cs{0.1, 1.3};
  const TrigSymbol f = sample_symbol();
  setenv("TOEPLITZ_THREADS", "1", 1);
  const Eigen::MatrixXcd one = toeplitz_matrix(level, cs, f, 160).m;
  setenv("TOEPLITZ_THREADS", "5", 1);
  const Eigen::MatrixXcd many = toeplitz_matrix(level, cs, f, 160).m;
  unsetenv("TOEPLITZ_THREADS");
  CHECK(one == many);
  setenv("TOEPLITZ_THREADS", "3", 1);
  CHECK(thread_budget() <= 3);
  unsetenv("TOEPLITZ_THREADS");
}

TEST_CASE("projector kernel") {
  const ComplexStructure cs;
  for (int r : {5, 20}) {
    const QuantizationLevel level(r);
    const double tr = kernel_trace(level, cs, 4 * level.dim());
    CHECK(std::abs(tr - level.dim()) < 1e-6 * level.dim());
  }
  {
    const QuantizationLevel level(20);
    const double expected = level.dim() / (4 * kPi);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const ModuliPoint z{0.2 * i + 0.03, 0.2 * j + 0.07};
        CHECK(std::abs(projector_kernel_norm(level, cs, z, z) - expected) < 1e-2 * expected);
      }
  }
  // q-separation 1/2: norms shrink geometrically in r.
  double prev = 0.0;
  for (int r : {5, 10, 20}) {
    const QuantizationLevel level(r);
    const double v = projector_kernel_norm(level, cs, {0.11, 0.2}, {0.11, 0.7});
    if (prev > 0) CHECK(v / prev < std::exp(-1.0));
    prev = v;
  }
  // Independent evaluation from theta_point_evaluate frames.
  const QuantizationLevel level(4);
  const ComplexStructure cs2{0.35, 0.75};
  const ModuliPoint z{0.31, 0.62}, w{0.36, 0.58};
  cplx sum{};
  for (int l = 0; l < level.dim(); ++l)
    sum += theta_point_evaluate(level, cs2, l, z).frame * std::conj(theta_point_evaluate(level, cs2, l, w).frame);
  CHECK(std::abs(projector_kernel_norm(level, cs2, z, w) - std::abs(sum)) < 1e-14);
  CHECK_THROWS_AS(projector_kernel_norm(level, ComplexStructure{0, -1}, z, w), DegenerateModulus);
}

TEST_CASE("kernel gaussian check") {
  const ComplexStructure cs;
  const GaussianCheckReport rep = kernel_gaussian_check({10, 20, 40}, cs, {{0.0, 0.0}, {0.05, 0.0}, {0.3, 0.3}});
  REQUIRE(rep.entries.size() == 9);
  std::vector<double> shifted;
  for (const auto& e : rep.entries) {
    if (e.dp == 0.3) {
      CHECK_FALSE(e.in_neighborhood);
      continue;
    }
    CHECK(e.in_neighborhood);
    if (e.dp == 0.0 && e.r == 20) CHECK(e.max_rel_error < 1e-3);
    if (e.dp == 0.05) shifted.push_back(e.max_rel_error);
  }
  REQUIRE(shifted.size() == 3);
  CHECK(shifted[1] < shifted[0]);
  CHECK(shifted[2] < shifted[1]);
  CHECK(rep.rows().size() == 6);

  // Double-precision model agrees with the kernel to rounding at moderate offsets.
  const QuantizationLevel level(8);
  const ComplexStructure cs2{0.25, 1.1};
  const double exact = projector_kernel_norm(level, cs2, {0.4, 0.4}, {0.37, 0.43});
  CHECK(std::abs(exact - kernel_gaussian_model(level, cs2, 0.03, -0.03)) < 1e-10 * exact);
}

TEST_CASE("kernel decay check") {
  const ComplexStructure cs;
  const DecayReport far = kernel_decay_check({5, 10, 20, 40}, cs, 0.5);
  CHECK(far.slope < -0.5);
  const DecayReport mid = kernel_decay_check({5, 10, 20, 40}, cs, 0.25);
  CHECK(mid.slope < 0.0);
  CHECK(mid.slope > far.slope);
  CHECK(far.rows().size() == 5);
  CHECK_THROWS_AS(kernel_decay_check({5, 10, 20}, cs, 0.05), DomainError);
  CHECK_THROWS_AS(kernel_decay_check({5, 10}, cs, 0.3), DomainError);
  CHECK_THROWS_AS(kernel_decay_check({10, 5, 20}, cs, 0.3), DomainError);
}

TEST_CASE("operator norm") {
  CHECK(std::abs(operator_norm(identity(QuantizationLevel(6), Basis::Alternating)) - 1.0) < 1e-12);
  for (int r : {3, 8}) {
    const QuantizationLevel level(r);
    const int n = level.dim();
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    double expected = 0.0;
    for (int l = 0; l < n; ++l) {
      d(l, l) = -2 * std::cos(2 * kPi * l / n);
      expected = std::max(expected, 2 * std::abs(std::cos(2 * kPi * l / n)));
    }
    CHECK(std::abs(operator_norm(d) - expected) < 1e-12);
    CHECK(std::abs(operator_norm(translation_matrix(level, {2, -3})) - 1.0) < 1e-10);
  }
}

TEST_CASE("norm limit") {
  const ComplexStructure cs;
  const NormLimitReport f10 = norm_limit_check(cs, TrigSymbol::curve({1, 0}), {10, 20, 40, 50});
  CHECK(std::abs(f10.sup - 2.0) < 1e-12);
  CHECK(f10.entries.back().gap < 0.1);
  for (std::size_t i = 1; i < f10.entries.size(); ++i) CHECK(f10.entries[i].gap < f10.entries[i - 1].gap);

  const NormLimitReport one = norm_limit_check(cs, TrigSymbol::constant(1.0), {3, 7});
  for (const auto& e : one.entries) CHECK(e.gap < 1e-8);

  const TrigSymbol sum = TrigSymbol::curve({1, 0}) + TrigSymbol::curve({0, 1});
  const NormLimitReport s = norm_limit_check(cs, sum, {10, 20, 40});
  CHECK(std::abs(s.sup - 4.0) < 1e-9);
  CHECK(s.entries[1].gap < s.entries[0].gap);
  CHECK(s.entries[2].gap < s.entries[1].gap);

  CHECK_THROWS_AS(norm_limit_check(cs, TrigSymbol::mode(1, 0) + TrigSymbol::mode(-1, 0, {0, 1}), {3}),
                  DomainError);
  const TrigSymbol odd = TrigSymbol::mode(1, 0, {0, 1}) + TrigSymbol::mode(-1, 0, {0, -1});
  CHECK_THROWS_AS(norm_limit_check(cs, odd, {3}), SymbolNotEven);
}

TEST_CASE("symbol sup refinement") {
  // Maximum of |cos(2 pi * 3.3 q)|-like shapes off the grid: use a tilted mode pair.
  const TrigSymbol f = TrigSymbol::curve({7, 3}) + TrigSymbol::curve({1, 0});
  double dense = 0.0;
  for (int i = 0; i < 2048; ++i)
    for (int j = 0; j < 2048; ++j) dense = std::max(dense, std::abs(f.evaluate(i / 2048.0, j / 2048.0)));
  CHECK(symbol_sup(f) >= dense - 1e-6);
  CHECK(symbol_sup(f) <= 4.0 + 1e-12);
}

TEST_CASE("symbol residual") {
  const ComplexStructure cs;
  for (LatticeVector v : {LatticeVector{1, 0}, LatticeVector{0, 1}, LatticeVector{1, 1}}) {
    const std::vector<double> res = symbol_residual({5, 10, 20, 40}, cs, v);
    for (std::size_t i = 1; i < res.size(); ++i) CHECK(res[i] < res[i - 1]);
    CHECK(res[1] / res[2] >= 1.6);
    CHECK(res[1] / res[2] <= 2.4);
    CHECK(res[2] / res[3] >= 1.6);
    CHECK(res[2] / res[3] <= 2.4);
  }
  for (double x : symbol_residual({3, 9}, cs, {0, 0})) CHECK(x < 1e-12);
  CHECK_THROWS_AS(symbol_residual({10, 5}, cs, {1, 0}), DomainError);
}

TEST_CASE("csv rows") {
  const std::vector<ReportRow> rows = {{10, "gap", 0.5}, {20, "gap", 0.25}};
  CHECK(rows_to_csv(rows) == "r,quantity,value\n10,gap,0.5\n20,gap,0.25\n");
}
