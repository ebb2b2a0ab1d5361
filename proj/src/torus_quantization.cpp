#include "so3bt/torus_quantization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "so3bt/detail/theta_series.hpp"
#include "so3bt/parallel.hpp"

namespace so3bt {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same_shape(const OperatorMatrix& x, const OperatorMatrix& y) {
  if (x.basis != y.basis || x.m.rows() != y.m.rows()) {
    throw DomainError("operator matrices live on different spaces");
  }
}

}  // namespace

QuantizationLevel::QuantizationLevel(int r) : r_(r) {
  if (r < 1) throw DomainError("level r must be >= 1, got " + std::to_string(r));
  const int two_n = 2 * dim();
  a_powers_.resize(two_n);
  for (int k = 0; k < two_n; ++k) {
    const double angle = kPi * k / dim();
    a_powers_[k] = {std::cos(angle), std::sin(angle)};
  }
}

cplx QuantizationLevel::a_power(std::int64_t k) const {
  const std::int64_t two_n = 2 * dim();
  std::int64_t idx = k % two_n;
  if (idx < 0) idx += two_n;
  return a_powers_[static_cast<std::size_t>(idx)];
}

int QuantizationLevel::wrap(std::int64_t l) const {
  std::int64_t idx = l % dim();
  if (idx < 0) idx += dim();
  return static_cast<int>(idx);
}

void ComplexStructure::validate() const {
  if (!(im > 0.0) || !std::isfinite(im) || !std::isfinite(re)) {
    throw DegenerateModulus("Im(tau) must be positive, got " + std::to_string(im));
  }
}

ModuliPoint ModuliPoint::canonical() const {
  auto frac = [](double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
  };
  return {frac(p), frac(q)};
}

OperatorMatrix operator*(const OperatorMatrix& x, const OperatorMatrix& y) {
  require_same_shape(x, y);
  return {x.basis, x.m * y.m};
}

OperatorMatrix operator+(const OperatorMatrix& x, const OperatorMatrix& y) {
  require_same_shape(x, y);
  return {x.basis, x.m + y.m};
}

OperatorMatrix operator-(const OperatorMatrix& x, const OperatorMatrix& y) {
  require_same_shape(x, y);
  return {x.basis, x.m - y.m};
}

OperatorMatrix operator*(cplx s, const OperatorMatrix& x) { return {x.basis, s * x.m}; }

OperatorMatrix identity(const QuantizationLevel& level, Basis basis) {
  const int n = basis == Basis::Full ? level.dim() : level.alt_dim();
  return {basis, Eigen::MatrixXcd::Identity(n, n)};
}

Eigen::VectorXcd apply(const OperatorMatrix& t, const Eigen::VectorXcd& v) {
  if (v.size() != t.m.rows()) throw DomainError("vector size does not match operator");
  return t.m.transpose() * v;
}

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

OperatorMatrix translation_matrix(const QuantizationLevel& level, LatticeVector v) {
  const int n = level.dim();
  OperatorMatrix t{Basis::Full, Eigen::MatrixXcd::Zero(n, n)};
  // Row l: T(Psi_l) = A^{2 a l + a b} Psi_{l+b}.
  const std::int64_t a = v.a;
  const std::int64_t b = v.b;
  for (int l = 0; l < n; ++l) {
    t.m(l, level.wrap(l + b)) = level.a_power(2 * a * l + a * b);
  }
  return t;
}

OperatorMatrix curve_operator_full(const QuantizationLevel& level, LatticeVector v) {
  OperatorMatrix c = translation_matrix(level, v) + translation_matrix(level, -v);
  c.m = -c.m;
  return c;
}

Eigen::MatrixXd alternating_isometry(const QuantizationLevel& level) {
  const int n = level.dim();
  const int r = level.r();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, r);
  const double h = 1.0 / std::sqrt(2.0);
  for (int l = 1; l <= r; ++l) {
    s(l, l - 1) = h;
    s(n - l, l - 1) = -h;
  }
  return s;
}

OperatorMatrix restrict_alternating(const QuantizationLevel& level, const OperatorMatrix& t, double scale) {
  if (t.basis != Basis::Full || t.m.rows() != level.dim()) {
    throw DomainError("restrict_alternating expects a full-basis operator of size N");
  }
  const Eigen::MatrixXcd s = alternating_isometry(level).cast<cplx>();
  const Eigen::MatrixXcd proj_out =
      Eigen::MatrixXcd::Identity(level.dim(), level.dim()) - s * s.adjoint();
  scale = std::max({max_abs(t.m), scale, 1e-300});
  // Row convention: rows of S^T T must stay inside H^alt; the column reading of
  // the same condition is (I - S S^T) T S = 0. Parity-commuting operators pass both.
  const double leak_rows = max_abs(s.adjoint() * t.m * proj_out);
  const double leak_cols = max_abs(proj_out * t.m * s);
  if (std::max(leak_rows, leak_cols) > 1e-10 * scale) {
    throw SubspaceNotPreserved("operator does not preserve the alternating subspace (leak " +
                               std::to_string(std::max(leak_rows, leak_cols) / scale) + ")");
  }
  return {Basis::Alternating, s.adjoint() * t.m * s};
}

int theta_truncation(const QuantizationLevel& level, const ComplexStructure& cs, double tol) {
  cs.validate();
  if (!(tol > 0.0)) throw DomainError("series tolerance must be positive");
  return detail::theta_terms(level.dim(), cs.im, tol);
}

ThetaSample theta_point_evaluate(const QuantizationLevel& level, const ComplexStructure& cs,
                                 std::int64_t l, ModuliPoint pt, double tol) {
  const int terms = theta_truncation(level, cs, tol);
  const int n = level.dim();
  const auto f = detail::theta_frame<double>(n, cs.re, cs.im, l, pt.p, pt.q, terms);
  const cplx frame{f.re, f.im};
  // frame = value * exp(-pi b N q^2) * (b / 2pi)^{1/4}
  const double weight =
      std::exp(-kPi * cs.im * n * pt.q * pt.q) * std::pow(cs.im / (2.0 * kPi), 0.25);
  return {frame / weight, std::norm(frame), frame};
}

OperatorMatrix gram_matrix(const QuantizationLevel& level, const ComplexStructure& cs, int grid_n) {
  cs.validate();
  if (grid_n < 4 * level.dim()) {
    throw GridTooCoarse("grid_n = " + std::to_string(grid_n) + " < 4N = " +
                        std::to_string(4 * level.dim()));
  }
  return {Basis::Full, section_quadrature(level, cs, {FourierMode{0, 0, 1.0}}, grid_n)};
}

Eigen::MatrixXcd section_quadrature(const QuantizationLevel& level, const ComplexStructure& cs,
                                    const std::vector<FourierMode>& modes, int grid_n) {
  cs.validate();
  const int n_dim = level.dim();
  const double nd = n_dim;
  const double b = cs.im;
  const double scale = std::sqrt(std::sqrt(nd * b / (8.0 * kPi * kPi)));
  // Gaussian factors below exp(-40) relative are dropped.
  const double half_width = std::sqrt(nd * 40.0 / (kPi * b)) + 1.0;

  // Rows of the q-grid are split into a fixed number of blocks, each summed in
  // order into its own matrix; blocks are then added in index order. The result
  // does not depend on how many threads ran.
  const int blocks = std::min(grid_n, 16);
  std::vector<Eigen::MatrixXcd> partial(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t blk) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n_dim, n_dim);
    std::vector<cplx> g;
    const int j_begin = static_cast<int>(static_cast<std::int64_t>(grid_n) * blk / blocks);
    const int j_end = static_cast<int>(static_cast<std::int64_t>(grid_n) * (blk + 1) / blocks);
    for (int j = j_begin; j < j_end; ++j) {
      const double q = static_cast<double>(j) / grid_n;
      const auto lo = static_cast<std::int64_t>(std::floor(-nd * q - half_width));
      const auto hi = static_cast<std::int64_t>(std::ceil(-nd * q + half_width));
      const auto count = static_cast<std::size_t>(hi - lo + 1);
      g.assign(count, cplx{});
      for (std::size_t i = 0; i < count; ++i) {
        const double n = static_cast<double>(lo + static_cast<std::int64_t>(i));
        const double d = n + nd * q;
        double turns = cs.re * (n * q + n * n / (2.0 * nd));
        turns -= std::floor(turns);
        g[i] = scale * std::exp(-kPi * b / nd * d * d) * std::polar(1.0, 2.0 * kPi * turns);
      }
      for (const FourierMode& mode : modes) {
        const cplx weight = mode.c * std::polar(1.0, -2.0 * kPi * mode.a * q);
        for (std::size_t i = 0; i < count; ++i) {
          const std::int64_t n = lo + static_cast<std::int64_t>(i);
          // Partner modes n' = n + b (mod grid_n) inside the window.
          const std::int64_t offset = ((n + mode.b - lo) % grid_n + grid_n) % grid_n;
          for (std::int64_t np = lo + offset; np <= hi; np += grid_n) {
            acc(level.wrap(n), level.wrap(np)) +=
                weight * std::conj(g[static_cast<std::size_t>(np - lo)]) * g[i];
          }
        }
      }
    }
    partial[blk] = std::move(acc);
  });
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n_dim, n_dim);
  for (const auto& m : partial) out += m;
  out *= 4.0 * kPi / grid_n;
  return out;
}

}  // namespace so3bt
