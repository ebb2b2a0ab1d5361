#pragma once

// Level-r quantization of the torus V/Lambda with half-form correction.
//
// The full space H_{r+1/2} has the orthonormal theta basis Psi_l, l in Z/NZ,
// N = 2r+1. The SO(3) space H^alt is spanned by Phi_l = (Psi_l - Psi_{-l})/sqrt(2),
// l = 1..r.
//
// Matrix convention: row k of an OperatorMatrix holds the coordinates of
// T(e_k). A product X*Y therefore means "apply X, then Y". This is the order
// in which the curve-operator algebra multiplies (T(g1) * T(g2) = T(g2) o T(g1)),
// and it is the convention in which
//     translation(c,d) * translation(a,b) = A^{ad-bc} translation(a+c, b+d).
// Use apply() to act on coordinate vectors.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "so3bt/errors.hpp"

namespace so3bt {

using cplx = std::complex<double>;

// Level r >= 1. Fixes N = 2r+1 and the root A = exp(i pi / N), q = A^2.
class QuantizationLevel {
 public:
  explicit QuantizationLevel(int r);

  int r() const { return r_; }
  int dim() const { return 2 * r_ + 1; }
  int alt_dim() const { return r_; }

  // A^k for any integer k, looked up exactly from k mod 2N.
  cplx a_power(std::int64_t k) const;
  cplx A() const { return a_power(1); }
  cplx q() const { return a_power(2); }

  // Canonical representative of l in Z/NZ, in [0, N).
  int wrap(std::int64_t l) const;

 private:
  int r_;
  std::vector<cplx> a_powers_;  // A^k, k = 0..2N-1
};

// tau = re + i*im with im > 0.
struct ComplexStructure {
  double re = 0.0;
  double im = 1.0;

  static ComplexStructure square() { return {0.0, 1.0}; }
  // Throws DegenerateModulus if im <= 0.
  void validate() const;
};

// lambda_{a,b} = a*mu + b*lambda.
struct LatticeVector {
  int a = 0;
  int b = 0;

  LatticeVector operator-() const { return {-a, -b}; }
  LatticeVector operator+(LatticeVector o) const { return {a + o.a, b + o.b}; }
  bool operator==(const LatticeVector&) const = default;
};

// Point (p, q) on the moduli torus; coordinates are dual to (mu, lambda).
struct ModuliPoint {
  double p = 0.0;
  double q = 0.0;

  // Representative in [0,1)^2.
  ModuliPoint canonical() const;
  // Image under z -> -z.
  ModuliPoint involution() const { return ModuliPoint{-p, -q}.canonical(); }
};

enum class Basis { Full, Alternating };

struct OperatorMatrix {
  Basis basis = Basis::Full;
  Eigen::MatrixXcd m;

  Eigen::Index size() const { return m.rows(); }
};

// Composition in row convention: (x * y) applies x first.
OperatorMatrix operator*(const OperatorMatrix& x, const OperatorMatrix& y);
OperatorMatrix operator+(const OperatorMatrix& x, const OperatorMatrix& y);
OperatorMatrix operator-(const OperatorMatrix& x, const OperatorMatrix& y);
OperatorMatrix operator*(cplx s, const OperatorMatrix& x);

OperatorMatrix identity(const QuantizationLevel& level, Basis basis);

// Coordinates of T(v) for coordinate vector v.
Eigen::VectorXcd apply(const OperatorMatrix& t, const Eigen::VectorXcd& v);

// Largest absolute entry.
double max_abs(const Eigen::MatrixXcd& m);

// Matrix of T*_{lambda_{a,b}/N}: A^{-ab} L^b M^a with M = diag(exp(2 pi i l/N))
// and L the shift Psi_l -> Psi_{l+1}.
OperatorMatrix translation_matrix(const QuantizationLevel& level, LatticeVector v);

// Curve operator -(T*_{v/N} + T*_{-v/N}); Hermitian.
OperatorMatrix curve_operator_full(const QuantizationLevel& level, LatticeVector v);

// N x r isometry whose column l-1 is (e_l - e_{-l})/sqrt(2).
Eigen::MatrixXd alternating_isometry(const QuantizationLevel& level);

// Compression S^T T S onto H^alt. Throws SubspaceNotPreserved if T does not
// preserve H^alt to 1e-10 relative (max-entry norms). The leak is measured
// against max(max_abs(T), scale); pass the size of the summands when T is a
// sum that may cancel.
OperatorMatrix restrict_alternating(const QuantizationLevel& level, const OperatorMatrix& t,
                                    double scale = 0.0);

struct ThetaSample {
  // (N/4pi)^{1/4} * sum_m exp(2 pi i theta_{l,m}(z)), the holomorphic factor.
  cplx value;
  // h(Psi_l, Psi_l)(z): |value|^2 exp(-2 pi N b q^2) sqrt(b / 2pi).
  double pointwise_norm_sq;
  // value times the real metric weight, so |frame|^2 = pointwise_norm_sq.
  // Pointwise hermitian products at one point are conj(frame_k) * frame_l.
  cplx frame;
};

inline constexpr double kDefaultSeriesTol = 1e-15;

ThetaSample theta_point_evaluate(const QuantizationLevel& level, const ComplexStructure& cs,
                                 std::int64_t l, ModuliPoint pt, double tol = kDefaultSeriesTol);

// Number of series terms kept on each side of the dominant one.
int theta_truncation(const QuantizationLevel& level, const ComplexStructure& cs, double tol);

// Entry (k,l) = 4pi * trapezoid quadrature of h(Psi_k, Psi_l) on a grid_n^2 grid.
// Throws GridTooCoarse if grid_n < 4N.
OperatorMatrix gram_matrix(const QuantizationLevel& level, const ComplexStructure& cs, int grid_n);

// One Fourier mode exp(-2 pi i (a q - b p)) with coefficient c.
struct FourierMode {
  int a = 0;
  int b = 0;
  cplx c{1.0, 0.0};
};

// Row-convention matrix of the compressed multiplication operator:
// entry (k,l) = 4pi * trapezoid quadrature over [0,1)^2 of conj(Psi_l) f Psi_k
// (pointwise hermitian product), f = sum of the given modes.
//
// The p-direction trapezoid sum is evaluated through discrete orthogonality of
// the exponentials on the grid (aliases included), the q-direction sum directly.
// No grid-size check here; callers validate.
Eigen::MatrixXcd section_quadrature(const QuantizationLevel& level, const ComplexStructure& cs,
                                    const std::vector<FourierMode>& modes, int grid_n);

}  // namespace so3bt
