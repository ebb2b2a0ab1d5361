#include "so3bt/knot_theory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "json.hpp"
#include "so3bt/parallel.hpp"

#ifndef SO3BT_DEFAULT_DATA_DIR
#define SO3BT_DEFAULT_DATA_DIR "data"
#endif

namespace so3bt {

namespace {

constexpr double kPi = std::numbers::pi;

std::int64_t add_checked(std::int64_t x, std::int64_t y) {
  std::int64_t out;
  if (__builtin_add_overflow(x, y, &out)) throw std::overflow_error("LaurentML coefficient overflow");
  return out;
}

std::int64_t mul_checked(std::int64_t x, std::int64_t y) {
  std::int64_t out;
  if (__builtin_mul_overflow(x, y, &out)) throw std::overflow_error("LaurentML coefficient overflow");
  return out;
}

// Recursive-descent reader for the small polynomial grammar of LaurentML::parse.
class PolyParser {
 public:
  explicit PolyParser(const std::string& text) {
    bool gap = false;
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        gap = !s_.empty();
        continue;
      }
      // Whitespace may not split a number.
      if (gap && std::isdigit(static_cast<unsigned char>(c)) && std::isdigit(static_cast<unsigned char>(s_.back()))) {
        throw DomainError("cannot parse polynomial '" + text + "': digits separated by whitespace");
      }
      gap = false;
      s_ += c;
    }
  }

  LaurentML parse() {
    if (s_.empty()) fail("empty polynomial");
    LaurentML out;
    bool first = true;
    while (pos_ < s_.size()) {
      std::int64_t sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
      } else if (!first) {
        fail("expected + or -");
      }
      first = false;
      out += term(sign);
    }
    return out;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& why) const {
    throw DomainError("cannot parse polynomial '" + s_ + "': " + why + " at position " +
                      std::to_string(pos_));
  }

  std::int64_t integer() {
    const std::size_t start = pos_;
    if (peek() == '-' || peek() == '+') ++pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (pos_ == start || !std::isdigit(static_cast<unsigned char>(s_[pos_ - 1]))) fail("expected integer");
    try {
      return std::stoll(s_.substr(start, pos_ - start));
    } catch (const std::out_of_range&) {
      fail("integer out of range");
    }
  }

  LaurentML term(std::int64_t sign) {
    std::int64_t coeff = sign;
    int alpha = 0;
    int beta = 0;
    bool any = false;
    while (true) {
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        coeff = mul_checked(coeff, integer());
      } else if (c == 'm' || c == 'l') {
        ++pos_;
        int e = 1;
        if (peek() == '^') {
          ++pos_;
          if (peek() == '(') {
            ++pos_;
            e = static_cast<int>(integer());
            if (peek() != ')') fail("expected )");
            ++pos_;
          } else {
            e = static_cast<int>(integer());
          }
        }
        (c == 'm' ? alpha : beta) += e;
      } else {
        fail("expected factor");
      }
      any = true;
      if (peek() == '*') {
        ++pos_;
        continue;
      }
      const char nxt = peek();
      if (nxt == 'm' || nxt == 'l') continue;  // implicit product such as "2m"
      break;
    }
    if (!any) fail("empty term");
    return LaurentML::monomial(coeff, alpha, beta);
  }

  std::string s_;
  std::size_t pos_ = 0;
};

// Powers of a, either exact from the level table or by std::pow.
struct GenericPow {
  cplx a;
  cplx operator()(std::int64_t e) const { return std::pow(a, static_cast<int>(e)); }
};

struct LevelPow {
  const QuantizationLevel* level;
  bool mirror;
  cplx operator()(std::int64_t e) const { return level->a_power(mirror ? -e : e); }
};

// a = exp(i pi / 2N): reduce mod 4N, then one polar call.
struct HalfLevelPow {
  std::int64_t n4;
  bool mirror;
  cplx operator()(std::int64_t e) const {
    std::int64_t k = (mirror ? -e : e) % n4;
    if (k < 0) k += n4;
    return std::polar(1.0, 2 * kPi * static_cast<double>(k) / static_cast<double>(n4));
  }
};

template <typename Pow>
cplx figure_eight_jones(int n, const Pow& a) {
  // sum_{k<n} prod_{j<=k} (q^n + q^-n - q^j - q^-j), q = a^4
  cplx sum = 1.0;
  cplx prod = 1.0;
  const cplx qn = a(4 * n) + a(-4 * n);
  for (int k = 1; k < n; ++k) {
    prod *= qn - a(4 * k) - a(-4 * k);
    sum += prod;
  }
  return sum;
}

// Figure-eight at a level root q = exp(2 pi i s / N), s = 2 or 1. Every factor
// 2cos(2 pi s n/N) - 2cos(2 pi s k/N) is real; partial products reach ~10^{0.15 r}
// before cancelling to O(1), so the sum runs in Real.
template <typename Real>
double figure_eight_real(int n, int big_n, int s) {
  const Real two_pi = 2 * boost::math::constants::pi<Real>();
  auto c2 = [&](int k) { return 2 * cos(two_pi * ((static_cast<std::int64_t>(s) * k) % big_n) / big_n); };
  const Real qn = c2(n);
  Real sum = 1;
  Real prod = 1;
  for (int k = 1; k < n; ++k) {
    prod *= qn - c2(k);
    sum += prod;
  }
  return static_cast<double>(sum);
}

double figure_eight_level(int n, int big_n, int s) {
  namespace mp = boost::multiprecision;
  if (big_n <= 801) return figure_eight_real<mp::cpp_bin_float_100>(n, big_n, s);
  if (big_n <= 3001) return figure_eight_real<mp::number<mp::cpp_bin_float<250>, mp::et_off>>(n, big_n, s);
  return figure_eight_real<mp::number<mp::cpp_bin_float<1000>, mp::et_off>>(n, big_n, s);
}

template <typename Pow>
cplx trefoil_jones(int n, const Pow& a) {
  // Torus-knot closed form with k = j/2:
  //   q^{6(1-n^2)/4} / (q^{n/2} - q^{-n/2})
  //     * sum_k (q^{6k^2 - 5k + 1/2} - q^{6k^2 + k - 1/2})
  cplx sum = 0.0;
  for (std::int64_t j = -(n - 1); j <= n - 1; j += 2) {
    sum += a(6 * j * j - 10 * j + 2) - a(6 * j * j + 2 * j - 2);
  }
  const std::int64_t nn = n;
  return a(6 * (1 - nn * nn)) * sum / (a(2 * nn) - a(-2 * nn));
}

template <typename Pow>
cplx jones_dispatch(Knot k, int n, const Pow& a) {
  switch (k) {
    case Knot::Unknot:
      return 1.0;
    case Knot::Trefoil:
      return trefoil_jones(n, a);
    case Knot::FigureEight:
      return figure_eight_jones(n, a);
  }
  throw UnknownKnot("unknown knot");
}

bool increasing(const std::vector<int>& levels) {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) return false;
  }
  return true;
}

}  // namespace

// ---- LaurentML ----

LaurentML::LaurentML(std::int64_t constant) { add_term(0, 0, constant); }

LaurentML LaurentML::monomial(std::int64_t coeff, int alpha, int beta) {
  LaurentML p;
  p.add_term(alpha, beta, coeff);
  return p;
}

LaurentML LaurentML::parse(const std::string& text) { return PolyParser(text).parse(); }

void LaurentML::add_term(int alpha, int beta, std::int64_t coeff) {
  if (coeff == 0) return;
  auto [it, inserted] = terms_.try_emplace({alpha, beta}, coeff);
  if (inserted) return;
  it->second = add_checked(it->second, coeff);
  if (it->second == 0) terms_.erase(it);
}

LaurentML& LaurentML::operator+=(const LaurentML& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
  return *this;
}

LaurentML& LaurentML::operator-=(const LaurentML& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, mul_checked(c, -1));
  return *this;
}

LaurentML operator*(const LaurentML& x, const LaurentML& y) {
  LaurentML out;
  for (const auto& [k1, c1] : x.terms_)
    for (const auto& [k2, c2] : y.terms_)
      out.add_term(k1.first + k2.first, k1.second + k2.second, mul_checked(c1, c2));
  return out;
}

LaurentML LaurentML::inverted() const {
  LaurentML out;
  for (const auto& [k, c] : terms_) out.add_term(-k.first, -k.second, c);
  return out;
}

cplx LaurentML::evaluate(cplx m, cplx l) const {
  cplx sum{};
  for (const auto& [k, c] : terms_) {
    sum += static_cast<double>(c) * std::pow(m, k.first) * std::pow(l, k.second);
  }
  return sum;
}

std::int64_t LaurentML::content() const {
  std::int64_t g = 0;
  for (const auto& [k, c] : terms_) g = std::gcd(g, c);
  return g;
}

std::string LaurentML::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto [alpha, beta] = it->first;
    const std::int64_t c = it->second;
    os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    first = false;
    std::vector<std::string> factors;
    const std::int64_t mag = c < 0 ? -c : c;
    if (mag != 1 || (alpha == 0 && beta == 0)) factors.push_back(std::to_string(mag));
    for (auto [var, e] : {std::pair{'m', alpha}, std::pair{'l', beta}}) {
      if (e == 0) continue;
      factors.push_back(e == 1 ? std::string(1, var) : std::string(1, var) + "^" + std::to_string(e));
    }
    for (std::size_t i = 0; i < factors.size(); ++i) os << (i ? "*" : "") << factors[i];
  }
  return os.str();
}

// ---- presets ----

Knot knot_from_name(const std::string& name) {
  if (name == "unknot") return Knot::Unknot;
  if (name == "trefoil") return Knot::Trefoil;
  if (name == "figure_eight") return Knot::FigureEight;
  throw UnknownKnot("unknown knot '" + name + "' (expected unknot, trefoil, figure_eight)");
}

std::string knot_name(Knot k) {
  switch (k) {
    case Knot::Unknot:
      return "unknot";
    case Knot::Trefoil:
      return "trefoil";
    case Knot::FigureEight:
      return "figure_eight";
  }
  throw UnknownKnot("unknown knot");
}

std::string data_directory() {
  if (const char* env = std::getenv("SO3BT_DATA_DIR"); env && *env) return env;
  return SO3BT_DEFAULT_DATA_DIR;
}

std::map<std::string, LaurentML> load_apolynomial_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open A-polynomial table " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("version", 0) != 1) throw DomainError("unsupported A-polynomial table version in " + path);
  std::map<std::string, LaurentML> out;
  for (const auto& entry : j.at("knots")) {
    LaurentML p;
    for (const auto& mono : entry.at("monomials")) {
      p.add_term(mono.at(0).get<int>(), mono.at(1).get<int>(), mono.at(2).get<std::int64_t>());
    }
    out[entry.at("knot").get<std::string>()] = p;
  }
  return out;
}

LaurentML builtin_apolynomial(Knot k, bool include_abelian) {
  const auto table = load_apolynomial_table(data_directory() + "/apolynomials.json");
  const auto it = table.find(knot_name(k));
  if (it == table.end()) throw UnknownKnot("no A-polynomial stored for " + knot_name(k));
  if (k == Knot::Unknot || !include_abelian) return it->second;
  return (LaurentML::l() - 1) * it->second;
}

LaurentML builtin_apolynomial(const std::string& name, bool include_abelian) {
  return builtin_apolynomial(knot_from_name(name), include_abelian);
}

TrigSymbol apoly_to_symbol(const LaurentML& p) {
  TrigSymbol f;
  for (const auto& [k, c] : p.terms()) {
    f.add_term(k.first, -k.second, -static_cast<double>(c));
    f.add_term(-k.first, k.second, -static_cast<double>(c));
  }
  return f;
}

// ---- colored Jones ----

cplx colored_jones_at(Knot k, int n, cplx a, bool mirror) {
  if (n < 1) throw ColorOutOfRange("color must be >= 1, got " + std::to_string(n));
  return jones_dispatch(k, n, GenericPow{mirror ? 1.0 / a : a});
}

cplx colored_jones(Knot k, int n, const QuantizationLevel& level, bool mirror, QRoot root) {
  if (n < 1 || n > level.r()) {
    throw ColorOutOfRange("color " + std::to_string(n) + " outside 1.." + std::to_string(level.r()));
  }
  if (k == Knot::FigureEight) return figure_eight_level(n, level.dim(), root == QRoot::A2 ? 1 : 2);
  if (root == QRoot::A2) return jones_dispatch(k, n, HalfLevelPow{4 * static_cast<std::int64_t>(level.dim()), mirror});
  return jones_dispatch(k, n, LevelPow{&level, mirror});
}

cplx trefoil_cyclotomic(int n, cplx a) {
  if (n < 1) throw ColorOutOfRange("color must be >= 1");
  const GenericPow p{a};
  const cplx qn = p(4 * n) + p(-4 * n);
  cplx sum = 0.0;
  cplx prod = 1.0;
  for (int k = 0; k < n; ++k) {
    if (k > 0) prod *= qn - p(4 * k) - p(-4 * k);
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    sum += sign * p(-2 * static_cast<std::int64_t>(k) * (k + 3)) * prod;
  }
  return sum;
}

// ---- knot states ----

KnotState knot_state(Knot k, int r, const KnotStateOptions& opts) {
  const QuantizationLevel level(r);
  const double n_dim = level.dim();
  const double s1 = std::sin(2 * kPi / n_dim);
  const double eta = opts.tqft_normalization ? 2 * s1 / std::sqrt(n_dim) : 1.0;
  KnotState state{r, Eigen::VectorXcd(r)};
  for (int n = 1; n <= r; ++n) {
    const double w = opts.weighting == Weighting::QuantumDimension ? std::sin(2 * kPi * n / n_dim) / s1 : 1.0;
    state.coords(n - 1) = eta * w * colored_jones(k, n, level, opts.mirror, opts.root);
  }
  return state;
}

double aj_residual(const LaurentML& p, const KnotState& state, const ComplexStructure& cs, int grid_n) {
  if (state.r < 2) throw DomainError("aj_residual needs r >= 2");
  const QuantizationLevel level(state.r);
  const TrigSymbol f = apoly_to_symbol(p);
  const int grid = grid_n > 0 ? grid_n : default_grid(level, f);
  const OperatorMatrix t = toeplitz_matrix_alt(level, cs, f, grid);
  const double denom = operator_norm(t) * state.coords.norm();
  if (!(denom > 0.0)) throw DomainError("aj_residual: zero operator or zero state");
  return apply(t, state.coords).norm() / denom;
}

double aj_residual(Knot k, int r, const ComplexStructure& cs, int grid_n, const KnotStateOptions& opts,
                   bool include_abelian) {
  return aj_residual(builtin_apolynomial(k, include_abelian), knot_state(k, r, opts), cs, grid_n);
}

std::vector<double> volume_sequence(Knot k, const std::vector<int>& levels, const KnotStateOptions& opts) {
  if (!increasing(levels)) throw DomainError("levels must be increasing");
  std::vector<double> out(levels.size());
  parallel_for(levels.size(), [&](std::size_t i) {
    const KnotState s = knot_state(k, levels[i], opts);
    out[i] = kPi / levels[i] * std::log(s.coords.squaredNorm());
  });
  return out;
}

// ---- volume and Mahler ----

double clausen_cl2(double theta) {
  // Cl_2(t) = t - t log|t| + sum_{n>=1} |B_{2n}| t^{2n+1} / (2n (2n+1)!), |t| < 2 pi
  if (!(std::abs(theta) < 2 * kPi)) throw DomainError("clausen_cl2 series needs |theta| < 2 pi");
  if (theta == 0.0) return 0.0;
  double sum = theta - theta * std::log(std::abs(theta));
  for (int n = 1; n < 80; ++n) {
    const double term = std::abs(boost::math::bernoulli_b2n<double>(n)) * std::pow(theta, 2 * n + 1) /
                        (2.0 * n * boost::math::factorial<double>(2 * n + 1));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double simplicial_volume_oracle(Knot k) {
  switch (k) {
    case Knot::Unknot:
    case Knot::Trefoil:
      return 0.0;
    case Knot::FigureEight:
      // 2 Im Li_2(e^{i pi/3}) = 2 Cl_2(pi/3)
      return 2.0 * clausen_cl2(kPi / 3.0);
  }
  throw UnknownKnot("unknown knot");
}

double simplicial_volume_oracle(const std::string& name) { return simplicial_volume_oracle(knot_from_name(name)); }

MahlerResult mahler_measure(const LaurentML& p, int grid_n, int refinements) {
  if (p.is_zero()) throw DegeneratePolynomial("Mahler measure of the zero polynomial");
  if (grid_n < 64) throw DomainError("mahler_measure needs grid_n >= 64");
  if (refinements < 0) throw DomainError("refinements must be >= 0");
  MahlerResult result;
  for (int level = 0, n = grid_n; level <= refinements; ++level, n *= 2) {
    const double h = 1.0 / n;
    std::vector<double> rows(static_cast<std::size_t>(n));
    parallel_for(rows.size(), [&](std::size_t i) {
      const double theta = (static_cast<double>(i) + 0.5) * h;
      const cplx m = std::polar(1.0, 2 * kPi * theta);
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        const double phi = (j + 0.5) * h;
        double v = std::abs(p.evaluate(m, std::polar(1.0, 2 * kPi * phi)));
        if (v < 1e-14) {
          v = std::abs(p.evaluate(std::polar(1.0, 2 * kPi * (theta + 0.5 * h)),
                                  std::polar(1.0, 2 * kPi * (phi + 0.5 * h))));
        }
        s += std::log(v);
      }
      rows[i] = s;
    });
    double total = 0.0;
    for (double s : rows) total += s;
    result.raw.push_back(total * h * h);
  }
  // Richardson table for an h^2 leading error.
  std::vector<double> t = result.raw;
  double factor = 4.0;
  for (std::size_t k = 1; k < t.size(); ++k, factor *= 4.0) {
    for (std::size_t i = t.size() - 1; i >= k; --i) {
      t[i] = (factor * t[i] - t[i - 1]) / (factor - 1.0);
    }
  }
  result.value = t.back();
  return result;
}

}  // namespace so3bt
