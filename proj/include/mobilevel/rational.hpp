#pragma once

// Exact rational scalars and the small dense linear algebra used by the
// polyhedral code (row reduction, rank, null spaces).

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mobilevel {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using QVec = std::vector<Rational>;
using QMat = std::vector<QVec>;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses "3", "-3/7" or a finite decimal such as "0.25" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw InvalidInput("empty rational literal");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Integer num = parse_rational(s.substr(0, slash)).convert_to<Integer>();
      Integer den = parse_rational(s.substr(slash + 1)).convert_to<Integer>();
      if (den == 0) throw InvalidInput("zero denominator in '" + s + "'");
      return Rational(num, den);
    }
    auto exp_pos = s.find_first_of("eE");
    std::string mantissa = s.substr(0, exp_pos);
    long exponent = exp_pos == std::string::npos ? 0 : std::stol(s.substr(exp_pos + 1));
    Integer den = 1;
    if (auto dot = mantissa.find('.'); dot != std::string::npos) {
      std::size_t frac = mantissa.size() - dot - 1;
      mantissa.erase(dot, 1);
      for (std::size_t i = 0; i < frac; ++i) den *= 10;
    }
    if (mantissa.empty() || mantissa == "-" || mantissa == "+") throw InvalidInput("bad rational literal '" + s + "'");
    bool neg = mantissa.front() == '-';
    if (mantissa.front() == '+' || neg) mantissa.erase(0, 1);
    // Leading zeros would make the integer parser read octal.
    mantissa.erase(0, std::min(mantissa.find_first_not_of('0'), mantissa.size() - 1));
    if (mantissa.empty() || !std::all_of(mantissa.begin(), mantissa.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw InvalidInput("bad rational literal '" + s + "'");
    if (neg) mantissa.insert(0, 1, '-');
    Rational value(Integer(mantissa), den);
    Rational ten = 10;
    for (long i = 0; i < std::labs(exponent); ++i) value = exponent > 0 ? value * ten : value / ten;
    return value;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidInput("bad rational literal '" + s + "'");
  }
}

/// Exact conversion of a finite double (every double is a dyadic rational).
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw InvalidInput("non-finite value cannot be made rational");
  return Rational(v);
}

inline std::string to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline std::vector<double> to_double(const QVec& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](const Rational& q) { return to_double(q); });
  return out;
}

inline Rational dot(const QVec& a, const QVec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline bool is_zero(const QVec& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& q) { return q == 0; });
}

inline QVec negate(QVec v) {
  for (auto& q : v) q = -q;
  return v;
}

inline QVec unit_vector(std::size_t dim, std::size_t i) {
  QVec e(dim, Rational(0));
  e[i] = 1;
  return e;
}

/// Scales a nonzero vector to the unique primitive integer vector on its ray.
inline QVec primitive(const QVec& v) {
  Integer l = 1;
  for (const auto& q : v) l = boost::multiprecision::lcm(l, Integer(denominator(q)));
  std::vector<Integer> ints;
  ints.reserve(v.size());
  Integer g = 0;
  for (const auto& q : v) {
    Integer k = numerator(q) * (l / denominator(q));
    g = boost::multiprecision::gcd(g, k);
    ints.push_back(k);
  }
  QVec out(v.size());
  if (g == 0) return v;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rational(ints[i] / abs(g));
  return out;
}

/// Reduced row echelon form in place, pivoting only on the first `cols`
/// columns (trailing columns ride along as augmented data); returns pivot columns.
inline std::vector<std::size_t> rref(QMat& m, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < m.size(); ++c) {
    std::size_t p = row;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[row]);
    Rational inv = 1 / m[row][c];
    for (auto& q : m[row]) q *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][c] == 0) continue;
      Rational f = m[r][c];
      for (std::size_t k = 0; k < m[r].size(); ++k) m[r][k] -= f * m[row][k];
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

inline std::size_t rank(QMat m, std::size_t cols) { return rref(m, cols).size(); }

/// Basis of {v : m v = 0}, one vector per free column.
inline QMat null_space(QMat m, std::size_t cols) {
  auto pivots = rref(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : pivots) is_pivot[p] = true;
  QMat basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    QVec v(cols, Rational(0));
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m[r][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Solves the square system m x = rhs; returns false when m is singular.
inline bool solve_square(QMat m, QVec rhs, QVec& x) {
  const std::size_t n = rhs.size();
  for (std::size_t i = 0; i < n; ++i) m[i].push_back(rhs[i]);
  auto piv = rref(m, n);
  if (piv.size() < n) return false;
  x.assign(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n];
  return true;
}

}  // namespace mobilevel
