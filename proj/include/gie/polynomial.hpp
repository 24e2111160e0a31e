#pragma once

#include <Eigen/Dense>
#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <map>
#include <string>
#include <vector>

namespace gie {

using Rational = boost::multiprecision::cpp_rational;
using Exponent = std::array<int, 3>;

// graded lexicographic order: total degree first, then lexicographic
struct GrlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    int da = a[0] + a[1] + a[2], db = b[0] + b[1] + b[2];
    if (da != db) return da < db;
    return a < b;
  }
};

// Polynomial in s1, s2, s3 with exact rational coefficients. s stands for
// i*xi, so evaluation at a frequency is complex.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(const Rational& c);  // NOLINT: implicit constant
  Polynomial(int c) : Polynomial(Rational(c)) {}  // NOLINT
  static Polynomial monomial(const Exponent& e, const Rational& c = 1);
  static Polynomial variable(int k) { return monomial(unit(k)); }
  static Exponent unit(int k);

  const std::map<Exponent, Rational, GrlexLess>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // -1 for the zero polynomial
  Rational coefficient(const Exponent& e) const;
  Rational leading_coefficient() const;  // grlex-largest term
  Rational constant_term() const { return coefficient({0, 0, 0}); }
  bool is_constant() const { return degree() <= 0; }
  Polynomial derivative(int k) const;  // d/ds_k

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(const Rational& c);
  Polynomial operator-() const;
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

  std::complex<double> evaluate(const std::array<std::complex<double>, 3>& s) const;
  std::complex<double> at_frequency(const Eigen::Vector3d& xi) const;  // s = i xi
  std::string to_string() const;

 private:
  void add_term(const Exponent& e, const Rational& c);
  std::map<Exponent, Rational, GrlexLess> terms_;
};

Rational to_rational(double x);  // exact

// dense rational matrix
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols)) {}
  static QMatrix identity(int n);
  static QMatrix from_eigen(const Eigen::MatrixXd& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  bool is_zero_column(int j) const;

  friend QMatrix operator*(const QMatrix& a, const QMatrix& b);
  friend QMatrix operator-(const QMatrix& a, const QMatrix& b);
  friend bool operator==(const QMatrix& a, const QMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
  }

  Rational determinant() const;
  // exact inverse; returns false when singular
  bool inverse(QMatrix& out) const;
  Eigen::MatrixXd to_eigen() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Rational> a_;
};

class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols)) {}
  static PolyMatrix identity(int n);
  static PolyMatrix from_rational(const QMatrix& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Polynomial& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Polynomial& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }

  int degree() const;  // max entry degree, -1 if all zero
  bool is_zero() const;
  PolyMatrix block(int r0, int c0, int nr, int nc) const;

  friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b);
  friend PolyMatrix operator+(const PolyMatrix& a, const PolyMatrix& b);
  friend PolyMatrix operator-(const PolyMatrix& a, const PolyMatrix& b);
  friend PolyMatrix operator*(const Polynomial& p, const PolyMatrix& a);
  friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
  }

  Eigen::MatrixXcd evaluate(const std::array<std::complex<double>, 3>& s) const;
  Eigen::MatrixXcd at_frequency(const Eigen::Vector3d& xi) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Polynomial> a_;
};

// Floating-point copy of a polynomial for repeated evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);
  int degree() const { return degree_; }
  // pw[k][e] = s_k^e for e <= degree
  std::complex<double> evaluate(const std::vector<std::array<std::complex<double>, 3>>& pw) const;

 private:
  std::vector<std::pair<Exponent, double>> terms_;
  int degree_ = -1;
};

// s_k^e for s = i xi, e = 0..degree
std::vector<std::array<std::complex<double>, 3>> frequency_powers(const Eigen::Vector3d& xi, int degree);

// Laplace expansion; intended for small blocks
Polynomial determinant(const PolyMatrix& m);
PolyMatrix adjugate(const PolyMatrix& m);

}  // namespace gie
