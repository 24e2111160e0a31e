#include "gie/polynomial.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gie {

Polynomial::Polynomial(const Rational& c) {
  if (c != 0) terms_[{0, 0, 0}] = c;
}

Polynomial Polynomial::monomial(const Exponent& e, const Rational& c) {
  Polynomial p;
  p.add_term(e, c);
  return p;
}

Exponent Polynomial::unit(int k) {
  Exponent e{0, 0, 0};
  e[static_cast<std::size_t>(k)] = 1;
  return e;
}

void Polynomial::add_term(const Exponent& e, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second == 0) terms_.erase(it);
}

int Polynomial::degree() const {
  if (terms_.empty()) return -1;
  const auto& e = terms_.rbegin()->first;
  return e[0] + e[1] + e[2];
}

Rational Polynomial::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

Rational Polynomial::leading_coefficient() const {
  return terms_.empty() ? Rational(0) : terms_.rbegin()->second;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& kv : terms_) kv.second *= c;
  return *this;
}

Polynomial Polynomial::operator-() const {
  Polynomial p = *this;
  for (auto& kv : p.terms_) kv.second = -kv.second;
  return p;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial p;
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_)
      p.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
  return p;
}

Polynomial Polynomial::derivative(int k) const {
  Polynomial p;
  for (const auto& [e, c] : terms_) {
    int pk = e[static_cast<std::size_t>(k)];
    if (pk == 0) continue;
    Exponent f = e;
    f[static_cast<std::size_t>(k)] -= 1;
    p.add_term(f, c * pk);
  }
  return p;
}

std::complex<double> Polynomial::evaluate(const std::array<std::complex<double>, 3>& s) const {
  std::complex<double> acc = 0.0;
  for (const auto& [e, c] : terms_) {
    std::complex<double> t = static_cast<double>(c);
    for (int k = 0; k < 3; ++k)
      for (int p = 0; p < e[static_cast<std::size_t>(k)]; ++p) t *= s[static_cast<std::size_t>(k)];
    acc += t;
  }
  return acc;
}

std::complex<double> Polynomial::at_frequency(const Eigen::Vector3d& xi) const {
  const std::complex<double> I(0.0, 1.0);
  return evaluate({I * xi[0], I * xi[1], I * xi[2]});
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    Rational a = abs(c);
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    bool unit_coef = (a == 1) && (e[0] + e[1] + e[2] > 0);
    if (!unit_coef) os << a;
    bool need_star = !unit_coef;
    for (int k = 0; k < 3; ++k) {
      int p = e[static_cast<std::size_t>(k)];
      if (p == 0) continue;
      os << (need_star ? "*" : "") << "s" << (k + 1);
      if (p > 1) os << "^" << p;
      need_star = true;
    }
  }
  return os.str();
}

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
  int ex = 0;
  double mant = std::frexp(x, &ex);
  // 53 significant bits
  auto m = static_cast<long long>(std::ldexp(mant, 53));
  ex -= 53;
  Rational r(m);
  boost::multiprecision::cpp_int p = 1;
  p <<= std::abs(ex);
  if (ex >= 0) r *= Rational(p);
  else r /= Rational(p);
  return r;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) : degree_(p.degree()) {
  for (const auto& [e, c] : p.terms()) terms_.emplace_back(e, static_cast<double>(c));
}

std::complex<double> CompiledPolynomial::evaluate(
    const std::vector<std::array<std::complex<double>, 3>>& pw) const {
  std::complex<double> acc = 0.0;
  for (const auto& [e, c] : terms_)
    acc += c * pw[static_cast<std::size_t>(e[0])][0] * pw[static_cast<std::size_t>(e[1])][1] *
           pw[static_cast<std::size_t>(e[2])][2];
  return acc;
}

std::vector<std::array<std::complex<double>, 3>> frequency_powers(const Eigen::Vector3d& xi, int degree) {
  std::vector<std::array<std::complex<double>, 3>> pw(static_cast<std::size_t>(std::max(degree, 0) + 1));
  pw[0] = {1.0, 1.0, 1.0};
  for (std::size_t e = 1; e < pw.size(); ++e)
    for (int k = 0; k < 3; ++k) pw[e][static_cast<std::size_t>(k)] = pw[e - 1][static_cast<std::size_t>(k)] * std::complex<double>(0.0, xi[k]);
  return pw;
}

// ---- QMatrix

QMatrix QMatrix::identity(int n) {
  QMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

QMatrix QMatrix::from_eigen(const Eigen::MatrixXd& e) {
  QMatrix m(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = to_rational(e(i, j));
  return m;
}

bool QMatrix::is_zero_column(int j) const {
  for (int i = 0; i < rows_; ++i)
    if ((*this)(i, j) != 0) return false;
  return true;
}

QMatrix operator*(const QMatrix& a, const QMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("QMatrix product shape mismatch");
  QMatrix c(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      const Rational& x = a(i, k);
      if (x == 0) continue;
      for (int j = 0; j < b.cols_; ++j)
        if (b(k, j) != 0) c(i, j) += x * b(k, j);
    }
  return c;
}

QMatrix operator-(const QMatrix& a, const QMatrix& b) {
  QMatrix c = a;
  for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] -= b.a_[i];
  return c;
}

Rational QMatrix::determinant() const {
  if (rows_ != cols_) throw std::invalid_argument("determinant of non-square matrix");
  QMatrix m = *this;
  Rational det = 1;
  for (int c = 0; c < rows_; ++c) {
    int p = c;
    while (p < rows_ && m(p, c) == 0) ++p;
    if (p == rows_) return 0;
    if (p != c) {
      for (int j = 0; j < cols_; ++j) std::swap(m(p, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (int r = c + 1; r < rows_; ++r) {
      if (m(r, c) == 0) continue;
      Rational f = m(r, c) / m(c, c);
      for (int j = c; j < cols_; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return det;
}

bool QMatrix::inverse(QMatrix& out) const {
  if (rows_ != cols_) return false;
  const int n = rows_;
  QMatrix m = *this;
  out = identity(n);
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) return false;
    if (p != c)
      for (int j = 0; j < n; ++j) {
        std::swap(m(p, j), m(c, j));
        std::swap(out(p, j), out(c, j));
      }
    Rational inv = 1 / m(c, c);
    for (int j = 0; j < n; ++j) {
      m(c, j) *= inv;
      out(c, j) *= inv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      Rational f = m(r, c);
      for (int j = 0; j < n; ++j) {
        m(r, j) -= f * m(c, j);
        out(r, j) -= f * out(c, j);
      }
    }
  }
  return true;
}

Eigen::MatrixXd QMatrix::to_eigen() const {
  Eigen::MatrixXd e(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) e(i, j) = static_cast<double>((*this)(i, j));
  return e;
}

// ---- PolyMatrix

PolyMatrix PolyMatrix::identity(int n) {
  PolyMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

PolyMatrix PolyMatrix::from_rational(const QMatrix& q) {
  PolyMatrix m(q.rows(), q.cols());
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j) m(i, j) = Polynomial(q(i, j));
  return m;
}

int PolyMatrix::degree() const {
  int d = -1;
  for (const auto& p : a_) d = std::max(d, p.degree());
  return d;
}

bool PolyMatrix::is_zero() const {
  for (const auto& p : a_)
    if (!p.is_zero()) return false;
  return true;
}

PolyMatrix PolyMatrix::block(int r0, int c0, int nr, int nc) const {
  PolyMatrix b(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("PolyMatrix product shape mismatch");
  PolyMatrix c(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      const Polynomial& x = a(i, k);
      if (x.is_zero()) continue;
      for (int j = 0; j < b.cols_; ++j)
        if (!b(k, j).is_zero()) c(i, j) += x * b(k, j);
    }
  return c;
}

PolyMatrix operator+(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("PolyMatrix sum shape mismatch");
  PolyMatrix c = a;
  for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] += b.a_[i];
  return c;
}

PolyMatrix operator-(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("PolyMatrix difference shape mismatch");
  PolyMatrix c = a;
  for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] -= b.a_[i];
  return c;
}

PolyMatrix operator*(const Polynomial& p, const PolyMatrix& a) {
  PolyMatrix c(a.rows_, a.cols_);
  for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] = p * a.a_[i];
  return c;
}

Eigen::MatrixXcd PolyMatrix::evaluate(const std::array<std::complex<double>, 3>& s) const {
  Eigen::MatrixXcd e(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) e(i, j) = (*this)(i, j).evaluate(s);
  return e;
}

Eigen::MatrixXcd PolyMatrix::at_frequency(const Eigen::Vector3d& xi) const {
  const std::complex<double> I(0.0, 1.0);
  return evaluate({I * xi[0], I * xi[1], I * xi[2]});
}

namespace {

Polynomial det_rec(const PolyMatrix& m, std::vector<int>& cols, int row) {
  const int n = m.rows();
  if (row == n) return 1;
  Polynomial acc;
  int sign = 1;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    int c = cols[k];
    if (!m(row, c).is_zero()) {
      cols.erase(cols.begin() + static_cast<long>(k));
      Polynomial minor = det_rec(m, cols, row + 1);
      cols.insert(cols.begin() + static_cast<long>(k), c);
      if (!minor.is_zero()) {
        Polynomial t = m(row, c) * minor;
        if (sign > 0) acc += t;
        else acc -= t;
      }
    }
    sign = -sign;
  }
  return acc;
}

PolyMatrix minor_matrix(const PolyMatrix& m, int r, int c) {
  const int n = m.rows();
  PolyMatrix s(n - 1, n - 1);
  for (int i = 0, ii = 0; i < n; ++i) {
    if (i == r) continue;
    for (int j = 0, jj = 0; j < n; ++j) {
      if (j == c) continue;
      s(ii, jj++) = m(i, j);
    }
    ++ii;
  }
  return s;
}

}  // namespace

Polynomial determinant(const PolyMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
  std::vector<int> cols(static_cast<std::size_t>(m.cols()));
  for (int j = 0; j < m.cols(); ++j) cols[static_cast<std::size_t>(j)] = j;
  return det_rec(m, cols, 0);
}

PolyMatrix adjugate(const PolyMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("adjugate of non-square matrix");
  const int n = m.rows();
  PolyMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Polynomial c = determinant(minor_matrix(m, j, i));
      adj(i, j) = ((i + j) % 2 == 0) ? c : -c;
    }
  return adj;
}

}  // namespace gie
