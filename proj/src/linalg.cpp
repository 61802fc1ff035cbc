#include "jumpfcs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jumpfcs {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
        << "x" << b.cols();
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("ComplexMatrix: entry count does not match rows*cols");
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw std::invalid_argument("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

ComplexMatrix ComplexMatrix::conj() const {
  ComplexMatrix out(*this);
  for (auto& x : out.data_) x = std::conj(x);
  return out;
}

CVector ComplexMatrix::column(std::size_t j) const {
  CVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void ComplexMatrix::set_column(std::size_t j, std::span<const cplx> v) {
  if (v.size() != rows_) throw std::invalid_argument("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

cplx ComplexMatrix::trace() const {
  if (!is_square()) throw std::invalid_argument("trace: matrix not square");
  cplx tr = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) tr += (*this)(i, i);
  return tr;
}

double ComplexMatrix::norm1() const {
  double best = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) sum += std::abs((*this)(i, j));
    best = std::max(best, sum);
  }
  return best;
}

double ComplexMatrix::frobenius_norm() const {
  double sum = 0.0;
  for (const auto& x : data_) sum += std::norm(x);
  return std::sqrt(sum);
}

double ComplexMatrix::max_abs() const {
  double best = 0.0;
  for (const auto& x : data_) best = std::max(best, std::abs(x));
  return best;
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](cplx x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx scalar) {
  for (auto& x : data_) x *= scalar;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(cplx scalar, ComplexMatrix a) { return a *= scalar; }
ComplexMatrix operator*(ComplexMatrix a, cplx scalar) { return a *= scalar; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: inner dimension mismatch");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

CVector operator*(const ComplexMatrix& a, std::span<const cplx> v) {
  if (a.cols() != v.size()) throw std::invalid_argument("matrix-vector product: dimension mismatch");
  CVector out(a.rows(), cplx{0.0, 0.0});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx sum = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) sum += a(i, j) * v[j];
    out[i] = sum;
  }
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) best = std::max(best, std::abs(a(i, j) - b(i, j)));
  return best;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (!a.is_square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) return false;
  return true;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  cplx sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

double norm2(std::span<const cplx> v) {
  double sum = 0.0;
  for (const auto& x : v) sum += std::norm(x);
  return std::sqrt(sum);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("kron: empty operand");
  ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

ComplexMatrix expm(const ComplexMatrix& a, double t) {
  if (!a.is_square()) throw std::invalid_argument("expm: matrix not square");
  if (!std::isfinite(t)) throw std::invalid_argument("expm: non-finite time");
  const std::size_t n = a.rows();
  ComplexMatrix x = a * cplx{t, 0.0};
  const double norm = x.norm1();
  if (!std::isfinite(norm)) throw NumericalError("expm: non-finite input");
  if (norm > kExpmMaxNorm) {
    std::ostringstream msg;
    msg << "expm: ||tA||_1 = " << norm << " exceeds range guard " << kExpmMaxNorm;
    throw NumericalError(msg.str());
  }

  int squarings = 0;
  if (norm > 1.0) {
    squarings = static_cast<int>(std::ceil(std::log2(norm)));
    x *= cplx{std::ldexp(1.0, -squarings), 0.0};
  }

  // ||x||_1 <= 1 here; the Taylor tail after 20 terms is below 1/21! ~ 2e-20.
  ComplexMatrix sum = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = term * x;
    term *= cplx{1.0 / k, 0.0};
    sum += term;
    if (term.norm1() <= 1e-18 * sum.norm1()) break;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;

  if (!sum.all_finite()) throw NumericalError("expm: result not finite");
  return sum;
}

}  // namespace jumpfcs
