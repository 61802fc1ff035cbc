#pragma once

// Dense complex linear algebra for the small operators and superoperators of
// a driven two-level emitter. Everything here is a pure function of its
// inputs; nothing is cached.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jumpfcs {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

inline constexpr cplx kI{0.0, 1.0};

/// Raised when an iterative or guarded numerical routine cannot deliver a
/// result within its stated accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const cplx> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const cplx> entries() const { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conj() const;

  CVector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const cplx> v);

  cplx trace() const;
  /// Maximum absolute column sum.
  double norm1() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(cplx scalar);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx scalar, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, cplx scalar);
CVector operator*(const ComplexMatrix& a, std::span<const cplx> v);

/// Largest entrywise absolute difference; dimensions must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
bool is_hermitian(const ComplexMatrix& a, double tol);

cplx dot(std::span<const cplx> a, std::span<const cplx> b);  // a^H b
double norm2(std::span<const cplx> v);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// e^{tA} by scaling and squaring around a truncated Taylor core. Scaling
/// kicks in once ||tA||_1 exceeds 1; arguments with ||tA||_1 > 1e4 are
/// rejected rather than risk overflow.
ComplexMatrix expm(const ComplexMatrix& a, double t);

inline constexpr double kExpmMaxNorm = 1e4;

struct EigenDecomposition {
  CVector eigenvalues;
  ComplexMatrix right_vectors;  // columns, unit 2-norm
  ComplexMatrix left_vectors;   // columns, l_i^H r_i = 1 unless degenerate
  std::vector<double> residual_norms;
  std::vector<bool> degenerate;  // |l_i^H r_i| < 1e-8 before normalization
};

/// Complex Schur decomposition A = Z T Z^H via Householder reduction to
/// Hessenberg form and Wilkinson-shifted QR sweeps. Exposed for testing.
struct SchurForm {
  ComplexMatrix t;
  ComplexMatrix z;
};
SchurForm schur(const ComplexMatrix& a);

/// Full eigendecomposition for square matrices up to 64x64.
EigenDecomposition eig(const ComplexMatrix& a);

struct EigenPair {
  cplx value;
  CVector right;
  CVector left;
};

/// Eigenpair with maximal real part; near-ties go to the smaller |Im|.
EigenPair leading_eigenpair(const ComplexMatrix& a);

}  // namespace jumpfcs
