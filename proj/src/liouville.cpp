#include "jumpfcs/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jumpfcs {

namespace {

constexpr double kStateTol = 1e-12;

std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n) {
    std::ostringstream msg;
    msg << "devectorize: length " << n << " is not a perfect square";
    throw std::invalid_argument(msg.str());
  }
  return r;
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (!m_.is_square() || m_.empty())
    throw std::invalid_argument("DensityMatrix: must be square and non-empty");
  if (!m_.all_finite()) throw std::invalid_argument("DensityMatrix: non-finite entries");
  if (!is_hermitian(m_, kStateTol)) throw std::invalid_argument("DensityMatrix: not Hermitian");
  const cplx tr = m_.trace();
  if (std::abs(tr - 1.0) > kStateTol) {
    std::ostringstream msg;
    msg << "DensityMatrix: trace " << tr << " differs from 1";
    throw std::invalid_argument(msg.str());
  }
  for (const cplx lambda : eig(m_).eigenvalues) {
    if (lambda.real() < -kStateTol)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(std::span<const cplx> psi) {
  const double n = norm2(psi);
  if (!(n > 0.0)) throw std::invalid_argument("DensityMatrix::pure: zero state");
  ComplexMatrix m(psi.size(), psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) m(i, j) = psi[i] * std::conj(psi[j]) / (n * n);
  // Exact Hermiticity and trace despite rounding.
  for (std::size_t i = 0; i < psi.size(); ++i) m(i, i) = m(i, i).real();
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = i + 1; j < psi.size(); ++j) m(j, i) = std::conj(m(i, j));
  return DensityMatrix(std::move(m));
}

CVector vectorize(const ComplexMatrix& x) {
  CVector v(x.rows() * x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t i = 0; i < x.rows(); ++i) v[i + x.rows() * j] = x(i, j);
  return v;
}

ComplexMatrix devectorize(std::span<const cplx> v) {
  const std::size_t d = exact_sqrt(v.size());
  ComplexMatrix x(d, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) x(i, j) = v[i + d * j];
  return x;
}

cplx vec_trace(std::span<const cplx> v) {
  const std::size_t d = exact_sqrt(v.size());
  cplx tr = 0.0;
  for (std::size_t i = 0; i < d; ++i) tr += v[i + d * i];
  return tr;
}

ComplexMatrix effective_hamiltonian(const Unraveling& u) {
  return u.hamiltonian + (-0.5 * kI) * (u.jump.adjoint() * u.jump);
}

ComplexMatrix jump_superoperator_matrix(const Unraveling& u) {
  u.validate();
  return kron(u.jump.conj(), u.jump);
}

ComplexMatrix no_jump_generator(const Unraveling& u) {
  u.validate();
  const ComplexMatrix id = ComplexMatrix::identity(u.dim());
  const ComplexMatrix heff = effective_hamiltonian(u);
  // -i (H_eff rho - rho H_eff^dagger)
  return (-kI) * (kron(id, heff) - kron(heff.conj(), id));
}

GeneratorMatrix lindblad_generator(const Unraveling& u) {
  return tilted_generator(u, 0.0);
}

GeneratorMatrix tilted_generator(const Unraveling& u, double s) {
  if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("tilted_generator: s must be finite or +inf");
  ComplexMatrix m = no_jump_generator(u);
  const double weight = std::exp(-s);
  if (weight != 0.0) m += weight * jump_superoperator_matrix(u);
  return {std::move(m), s, u};
}

DensityMatrix stationary_state(const Unraveling& u) {
  const GeneratorMatrix gen = lindblad_generator(u);
  const EigenPair zero_mode = leading_eigenpair(gen.matrix);
  ComplexMatrix rho = devectorize(zero_mode.right);
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-12) throw NumericalError("stationary_state: null vector has zero trace");
  rho *= 1.0 / tr;
  const std::size_t d = rho.rows();
  ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
  for (std::size_t i = 0; i < d; ++i) herm(i, i) = herm(i, i).real();
  // Remove the residual trace error left by rounding.
  const double tr_re = herm.trace().real();
  for (std::size_t i = 0; i < d; ++i) herm(i, i) /= tr_re;
  return DensityMatrix(std::move(herm));
}

}  // namespace jumpfcs
