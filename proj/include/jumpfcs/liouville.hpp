#pragma once

// Liouville-space representation. Density matrices are vectorized by column
// stacking, vec(X)[i + d*j] = X(i, j), so vec(A X B) = (B^T kron A) vec(X).

#include "jumpfcs/linalg.hpp"
#include "jumpfcs/model.hpp"

namespace jumpfcs {

/// Hermitian, unit-trace, positive semidefinite (to 1e-12).
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  static DensityMatrix pure(std::span<const cplx> psi);
  static DensityMatrix ground() { return pure(CVector{1.0, 0.0}); }
  static DensityMatrix excited() { return pure(CVector{0.0, 1.0}); }

  const ComplexMatrix& matrix() const { return m_; }
  std::size_t dim() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

CVector vectorize(const ComplexMatrix& x);
inline CVector vectorize(const DensityMatrix& rho) { return vectorize(rho.matrix()); }
ComplexMatrix devectorize(std::span<const cplx> v);

/// Trace of devec(v) without building the matrix.
cplx vec_trace(std::span<const cplx> v);

struct GeneratorMatrix {
  ComplexMatrix matrix;
  double s = 0.0;
  Unraveling source;
};

/// -i[H, .] + D(L) as a d^2 x d^2 matrix.
GeneratorMatrix lindblad_generator(const Unraveling& u);

/// Lindblad generator with the jump term weighted by e^{-s}. s = +inf is
/// accepted and gives the no-jump generator.
GeneratorMatrix tilted_generator(const Unraveling& u, double s);

/// Generator of the conditional no-jump evolution, rho -> -i(H_eff rho - rho H_eff^dagger).
ComplexMatrix no_jump_generator(const Unraveling& u);

/// rho -> L rho L^dagger, i.e. conj(L) kron L.
ComplexMatrix jump_superoperator_matrix(const Unraveling& u);

/// H - (i/2) L^dagger L.
ComplexMatrix effective_hamiltonian(const Unraveling& u);

/// Null right eigenvector of the Lindblad generator, normalized to unit trace
/// and Hermitized.
DensityMatrix stationary_state(const Unraveling& u);

}  // namespace jumpfcs
