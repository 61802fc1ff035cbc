#include <doctest.h>

#include <cmath>
#include <random>

#include "jumpfcs/linalg.hpp"
#include "oracles.hpp"

using namespace jumpfcs;

namespace {

ComplexMatrix pauli_x() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }

CVector kron_vec(const CVector& u, const CVector& v) {
  CVector out;
  for (const cplx a : u)
    for (const cplx b : v) out.push_back(a * b);
  return out;
}

}  // namespace

TEST_CASE("kron of identities is the identity") {
  CHECK(max_abs_diff(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)),
                     ComplexMatrix::identity(4)) == 0.0);
}

TEST_CASE("kron of Pauli-x with itself is the anti-diagonal") {
  const ComplexMatrix k = kron(pauli_x(), pauli_x());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(k(i, j) == cplx(i + j == 3 ? 1.0 : 0.0));
}

TEST_CASE("kron acts factorwise on product vectors") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = oracle::random_matrix(rng, 2, 2);
    const ComplexMatrix b = oracle::random_matrix(rng, 2, 2);
    const CVector u = oracle::random_matrix(rng, 2, 1).column(0);
    const CVector v = oracle::random_matrix(rng, 2, 1).column(0);
    const CVector lhs = kron(a, b) * std::span<const cplx>(kron_vec(u, v));
    const CVector rhs = kron_vec(a * std::span<const cplx>(u), b * std::span<const cplx>(v));
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(lhs[i] - rhs[i]) < 1e-14);
  }
}

TEST_CASE("kron is associative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = oracle::random_matrix(rng, 2, 2);
    const ComplexMatrix b = oracle::random_matrix(rng, 2, 2);
    const ComplexMatrix c = oracle::random_matrix(rng, 2, 2);
    CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) <= 1e-14);
  }
}

TEST_CASE("kron rejects empty operands") {
  CHECK_THROWS_AS(kron(ComplexMatrix{}, ComplexMatrix::identity(2)), std::invalid_argument);
}

TEST_CASE("expm of the zero matrix is the identity") {
  CHECK(max_abs_diff(expm(ComplexMatrix::zeros(3, 3), 1.0), ComplexMatrix::identity(3)) == 0.0);
}

TEST_CASE("expm of a diagonal matrix exponentiates the diagonal") {
  const CVector diag{cplx{-1.5, 0.3}, cplx{0.7, -2.0}};
  for (double t : {0.1, 1.0, 3.7}) {
    const ComplexMatrix e = expm(ComplexMatrix::diagonal(diag), t);
    CHECK(std::abs(e(0, 0) - std::exp(t * diag[0])) <= 1e-12 * std::abs(std::exp(t * diag[0])));
    CHECK(std::abs(e(1, 1) - std::exp(t * diag[1])) <= 1e-12 * std::abs(std::exp(t * diag[1])));
    CHECK(std::abs(e(0, 1)) == 0.0);
  }
}

TEST_CASE("expm matches a long Taylor series on random 4x4 matrices") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = oracle::random_matrix(rng, 4, 4, 0.8);
    const ComplexMatrix reference = oracle::taylor_expm(a, 1.0, 200);
    CHECK(max_abs_diff(expm(a, 1.0), reference) <= 1e-10);
  }
}

TEST_CASE("expm keeps relative accuracy after scaling and squaring") {
  std::mt19937_64 rng(5);
  // ||tA||_1 around 8, well inside the stated 1e-10 accuracy range.
  const ComplexMatrix a = oracle::random_matrix(rng, 4, 4, 1.0);
  const double t = 8.0 / a.norm1();
  // Reference from the series split into 16 exact slices.
  ComplexMatrix reference = oracle::taylor_expm(a, t / 16.0, 60);
  for (int i = 0; i < 4; ++i) reference = reference * reference;
  const ComplexMatrix e = expm(a, t);
  CHECK(max_abs_diff(e, reference) <= 1e-10 * reference.max_abs());
}

TEST_CASE("expm group property") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix a = oracle::random_matrix(rng, 4, 4);
    a *= 2.0 / a.norm1();
    const double t1 = 0.37 + 0.1 * trial;
    const double t2 = 1.21;
    CHECK(max_abs_diff(expm(a, t1 + t2), expm(a, t1) * expm(a, t2)) <= 1e-9);
  }
}

TEST_CASE("expm errors") {
  CHECK_THROWS_AS(expm(ComplexMatrix(2, 3), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(expm(ComplexMatrix::identity(2), 2e4), NumericalError);
}

TEST_CASE("eig of Pauli-x") {
  const EigenDecomposition dec = eig(pauli_x());
  CHECK(oracle::multiset_distance(dec.eigenvalues, {1.0, -1.0}) < 1e-14);
}

TEST_CASE("eig of a diagonal matrix returns its diagonal") {
  const CVector diag{2.0, cplx{0.0, 3.0}, -1.0, 0.0};
  const EigenDecomposition dec = eig(ComplexMatrix::diagonal(diag));
  CHECK(oracle::multiset_distance(dec.eigenvalues, diag) < 1e-14);
}

TEST_CASE("eig agrees with Durand-Kerner roots of the characteristic quartic") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = oracle::random_matrix(rng, 4, 4);
    const CVector roots = oracle::durand_kerner(oracle::characteristic_polynomial(a));
    CHECK(oracle::multiset_distance(eig(a).eigenvalues, roots) < 1e-8);
  }
}

TEST_CASE("eigenvalue sum and product reproduce trace and cofactor determinant") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = oracle::random_matrix(rng, 4, 4, 2.0);
    const CVector ev = eig(a).eigenvalues;
    cplx sum = 0.0, prod = 1.0;
    for (const cplx l : ev) {
      sum += l;
      prod *= l;
    }
    CHECK(std::abs(sum - a.trace()) < 1e-8);
    CHECK(std::abs(prod - oracle::cofactor_det(a)) < 1e-8);
  }
}

TEST_CASE("eigenvalues are invariant under similarity") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = oracle::random_matrix(rng, 4, 4);
    ComplexMatrix p = oracle::random_matrix(rng, 4, 4);
    p += 2.0 * ComplexMatrix::identity(4);  // keep P well conditioned
    // P^{-1} from Cayley-Hamilton: P^4 + c3 P^3 + c2 P^2 + c1 P + c0 I = 0.
    const CVector c = oracle::characteristic_polynomial(p);
    const ComplexMatrix i4 = ComplexMatrix::identity(4);
    const ComplexMatrix p2 = p * p;
    const ComplexMatrix p3 = p2 * p;
    ComplexMatrix pinv = p3 + c[3] * p2 + c[2] * p + c[1] * i4;
    pinv *= -1.0 / c[0];
    CHECK(max_abs_diff(p * pinv, i4) < 1e-10);
    const ComplexMatrix b = p * a * pinv;
    CHECK(oracle::multiset_distance(eig(a).eigenvalues, eig(b).eigenvalues) < 1e-8);
  }
}

TEST_CASE("eigenvector residuals and biorthonormal pairing") {
  std::mt19937_64 rng(29);
  for (std::size_t n : {2u, 3u, 4u, 7u, 16u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const ComplexMatrix a = oracle::random_matrix(rng, n, n);
      const EigenDecomposition dec = eig(a);
      const double scale = a.frobenius_norm();
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(dec.residual_norms[i] <= 1e-10 * scale);
        CHECK(std::abs(norm2(dec.right_vectors.column(i)) - 1.0) < 1e-12);
        if (!dec.degenerate[i]) {
          const cplx overlap = dot(dec.left_vectors.column(i), dec.right_vectors.column(i));
          CHECK(std::abs(overlap - 1.0) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("eig handles the largest supported size") {
  std::mt19937_64 rng(31);
  const ComplexMatrix a = oracle::random_matrix(rng, 64, 64);
  const EigenDecomposition dec = eig(a);
  cplx sum = 0.0;
  for (const cplx l : dec.eigenvalues) sum += l;
  CHECK(std::abs(sum - a.trace()) < 1e-9);
  for (double r : dec.residual_norms) CHECK(r < 1e-9 * a.frobenius_norm());
}

TEST_CASE("eig on Hermitian and defective inputs") {
  std::mt19937_64 rng(37);
  const ComplexMatrix h = oracle::random_hermitian(rng, 5);
  for (const cplx l : eig(h).eigenvalues) CHECK(std::abs(l.imag()) < 1e-12);

  // Jordan block: left and right eigenvectors are orthogonal.
  const ComplexMatrix jordan{{1.0, 1.0}, {0.0, 1.0}};
  const EigenDecomposition dec = eig(jordan);
  CHECK(dec.degenerate[0]);
  CHECK(oracle::multiset_distance(dec.eigenvalues, {1.0, 1.0}) < 1e-7);
}

TEST_CASE("eig errors") {
  CHECK_THROWS_AS(eig(ComplexMatrix(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(eig(ComplexMatrix::identity(65)), std::invalid_argument);
  ComplexMatrix bad = ComplexMatrix::identity(2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(eig(bad), NumericalError);
}

TEST_CASE("leading eigenpair selection") {
  const EigenPair p = leading_eigenpair(ComplexMatrix::diagonal(CVector{-1.0, 0.0, -3.0}));
  CHECK(std::abs(p.value) < 1e-15);

  // Ties on the real part go to the smaller imaginary part.
  const EigenPair tie = leading_eigenpair(ComplexMatrix::diagonal(CVector{cplx{0.5, 2.0}, cplx{0.5, -0.1}, -4.0}));
  CHECK(std::abs(tie.value - cplx{0.5, -0.1}) < 1e-14);
}

TEST_CASE("leading eigenvalue of triangular matrices is the max-real diagonal entry") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix a = oracle::random_matrix(rng, 5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < i; ++j) a(i, j) = 0.0;
    cplx expected = a(0, 0);
    for (std::size_t i = 1; i < 5; ++i)
      if (a(i, i).real() > expected.real()) expected = a(i, i);
    CHECK(std::abs(leading_eigenpair(a).value - expected) < 1e-10);
  }
}
