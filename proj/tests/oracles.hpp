#pragma once

// Independent reference computations used only by the tests. None of these
// route through the library's eigensolver, exponential or Liouville-space
// builders.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "jumpfcs/linalg.hpp"
#include "jumpfcs/model.hpp"

namespace oracle {

using jumpfcs::ComplexMatrix;
using jumpfcs::cplx;
using jumpfcs::CVector;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                   double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = cplx{u(rng), u(rng)};
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  ComplexMatrix a = random_matrix(rng, n, n, scale);
  ComplexMatrix h = a + a.adjoint();
  h *= 0.5;
  return h;
}

inline ComplexMatrix random_density(std::mt19937_64& rng, std::size_t n) {
  ComplexMatrix a = random_matrix(rng, n, n);
  ComplexMatrix rho = a * a.adjoint();
  rho *= 1.0 / rho.trace().real();
  for (std::size_t i = 0; i < n; ++i) rho(i, i) = rho(i, i).real();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) rho(j, i) = std::conj(rho(i, j));
  return rho;
}

inline jumpfcs::Unraveling random_unraveling(std::mt19937_64& rng) {
  return {random_hermitian(rng, 2, 2.0), random_matrix(rng, 2, 2, 1.5), "random"};
}

/// Plain Taylor sum of e^{tA} with `terms` terms, no scaling.
inline ComplexMatrix taylor_expm(const ComplexMatrix& a, double t, int terms = 200) {
  const std::size_t n = a.rows();
  ComplexMatrix sum = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  for (int k = 1; k < terms; ++k) {
    ComplexMatrix next(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cplx acc = 0.0;
        for (std::size_t l = 0; l < n; ++l) acc += term(i, l) * a(l, j);
        next(i, j) = acc * (t / k);
      }
    term = next;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sum(i, j) += term(i, j);
  }
  return sum;
}

/// Determinant by cofactor expansion along the first row.
inline cplx cofactor_det(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);
  cplx det = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    ComplexMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t mj = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == col) continue;
        minor(i - 1, mj++) = a(i, j);
      }
    }
    const double sign = col % 2 == 0 ? 1.0 : -1.0;
    det += sign * a(0, col) * cofactor_det(minor);
  }
  return det;
}

/// Monic characteristic polynomial coefficients c[0..n] (c[n] = 1) of
/// det(lambda I - A) via the Faddeev-LeVerrier recursion.
inline CVector characteristic_polynomial(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  CVector c(n + 1);
  c[n] = 1.0;
  ComplexMatrix m(n, n);  // M_0 = 0
  for (std::size_t k = 1; k <= n; ++k) {
    ComplexMatrix next = a * m;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    m = next;
    const ComplexMatrix am = a * m;
    c[n - k] = -am.trace() / static_cast<double>(k);
  }
  return c;
}

/// Durand-Kerner simultaneous root iteration for a monic polynomial.
inline CVector durand_kerner(const CVector& coeffs) {
  const std::size_t n = coeffs.size() - 1;
  auto eval = [&](cplx z) {
    cplx acc = coeffs[n];
    for (std::size_t k = n; k-- > 0;) acc = acc * z + coeffs[k];
    return acc;
  };
  double radius = 0.0;
  for (std::size_t k = 0; k < n; ++k) radius = std::max(radius, std::abs(coeffs[k]));
  radius = 1.0 + radius;
  CVector roots(n);
  const cplx seed{0.4, 0.9};
  for (std::size_t i = 0; i < n; ++i) roots[i] = radius * std::pow(seed, static_cast<double>(i));
  for (int iter = 0; iter < 5000; ++iter) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      const cplx delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      change = std::max(change, std::abs(delta));
    }
    if (change < 1e-15) break;
  }
  // Newton polish on the full polynomial.
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx p = coeffs[n], dp = 0.0;
      for (std::size_t k = n; k-- > 0;) {
        dp = dp * r + p;
        p = p * r + coeffs[k];
      }
      if (std::abs(dp) > 0.0) r -= p / dp;
    }
  }
  return roots;
}

/// Smallest max-distance over all pairings of two equal-size multisets
/// (brute force; intended for n <= 8).
inline double multiset_distance(CVector a, CVector b) {
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Greedy nearest matching for larger multisets.
inline double greedy_multiset_distance(const CVector& a, CVector b) {
  double worst = 0.0;
  for (const cplx x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

/// -i[H, rho] + e^{-s} L rho L^dagger - (1/2){L^dagger L, rho} by direct products.
inline ComplexMatrix apply_tilted(const jumpfcs::Unraveling& u, const ComplexMatrix& rho, double s) {
  const ComplexMatrix& h = u.hamiltonian;
  const ComplexMatrix& l = u.jump;
  const ComplexMatrix ldl = l.adjoint() * l;
  ComplexMatrix out = (h * rho - rho * h) * cplx{0.0, -1.0};
  out += (l * rho * l.adjoint()) * cplx{std::exp(-s), 0.0};
  out -= (ldl * rho + rho * ldl) * cplx{0.5, 0.0};
  return out;
}

inline ComplexMatrix apply_lindblad(const jumpfcs::Unraveling& u, const ComplexMatrix& rho) {
  return apply_tilted(u, rho, 0.0);
}

// Resonance fluorescence with the unshifted jump operator, long-time limit.
inline double activity_closed_form(double gamma, double omega) {
  return 4.0 * gamma * omega * omega / (8.0 * omega * omega + gamma * gamma);
}

inline double mandel_closed_form(double gamma, double omega) {
  const double den = 8.0 * omega * omega + gamma * gamma;
  return -24.0 * gamma * gamma * omega * omega / (den * den);
}

// Typical (s = 0) activity and Mandel Q of the shifted unraveling at gamma = 1,
// real alpha, obtained by implicit differentiation of the characteristic
// polynomial of the tilted generator (symbolic computation, frozen here).
inline double shifted_activity_gamma1(double omega, double alpha) {
  const double o2 = omega * omega;
  return (8.0 * o2 * alpha * alpha + 4.0 * o2 - 4.0 * omega * alpha + alpha * alpha) / (8.0 * o2 + 1.0);
}

inline double shifted_mandel_gamma1(double omega, double alpha) {
  const double o2 = omega * omega;
  const double num = -32.0 * o2 * (omega - alpha) * (16.0 * o2 * alpha + 3.0 * omega - alpha);
  const double den = (8.0 * o2 + 1.0) * (8.0 * o2 + 1.0) *
                     (8.0 * o2 * alpha * alpha + 4.0 * o2 - 4.0 * omega * alpha + alpha * alpha);
  return num / den;
}

}  // namespace oracle
