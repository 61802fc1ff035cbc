#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "jumpfcs/linalg.hpp"

namespace jumpfcs {

namespace {

constexpr std::size_t kMaxDim = 64;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Givens {
  double c;
  cplx s;
};

// Rotation G = [c s; -conj(s) c] with G [a; b] = [r; 0].
Givens make_givens(cplx a, cplx b) {
  const double abs_a = std::abs(a);
  const double abs_b = std::abs(b);
  if (abs_b == 0.0) return {1.0, 0.0};
  if (abs_a == 0.0) return {0.0, 1.0};
  const double rho = std::hypot(abs_a, abs_b);
  return {abs_a / rho, (a / abs_a) * std::conj(b) / rho};
}

// Householder reduction to upper Hessenberg form; accumulates Q so that
// A = Q H Q^H.
void reduce_to_hessenberg(ComplexMatrix& h, ComplexMatrix& q) {
  const std::size_t n = h.rows();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(h(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;

    CVector v(n, 0.0);
    const cplx x0 = h(k + 1, k);
    const cplx phase = std::abs(x0) == 0.0 ? cplx{1.0, 0.0} : x0 / std::abs(x0);
    const cplx alpha = -phase * xnorm;
    for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
    v[k + 1] -= alpha;
    const double vnorm = norm2(v);
    if (vnorm == 0.0) continue;
    for (auto& vi : v) vi /= vnorm;

    // H <- (I - 2 v v^H) H
    for (std::size_t j = 0; j < n; ++j) {
      cplx proj = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) proj += std::conj(v[i]) * h(i, j);
      proj *= 2.0;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i] * proj;
    }
    // H <- H (I - 2 v v^H), Q <- Q (I - 2 v v^H)
    for (ComplexMatrix* m : {&h, &q}) {
      for (std::size_t i = 0; i < n; ++i) {
        cplx proj = 0.0;
        for (std::size_t j = k + 1; j < n; ++j) proj += (*m)(i, j) * v[j];
        proj *= 2.0;
        for (std::size_t j = k + 1; j < n; ++j) (*m)(i, j) -= proj * std::conj(v[j]);
      }
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

cplx wilkinson_shift(const ComplexMatrix& h, std::size_t m) {
  const cplx a = h(m - 1, m - 1);
  const cplx b = h(m - 1, m);
  const cplx c = h(m, m - 1);
  const cplx d = h(m, m);
  const cplx half_diff = 0.5 * (a - d);
  const cplx disc = std::sqrt(half_diff * half_diff + b * c);
  const cplx mid = 0.5 * (a + d);
  const cplx mu1 = mid + disc;
  const cplx mu2 = mid - disc;
  return std::abs(mu1 - d) <= std::abs(mu2 - d) ? mu1 : mu2;
}

// One explicitly shifted QR step on the active window [lo, hi], applied so
// that the full matrix stays in (quasi-)Schur form.
void qr_sweep(ComplexMatrix& h, ComplexMatrix& z, std::size_t lo, std::size_t hi, cplx mu) {
  const std::size_t n = h.rows();
  for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= mu;

  std::vector<Givens> rotations;
  rotations.reserve(hi - lo);
  for (std::size_t k = lo; k < hi; ++k) {
    const Givens g = make_givens(h(k, k), h(k + 1, k));
    rotations.push_back(g);
    for (std::size_t j = k; j < n; ++j) {
      const cplx top = h(k, j);
      const cplx bot = h(k + 1, j);
      h(k, j) = g.c * top + g.s * bot;
      h(k + 1, j) = -std::conj(g.s) * top + g.c * bot;
    }
    h(k + 1, k) = 0.0;
  }
  for (std::size_t k = lo; k < hi; ++k) {
    const Givens& g = rotations[k - lo];
    const std::size_t row_end = std::min(k + 2, hi);
    for (std::size_t i = 0; i <= row_end; ++i) {
      const cplx left = h(i, k);
      const cplx right = h(i, k + 1);
      h(i, k) = g.c * left + std::conj(g.s) * right;
      h(i, k + 1) = -g.s * left + g.c * right;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const cplx left = z(i, k);
      const cplx right = z(i, k + 1);
      z(i, k) = g.c * left + std::conj(g.s) * right;
      z(i, k + 1) = -g.s * left + g.c * right;
    }
  }

  for (std::size_t i = lo; i <= hi; ++i) h(i, i) += mu;
}

// Eigenvectors of an upper-triangular T by back substitution, mapped back
// through Z and normalized to unit length.
ComplexMatrix schur_eigenvectors(const ComplexMatrix& t, const ComplexMatrix& z) {
  const std::size_t n = t.rows();
  const double small = std::max(t.max_abs(), std::numeric_limits<double>::min()) * kEps;
  ComplexMatrix vectors(n, n);
  CVector x(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::fill(x.begin(), x.end(), cplx{0.0, 0.0});
    x[k] = 1.0;
    const cplx lambda = t(k, k);
    for (std::size_t ii = k; ii-- > 0;) {
      cplx sum = 0.0;
      for (std::size_t j = ii + 1; j <= k; ++j) sum += t(ii, j) * x[j];
      cplx denom = t(ii, ii) - lambda;
      if (std::abs(denom) < small) denom = small;
      x[ii] = -sum / denom;
      const double mag = std::abs(x[ii]);
      if (mag > 1e100) {
        for (std::size_t j = ii; j <= k; ++j) x[j] /= mag;
      }
    }
    CVector v = z * std::span<const cplx>(x);
    const double nv = norm2(v);
    for (auto& vi : v) vi /= nv;
    vectors.set_column(k, v);
  }
  return vectors;
}

double residual(const ComplexMatrix& a, std::span<const cplx> v, cplx lambda) {
  CVector av = a * v;
  double sum = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) sum += std::norm(av[i] - lambda * v[i]);
  return std::sqrt(sum);
}

}  // namespace

SchurForm schur(const ComplexMatrix& a) {
  if (!a.is_square()) throw std::invalid_argument("schur: matrix not square");
  if (!a.all_finite()) throw NumericalError("schur: non-finite input");
  const std::size_t n = a.rows();
  ComplexMatrix h = a;
  ComplexMatrix z = ComplexMatrix::identity(n);
  if (n <= 1) return {h, z};
  reduce_to_hessenberg(h, z);

  const double scale = std::max(h.max_abs(), std::numeric_limits<double>::min());
  const int max_iter_per_value = 60;
  std::size_t hi = n - 1;
  int iter = 0;
  int total_iter = 0;
  while (hi > 0) {
    // Find the start of the unreduced trailing block.
    std::size_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h(lo, lo - 1));
      double diag = std::abs(h(lo, lo)) + std::abs(h(lo - 1, lo - 1));
      if (diag == 0.0) diag = scale;
      if (sub <= kEps * diag) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      --hi;
      iter = 0;
      continue;
    }
    if (++iter > max_iter_per_value) {
      std::ostringstream msg;
      msg << "eig: QR iteration failed to converge (n=" << n << ", " << total_iter
          << " sweeps)";
      throw NumericalError(msg.str());
    }
    ++total_iter;
    cplx mu;
    if (iter % 11 == 0) {
      mu = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1)) * cplx{1.0, 0.5};
    } else {
      mu = wilkinson_shift(h, hi);
    }
    qr_sweep(h, z, lo, hi, mu);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) h(i, j) = 0.0;
  return {h, z};
}

EigenDecomposition eig(const ComplexMatrix& a) {
  if (!a.is_square()) throw std::invalid_argument("eig: matrix not square");
  const std::size_t n = a.rows();
  if (n == 0) throw std::invalid_argument("eig: empty matrix");
  if (n > kMaxDim) throw std::invalid_argument("eig: dimension exceeds 64");

  const SchurForm right_schur = schur(a);
  const ComplexMatrix a_adj = a.adjoint();
  const SchurForm left_schur = schur(a_adj);

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = right_schur.t(i, i);
  out.right_vectors = schur_eigenvectors(right_schur.t, right_schur.z);
  const ComplexMatrix left_candidates = schur_eigenvectors(left_schur.t, left_schur.z);

  // Greedy nearest pairing of conj(mu_j) with lambda_i.
  const double scale = std::max(a.max_abs(), 1.0);
  std::vector<bool> used(n, false);
  out.left_vectors = ComplexMatrix(n, n);
  out.residual_norms.assign(n, 0.0);
  out.degenerate.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = n;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double dist = std::abs(std::conj(left_schur.t(j, j)) - out.eigenvalues[i]);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best_dist > 1e-6 * scale) {
      std::ostringstream msg;
      msg << "eig: cannot pair left/right eigenvalues (gap " << best_dist << ")";
      throw NumericalError(msg.str());
    }
    used[best] = true;

    CVector r = out.right_vectors.column(i);
    CVector l = left_candidates.column(best);
    const cplx overlap = dot(l, r);
    if (std::abs(overlap) < 1e-8) {
      out.degenerate[i] = true;
    } else {
      // Scale l so that l^H r = 1.
      const cplx factor = 1.0 / std::conj(overlap);
      for (auto& li : l) li *= factor;
    }
    out.left_vectors.set_column(i, l);

    const double rres = residual(a, r, out.eigenvalues[i]) / norm2(r);
    const double lres = residual(a_adj, l, std::conj(out.eigenvalues[i])) / norm2(l);
    out.residual_norms[i] = std::max(rres, lres);
  }
  return out;
}

EigenPair leading_eigenpair(const ComplexMatrix& a) {
  EigenDecomposition dec = eig(a);
  const double tie_tol = 1e-12 * std::max(a.max_abs(), 1.0);
  std::size_t best = 0;
  for (std::size_t i = 1; i < dec.eigenvalues.size(); ++i) {
    const cplx cand = dec.eigenvalues[i];
    const cplx cur = dec.eigenvalues[best];
    if (cand.real() > cur.real() + tie_tol) {
      best = i;
    } else if (std::abs(cand.real() - cur.real()) <= tie_tol &&
               std::abs(cand.imag()) < std::abs(cur.imag())) {
      best = i;
    }
  }
  return {dec.eigenvalues[best], dec.right_vectors.column(best), dec.left_vectors.column(best)};
}

}  // namespace jumpfcs
