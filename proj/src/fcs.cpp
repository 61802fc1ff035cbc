#include "jumpfcs/fcs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace jumpfcs {

namespace {

constexpr double kImagTol = 1e-9;
constexpr double kPerturbativeTol = 1e-5;

double theta_at(const Unraveling& u, double s) { return scgf(u, s).theta; }

struct Differences {
  double first;
  double second;
};

Differences central_differences(const Unraveling& u, double s, double h, double theta0) {
  const double plus = theta_at(u, s + h);
  const double minus = theta_at(u, s - h);
  return {(plus - minus) / (2.0 * h), (plus - 2.0 * theta0 + minus) / (h * h)};
}

// Product of two block lower-triangular Toeplitz matrices given by their
// first block columns.
std::vector<ComplexMatrix> toeplitz_product(const std::vector<ComplexMatrix>& a,
                                            const std::vector<ComplexMatrix>& b) {
  const std::size_t n = a.size();
  const std::size_t d = a.front().rows();
  std::vector<ComplexMatrix> c(n, ComplexMatrix(d, d));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j <= k; ++j) c[k] += a[j] * b[k - j];
  return c;
}

double toeplitz_norm1(const std::vector<ComplexMatrix>& blocks) {
  // Column sums of the first block column bound every block column.
  const std::size_t d = blocks.front().rows();
  double best = 0.0;
  for (std::size_t col = 0; col < d; ++col) {
    double sum = 0.0;
    for (const auto& b : blocks)
      for (std::size_t row = 0; row < d; ++row) sum += std::abs(b(row, col));
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace

ScgfResult scgf(const Unraveling& u, double s) {
  if (!std::isfinite(s)) throw std::invalid_argument("scgf: s must be finite");
  const GeneratorMatrix w = tilted_generator(u, s);
  EigenPair lead = leading_eigenpair(w.matrix);
  ScgfResult out{lead.value.real(), lead.value, std::move(lead.right), std::move(lead.left),
                 std::abs(lead.value.imag())};
  const double bound = kImagTol * std::max(rate_scale(u), 1e-300);
  if (out.imag_residual > bound) {
    std::ostringstream msg;
    msg << "scgf: leading eigenvalue " << lead.value << " at s=" << s
        << " has imaginary part above " << bound;
    throw NumericalError(msg.str());
  }
  return out;
}

ScgfDerivatives scgf_derivatives(const Unraveling& u, double s, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("scgf_derivatives: h must be > 0");
  const ScgfResult center = scgf(u, s);
  const Differences coarse = central_differences(u, s, h, center.theta);
  const Differences fine = central_differences(u, s, 0.5 * h, center.theta);

  ScgfDerivatives out;
  out.theta_prime = (4.0 * fine.first - coarse.first) / 3.0;
  out.theta_double_prime = (4.0 * fine.second - coarse.second) / 3.0;

  // dW/ds = -e^{-s} J, so dtheta/ds = -e^{-s} l^H J r / l^H r.
  const ComplexMatrix jump = jump_superoperator_matrix(u);
  const cplx overlap = dot(center.left, center.right);
  if (std::abs(overlap) < 1e-12) {
    std::ostringstream msg;
    msg << "scgf_derivatives: left/right eigenvectors nearly orthogonal at s=" << s;
    throw NumericalError(msg.str());
  }
  const CVector jr = jump * std::span<const cplx>(center.right);
  out.theta_prime_perturbative = (-std::exp(-s) * dot(center.left, jr) / overlap).real();

  const double tol = kPerturbativeTol * std::max(1.0, std::abs(out.theta_prime));
  if (std::abs(out.theta_prime - out.theta_prime_perturbative) > tol) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "scgf_derivatives: finite-difference theta' = " << out.theta_prime
        << " disagrees with perturbative " << out.theta_prime_perturbative << " at s=" << s
        << " (eigenvalue branch switch?)";
    throw NumericalError(msg.str());
  }
  return out;
}

CountingStatistics activity_mandel(const Unraveling& u, double s, double h) {
  const ScgfResult base = scgf(u, s);
  const ScgfDerivatives d = scgf_derivatives(u, s, h);
  CountingStatistics out;
  out.s = s;
  out.theta = base.theta;
  out.theta_prime = d.theta_prime;
  out.theta_double_prime = d.theta_double_prime;
  out.activity = -d.theta_prime;
  out.mandel_q = -d.theta_double_prime / d.theta_prime - 1.0;
  out.imag_residual = base.imag_residual;
  return out;
}

void GridSpec::validate(const char* name) const {
  std::ostringstream msg;
  if (steps < 1) {
    msg << name << ": steps must be >= 1";
  } else if (!std::isfinite(min) || !std::isfinite(max)) {
    msg << name << ": bounds must be finite";
  } else if (steps == 1 && min != max) {
    msg << name << ": a single-point grid needs min == max";
  } else if (steps > 1 && !(max > min)) {
    msg << name << ": grid must be increasing (max > min)";
  }
  if (!msg.str().empty()) throw std::invalid_argument(msg.str());
}

std::vector<double> GridSpec::values() const {
  validate("grid");
  std::vector<double> out(static_cast<std::size_t>(steps));
  if (steps == 1) {
    out[0] = min;
    return out;
  }
  const double step = (max - min) / (steps - 1);
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = min + step * i;
  out.back() = max;
  return out;
}

std::vector<SweepRow> sweep(const AtomParams& base, const GridSpec& s_grid,
                            const GridSpec& alpha_grid, const SweepOptions& options) {
  base.validate();
  s_grid.validate("s grid");
  alpha_grid.validate("alpha grid");
  const std::vector<double> s_values = s_grid.values();
  const std::vector<double> alpha_values = alpha_grid.values();
  const std::size_t total = s_values.size() * alpha_values.size();

  std::vector<SweepRow> rows(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      SweepRow& row = rows[idx];
      row.alpha = alpha_values[idx / s_values.size()];
      const double s = s_values[idx % s_values.size()];
      try {
        AtomParams p = base;
        p.alpha = row.alpha;
        row.stats = activity_mandel(shifted_unraveling(p), s, options.fd_step);
      } catch (const std::exception& e) {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        row.stats = {s, nan, nan, nan, nan, nan, nan};
        row.diagnostic = e.what();
      }
    }
  };

  unsigned n_threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  n_threads = std::clamp<unsigned>(n_threads, 1, static_cast<unsigned>(std::max<std::size_t>(total, 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  return rows;
}

double finite_time_mgf(const Unraveling& u, double s, double t, const DensityMatrix& rho0) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("finite_time_mgf: t must be >= 0");
  if (!std::isfinite(s)) throw std::invalid_argument("finite_time_mgf: s must be finite");
  if (rho0.dim() != u.dim()) throw std::invalid_argument("finite_time_mgf: state dimension mismatch");
  if (t == 0.0) return 1.0;
  const GeneratorMatrix w = tilted_generator(u, s);
  const ComplexMatrix prop = expm(w.matrix, t);
  const CVector v0 = vectorize(rho0);
  return vec_trace(prop * std::span<const cplx>(v0)).real();
}

std::vector<ComplexMatrix> bidiagonal_toeplitz_expm(const ComplexMatrix& diag,
                                                    const ComplexMatrix& sub, double t,
                                                    std::size_t n_blocks) {
  if (!diag.is_square() || sub.rows() != diag.rows() || sub.cols() != diag.cols())
    throw std::invalid_argument("bidiagonal_toeplitz_expm: block shapes differ");
  if (n_blocks == 0) throw std::invalid_argument("bidiagonal_toeplitz_expm: no blocks");
  const std::size_t d = diag.rows();

  std::vector<ComplexMatrix> x(n_blocks, ComplexMatrix(d, d));
  x[0] = diag * cplx{t, 0.0};
  if (n_blocks > 1) x[1] = sub * cplx{t, 0.0};
  const double norm = toeplitz_norm1(x);
  if (!std::isfinite(norm)) throw NumericalError("bidiagonal_toeplitz_expm: non-finite input");
  if (norm > kExpmMaxNorm) {
    std::ostringstream msg;
    msg << "bidiagonal_toeplitz_expm: ||tG||_1 = " << norm << " exceeds range guard";
    throw NumericalError(msg.str());
  }
  int squarings = 0;
  if (norm > 1.0) {
    squarings = static_cast<int>(std::ceil(std::log2(norm)));
    const cplx scale{std::ldexp(1.0, -squarings), 0.0};
    x[0] *= scale;
    if (n_blocks > 1) x[1] *= scale;
  }

  // Taylor core; multiplying by x only touches two blocks.
  std::vector<ComplexMatrix> sum(n_blocks, ComplexMatrix(d, d));
  std::vector<ComplexMatrix> term(n_blocks, ComplexMatrix(d, d));
  sum[0] = ComplexMatrix::identity(d);
  term[0] = ComplexMatrix::identity(d);
  for (int p = 1; p <= 40; ++p) {
    std::vector<ComplexMatrix> next(n_blocks, ComplexMatrix(d, d));
    for (std::size_t k = 0; k < n_blocks; ++k) {
      next[k] = term[k] * x[0];
      if (k > 0) next[k] += term[k - 1] * x[1];
      next[k] *= cplx{1.0 / p, 0.0};
    }
    term = std::move(next);
    for (std::size_t k = 0; k < n_blocks; ++k) sum[k] += term[k];
    if (toeplitz_norm1(term) <= 1e-18 * toeplitz_norm1(sum)) break;
  }
  for (int k = 0; k < squarings; ++k) sum = toeplitz_product(sum, sum);

  for (const auto& b : sum)
    if (!b.all_finite()) throw NumericalError("bidiagonal_toeplitz_expm: result not finite");
  return sum;
}

CountDistribution counting_resolved_pk(const Unraveling& u, double t, int k_max,
                                       const DensityMatrix& rho0) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("counting_resolved_pk: t must be >= 0");
  if (k_max < 0) throw std::invalid_argument("counting_resolved_pk: k_max must be >= 0");
  if (rho0.dim() != u.dim()) throw std::invalid_argument("counting_resolved_pk: state dimension mismatch");

  CountDistribution out;
  out.t = t;
  out.probabilities.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  if (t == 0.0) {
    out.probabilities[0] = 1.0;
    return out;
  }
  const std::vector<ComplexMatrix> blocks = bidiagonal_toeplitz_expm(
      no_jump_generator(u), jump_superoperator_matrix(u), t, out.probabilities.size());
  const CVector v0 = vectorize(rho0);
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    out.probabilities[k] = vec_trace(blocks[k] * std::span<const cplx>(v0)).real();
    total += out.probabilities[k];
  }
  out.truncation_tail = 1.0 - total;
  return out;
}

int recommended_k_max(const Unraveling& u, double t) {
  const DensityMatrix rho_ss = stationary_state(u);
  const ComplexMatrix emitted = u.jump * rho_ss.matrix() * u.jump.adjoint();
  const double mean = std::max(0.0, emitted.trace().real()) * std::max(t, 0.0);
  return static_cast<int>(std::ceil(mean + 10.0 * std::sqrt(mean))) + 10;
}

}  // namespace jumpfcs
