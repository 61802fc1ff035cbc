#pragma once

// Full counting statistics of quantum jumps.
//
// Long-time statistics come from the scaled cumulant generating function
// theta(s), the eigenvalue of the tilted generator W_s with largest real
// part: k(s) = -theta'(s) and Q(s) = -theta''(s)/theta'(s) - 1. Finite-time
// statistics come from the moment generating function
// Z_t(s) = Tr exp(t W_s) rho_0 and from the exact count distribution P_t(K).

#include <string>
#include <vector>

#include "jumpfcs/liouville.hpp"
#include "jumpfcs/model.hpp"

namespace jumpfcs {

struct ScgfResult {
  double theta = 0.0;
  cplx eigenvalue;
  CVector right;
  CVector left;
  double imag_residual = 0.0;
};

/// Largest-real-part eigenvalue of tilted_generator(u, s). Throws
/// NumericalError when its imaginary part exceeds 1e-9 * rate_scale(u),
/// which signals a complex pair or level crossing at s.
ScgfResult scgf(const Unraveling& u, double s);

struct ScgfDerivatives {
  double theta_prime = 0.0;
  double theta_double_prime = 0.0;
  /// -e^{-s} l^H J r / l^H r from first-order perturbation of W_s.
  double theta_prime_perturbative = 0.0;
};

inline constexpr double kDefaultFdStep = 1e-3;

/// Central differences at steps h and h/2 combined by one Richardson step.
/// The first derivative must agree with the perturbative value to
/// 1e-5 * max(1, |theta'|); a mismatch indicates the selected eigenvalue
/// changes branch near s and raises NumericalError.
ScgfDerivatives scgf_derivatives(const Unraveling& u, double s, double h = kDefaultFdStep);

struct CountingStatistics {
  double s = 0.0;
  double theta = 0.0;
  double theta_prime = 0.0;
  double theta_double_prime = 0.0;
  double activity = 0.0;
  double mandel_q = 0.0;
  double imag_residual = 0.0;
};

CountingStatistics activity_mandel(const Unraveling& u, double s, double h = kDefaultFdStep);

/// Uniform grid; steps == 1 means the single point min (max must equal min).
struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  void validate(const char* name) const;
  std::vector<double> values() const;
  bool operator==(const GridSpec&) const = default;
};

struct SweepRow {
  double alpha = 0.0;
  CountingStatistics stats;
  /// Empty on success; otherwise the failure message, with NaN statistics.
  std::string diagnostic;
};

struct SweepOptions {
  double fd_step = kDefaultFdStep;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Q(s) over the (alpha, s) plane using shifted_unraveling with alpha taken
/// from the grid (real). Rows are ordered alpha-outer, s-inner whatever the
/// thread count. Failing points never abort the sweep.
std::vector<SweepRow> sweep(const AtomParams& base, const GridSpec& s_grid,
                            const GridSpec& alpha_grid, const SweepOptions& options = {});

/// Z_t(s) = Tr devec(exp(t W_s) vec rho0).
double finite_time_mgf(const Unraveling& u, double s, double t, const DensityMatrix& rho0);

struct CountDistribution {
  double t = 0.0;
  std::vector<double> probabilities;  // P_t(0..k_max)
  double truncation_tail = 0.0;       // 1 - sum(probabilities)
};

inline constexpr double kTailWarnThreshold = 1e-6;

/// Exact P_t(K) for K <= k_max. The count-resolved states rho^(K) obey
/// d/dt rho^(K) = L0 rho^(K) + J rho^(K-1), whose generator is block lower
/// bidiagonal; its exponential is block lower-triangular Toeplitz and is
/// computed in that structure.
CountDistribution counting_resolved_pk(const Unraveling& u, double t, int k_max,
                                       const DensityMatrix& rho0);

/// Block k of exp(t G) where G has diagonal blocks `diag` and first
/// subdiagonal blocks `sub`; returns blocks 0..n_blocks-1 of the first
/// block column. Exposed for the structured-vs-dense cross-check.
std::vector<ComplexMatrix> bidiagonal_toeplitz_expm(const ComplexMatrix& diag,
                                                    const ComplexMatrix& sub, double t,
                                                    std::size_t n_blocks);

/// Heuristic k_max = ceil(k t + 10 sqrt(k t)) + 10 with k the typical activity.
int recommended_k_max(const Unraveling& u, double t);

}  // namespace jumpfcs
