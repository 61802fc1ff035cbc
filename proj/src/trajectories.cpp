#include "jumpfcs/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace jumpfcs {

namespace {

constexpr std::size_t kChunk = 256;
constexpr std::uint64_t kBootstrapStream = 0xb007'57a9'0000'0000ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// 2x2 complex matrix stored as plain doubles; the hot loop avoids the
// library complex multiply and its NaN recovery path.
struct Mat2 {
  double re[4];
  double im[4];

  explicit Mat2(const ComplexMatrix& m) {
    for (std::size_t k = 0; k < 4; ++k) {
      re[k] = m(k / 2, k % 2).real();
      im[k] = m(k / 2, k % 2).imag();
    }
  }

  void apply(const double in_re[2], const double in_im[2], double out_re[2], double out_im[2]) const {
    for (int i = 0; i < 2; ++i) {
      const double a_re = re[2 * i], a_im = im[2 * i];
      const double b_re = re[2 * i + 1], b_im = im[2 * i + 1];
      out_re[i] = a_re * in_re[0] - a_im * in_im[0] + b_re * in_re[1] - b_im * in_im[1];
      out_im[i] = a_re * in_im[0] + a_im * in_re[0] + b_re * in_im[1] + b_im * in_re[1];
    }
  }
};

double op_norm_psd_2x2(const ComplexMatrix& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double b = std::abs(m(0, 1));
  return 0.5 * (a + d + std::sqrt((a - d) * (a - d) + 4.0 * b * b));
}

QubitState draw_initial(const InitialState& init, std::mt19937_64& rng) {
  const auto& w = init.weights();
  if (w.size() == 1) return init.states().front();
  const double r = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (r < acc) return init.states()[i];
  }
  return init.states().back();
}

// Runs `n_traj` trajectories in fixed-size chunks; `body(index, chunk)` is
// invoked for every trajectory, chunk-local state is merged by the caller
// in chunk order so results are independent of the worker count.
template <typename ChunkState, typename Body>
std::vector<ChunkState> run_chunked(long long n_traj, unsigned threads, const ChunkState& prototype,
                                    Body body) {
  const std::size_t n = static_cast<std::size_t>(n_traj);
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkState> chunks(n_chunks, prototype);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t c = next.fetch_add(1); c < n_chunks && !failed; c = next.fetch_add(1)) {
      try {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) body(i, chunks[c]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  unsigned n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
  n_threads = std::clamp<unsigned>(n_threads, 1, static_cast<unsigned>(std::max<std::size_t>(n_chunks, 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return chunks;
}

struct Moments {
  double k;
  std::optional<double> q;
};

Moments count_moments(std::span<const long long> counts, double t) {
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (long long k : counts) mean += static_cast<double>(k);
  mean /= n;
  double ss = 0.0;
  for (long long k : counts) ss += (k - mean) * (k - mean);
  const double var = counts.size() > 1 ? ss / (n - 1.0) : 0.0;
  Moments m{mean / t, std::nullopt};
  if (mean > 0.0) m.q = var / mean - 1.0;
  return m;
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

InitialState InitialState::ground() { return pure({cplx{1.0, 0.0}, cplx{0.0, 0.0}}); }
InitialState InitialState::excited() { return pure({cplx{0.0, 0.0}, cplx{1.0, 0.0}}); }

InitialState InitialState::pure(const QubitState& psi) {
  const double n = std::sqrt(std::norm(psi[0]) + std::norm(psi[1]));
  if (!(n > 0.0)) throw std::invalid_argument("InitialState::pure: zero state");
  InitialState out;
  out.weights_ = {1.0};
  out.states_ = {QubitState{psi[0] / n, psi[1] / n}};
  return out;
}

InitialState InitialState::mixture(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("InitialState::mixture: qubit state required");
  const EigenDecomposition dec = eig(rho.matrix());
  InitialState out;
  for (std::size_t i = 0; i < 2; ++i) {
    const double w = dec.eigenvalues[i].real();
    if (w <= 1e-14) continue;
    const CVector v = dec.right_vectors.column(i);
    out.weights_.push_back(w);
    out.states_.push_back({v[0], v[1]});
  }
  const double total = std::accumulate(out.weights_.begin(), out.weights_.end(), 0.0);
  for (auto& w : out.weights_) w /= total;
  return out;
}

DensityMatrix InitialState::density_matrix() const {
  ComplexMatrix m(2, 2);
  for (std::size_t k = 0; k < weights_.size(); ++k)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        m(i, j) += weights_[k] * states_[k][i] * std::conj(states_[k][j]);
  m(0, 1) = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  m(1, 0) = std::conj(m(0, 1));
  for (std::size_t i = 0; i < 2; ++i) m(i, i) = m(i, i).real();
  const double tr = m.trace().real();
  for (std::size_t i = 0; i < 2; ++i) m(i, i) /= tr;
  return DensityMatrix(std::move(m));
}

double max_time_step(const Unraveling& u) {
  const double norm = op_norm_psd_2x2(u.jump.adjoint() * u.jump);
  return norm > 0.0 ? 0.05 / norm : std::numeric_limits<double>::infinity();
}

double default_time_step(const AtomParams& p) {
  p.validate();
  return 1e-3 / std::max({p.gamma, std::abs(p.omega), std::norm(p.alpha)});
}

TrajectoryRecord simulate_trajectory(const Unraveling& u, double t, double dt, std::uint64_t seed,
                                     const InitialState& init,
                                     const std::vector<double>& sample_times) {
  u.validate();
  if (u.dim() != 2) throw std::invalid_argument("simulate_trajectory: qubit unraveling required");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("simulate_trajectory: t must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("simulate_trajectory: dt must be > 0");

  const long long n_steps = t == 0.0 ? 0 : std::max<long long>(1, std::llround(t / dt));
  const double step = n_steps == 0 ? dt : t / static_cast<double>(n_steps);
  if (step > max_time_step(u) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "simulate_trajectory: dt = " << step << " exceeds 0.05/||L^dag L|| = " << max_time_step(u);
    throw std::invalid_argument(msg.str());
  }

  std::vector<std::pair<long long, std::size_t>> sample_steps;
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double ts = sample_times[i];
    if (!(ts >= 0.0) || ts > t * (1.0 + 1e-12))
      throw std::invalid_argument("simulate_trajectory: sample time outside [0, t]");
    sample_steps.emplace_back(std::min(n_steps, std::llround(ts / step)), i);
  }
  std::sort(sample_steps.begin(), sample_steps.end());

  const Mat2 prop(expm((-kI) * effective_hamiltonian(u), step));
  const Mat2 jump(u.jump);

  std::mt19937_64 rng(seed);
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.t = t;
  rec.dt = step;
  rec.samples.resize(sample_times.size());

  const QubitState psi0 = draw_initial(init, rng);
  double re[2] = {psi0[0].real(), psi0[1].real()};
  double im[2] = {psi0[0].imag(), psi0[1].imag()};
  double nre[2], nim[2];

  std::size_t next_sample = 0;
  auto record_samples = [&](long long k) {
    while (next_sample < sample_steps.size() && sample_steps[next_sample].first == k) {
      rec.samples[sample_steps[next_sample].second] = {cplx{re[0], im[0]}, cplx{re[1], im[1]}};
      ++next_sample;
    }
  };
  record_samples(0);

  for (long long k = 1; k <= n_steps; ++k) {
    prop.apply(re, im, nre, nim);
    const double kept = nre[0] * nre[0] + nim[0] * nim[0] + nre[1] * nre[1] + nim[1] * nim[1];
    const double p_jump = 1.0 - kept;
    const double r = uniform01(rng);
    if (r < p_jump) {
      jump.apply(re, im, nre, nim);
      const double n2 = nre[0] * nre[0] + nim[0] * nim[0] + nre[1] * nre[1] + nim[1] * nim[1];
      if (!(n2 > 0.0)) {
        std::ostringstream msg;
        msg << "simulate_trajectory: jump on a state annihilated by L at t=" << k * step;
        throw NumericalError(msg.str());
      }
      const double inv = 1.0 / std::sqrt(n2);
      for (int i = 0; i < 2; ++i) {
        re[i] = nre[i] * inv;
        im[i] = nim[i] * inv;
      }
      rec.jump_times.push_back(static_cast<double>(k) * step);
    } else {
      const double inv = 1.0 / std::sqrt(kept);
      for (int i = 0; i < 2; ++i) {
        re[i] = nre[i] * inv;
        im[i] = nim[i] * inv;
      }
    }
    record_samples(k);
  }
  rec.final_state = {cplx{re[0], im[0]}, cplx{re[1], im[1]}};
  return rec;
}

void CountHistogram::add(long long k, long long occurrences) {
  counts[k] += occurrences;
  n_traj += occurrences;
}

void CountHistogram::merge(const CountHistogram& other) {
  for (const auto& [k, c] : other.counts) add(k, c);
}

void CountHistogram::write_csv(std::ostream& out) const {
  out << "K,count\n";
  for (const auto& [k, c] : counts) out << k << ',' << c << '\n';
}

EnsembleResult ensemble_statistics(const Unraveling& u, double t, double dt, long long n_traj,
                                   std::uint64_t master_seed, const EnsembleOptions& options) {
  if (n_traj < 2) throw std::invalid_argument("ensemble_statistics: n_traj must be >= 2");
  if (!(t > 0.0)) throw std::invalid_argument("ensemble_statistics: t must be > 0");

  std::vector<long long> counts(static_cast<std::size_t>(n_traj));
  run_chunked(n_traj, options.threads, 0, [&](std::size_t i, int&) {
    const TrajectoryRecord rec = simulate_trajectory(u, t, dt, trajectory_seed(master_seed, i), options.init);
    counts[i] = static_cast<long long>(rec.jump_times.size());
  });

  EnsembleResult out;
  out.histogram.t = t;
  for (long long k : counts) out.histogram.add(k);
  const Moments m = count_moments(counts, t);
  out.k_hat = m.k;
  out.q_hat = m.q;

  std::mt19937_64 rng(trajectory_seed(master_seed, kBootstrapStream));
  std::vector<double> boot_k;
  std::vector<double> boot_q;
  std::vector<long long> resample(counts.size());
  for (int b = 0; b < options.bootstrap_resamples; ++b) {
    for (auto& k : resample) {
      const auto idx = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(counts.size()));
      k = counts[std::min(idx, counts.size() - 1)];
    }
    const Moments bm = count_moments(resample, t);
    boot_k.push_back(bm.k);
    if (bm.q) boot_q.push_back(*bm.q);
  }
  out.se_k = sample_sd(boot_k);
  if (out.q_hat && boot_q.size() >= 2) out.se_q = sample_sd(boot_q);
  return out;
}

std::vector<ComplexMatrix> ensemble_average_state(const Unraveling& u, double t, double dt,
                                                  long long n_traj, std::uint64_t master_seed,
                                                  const std::vector<double>& sample_times,
                                                  const EnsembleOptions& options) {
  if (n_traj < 1) throw std::invalid_argument("ensemble_average_state: n_traj must be >= 1");
  const std::vector<ComplexMatrix> zero(sample_times.size(), ComplexMatrix(2, 2));
  auto chunks = run_chunked(n_traj, options.threads, zero,
                            [&](std::size_t i, std::vector<ComplexMatrix>& acc) {
                              const TrajectoryRecord rec = simulate_trajectory(
                                  u, t, dt, trajectory_seed(master_seed, i), options.init, sample_times);
                              for (std::size_t s = 0; s < sample_times.size(); ++s) {
                                const QubitState& psi = rec.samples[s];
                                for (std::size_t a = 0; a < 2; ++a)
                                  for (std::size_t b = 0; b < 2; ++b)
                                    acc[s](a, b) += psi[a] * std::conj(psi[b]);
                              }
                            });
  std::vector<ComplexMatrix> mean = zero;
  for (const auto& chunk : chunks)
    for (std::size_t s = 0; s < mean.size(); ++s) mean[s] += chunk[s];
  for (auto& m : mean) m *= cplx{1.0 / static_cast<double>(n_traj), 0.0};
  return mean;
}

BiasedStatistics biased_statistics(const CountHistogram& hist, double s) {
  if (hist.counts.empty() || hist.n_traj <= 0)
    throw std::invalid_argument("biased_statistics: empty histogram");
  if (!std::isfinite(s)) throw std::invalid_argument("biased_statistics: s must be finite");
  if (!(hist.t > 0.0)) throw std::invalid_argument("biased_statistics: histogram duration must be > 0");

  // Shift exponents so the largest per-trajectory weight is 1.
  const long long k_ref = s >= 0.0 ? hist.counts.begin()->first : hist.counts.rbegin()->first;
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  double sum_wk = 0.0;
  for (const auto& [k, c] : hist.counts) {
    const double w = std::exp(-s * static_cast<double>(k - k_ref));
    sum_w += w * static_cast<double>(c);
    sum_w2 += w * w * static_cast<double>(c);
    sum_wk += w * static_cast<double>(c) * static_cast<double>(k);
  }
  BiasedStatistics out;
  out.effective_sample_size = sum_w * sum_w / sum_w2;
  if (out.effective_sample_size < 10.0) {
    std::ostringstream msg;
    msg << "biased_statistics: effective sample size " << out.effective_sample_size
        << " below 10 at s=" << s;
    throw NumericalError(msg.str());
  }
  const double mean = sum_wk / sum_w;
  double spread = 0.0;
  double spread_w2 = 0.0;
  for (const auto& [k, c] : hist.counts) {
    const double w = std::exp(-s * static_cast<double>(k - k_ref));
    const double dev2 = (static_cast<double>(k) - mean) * (static_cast<double>(k) - mean);
    spread += w * static_cast<double>(c) * dev2;
    spread_w2 += w * w * static_cast<double>(c) * dev2;
  }
  // Reliability-weight correction; reduces to the n/(n-1) factor at s = 0.
  const double var = spread / sum_w * (sum_w * sum_w / (sum_w * sum_w - sum_w2));
  out.k_s = mean / hist.t;
  out.q_s = mean > 0.0 ? var / mean - 1.0 : std::numeric_limits<double>::quiet_NaN();
  out.se_k_s = std::sqrt(spread_w2) / sum_w / hist.t;
  return out;
}

}  // namespace jumpfcs
