#pragma once

// Unravelings of the resonance-fluorescence master equation for a two-level
// atom. Basis ordering is |g> = 0, |e> = 1, so sigma_minus = |g><e| has its
// single nonzero entry at (0, 1).

#include <string>

#include "jumpfcs/linalg.hpp"

namespace jumpfcs {

/// gamma: spontaneous decay rate (> 0). omega: real Rabi frequency.
/// alpha: coherent-beam amplitude in sqrt(rate) units; may be complex.
struct AtomParams {
  double gamma = 1.0;
  double omega = 0.0;
  cplx alpha = 0.0;

  void validate() const;
  bool operator==(const AtomParams&) const = default;
};

/// A Hamiltonian together with a single jump operator. The pair fixes both
/// the master equation and the photodetection scheme.
struct Unraveling {
  ComplexMatrix hamiltonian;
  ComplexMatrix jump;
  std::string label;

  std::size_t dim() const { return hamiltonian.rows(); }
  void validate() const;
};

ComplexMatrix sigma_minus();
ComplexMatrix sigma_plus();

/// H = Omega (s+ + s-), L = sqrt(gamma) s-. The alpha field is ignored.
Unraveling standard_unraveling(const AtomParams& p);

/// H = (Omega - sqrt(gamma) alpha / 2) s+ + h.c., L = sqrt(gamma) s- + i alpha.
/// Generates the same master equation as standard_unraveling(p).
Unraveling shifted_unraveling(const AtomParams& p);

/// Chiral-waveguide detection with only the guided beam driving the atom:
/// H = sqrt(gamma) alpha / 2 s+ + h.c., L = sqrt(gamma) s- + i alpha.
Unraveling waveguide_unraveling(double gamma, cplx alpha);

/// L -> L + chi, H -> H - (i/2)(conj(chi) L - chi L^dagger).
/// Leaves the Lindblad generator unchanged; changes the jump statistics.
Unraveling gauge_shift(const Unraveling& u, cplx chi);

/// Scale used to set absolute tolerances: max(||H||_max, ||L^dagger L||_max).
double rate_scale(const Unraveling& u);

}  // namespace jumpfcs
