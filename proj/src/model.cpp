#include "jumpfcs/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jumpfcs {

namespace {

constexpr double kHermitianTol = 1e-12;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// c s+ + conj(c) s-
ComplexMatrix transverse_drive(cplx c) {
  ComplexMatrix h(2, 2);
  h(1, 0) = c;
  h(0, 1) = std::conj(c);
  return h;
}

ComplexMatrix shifted_jump(double gamma, cplx alpha) {
  ComplexMatrix l = std::sqrt(gamma) * sigma_minus();
  l += (kI * alpha) * ComplexMatrix::identity(2);
  return l;
}

}  // namespace

void AtomParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    std::ostringstream msg;
    msg << "AtomParams: gamma must be positive and finite (got " << gamma << ")";
    throw std::invalid_argument(msg.str());
  }
  if (!std::isfinite(omega)) throw std::invalid_argument("AtomParams: omega not finite");
  if (!finite(alpha)) throw std::invalid_argument("AtomParams: alpha not finite");
}

void Unraveling::validate() const {
  if (!hamiltonian.is_square() || hamiltonian.empty())
    throw std::invalid_argument("Unraveling: hamiltonian must be square and non-empty");
  if (jump.rows() != hamiltonian.rows() || jump.cols() != hamiltonian.cols())
    throw std::invalid_argument("Unraveling: jump and hamiltonian dimensions differ");
  if (!hamiltonian.all_finite() || !jump.all_finite())
    throw std::invalid_argument("Unraveling: non-finite operator entries");
  const double tol = kHermitianTol * std::max(1.0, hamiltonian.max_abs());
  if (!is_hermitian(hamiltonian, tol))
    throw std::invalid_argument("Unraveling: hamiltonian is not Hermitian");
}

ComplexMatrix sigma_minus() { return ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}; }
ComplexMatrix sigma_plus() { return ComplexMatrix{{0.0, 0.0}, {1.0, 0.0}}; }

Unraveling standard_unraveling(const AtomParams& p) {
  p.validate();
  return {transverse_drive(p.omega), std::sqrt(p.gamma) * sigma_minus(), "standard"};
}

Unraveling shifted_unraveling(const AtomParams& p) {
  p.validate();
  const cplx coeff = p.omega - 0.5 * std::sqrt(p.gamma) * p.alpha;
  return {transverse_drive(coeff), shifted_jump(p.gamma, p.alpha), "shifted"};
}

Unraveling waveguide_unraveling(double gamma, cplx alpha) {
  AtomParams{gamma, 0.0, alpha}.validate();
  const cplx coeff = 0.5 * std::sqrt(gamma) * alpha;
  return {transverse_drive(coeff), shifted_jump(gamma, alpha), "waveguide"};
}

Unraveling gauge_shift(const Unraveling& u, cplx chi) {
  u.validate();
  if (!finite(chi)) throw std::invalid_argument("gauge_shift: chi not finite");
  const std::size_t d = u.dim();
  const ComplexMatrix correction =
      (-0.5 * kI) * (std::conj(chi) * u.jump - chi * u.jump.adjoint());
  Unraveling out{u.hamiltonian + correction, u.jump + chi * ComplexMatrix::identity(d),
                 u.label + "+shift"};
  const double tol = kHermitianTol * std::max(1.0, out.hamiltonian.max_abs());
  if (!is_hermitian(out.hamiltonian, tol))
    throw NumericalError("gauge_shift: transformed Hamiltonian is not Hermitian");
  return out;
}

double rate_scale(const Unraveling& u) {
  const ComplexMatrix ldl = u.jump.adjoint() * u.jump;
  return std::max(u.hamiltonian.max_abs(), ldl.max_abs());
}

}  // namespace jumpfcs
