#include "mwht/debye.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwht/constants.hpp"
#include "mwht/error.hpp"

namespace mwht {

namespace {

void require_positive_frequency(double f) {
  if (!(f > 0.0) || !std::isfinite(f))
    throw DomainError("frequency must be positive and finite, got " + std::to_string(f));
}

}  // namespace

void DebyeParams::validate() const {
  if (!(eps_inf >= 1.0)) throw DomainError("Debye eps_inf must be >= 1");
  if (!(delta_eps >= 0.0)) throw DomainError("Debye delta_eps must be >= 0");
  if (!(sigma_s >= 0.0)) throw DomainError("Debye sigma_s must be >= 0");
  if (!(tau > 0.0)) throw DomainError("Debye tau must be > 0");
  if (!std::isfinite(eps_inf) || !std::isfinite(delta_eps) || !std::isfinite(sigma_s) ||
      !std::isfinite(tau))
    throw DomainError("Debye parameters must be finite");
}

std::complex<double> debye_complex_permittivity(const DebyeParams& p, double frequency) {
  require_positive_frequency(frequency);
  const double w = 2.0 * constants::pi * frequency;
  const std::complex<double> j{0.0, 1.0};
  return p.eps_inf + p.delta_eps / (1.0 + j * w * p.tau) + p.sigma_s / (j * w * constants::eps0);
}

double effective_conductivity(const DebyeParams& p, double frequency) {
  require_positive_frequency(frequency);
  const double w = 2.0 * constants::pi * frequency;
  // Closed form of -Im(eps) w eps0; keeps sigma_eff >= sigma_s exactly.
  const double wt = w * p.tau;
  return p.sigma_s + p.delta_eps * wt / (1.0 + wt * wt) * w * constants::eps0;
}

DebyeParams scale_debye(const DebyeParams& p, double fraction) {
  if (!(fraction > 0.0) || !(fraction <= 1.0))
    throw DomainError("scale fraction must lie in (0, 1], got " + std::to_string(fraction));
  DebyeParams out = p;
  out.eps_inf = std::max(1.0, p.eps_inf * fraction);
  out.delta_eps = p.delta_eps * fraction;
  out.sigma_s = p.sigma_s * fraction;
  return out;
}

double attenuation_constant(const DebyeParams& p, double frequency) {
  const auto eps = debye_complex_permittivity(p, frequency);
  const double w = 2.0 * constants::pi * frequency;
  return -std::sqrt(eps).imag() * w / constants::c0;
}

}  // namespace mwht
