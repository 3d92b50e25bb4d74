#pragma once

#include <complex>

namespace mwht {

/// Single-pole Debye dispersion of one material.
///
/// Sign convention: time-harmonic quantities carry exp(+j w t) throughout the toolkit,
/// so the permittivity of a lossy medium has a negative imaginary part and a wave
/// travelling in +x behaves as exp(j w t - gamma x) with Re(gamma) > 0.
struct DebyeParams {
  double eps_inf = 1.0;    ///< high-frequency relative permittivity
  double delta_eps = 0.0;  ///< eps_s - eps_inf
  double sigma_s = 0.0;    ///< static conductivity, S/m
  double tau = 1e-12;      ///< relaxation time, s

  double eps_static() const { return eps_inf + delta_eps; }
  void validate() const;

  friend bool operator==(const DebyeParams&, const DebyeParams&) = default;
};

/// eps(w) = eps_inf + delta_eps / (1 + j w tau) + sigma_s / (j w eps0).
std::complex<double> debye_complex_permittivity(const DebyeParams& p, double frequency);

/// sigma_eff = eps''(w) w eps0, with eps'' = -Im eps(w) >= 0.
double effective_conductivity(const DebyeParams& p, double frequency);

/// Multiplies eps_inf, delta_eps and sigma_s by `fraction` (tau is kept) and clamps
/// eps_inf to at least 1.
DebyeParams scale_debye(const DebyeParams& p, double fraction);

/// Plane-wave attenuation constant Re(gamma) in Np/m for a medium with these parameters.
double attenuation_constant(const DebyeParams& p, double frequency);

}  // namespace mwht
