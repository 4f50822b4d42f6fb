#pragma once

// Linear dispersion relation for hydroelastic waves on a layer of unit depth:
//   nu(k)^2 = (1 + gamma k^4) / f(k),   f(k) = |k| coth |k|,
// and the bifurcation point (k0, nu0) where nu attains its global minimum.

namespace flexwave {

struct Derivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Parameter bundle tying the dispersion relation to the functionals.
// Invariant: gamma == gamma0(k0), nu0^2 == 4 / (4 f(k0) - k0 f'(k0)).
struct WaveContext {
  double gamma = 0.0;
  double k0 = 0.0;
  double nu0 = 0.0;

  static WaveContext from_k0(double k0);
  static WaveContext from_gamma(double gamma);
};

// f(k) = |k| coth|k| with its first two derivatives. Even in k; uses the
// Taylor series below |k| = 1e-2.
Derivs eval_f(double k);

// Positive phase speed nu(k); nu(0) = 1.
double nu(double k, const WaveContext& ctx);

// gamma0(k0) = f'(k0) / (k0^3 (4 f(k0) - k0 f'(k0))). Throws DomainError for k0 <= 0.
double gamma0_from_k0(double k0);

// Inverse of gamma0_from_k0 by bracketing bisection and Newton polish.
double k0_from_gamma(double gamma);

// g(k) = 1 + gamma k^4 - nu0^2 f(k) >= 0 with double zeros at k = +-k0.
Derivs eval_g(double k, const WaveContext& ctx);

}  // namespace flexwave
