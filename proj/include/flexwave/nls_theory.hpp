#pragma once

#include <vector>

#include "flexwave/dirichlet_neumann.hpp"
#include "flexwave/dispersion.hpp"
#include "flexwave/spectral_grid.hpp"

namespace flexwave {

// Constants of the cubic NLS reduction at the bifurcation point.
struct NlsCoefficients {
  double a3_1 = 0.0;
  double a3_2 = 0.0;
  double a4_1 = 0.0;
  double a4_2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double gpp_k0 = 0.0;
  double alpha_nls = 0.0;
  double nu_nls = 0.0;
  double c_nls = 0.0;

  // 1/2 A3 + A4; negative in the focussing regime.
  double focussing() const noexcept { return 0.5 * a3 + a4; }
};

NlsCoefficients nls_coefficients(const WaveContext& ctx);

struct Threshold {
  double k0_star = 0.0;
  double gamma_star = 0.0;
};

// Sign change of k0 -> 1/2 A3 + A4 on [1, 1000].
Threshold focussing_threshold();

// zeta(x) = a sech(b x) with a = alpha (-3 Q / g'')^{1/2}, b = -3 alpha Q / g'',
// Q = 1/2 A3 + A4. Throws DomainError when Q >= 0 (defocussing).
double zeta_nls(double x, const NlsCoefficients& c);
double zeta_nls_amplitude(const NlsCoefficients& c);
double zeta_nls_rate(const NlsCoefficients& c);
// Closed form of int zeta^2 = 2 a^2 / b.
double zeta_nls_norm2(const NlsCoefficients& c);

// Max-norm residual of -1/4 g'' z'' - 2 nu_nls z + 3/2 Q z^3 on a periodic
// window [-l, l) with spectral differentiation.
double soliton_residual(const NlsCoefficients& c, double half_length, std::size_t n_points);

// eta*_alpha sampled on the grid, with carrier cos(k0 x + phase) (phase = 0 puts
// a crest at x = 0, phase = pi a trough). Throws DomainError if zeta(alpha l) >= 1e-12.
PeriodicProfile test_profile(double alpha, const WaveContext& ctx, const NlsCoefficients& c,
                             const Grid& grid, double phase = 0.0);

// Root of nu0 L(eta*_alpha) = mu on the branch continuous from alpha = 0, or,
// when mu exceeds the first maximum of the map, the alpha of that maximum with
// past_fold set and fold_mu holding the maximum.
struct AlphaSolve {
  double alpha = 0.0;
  bool past_fold = false;
  double fold_mu = 0.0;
};
AlphaSolve solve_alpha(double mu, const WaveContext& ctx, const NlsCoefficients& c, const Grid& grid,
                       const DnConfig& cfg = {}, double phase = 0.0);

// Solves nu0 L(eta*_alpha) = mu on the branch continuous from alpha = 0. Throws
// SolverError when mu exceeds the first maximum of the map.
double alpha_from_mu(double mu, const WaveContext& ctx, const NlsCoefficients& c, const Grid& grid,
                     const DnConfig& cfg = {}, double phase = 0.0);

}  // namespace flexwave
