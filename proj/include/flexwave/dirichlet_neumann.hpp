#pragma once

#include <string>
#include <vector>

#include "flexwave/spectral_grid.hpp"

namespace flexwave {

inline constexpr int kMaxExpansionOrder = 6;
// Admissible set U: 1 + min(eta) > kDepthFloor and ||eta||_2 < kBallRadius.
inline constexpr double kDepthFloor = 0.5;
inline constexpr double kBallRadius = 1.0;

struct DnConfig {
  int expansion_order = 4;  // terms G_1..G_M kept beyond G_0
  int oracle_ny = 64;       // Chebyshev intervals in the mapped vertical coordinate
  double cg_tol = 1e-10;
  int cg_max_iter = 200;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

struct DnSolve {
  PeriodicProfile result;
  int iterations = 0;
  double residual = 0.0;  // ||G u - xi||_0 / ||xi||_0
};

bool in_admissible_set(const PeriodicProfile& eta);
void require_admissible(const PeriodicProfile& eta, const std::string& who);

// 2/3-rule projection used by every product in the expansion.
PeriodicProfile dealias(const PeriodicProfile& p);

// |k| tanh|k|.
PeriodicProfile dn_flat(const PeriodicProfile& phi);
// 1/(|k| tanh|k|) with the k = 0 mode sent to zero.
PeriodicProfile dn_flat_inverse(const PeriodicProfile& xi);

// Homogeneous pieces G_j(eta) phi, j = 0..M, of the Taylor expansion of the
// finite-depth operator, with dealiased products.
std::vector<PeriodicProfile> dn_expansion_terms(const PeriodicProfile& eta,
                                                const PeriodicProfile& phi, const DnConfig& cfg);

// Sum of the expansion terms. The first call in a process checks G_1 against
// the elliptic solver and throws ValidationError on mismatch.
PeriodicProfile dn_apply(const PeriodicProfile& eta, const PeriodicProfile& phi,
                         const DnConfig& cfg);

// Direct solve of the Laplace problem in the strip 0 < y < 1 + eta, mapped to
// s = y / (1 + eta); Fourier in x, Chebyshev collocation in s, GMRES with a
// per-mode flat-operator preconditioner.
PeriodicProfile dn_oracle(const PeriodicProfile& eta, const PeriodicProfile& phi,
                          const DnConfig& cfg);

// Zero-mean u with G(eta) u = xi on the dealiased subspace, by conjugate
// gradients preconditioned with the flat inverse. An optional initial guess
// warm-starts the iteration.
DnSolve dn_inverse(const PeriodicProfile& eta, const PeriodicProfile& xi, const DnConfig& cfg,
                   const PeriodicProfile* guess = nullptr);

// dG(eta)[omega] phi, the exact linearisation of the truncated expansion.
PeriodicProfile dn_shape_derivative(const PeriodicProfile& eta, const PeriodicProfile& omega,
                                    const PeriodicProfile& phi, const DnConfig& cfg);

// Same derivative from the classical identity
//   dG[omega] phi = -G(omega Z) - (omega V)_x,
//   Z = (G phi + eta_x phi_x) / (1 + eta_x^2),  V = phi_x - eta_x Z.
// Agrees with dn_shape_derivative up to truncation of the expansion.
PeriodicProfile dn_shape_derivative_identity(const PeriodicProfile& eta,
                                             const PeriodicProfile& omega,
                                             const PeriodicProfile& phi, const DnConfig& cfg);

// L2 gradient in eta of <psi, G(eta) phi> (reverse mode through the expansion).
PeriodicProfile dn_pairing_gradient(const PeriodicProfile& eta, const PeriodicProfile& phi,
                                    const PeriodicProfile& psi, const DnConfig& cfg);

}  // namespace flexwave
