#pragma once

#include "flexwave/dirichlet_neumann.hpp"
#include "flexwave/dispersion.hpp"
#include "flexwave/spectral_grid.hpp"

namespace flexwave {

struct KParts {
  double total = 0.0;
  double k2 = 0.0;
  double k4 = 0.0;
  double k_nl = 0.0;
};

// K(eta) = 1/2 int (eta^2 + gamma eta_xx^2 (1 + eta_x^2)^{-5/2}) by periodic
// trapezoid with spectral derivatives.
KParts eval_K(const PeriodicProfile& eta, const WaveContext& ctx);
PeriodicProfile grad_K(const PeriodicProfile& eta, const WaveContext& ctx);

struct LParts {
  double total = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double l4 = 0.0;
  double l_nl = 0.0;
  // L3, L4 from the G_1, G_2 expansion terms (cross-check of the fit).
  double l3_expansion = 0.0;
  double l4_expansion = 0.0;
  // L2 recovered by the fit; agrees with l2 up to the fit error.
  double l2_fit = 0.0;
};

// Value of L = <eta_x, u> - 1/2 <u, G u> with G u = eta_x.
struct LValue {
  double value = 0.0;
  PeriodicProfile potential;  // u = G(eta)^{-1} eta_x
  int iterations = 0;
};

LValue eval_L_value(const PeriodicProfile& eta, const DnConfig& cfg,
                    const PeriodicProfile* guess = nullptr);

// 1/2 sum f(k) |eta^|^2 over the nonzero dealiased wavenumbers.
double eval_L2(const PeriodicProfile& eta);

// L with its Taylor pieces; L3 and L4 from a fit of t -> L(t eta) at
// t = +-1, +-1/2, +-1/4 (odd and even parts separately).
LParts eval_L(const PeriodicProfile& eta, const DnConfig& cfg);

struct LGradient {
  double value = 0.0;
  PeriodicProfile gradient;
  PeriodicProfile potential;
  int iterations = 0;
};

// L'(eta) = -u_x - 1/2 grad_eta <u, G(eta) u>.
LGradient grad_L(const PeriodicProfile& eta, const DnConfig& cfg, const PeriodicProfile* guess = nullptr);

struct FunctionalReport {
  double k_total = 0.0;
  double k2 = 0.0;
  double k4 = 0.0;
  double k_nl = 0.0;
  double l_total = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double l4 = 0.0;
  double l_nl = 0.0;
  double l3_expansion = 0.0;
  double l4_expansion = 0.0;
  double j_mu = 0.0;
  double nu_eta = 0.0;
  double e_value = 0.0;
  double i_value = 0.0;
  double m_mu = 0.0;
  double m_tilde_mu = 0.0;
  double mu = 0.0;
};

FunctionalReport eval_J(const PeriodicProfile& eta, double mu, const WaveContext& ctx,
                        const DnConfig& cfg);

struct JValue {
  double value = 0.0;
  double l = 0.0;
  double k = 0.0;
  PeriodicProfile gradient;
  PeriodicProfile potential;
  int iterations = 0;
};

// J_mu and J'_mu = K' - (mu/L)^2 L'.
JValue eval_J_with_gradient(const PeriodicProfile& eta, double mu, const WaveContext& ctx,
                            const DnConfig& cfg, const PeriodicProfile* guess = nullptr);
PeriodicProfile grad_J(const PeriodicProfile& eta, double mu, const WaveContext& ctx,
                       const DnConfig& cfg);

// E(eta, phi) = 1/2 int (phi G phi + eta^2 + gamma eta_xx^2 (1+eta_x^2)^{-5/2}), I = int eta_x phi.
double eval_E(const PeriodicProfile& eta, const PeriodicProfile& phi, const WaveContext& ctx,
              const DnConfig& cfg);
double eval_I(const PeriodicProfile& eta, const PeriodicProfile& phi);

// int eta^4 of the band-limited part eta_1.
double quartic_band_integral(const PeriodicProfile& eta, const WaveContext& ctx, double delta0);

}  // namespace flexwave
