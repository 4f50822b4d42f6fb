#include "flexwave/functionals.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "flexwave/errors.hpp"

namespace flexwave {

namespace {

// Solves the 3x3 system sum_j c_j t_i^{p + 2j} = y_i.
Eigen::Vector3d fit_three(const double (&t)[3], const double (&y)[3], int p) {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a(i, j) = std::pow(t[i], p + 2 * j);
    b(i) = y[i];
  }
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace

KParts eval_K(const PeriodicProfile& eta, const WaveContext& ctx) {
  require_admissible(eta, "eval_K");
  const PeriodicProfile ex = derivative(eta, 1);
  const PeriodicProfile exx = derivative(eta, 2);
  double full = 0.0;
  double quad = 0.0;
  double quart = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double s2 = ex[i] * ex[i];
    const double c2 = exx[i] * exx[i];
    full += eta[i] * eta[i] + ctx.gamma * c2 * std::pow(1.0 + s2, -2.5);
    quad += eta[i] * eta[i] + ctx.gamma * c2;
    quart += s2 * c2;
  }
  const double dx = eta.grid().dx();
  KParts k;
  k.total = 0.5 * full * dx;
  k.k2 = 0.5 * quad * dx;
  k.k4 = -1.25 * ctx.gamma * quart * dx;
  k.k_nl = k.total - k.k2;
  return k;
}

PeriodicProfile grad_K(const PeriodicProfile& eta, const WaveContext& ctx) {
  require_admissible(eta, "grad_K");
  const PeriodicProfile ex = derivative(eta, 1);
  const PeriodicProfile exx = derivative(eta, 2);
  const std::size_t n = eta.size();
  std::vector<double> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 + ex[i] * ex[i];
    a[i] = exx[i] * std::pow(w, -2.5);
    b[i] = ex[i] * exx[i] * exx[i] * std::pow(w, -3.5);
  }
  const PeriodicProfile ta = derivative(PeriodicProfile(eta.grid(), std::move(a)), 2);
  const PeriodicProfile tb = derivative(PeriodicProfile(eta.grid(), std::move(b)), 1);
  return eta + ta * ctx.gamma + tb * (2.5 * ctx.gamma);
}

LValue eval_L_value(const PeriodicProfile& eta, const DnConfig& cfg, const PeriodicProfile* guess) {
  const PeriodicProfile xi = derivative(eta, 1);
  DnSolve s = dn_inverse(eta, xi, cfg, guess);
  const PeriodicProfile gu = dn_apply(eta, s.result, cfg);
  LValue out{inner(xi, s.result) - 0.5 * inner(s.result, gu), s.result, s.iterations};
  return out;
}

double eval_L2(const PeriodicProfile& eta) {
  const Grid& g = eta.grid();
  double acc = 0.0;
  for (std::size_t j = 1; j + 1 < g.spectral_size(); ++j) {
    if (3 * j > g.size()) break;
    acc += 2.0 * eval_f(g.wavenumber(j)).value * std::norm(eta.coeffs()[j]);
  }
  return 0.5 * acc * g.dx();
}

LParts eval_L(const PeriodicProfile& eta, const DnConfig& cfg) {
  LParts out;
  out.total = eval_L_value(eta, cfg).value;
  out.l2 = eval_L2(eta);
  out.l_nl = out.total - out.l2;

  const double t[3] = {1.0, 0.5, 0.25};
  double odd[3];
  double even[3];
  for (int i = 0; i < 3; ++i) {
    const double lp = i == 0 ? out.total : eval_L_value(eta * t[i], cfg).value;
    const double lm = eval_L_value(eta * (-t[i]), cfg).value;
    odd[i] = 0.5 * (lp - lm);
    even[i] = 0.5 * (lp + lm);
  }
  out.l3 = fit_three(t, odd, 3)(0);
  const Eigen::Vector3d e = fit_three(t, even, 2);
  out.l2_fit = e(0);
  out.l4 = e(1);

  DnConfig second = cfg;
  second.expansion_order = 2;
  const PeriodicProfile psi = dn_flat_inverse(dealias(derivative(eta, 1)));
  const std::vector<PeriodicProfile> terms = dn_expansion_terms(eta, psi, second);
  out.l3_expansion = -0.5 * inner(psi, terms[1]);
  out.l4_expansion = 0.5 * inner(terms[1], dn_flat_inverse(terms[1])) - 0.5 * inner(psi, terms[2]);
  return out;
}

LGradient grad_L(const PeriodicProfile& eta, const DnConfig& cfg, const PeriodicProfile* guess) {
  LValue v = eval_L_value(eta, cfg, guess);
  const PeriodicProfile pair = dn_pairing_gradient(eta, v.potential, v.potential, cfg);
  PeriodicProfile g = derivative(v.potential, 1) * -1.0 - pair * 0.5;
  return LGradient{v.value, std::move(g), std::move(v.potential), v.iterations};
}

double eval_E(const PeriodicProfile& eta, const PeriodicProfile& phi, const WaveContext& ctx,
              const DnConfig& cfg) {
  return eval_K(eta, ctx).total + 0.5 * inner(phi, dn_apply(eta, phi, cfg));
}

double eval_I(const PeriodicProfile& eta, const PeriodicProfile& phi) {
  return inner(derivative(eta, 1), phi);
}

namespace {

void check_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    std::ostringstream msg;
    msg << "mu must be positive and finite, got " << mu;
    throw DomainError(msg.str());
  }
}

void check_l(double l) {
  if (!(l > 0.0)) {
    std::ostringstream msg;
    msg << "L(eta) = " << l << " is not positive; J_mu is singular at eta = 0";
    throw DomainError(msg.str());
  }
}

}  // namespace

FunctionalReport eval_J(const PeriodicProfile& eta, double mu, const WaveContext& ctx,
                        const DnConfig& cfg) {
  check_mu(mu);
  const KParts k = eval_K(eta, ctx);
  const LParts l = eval_L(eta, cfg);
  check_l(l.total);
  FunctionalReport r;
  r.mu = mu;
  r.k_total = k.total;
  r.k2 = k.k2;
  r.k4 = k.k4;
  r.k_nl = k.k_nl;
  r.l_total = l.total;
  r.l2 = l.l2;
  r.l3 = l.l3;
  r.l4 = l.l4;
  r.l_nl = l.l_nl;
  r.l3_expansion = l.l3_expansion;
  r.l4_expansion = l.l4_expansion;
  r.j_mu = k.total + mu * mu / l.total;
  r.nu_eta = mu / l.total;
  const PeriodicProfile phi = eval_L_value(eta, cfg).potential * r.nu_eta;
  r.e_value = eval_E(eta, phi, ctx, cfg);
  r.i_value = eval_I(eta, phi);
  r.m_mu = r.j_mu - k.k2 - mu * mu / l.l2;
  r.m_tilde_mu = mu / l.total - mu / l.l2;
  return r;
}

JValue eval_J_with_gradient(const PeriodicProfile& eta, double mu, const WaveContext& ctx,
                            const DnConfig& cfg, const PeriodicProfile* guess) {
  check_mu(mu);
  const KParts k = eval_K(eta, ctx);
  LGradient lg = grad_L(eta, cfg, guess);
  check_l(lg.value);
  const double nu = mu / lg.value;
  return JValue{k.total + mu * mu / lg.value, lg.value, k.total,
                grad_K(eta, ctx) - lg.gradient * (nu * nu), std::move(lg.potential), lg.iterations};
}

PeriodicProfile grad_J(const PeriodicProfile& eta, double mu, const WaveContext& ctx,
                       const DnConfig& cfg) {
  return eval_J_with_gradient(eta, mu, ctx, cfg).gradient;
}

double quartic_band_integral(const PeriodicProfile& eta, const WaveContext& ctx, double delta0) {
  const PeriodicProfile e1 = split_eta1(eta, ctx, delta0).first;
  double acc = 0.0;
  for (double v : e1.values()) acc += v * v * v * v;
  return acc * eta.grid().dx();
}

}  // namespace flexwave
