#include "flexwave/nls_theory.hpp"

#include <cmath>
#include <sstream>

#include "flexwave/errors.hpp"

namespace flexwave {

NlsCoefficients nls_coefficients(const WaveContext& ctx) {
  const double k0 = ctx.k0;
  const double nu2 = ctx.nu0 * ctx.nu0;
  const double f1 = eval_f(k0).value;
  const double f2 = eval_f(2.0 * k0).value;

  NlsCoefficients c;
  c.a3_1 = nu2 * f2 * f1 + 0.5 * nu2 * f1 * f1 - 1.5 * nu2 * k0 * k0;
  c.a3_2 = nu2 * f1 + 0.5 * nu2 * f1 * f1 - 0.5 * nu2 * k0 * k0;
  c.a4_1 = -(5.0 / 12.0) * ctx.gamma * std::pow(k0, 6);
  c.a4_2 = f1 * f1 * (f2 + 2.0) / 6.0 - 0.5 * k0 * k0 * f1;
  const double g2k = eval_g(2.0 * k0, ctx).value;
  const double g0 = eval_g(0.0, ctx).value;
  c.a3 = -c.a3_1 * c.a3_1 / (3.0 * g2k) - 2.0 * c.a3_2 * c.a3_2 / (3.0 * g0);
  c.a4 = c.a4_1 - nu2 * c.a4_2;
  c.gpp_k0 = eval_g(k0, ctx).d2;
  c.alpha_nls = 2.0 / (ctx.nu0 * f1);
  const double q = c.focussing();
  c.nu_nls = -(9.0 / 8.0) * c.alpha_nls * c.alpha_nls * q * q / c.gpp_k0;
  c.c_nls = -0.75 * std::pow(c.alpha_nls, 3) * q * q / c.gpp_k0;
  return c;
}

namespace {

double focussing_at(double k0) { return nls_coefficients(WaveContext::from_k0(k0)).focussing(); }

}  // namespace

Threshold focussing_threshold() {
  // Log-spaced scan, then bisection on the first bracket.
  const int samples = 200;
  double prev_k = 1.0;
  double prev_q = focussing_at(prev_k);
  for (int i = 1; i <= samples; ++i) {
    const double k = std::pow(1000.0, static_cast<double>(i) / samples);
    const double q = focussing_at(k);
    if ((prev_q < 0.0) != (q < 0.0)) {
      double lo = prev_k;
      double hi = k;
      const bool lo_negative = prev_q < 0.0;
      while (hi - lo > 1e-9 * hi) {
        const double mid = 0.5 * (lo + hi);
        if ((focussing_at(mid) < 0.0) == lo_negative) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      Threshold t;
      t.k0_star = 0.5 * (lo + hi);
      t.gamma_star = gamma0_from_k0(t.k0_star);
      return t;
    }
    prev_k = k;
    prev_q = q;
  }
  throw SolverError("focussing_threshold: 1/2 A3 + A4 has no sign change on [1, 1000]");
}

double zeta_nls_amplitude(const NlsCoefficients& c) {
  const double q = c.focussing();
  if (!(q < 0.0)) {
    std::ostringstream msg;
    msg << "defocussing regime: 1/2 A3 + A4 = " << q << " >= 0, no homoclinic solution";
    throw DomainError(msg.str());
  }
  return c.alpha_nls * std::sqrt(-3.0 * q / c.gpp_k0);
}

double zeta_nls_rate(const NlsCoefficients& c) {
  zeta_nls_amplitude(c);
  return -3.0 * c.alpha_nls * c.focussing() / c.gpp_k0;
}

double zeta_nls(double x, const NlsCoefficients& c) {
  const double a = zeta_nls_amplitude(c);
  const double bx = std::abs(zeta_nls_rate(c) * x);
  // sech written to avoid overflow of cosh
  const double e = std::exp(-bx);
  return a * 2.0 * e / (1.0 + e * e);
}

double zeta_nls_norm2(const NlsCoefficients& c) {
  const double a = zeta_nls_amplitude(c);
  return 2.0 * a * a / zeta_nls_rate(c);
}

double soliton_residual(const NlsCoefficients& c, double half_length, std::size_t n_points) {
  const Grid grid(half_length, n_points);
  const PeriodicProfile z = PeriodicProfile::sample(grid, [&](double x) { return zeta_nls(x, c); });
  const PeriodicProfile zxx = derivative(z, 2);
  const double q = c.focussing();
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = -0.25 * c.gpp_k0 * zxx[i] - 2.0 * c.nu_nls * z[i] + 1.5 * q * z[i] * z[i] * z[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace flexwave
