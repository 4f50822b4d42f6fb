#include <cmath>
#include <sstream>

#include "flexwave/errors.hpp"
#include "flexwave/functionals.hpp"
#include "flexwave/nls_theory.hpp"

namespace flexwave {

PeriodicProfile test_profile(double alpha, const WaveContext& ctx, const NlsCoefficients& c,
                             const Grid& grid, double phase) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("test_profile: alpha must be >= 0");
  if (alpha == 0.0) return PeriodicProfile::zeros(grid);
  const double tail = zeta_nls(alpha * grid.half_length(), c);
  if (!(tail < 1e-12)) {
    std::ostringstream msg;
    msg << "test_profile: domain too short, zeta_NLS(alpha l) = " << tail << " (truncation)";
    throw DomainError(msg.str());
  }
  const double second = 0.5 * alpha * alpha * c.a3_1 / eval_g(2.0 * ctx.k0, ctx).value;
  const double mean = 0.5 * alpha * alpha * c.a3_2 / eval_g(0.0, ctx).value;
  const double k0 = ctx.k0;
  return PeriodicProfile::sample(grid, [&](double x) {
    const double z = zeta_nls(alpha * x, c);
    const double th = k0 * x + phase;
    return alpha * z * std::cos(th) - second * z * z * std::cos(2.0 * th) - mean * z * z;
  });
}

namespace {
constexpr double kGrowth = 1.1;
}

AlphaSolve solve_alpha(double mu, const WaveContext& ctx, const NlsCoefficients& c, const Grid& grid,
                       const DnConfig& cfg, double phase) {
  if (!(mu > 0.0)) throw DomainError("alpha_from_mu: mu must be positive");
  auto residual = [&](double alpha) {
    return ctx.nu0 * eval_L_value(test_profile(alpha, ctx, c, grid, phase), cfg).value - mu;
  };
  // Leading order: L(eta*_alpha) ~ 1/4 f(k0) alpha ||zeta_NLS||_0^2. alpha(mu) is
  // the branch continuous from alpha = 0, so the bracket grows in small steps
  // and stops at the first fold of the map.
  const double guess = 4.0 * mu / (ctx.nu0 * eval_f(ctx.k0).value * zeta_nls_norm2(c));
  double lo = 0.0;
  double f_lo = -mu;
  double hi = 0.5 * guess;
  double f_hi = 0.0;
  try {
    f_hi = residual(hi);
    int grow = 0;
    while (f_hi <= 0.0) {
      if (f_hi < f_lo) {
        // Past a local maximum: locate it by golden section on [prev, hi].
        double a = lo / kGrowth;
        double b = hi;
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - r * (b - a);
        double x2 = a + r * (b - a);
        double f1 = residual(x1);
        double f2 = residual(x2);
        for (int it = 0; it < 40 && b - a > 1e-6 * b; ++it) {
          if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = residual(x1);
          } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = residual(x2);
          }
        }
        const double peak = f1 > f2 ? x1 : x2;
        const double f_peak = std::max(f1, f2);
        if (f_peak <= 0.0) return AlphaSolve{peak, true, f_peak + mu};
        hi = peak;
        f_hi = f_peak;
        break;
      }
      lo = hi;
      f_lo = f_hi;
      hi *= kGrowth;
      f_hi = residual(hi);
      if (++grow > 200) throw SolverError("alpha_from_mu: no bracket");
    }
  } catch (const DomainError& e) {
    std::ostringstream msg;
    msg << "alpha_from_mu: bracket failure for mu = " << mu << " (" << e.what() << "); try a smaller mu";
    throw SolverError(msg.str());
  }
  // Illinois regula falsi on the bracket [lo, hi], where the map is increasing.
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double a = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    const double fa = residual(a);
    if (std::abs(fa) < 1e-10 * mu) return AlphaSolve{a, false, 0.0};
    if (fa < 0.0) {
      lo = a;
      f_lo = fa;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = a;
      f_hi = fa;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  throw SolverError("alpha_from_mu: no convergence");
}

double alpha_from_mu(double mu, const WaveContext& ctx, const NlsCoefficients& c, const Grid& grid,
                     const DnConfig& cfg, double phase) {
  const AlphaSolve s = solve_alpha(mu, ctx, c, grid, cfg, phase);
  if (s.past_fold) {
    std::ostringstream msg;
    msg << "alpha_from_mu: mu = " << mu << " exceeds the maximum " << s.fold_mu
        << " of nu0 L(eta*_alpha) on the small-amplitude branch (attained at alpha = " << s.alpha
        << "); try a smaller mu";
    throw SolverError(msg.str());
  }
  return s.alpha;
}

}  // namespace flexwave
