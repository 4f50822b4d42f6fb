#include "flexwave/dispersion.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "flexwave/errors.hpp"

namespace flexwave {

namespace {

constexpr double kSeriesSwitch = 1e-2;

// Even Taylor coefficients of k coth k = sum_n c_n k^{2n}.
constexpr std::array<double, 8> kCothSeries = {
    1.0,
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
    4.0 / 18243225.0,
};

Derivs f_series(double a) {
  Derivs out;
  const double a2 = a * a;
  double prev = 0.0;  // a^{2n-2}
  double p = 1.0;     // a^{2n}
  for (std::size_t n = 0; n < kCothSeries.size(); ++n) {
    const double c = kCothSeries[n];
    const double e = 2.0 * static_cast<double>(n);
    out.value += c * p;
    out.d1 += c * e * prev * a;
    out.d2 += c * e * (e - 1.0) * prev;
    prev = p;
    p *= a2;
  }
  return out;
}

// Sign of 4 gamma k^3 f - (1 + gamma k^4) f', the numerator of d(nu^2)/dk.
double speed_slope(double k, double gamma) {
  const Derivs f = eval_f(k);
  return 4.0 * gamma * k * k * k * f.value - (1.0 + gamma * k * k * k * k) * f.d1;
}

double speed_slope_dk(double k, double gamma) {
  const Derivs f = eval_f(k);
  return 12.0 * gamma * k * k * f.value - (1.0 + gamma * k * k * k * k) * f.d2;
}

}  // namespace

Derivs eval_f(double k) {
  const double a = std::abs(k);
  Derivs out;
  if (a < kSeriesSwitch) {
    out = f_series(a);
  } else {
    const double coth = 1.0 / std::tanh(a);
    const double sh = std::sinh(a);
    const double csch2 = std::isinf(sh) ? 0.0 : 1.0 / (sh * sh);
    out.value = a * coth;
    out.d1 = coth - a * csch2;
    out.d2 = 2.0 * csch2 * (a * coth - 1.0);
  }
  if (k < 0.0) out.d1 = -out.d1;
  return out;
}

double nu(double k, const WaveContext& ctx) {
  const double k4 = k * k * k * k;
  return std::sqrt((1.0 + ctx.gamma * k4) / eval_f(k).value);
}

double gamma0_from_k0(double k0) {
  if (!(k0 > 0.0) || !std::isfinite(k0)) {
    std::ostringstream msg;
    msg << "gamma0_from_k0: k0 must be positive and finite, got " << k0;
    throw DomainError(msg.str());
  }
  const Derivs f = eval_f(k0);
  return f.d1 / (k0 * k0 * k0 * (4.0 * f.value - k0 * f.d1));
}

double k0_from_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    std::ostringstream msg;
    msg << "k0_from_gamma: gamma must be positive and finite, got " << gamma;
    throw DomainError(msg.str());
  }
  double lo = 1e-6;
  double hi = 1.0;
  if (speed_slope(lo, gamma) >= 0.0) {
    std::ostringstream msg;
    msg << "k0_from_gamma: no sign change at lower bracket k=" << lo << " for gamma=" << gamma;
    throw SolverError(msg.str());
  }
  int grow = 0;
  while (speed_slope(hi, gamma) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200 || !std::isfinite(hi)) {
      std::ostringstream msg;
      msg << "k0_from_gamma: bracket [1e-06, " << hi << "] has no sign change for gamma="
          << gamma;
      throw SolverError(msg.str());
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (speed_slope(mid, gamma) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  double k = 0.5 * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    const double d = speed_slope_dk(k, gamma);
    if (d == 0.0) break;
    const double next = k - speed_slope(k, gamma) / d;
    if (!(next > lo - 1e-12 * hi && next < hi + 1e-12 * hi)) break;
    k = next;
  }
  return k;
}

Derivs eval_g(double k, const WaveContext& ctx) {
  const Derivs f = eval_f(k);
  const double nu2 = ctx.nu0 * ctx.nu0;
  const double k2 = k * k;
  Derivs g;
  g.value = 1.0 + ctx.gamma * k2 * k2 - nu2 * f.value;
  g.d1 = 4.0 * ctx.gamma * k2 * k - nu2 * f.d1;
  g.d2 = 12.0 * ctx.gamma * k2 - nu2 * f.d2;
  return g;
}

WaveContext WaveContext::from_k0(double k0) {
  WaveContext ctx;
  ctx.gamma = gamma0_from_k0(k0);
  ctx.k0 = k0;
  const Derivs f = eval_f(k0);
  ctx.nu0 = std::sqrt(4.0 / (4.0 * f.value - k0 * f.d1));
  return ctx;
}

WaveContext WaveContext::from_gamma(double gamma) {
  WaveContext ctx;
  ctx.gamma = gamma;
  ctx.k0 = k0_from_gamma(gamma);
  const Derivs f = eval_f(ctx.k0);
  ctx.nu0 = std::sqrt(4.0 / (4.0 * f.value - ctx.k0 * f.d1));
  return ctx;
}

}  // namespace flexwave
