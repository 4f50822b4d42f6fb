#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "flexwave/errors.hpp"
#include "flexwave/functionals.hpp"
#include "flexwave/nls_theory.hpp"

using namespace flexwave;
using Real = boost::multiprecision::cpp_bin_float_50;

namespace {

// Second evaluation of the coefficient formulas in 50-digit arithmetic.
struct Oracle {
  Real a3_1, a3_2, a4_1, a4_2, a3, a4, gpp, alpha, nu_nls, c_nls;
};

Real f(const Real& k) { return k / tanh(k); }
Real fp(const Real& k) { return 1 / tanh(k) - k / (sinh(k) * sinh(k)); }
Real fpp(const Real& k) {
  const Real s2 = 1 / (sinh(k) * sinh(k));
  return -2 * s2 + 2 * k * s2 / tanh(k);
}

Oracle oracle(double k0d) {
  const Real k0 = k0d;
  const Real gamma = fp(k0) / (k0 * k0 * k0 * (4 * f(k0) - k0 * fp(k0)));
  const Real nu2 = 4 / (4 * f(k0) - k0 * fp(k0));
  auto g = [&](const Real& k) { return 1 + gamma * k * k * k * k - nu2 * (k == 0 ? Real(1) : f(k)); };
  Oracle o;
  o.a3_1 = nu2 * f(2 * k0) * f(k0) + nu2 * f(k0) * f(k0) / 2 - 3 * nu2 * k0 * k0 / 2;
  o.a3_2 = nu2 * f(k0) + nu2 * f(k0) * f(k0) / 2 - nu2 * k0 * k0 / 2;
  o.a4_1 = -Real(5) / 12 * gamma * pow(k0, 6);
  o.a4_2 = f(k0) * f(k0) * (f(2 * k0) + 2) / 6 - k0 * k0 * f(k0) / 2;
  o.a3 = -o.a3_1 * o.a3_1 / (3 * g(2 * k0)) - 2 * o.a3_2 * o.a3_2 / (3 * g(Real(0)));
  o.a4 = o.a4_1 - nu2 * o.a4_2;
  o.gpp = 12 * gamma * k0 * k0 - nu2 * fpp(k0);
  o.alpha = 2 / (sqrt(nu2) * f(k0));
  const Real q = o.a3 / 2 + o.a4;
  o.nu_nls = -Real(9) / 8 * o.alpha * o.alpha * q * q / o.gpp;
  o.c_nls = -Real(3) / 4 * o.alpha * o.alpha * o.alpha * q * q / o.gpp;
  return o;
}

void match(double v, const Real& ref) { CHECK(v == doctest::Approx(ref.convert_to<double>()).epsilon(1e-11)); }

}  // namespace

TEST_CASE("coefficients match an extended-precision re-evaluation") {
  for (double k0 : {0.3, 1.0, 7.0}) {
    const NlsCoefficients c = nls_coefficients(WaveContext::from_k0(k0));
    const Oracle o = oracle(k0);
    match(c.a3_1, o.a3_1);
    match(c.a3_2, o.a3_2);
    match(c.a4_1, o.a4_1);
    match(c.a4_2, o.a4_2);
    match(c.a3, o.a3);
    match(c.a4, o.a4);
    match(c.gpp_k0, o.gpp);
    match(c.alpha_nls, o.alpha);
    match(c.nu_nls, o.nu_nls);
    match(c.c_nls, o.c_nls);
  }
}

TEST_CASE("signs and limits") {
  for (double k0 : {0.05, 0.5, 1.0, 10.0, 100.0, 300.0}) {
    const NlsCoefficients c = nls_coefficients(WaveContext::from_k0(k0));
    CHECK(c.a3 <= 0.0);
    CHECK(c.gpp_k0 > 0.0);
    CHECK(c.nu_nls <= 0.0);
    CHECK(c.c_nls <= 0.0);
  }
  CHECK(std::abs(nls_coefficients(WaveContext::from_k0(0.1)).a4 + 0.5) < 0.01);
  CHECK(nls_coefficients(WaveContext::from_k0(1.0)).focussing() < 0.0);
}

TEST_CASE("focussing threshold") {
  const Threshold t = focussing_threshold();
  CHECK(std::abs(t.k0_star - 177.33) < 0.5);
  CHECK(t.gamma_star == doctest::Approx(3.37e-10).epsilon(0.03));
  CHECK(nls_coefficients(WaveContext::from_k0(10.0)).focussing() < 0.0);
  CHECK(nls_coefficients(WaveContext::from_k0(300.0)).focussing() > 0.0);
}

TEST_CASE("zeta_NLS") {
  const NlsCoefficients c = nls_coefficients(WaveContext::from_k0(1.0));
  const double q = c.focussing();
  CHECK(zeta_nls(0.0, c) == doctest::Approx(c.alpha_nls * std::sqrt(-3.0 * q / c.gpp_k0)).epsilon(1e-14));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 20; ++i) {
    const double x = u(rng);
    CHECK(zeta_nls(x, c) == zeta_nls(-x, c));
  }
  const double b = zeta_nls_rate(c);
  CHECK(soliton_residual(c, 40.0 / b, 512) < 1e-8);
  // Closed-form L2 norm against trapezoidal quadrature.
  const double l = 40.0 / b;
  const int n = 20000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = zeta_nls(-l + 2.0 * l * i / n, c);
    s += z * z;
  }
  CHECK(s * 2.0 * l / n == doctest::Approx(zeta_nls_norm2(c)).epsilon(1e-10));
  CHECK_THROWS_AS(zeta_nls(0.0, nls_coefficients(WaveContext::from_k0(300.0))), DomainError);
}

TEST_CASE("test profile") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  const NlsCoefficients c = nls_coefficients(ctx);
  const Grid grid(1200.0, 16384);
  const PeriodicProfile zero = test_profile(0.0, ctx, c, grid);
  CHECK(zero.max_abs() == 0.0);
  const double alpha = 0.002;
  const PeriodicProfile eta = test_profile(alpha, ctx, c, grid);
  CHECK(eta.max_abs() == doctest::Approx(alpha * zeta_nls(0.0, c)).epsilon(0.01));
  // K2 against its leading order 1/4 (1 + gamma k0^4) alpha ||zeta||^2.
  const double k2 = eval_K(eta, ctx).k2;
  const double lead = 0.25 * (1.0 + ctx.gamma) * alpha * zeta_nls_norm2(c);
  CHECK(k2 == doctest::Approx(lead).epsilon(0.01));
  CHECK_THROWS_AS(test_profile(0.05, ctx, c, Grid(20.0, 256)), DomainError);
}

TEST_CASE("alpha_from_mu") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  const NlsCoefficients c = nls_coefficients(ctx);
  const Grid grid(2400.0, 32768);
  const DnConfig dn;
  const double a1 = alpha_from_mu(0.001, ctx, c, grid, dn);
  const double a2 = alpha_from_mu(0.002, ctx, c, grid, dn);
  const double a3 = alpha_from_mu(0.003, ctx, c, grid, dn);
  CHECK(a1 < a2);
  CHECK(a2 < a3);
  const double l = eval_L_value(test_profile(a2, ctx, c, grid), dn).value;
  CHECK(ctx.nu0 * l == doctest::Approx(0.002).epsilon(1e-10));
  // Leading order from L2(eta*_alpha) ~ 1/4 f(k0) alpha ||zeta||^2.
  const double lead = 4.0 * 0.001 / (ctx.nu0 * eval_f(1.0).value * zeta_nls_norm2(c));
  CHECK(a1 == doctest::Approx(lead).epsilon(0.05));
  CHECK_THROWS_AS(alpha_from_mu(-1.0, ctx, c, grid, dn), DomainError);
}

TEST_CASE("alpha solve past the fold") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  const NlsCoefficients c = nls_coefficients(ctx);
  const Grid grid(12.0 * 2.0 * 3.141592653589793 / 0.02, 8192);
  const AlphaSolve s = solve_alpha(0.02, ctx, c, grid);
  CHECK(s.past_fold);
  CHECK(s.fold_mu < 0.02);
  CHECK(s.alpha > 0.0);
  CHECK_THROWS_AS(alpha_from_mu(0.02, ctx, c, grid), SolverError);
}
