#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flexwave/errors.hpp"
#include "flexwave/spectral_grid.hpp"

using namespace flexwave;
using std::numbers::pi;

namespace {

PeriodicProfile random_profile(const Grid& g, std::uint64_t seed, int modes = 12) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Complex> c(g.spectral_size());
  for (int j = 1; j <= modes; ++j) c[j] = Complex(n(rng), n(rng)) / double(j * j);
  return PeriodicProfile::from_coeffs(g, std::move(c));
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g(pi, 64);
  CHECK(g.dx() * 64 == doctest::Approx(2 * pi));
  CHECK(g.wavenumber(3) == doctest::Approx(3.0));
  CHECK(g.signed_wavenumber(63) == doctest::Approx(-1.0));
  CHECK_THROWS(Grid(pi, 48));
  CHECK_THROWS(Grid(pi, 8));
  CHECK_THROWS(Grid(-1.0, 64));
}

TEST_CASE("transform pair") {
  const Grid g(pi, 64);
  const PeriodicProfile c = PeriodicProfile::sample(g, [](double x) { return std::cos(3 * x); });
  int nonzero = 0;
  for (const Complex& z : c.coeffs()) nonzero += std::abs(z) > 1e-12;
  CHECK(nonzero == 1);  // the half spectrum holds k = 3; k = -3 is its conjugate
  CHECK(c.full_coeffs().size() == 64);

  const PeriodicProfile r = random_profile(g, 1, 30);
  std::vector<double> back(64);
  g.inverse(r.coeffs(), back);
  double err = 0.0, s_phys = 0.0, s_spec = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    err = std::max(err, std::abs(back[i] - r[i]));
    s_phys += r[i] * r[i];
  }
  for (const Complex& z : r.full_coeffs()) s_spec += std::norm(z);
  CHECK(err < 1e-12);
  CHECK(s_spec == doctest::Approx(s_phys).epsilon(1e-12));
}

TEST_CASE("multipliers") {
  const Grid g(pi, 64);
  const PeriodicProfile p = random_profile(g, 2);
  const PeriodicProfile id = apply_multiplier(p, [](double) { return 1.0; });
  for (std::size_t i = 0; i < 64; ++i) CHECK(id[i] == doctest::Approx(p[i]).epsilon(1e-13));
  const PeriodicProfile c1 = PeriodicProfile::sample(g, [](double x) { return std::cos(x); });
  const PeriodicProfile k2 = apply_multiplier(c1, [](double k) { return k * k; });
  for (std::size_t i = 0; i < 64; ++i) CHECK(k2[i] == doctest::Approx(c1[i]).scale(1.0));
  const PeriodicProfile c2 = PeriodicProfile::sample(g, [](double x) { return std::cos(2 * x); });
  const PeriodicProfile fc2 = apply_multiplier(c2, [](double k) { return eval_f(k).value; });
  for (std::size_t i = 0; i < 64; ++i) CHECK(fc2[i] == doctest::Approx(eval_f(2.0).value * c2[i]).scale(1.0));
  const PeriodicProfile d = derivative(PeriodicProfile::sample(g, [](double x) { return std::sin(2 * x); }), 1);
  for (std::size_t i = 0; i < 64; ++i) CHECK(d[i] == doctest::Approx(2 * std::cos(2 * g.x(i))).scale(1.0));
  CHECK_THROWS_AS(apply_multiplier(p, [](double k) { return 1.0 / k; }), DomainError);
  // Translation commutes with multipliers.
  const double s = 0.37;
  const auto sym = [](double k) { return 1.0 + k * k * k * k; };
  const PeriodicProfile a = shift(apply_multiplier(p, sym), s);
  const PeriodicProfile b = apply_multiplier(shift(p, s), sym);
  for (std::size_t i = 0; i < 64; ++i) CHECK(a[i] == doctest::Approx(b[i]).scale(1.0).epsilon(1e-12));
}

TEST_CASE("band split") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  const Grid g(8 * pi, 256);
  const double d0 = default_delta0(ctx);
  CHECK(d0 == doctest::Approx(0.25));
  const auto carrier = PeriodicProfile::sample(g, [](double x) { return std::cos(x); });
  const auto third = PeriodicProfile::sample(g, [](double x) { return std::cos(3 * x); });
  auto [e1, e2] = split_eta1(carrier, ctx, d0);
  CHECK(e2.max_abs() < 1e-14);
  auto [t1, t2] = split_eta1(third, ctx, d0);
  CHECK(t1.max_abs() < 1e-14);
  const PeriodicProfile mixed = carrier * 0.3 + third * 0.7;
  auto [m1, m2] = split_eta1(mixed, ctx, d0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(m1[i] == doctest::Approx(0.3 * carrier[i]).scale(1.0));
    CHECK(m2[i] == doctest::Approx(0.7 * third[i]).scale(1.0));
  }
  auto [mm1, mm2] = split_eta1(m1, ctx, d0);
  CHECK(mm2.max_abs() < 1e-14);
  CHECK_THROWS_AS(split_eta1(mixed, ctx, 0.4), DomainError);
  CHECK_THROWS_AS(split_eta1(mixed, ctx, 0.0), DomainError);
}

TEST_CASE("demodulation") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  const double mu = 0.01;
  const Grid g(6000.0, 32768);
  auto zeta0 = [](double X) { return 1.0 / std::cosh(X); };
  const PeriodicProfile p =
      PeriodicProfile::sample(g, [&](double x) { return mu * zeta0(mu * x) * std::cos(x); });
  const ComplexProfile z = demodulate_zeta(p, mu, ctx, 0.25);
  CHECK(z.grid.half_length() == doctest::Approx(mu * g.half_length()));
  double err = 0.0;
  for (std::size_t i = 0; i < z.grid.size(); ++i) err = std::max(err, std::abs(z.values[i] - zeta0(z.grid.x(i))));
  CHECK(err < 1e-10);

  const PeriodicProfile second =
      PeriodicProfile::sample(g, [&](double x) { return mu * zeta0(mu * x) * std::cos(2 * x); });
  const ComplexProfile z2 = demodulate_zeta(second, mu, ctx, 0.25);
  double big = 0.0;
  for (const Complex& v : z2.values) big = std::max(big, std::abs(v));
  CHECK(big < 1e-10);

  const double s = 3.3;
  const ComplexProfile zs = demodulate_zeta(shift(p, s), mu, ctx, 0.25);
  const Complex rot = std::exp(Complex(0.0, s));
  double serr = 0.0;
  for (std::size_t i = 0; i < zs.grid.size(); ++i) {
    serr = std::max(serr, std::abs(zs.values[i] - rot * zeta0(zs.grid.x(i) + mu * s)));
  }
  CHECK(serr < 1e-8);
}

TEST_CASE("norms") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  const Grid g(pi, 64);
  const Norms zero = norms(PeriodicProfile::zeros(g), ctx, 0.5, 0.01);
  CHECK(zero.h0 == 0.0);
  CHECK(zero.h2 == 0.0);
  CHECK(zero.w1inf == 0.0);
  CHECK(zero.triple_alpha == 0.0);
  const PeriodicProfile c = PeriodicProfile::sample(g, [](double x) { return std::cos(x); });
  const Norms n = norms(c, ctx, 0.5, 0.01);
  CHECK(n.h0 * n.h0 == doctest::Approx(pi).epsilon(1e-13));
  CHECK(n.h1 * n.h1 == doctest::Approx(2 * pi).epsilon(1e-13));
  CHECK(n.h2 * n.h2 == doctest::Approx(4 * pi).epsilon(1e-13));
  CHECK(n.w1inf == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(n.triple_alpha == doctest::Approx(n.h0).epsilon(1e-13));
  const PeriodicProfile r = random_profile(g, 3);
  const Norms rn = norms(r, ctx, 0.5, 0.01);
  CHECK(rn.h0 <= rn.h1);
  CHECK(rn.h1 <= rn.h2);
}

TEST_CASE("H1 norm of a complex profile against quadrature") {
  const Grid g(20.0, 1024);
  ComplexProfile z{g, std::vector<Complex>(g.size()), false};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    z.values[i] = Complex(1.0 / std::cosh(x), 0.5 * std::tanh(x) / std::cosh(x));
  }
  // int |z|^2 + |z'|^2 by the trapezoidal rule with exact derivatives.
  double q = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i), s = 1.0 / std::cosh(x), t = std::tanh(x);
    const Complex d(-s * t, 0.5 * (s * s * s - t * t * s));
    q += std::norm(z.values[i]) + std::norm(d);
  }
  q *= g.dx();
  const double n1 = sobolev_norm(z, 1.0);
  CHECK(n1 * n1 == doctest::Approx(q).epsilon(1e-10));
  CHECK(std::real(h1_inner(z, z)) == doctest::Approx(q).epsilon(1e-10));
}

TEST_CASE("profile CSV round trip") {
  const Grid g(pi, 64);
  const PeriodicProfile r = random_profile(g, 4);
  const std::string path = "test_profile_roundtrip.csv";
  write_profile_csv(path, r, "test header");
  const PeriodicProfile back = read_profile_csv(path);
  CHECK(back.size() == 64);
  CHECK(back.grid().half_length() == doctest::Approx(pi).epsilon(1e-14));
  for (std::size_t i = 0; i < 64; ++i) CHECK(back[i] == r[i]);
  CHECK_THROWS_AS(read_profile_csv("does/not/exist.csv"), IoError);
}
