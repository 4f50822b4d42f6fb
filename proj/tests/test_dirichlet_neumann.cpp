#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flexwave/dirichlet_neumann.hpp"
#include "flexwave/errors.hpp"

using namespace flexwave;
using std::numbers::pi;

namespace {

double max_diff(const PeriodicProfile& a, const PeriodicProfile& b) { return (a - b).max_abs(); }

// Phi(x, y) = cos(k x) cosh(k y) is harmonic with Phi_y = 0 on the bed, so its
// trace on y = 1 + eta and the normal derivative Phi_y - eta_x Phi_x give an
// exact Dirichlet-Neumann pair for any eta.
struct ExactPair {
  PeriodicProfile phi;
  PeriodicProfile g_phi;
};

ExactPair exact_pair(const Grid& g, double amp, double k, double phase) {
  auto eta = [&](double x) { return amp * (std::cos(x) + 0.3 * std::cos(2 * x)); };
  auto eta_x = [&](double x) { return -amp * (std::sin(x) + 0.6 * std::sin(2 * x)); };
  ExactPair out;
  out.phi = PeriodicProfile::sample(g, [&](double x) {
    return std::cos(k * x + phase) * std::cosh(k * (1 + eta(x)));
  });
  out.g_phi = PeriodicProfile::sample(g, [&](double x) {
    const double y = 1 + eta(x);
    return k * std::cos(k * x + phase) * std::sinh(k * y) + eta_x(x) * k * std::sin(k * x + phase) * std::cosh(k * y);
  });
  return out;
}

PeriodicProfile test_eta(const Grid& g, double amp) {
  return PeriodicProfile::sample(g, [&](double x) { return amp * (std::cos(x) + 0.3 * std::cos(2 * x)); });
}

}  // namespace

TEST_CASE("flat bottom operator") {
  const Grid g(pi, 64);
  const PeriodicProfile phi = PeriodicProfile::sample(g, [](double x) { return std::cos(2 * x) + 0.5 * std::sin(x); });
  const PeriodicProfile expected = PeriodicProfile::sample(
      g, [](double x) { return 2 * std::tanh(2.0) * std::cos(2 * x) + 0.5 * std::tanh(1.0) * std::sin(x); });
  const PeriodicProfile zero = PeriodicProfile::zeros(g);
  DnConfig cfg;
  CHECK(max_diff(dn_flat(phi), expected) < 1e-13);
  CHECK(max_diff(dn_apply(zero, phi, cfg), expected) < 1e-13);
  CHECK(max_diff(dn_oracle(zero, phi, cfg), expected) < 1e-9);
  CHECK(max_diff(dn_flat_inverse(expected), phi) < 1e-13);
  const PeriodicProfile one = PeriodicProfile::sample(g, [](double) { return 1.0; });
  CHECK(dn_apply(test_eta(g, 0.05), one, cfg).max_abs() < 1e-13);
}

TEST_CASE("expansion against exact harmonic traces") {
  const Grid g(pi, 64);
  for (double k : {1.0, 2.0, 3.0}) {
    const ExactPair ex = exact_pair(g, 0.05, k, 0.4);
    const PeriodicProfile eta = test_eta(g, 0.05);
    double prev = 1e300;
    for (int m : {1, 2, 4, 6}) {
      DnConfig cfg;
      cfg.expansion_order = m;
      const double err = max_diff(dn_apply(eta, ex.phi, cfg), ex.g_phi) / ex.g_phi.max_abs();
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-7);
    DnConfig cfg;
    CHECK(max_diff(dn_oracle(eta, ex.phi, cfg), ex.g_phi) / ex.g_phi.max_abs() < 1e-9);
  }
}

TEST_CASE("expansion converges to the elliptic solver") {
  const Grid g(pi, 64);
  const PeriodicProfile eta = PeriodicProfile::sample(g, [](double x) { return 0.01 * std::cos(x); });
  const PeriodicProfile phi = PeriodicProfile::sample(g, [](double x) { return std::cos(x) + 0.2 * std::sin(3 * x); });
  DnConfig cfg;
  cfg.expansion_order = 3;
  const PeriodicProfile oracle = dn_oracle(eta, phi, cfg);
  CHECK(max_diff(dn_apply(eta, phi, cfg), oracle) < 1e-8);
}

TEST_CASE("symmetry, zero mean and inverse") {
  const Grid g(pi, 64);
  const PeriodicProfile eta = test_eta(g, 0.08);
  const PeriodicProfile a = PeriodicProfile::sample(g, [](double x) { return std::sin(x) + 0.3 * std::cos(4 * x); });
  const PeriodicProfile b = PeriodicProfile::sample(g, [](double x) { return std::cos(2 * x) - 0.1 * std::sin(5 * x); });
  DnConfig cfg;
  const double ab = inner(a, dn_apply(eta, b, cfg));
  const double ba = inner(b, dn_apply(eta, a, cfg));
  CHECK(std::abs(ab - ba) < 1e-12 * std::abs(ab));
  CHECK(std::abs(integrate(dn_apply(eta, a, cfg).values(), g.dx())) < 1e-13);
  CHECK(inner(a, dn_apply(eta, a, cfg)) > 0.0);

  const PeriodicProfile xi = dealias(dn_apply(eta, a, cfg));
  const DnSolve s = dn_inverse(eta, xi, cfg);
  CHECK(s.residual < 1e-9);
  CHECK(max_diff(dealias(dn_apply(eta, s.result, cfg)), xi) < 1e-9);
  CHECK(std::abs(integrate(s.result.values(), g.dx())) < 1e-12);
}

TEST_CASE("shape derivative") {
  const Grid g(pi, 64);
  const PeriodicProfile eta = test_eta(g, 0.05);
  const PeriodicProfile omega = PeriodicProfile::sample(g, [](double x) { return std::sin(2 * x) + 0.4 * std::cos(3 * x); });
  const PeriodicProfile phi = PeriodicProfile::sample(g, [](double x) { return std::cos(x) + 0.3 * std::sin(2 * x); });
  DnConfig cfg;
  const double h = 1e-5;
  const PeriodicProfile fd =
      (dn_apply(eta + omega * h, phi, cfg) - dn_apply(eta - omega * h, phi, cfg)) * (0.5 / h);
  const PeriodicProfile d = dn_shape_derivative(eta, omega, phi, cfg);
  CHECK(max_diff(d, fd) < 1e-8 * d.max_abs());
  cfg.expansion_order = 6;
  const PeriodicProfile di = dn_shape_derivative_identity(eta, omega, phi, cfg);
  CHECK(max_diff(dealias(di), dealias(dn_shape_derivative(eta, omega, phi, cfg))) < 1e-5 * d.max_abs());

  // <psi, dG[omega] phi> = <grad, omega>.
  cfg.expansion_order = 4;
  const PeriodicProfile psi = PeriodicProfile::sample(g, [](double x) { return std::sin(x) - 0.2 * std::cos(3 * x); });
  const PeriodicProfile grad = dn_pairing_gradient(eta, phi, psi, cfg);
  const double lhs = inner(psi, dn_shape_derivative(eta, omega, phi, cfg));
  CHECK(inner(grad, omega) == doctest::Approx(lhs).epsilon(1e-10));
}

TEST_CASE("admissibility and configuration") {
  const Grid g(pi, 64);
  CHECK(in_admissible_set(test_eta(g, 0.05)));
  CHECK_FALSE(in_admissible_set(PeriodicProfile::sample(g, [](double x) { return -0.6 + 0.0 * x; })));
  CHECK_THROWS_AS(require_admissible(test_eta(g, 5.0), "test"), DomainError);
  DnConfig cfg;
  cfg.expansion_order = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.expansion_order = kMaxExpansionOrder + 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
