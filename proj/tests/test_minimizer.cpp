#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flexwave/errors.hpp"
#include "flexwave/minimizer.hpp"

using namespace flexwave;
using std::numbers::pi;

namespace {

MinimizeConfig small_config(double mu) {
  MinimizeConfig cfg;
  cfg.mu = mu;
  cfg.grid.c_ell = 2.0;
  cfg.grid.points_per_carrier = 8;
  cfg.dn.expansion_order = 3;
  cfg.max_iter = 400;
  cfg.grad_tol = 1e-7;
  return cfg;
}

}  // namespace

TEST_CASE("translation normalisation") {
  const Grid g(20.0, 256);
  const PeriodicProfile bump = PeriodicProfile::sample(g, [](double x) { return std::exp(-x * x); });
  const PeriodicProfile moved = shift(bump, 3.3);
  const PeriodicProfile back = normalize_translation(moved);
  CHECK((back - bump).max_abs() < 1e-8);
  CHECK((normalize_translation(bump) - bump).max_abs() < 1e-10);
}

TEST_CASE("small minimisation") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  const MinimizeConfig cfg = small_config(0.04);
  const MinimizeResult r = minimize(ctx, cfg);
  CHECK(r.converged);
  CHECK(r.mu == 0.04);
  CHECK(r.report.j_mu < 2 * ctx.nu0 * r.mu);
  CHECK(r.nu_mu < ctx.nu0);
  CHECK(r.nu_mu == doctest::Approx(r.report.nu_eta));
  CHECK_FALSE(r.constraint_active);
  CHECK(r.grad_norm <= cfg.grad_tol * std::max(1.0, r.report.j_mu));
  // Steps below the rounding noise of J may be accepted on the slope test alone.
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1] * (1 + 1e-12));
  CHECK((reflect(r.eta) - r.eta).max_abs() < 1e-10);

  MinimizeConfig again = cfg;
  again.initial = InitialGuess::Provided;
  again.provided = r.eta;
  const MinimizeResult r2 = minimize(ctx, again);
  CHECK(r2.report.j_mu == doctest::Approx(r.report.j_mu).epsilon(1e-9));
}

TEST_CASE("sweep records failures and keeps going") {
  const WaveContext ctx = WaveContext::from_k0(1.0);
  MinimizeConfig cfg = small_config(0.04);
  const auto sweep = continuation_sweep(ctx, {0.04}, cfg);
  REQUIRE(sweep.size() == 1);
  CHECK(sweep[0].result.has_value());
  CHECK(sweep[0].error.empty());
  CHECK_THROWS_AS(continuation_sweep(ctx, {0.01, 0.04}, cfg), DomainError);
}

TEST_CASE("configuration validation") {
  MinimizeConfig cfg;
  cfg.mu = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = MinimizeConfig{};
  cfg.initial = InitialGuess::Provided;
  CHECK_THROWS_AS(minimize(WaveContext::from_k0(1.0), cfg), ConfigError);
  cfg = MinimizeConfig{};
  cfg.backtrack = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
