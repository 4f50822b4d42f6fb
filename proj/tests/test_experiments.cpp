#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "flexwave/errors.hpp"
#include "flexwave/experiments.hpp"

using namespace flexwave;

TEST_CASE("extrapolation and line fits are exact on lines") {
  const std::vector<double> x{0.04, 0.02, 0.01};
  const std::vector<double> y{1.0 - 2.0 * 0.04, 1.0 - 2.0 * 0.02, 1.0 - 2.0 * 0.01};
  const Extrapolation e = richardson(x, y);
  CHECK(e.limit == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.error < 1e-13);
  CHECK(e.points == 3);
  const Extrapolation q = richardson({1.0, 2.0, 3.0}, {1.0, 4.0, 9.0});
  CHECK(q.limit == doctest::Approx(-2.0));
  CHECK(q.error == doctest::Approx(2.0));
  const LineFit f = fit_line(x, y);
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(f.residual < 1e-14);
  CHECK_THROWS_AS(richardson({1.0}, {1.0}), DomainError);
  CHECK_THROWS_AS(fit_line({1.0, 1.0}, {0.0, 1.0}), DomainError);
}

TEST_CASE("envelope alignment recovers shift and phase") {
  const NlsCoefficients c = nls_coefficients(WaveContext::from_k0(1.0));
  const Grid g(2.0, 1024);
  ComplexProfile z{g, std::vector<Complex>(g.size()), true};
  const double s = 0.013, w = 0.7;
  for (std::size_t i = 0; i < g.size(); ++i) z.values[i] = std::polar(1.0, w) * zeta_nls(g.x(i) + s, c);
  const Alignment a = align_envelope(z, c);
  CHECK(a.distance < 1e-10);
  CHECK(a.shift == doctest::Approx(s).epsilon(1e-8));
  CHECK(std::remainder(a.phase - w, 2 * std::numbers::pi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  for (auto& v : z.values) v *= 1.1;
  const Alignment b = align_envelope(z, c);
  // Scaling by 1.1 leaves a residual of exactly one tenth of the soliton.
  CHECK(b.distance == doctest::Approx(0.1 / 1.1 * sobolev_norm(z, 1.0)).epsilon(1e-8));
}

TEST_CASE("domain extension") {
  const Grid g(std::numbers::pi, 64);
  const PeriodicProfile p = PeriodicProfile::sample(g, [](double x) { return std::exp(-4 * x * x); });
  const PeriodicProfile q = extend_domain(p);
  CHECK(q.size() == 128);
  CHECK(q.grid().half_length() == doctest::Approx(2 * std::numbers::pi));
  CHECK(q.grid().dx() == doctest::Approx(g.dx()));
  CHECK(integrate(q.values(), q.grid().dx()) == doctest::Approx(integrate(p.values(), g.dx())).epsilon(1e-14));
  for (std::size_t i = 0; i < 64; ++i) CHECK(q[32 + i] == p[i]);
}

TEST_CASE("study configuration round trip") {
  StudyConfig cfg;
  cfg.mu_grid = {0.05, 0.03};
  cfg.seed = 7;
  cfg.tol.quartic_rel = 0.2;
  cfg.minimize.grid.c_ell = 3.0;
  const Json j = to_json(cfg);
  const StudyConfig back = study_config_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  Json bad = j;
  bad["unknown_key"] = 1;
  CHECK_THROWS_AS(study_config_from_json(bad), ConfigError);
  Json both = j;
  both["gamma"] = 0.1;
  both["k0"] = 1.0;
  CHECK_THROWS_AS(study_config_from_json(both), ConfigError);
  StudyConfig asc;  // negative mu
  asc.mu_grid = {0.01, -0.02};
  CHECK_THROWS(asc.validate());
  CHECK(cfg.band_halfwidth() == doctest::Approx(0.25));
}

TEST_CASE("cheap studies pass and serialise") {
  StudyConfig cfg;
  const StudyReport th = study_threshold(cfg);
  CHECK(th.passed());
  const StudyReport nl = study_nls_limits(cfg);
  CHECK(nl.passed());
  const std::string dir = "study_report_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto paths = write_report(dir, th);
  REQUIRE(paths.size() == 2);
  for (const auto& p : paths) CHECK(std::filesystem::exists(p));
  const Json j = read_json(paths[0]);
  CHECK(j["study"] == "threshold");
  CHECK(j["checks"].size() == th.checks.size());
  CHECK(j.contains("config_hash"));
  std::ifstream csv(paths[1]);
  std::string first;
  std::getline(csv, first);
  CHECK(first.rfind("#", 0) == 0);
  StudyReport empty;
  empty.study = "empty";
  CHECK_THROWS_AS(write_report(dir, empty), IoError);
}
