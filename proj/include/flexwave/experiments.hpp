#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flexwave/minimizer.hpp"
#include "flexwave/report_io.hpp"

namespace flexwave {

// Pass/fail tolerances of the studies; defaults are the acceptance values.
struct StudyTolerances {
  double threshold_k0_abs = 0.5;
  double threshold_gamma_rel = 0.03;
  double small_k0_abs = 0.01;
  double soliton_residual = 1e-8;
  double speed_slope_rel = 0.15;
  double speed_intercept_abs = 1e-4;
  double energy_rel = 0.10;
  double lower_bound_slack = 1e-12;
  double quartic_rel = 0.15;
  double profile_ratio = 0.5;
  // Frozen constants of the minimiser bounds, as multiples of the leading-order
  // predictions (1 + k0^2)^2 ||zeta||^2 / 2 for ||eta||_2^2 / mu and |c_NLS| for -M_mu / mu^3.
  double bound_h2_factor = 2.0;
  double bound_m_factor = 0.5;
  // Lower bound of int eta1^4 / mu^3 as a multiple of the prediction a^4 / (2 b).
  double quartic_floor_factor = 0.25;
  double box_rel = 1e-8;
};

struct StudyConfig {
  WaveContext ctx = WaveContext::from_k0(1.0);
  // Records whether ctx was built from gamma (true) or from k0, so that the
  // embedded config rebuilds it bit for bit.
  bool from_gamma = false;
  // Minimiser sweep (speed law, profiles, bounds, quartic ratios).
  std::vector<double> mu_grid{0.04, 0.028, 0.02, 0.014, 0.01};
  // Test-function energy law.
  std::vector<double> energy_mu_grid{0.04, 0.02, 0.01};
  MinimizeConfig minimize;
  StudyTolerances tol;
  // Speed-law fit uses this many of the smallest converged mu.
  int fit_points = 3;
  // Exponent of the scaled norm |||eta1|||_alpha.
  double triple_alpha = 0.5;
  // Half-width of the band S around k0; 0 selects k0 / 4.
  double delta0 = 0.0;
  std::uint64_t seed = 20240601;
  int random_profiles = 100;
  // mu at which the doubled-box comparison runs.
  double box_mu = 0.01;
  // Sub-additivity witness compares c_{2 mu} with 2 c_mu at this mu.
  double subadditivity_mu = 0.01;

  void validate() const;
  double band_halfwidth() const;
};

struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct StudyReport {
  std::string study;
  Json config;
  std::string version;
  Json parameters;
  std::vector<Json> rows;
  Json fits = Json::object();
  std::vector<Json> excluded;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool passed() const;
};

Json to_json(const StudyConfig& cfg);
StudyConfig study_config_from_json(const Json& j);
Json to_json(const Check& c);
Json to_json(const StudyReport& r);
// JSON report plus a CSV twin of the rows; returns the paths written.
std::vector<std::string> write_report(const std::string& dir, const StudyReport& r);

const char* version_string();

// Linear extrapolation to x = 0 through the two smallest-x samples; the error
// estimate is the change from the three-point quadratic when available,
// otherwise the distance to the smallest-x sample.
struct Extrapolation {
  double limit = 0.0;
  double error = 0.0;
  int points = 0;
};
Extrapolation richardson(const std::vector<double>& x, const std::vector<double>& y);

// Least-squares line y = a + b x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// min over x, omega of || zeta - e^{i omega} zeta_NLS(. + x) ||_1 on the slow grid.
struct Alignment {
  double distance = 0.0;
  double shift = 0.0;
  double phase = 0.0;
};
Alignment align_envelope(const ComplexProfile& zeta, const NlsCoefficients& c);

// Periodic zero-padding of eta to a grid of twice the length and the same spacing.
PeriodicProfile extend_domain(const PeriodicProfile& eta);

StudyReport study_threshold(const StudyConfig& cfg);
// A4 as k0 -> 0 and the ODE residual of zeta_NLS.
StudyReport study_nls_limits(const StudyConfig& cfg);
StudyReport study_test_function(const StudyConfig& cfg);
StudyReport study_speed_law(const StudyConfig& cfg, const std::vector<SweepEntry>& sweep);
StudyReport study_speed_law(const StudyConfig& cfg);
StudyReport study_profile_convergence(const StudyConfig& cfg, const std::vector<SweepEntry>& sweep);
// Uses test profiles when sweep is null.
StudyReport study_quartic_asymptotics(const StudyConfig& cfg, const std::vector<SweepEntry>* sweep);
StudyReport study_subadditivity(const StudyConfig& cfg, const std::vector<SweepEntry>& sweep);
StudyReport study_box_robustness(const StudyConfig& cfg, const std::vector<SweepEntry>& sweep);

// All studies over one shared sweep.
std::vector<StudyReport> run_all_studies(const StudyConfig& cfg);

}  // namespace flexwave
