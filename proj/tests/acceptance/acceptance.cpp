// Acceptance run: one PASS/FAIL line per criterion, then supplementary
// diagnostics that are not part of the criteria. Exits 0 whenever the run
// completes; the verdicts are in the output and in acceptance.json.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexwave/errors.hpp"
#include "flexwave/experiments.hpp"

using namespace flexwave;

namespace {

// Pinned tolerances of the directly implemented criteria.
constexpr double kDnRel = 1e-6;
constexpr double kDnSymmetry = 1e-10;
constexpr int kDnOrder = 4;
constexpr int kGradientPairs = 20;
constexpr double kGradientRel = 1e-5;
constexpr std::uint64_t kGradientSeed = 20240601;

struct Verdict {
  int id;
  std::string name;
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const StudyReport& find(const std::vector<StudyReport>& all, const std::string& name) {
  for (const auto& r : all) {
    if (r.study == name) return r;
  }
  throw std::runtime_error("acceptance: study '" + name + "' missing");
}

// Every check of the report whose name contains one of the fragments (all
// checks when the list is empty) must pass.
Verdict from_checks(int id, const std::string& name, const StudyReport& r,
                    const std::vector<std::string>& fragments = {}) {
  Verdict v{id, name, true, ""};
  int used = 0;
  for (const Check& c : r.checks) {
    bool take = fragments.empty();
    for (const auto& f : fragments) take = take || c.name.find(f) != std::string::npos;
    if (!take) continue;
    ++used;
    v.passed = v.passed && c.passed;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += c.name + ": " + fmt("%.6g", c.value) + (c.passed ? "" : " [fail]");
  }
  if (used == 0) {
    v.passed = false;
    v.detail = "no matching checks";
  }
  return v;
}

Verdict merge(int id, const std::string& name, const std::vector<Verdict>& parts) {
  Verdict v{id, name, true, ""};
  for (const auto& p : parts) {
    v.passed = v.passed && p.passed;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += p.detail;
  }
  return v;
}

Verdict dn_cross_validation(const WaveContext& ctx) {
  (void)ctx;
  const Grid g(std::numbers::pi, 64);
  const PeriodicProfile eta =
      PeriodicProfile::sample(g, [](double x) { return 0.05 * (std::cos(x) + 0.3 * std::cos(2 * x)); });
  const std::vector<std::function<double(double)>> inputs{
      [](double x) { return std::cos(x); },
      [](double x) { return std::sin(2 * x) + 0.5 * std::cos(3 * x); },
      [](double x) { return std::exp(std::cos(x)) - std::cosh(1.0) + 0.2 * std::sin(x); },
  };
  DnConfig cfg;
  cfg.expansion_order = kDnOrder;
  double worst_rel = 0.0, worst_sym = 0.0, worst_mean = 0.0;
  std::vector<PeriodicProfile> phis, gphis;
  for (const auto& fn : inputs) {
    const PeriodicProfile phi = PeriodicProfile::sample(g, fn);
    const PeriodicProfile ex = dn_apply(eta, phi, cfg);
    const PeriodicProfile oracle = dn_oracle(eta, phi, cfg);
    worst_rel = std::max(worst_rel, sobolev_norm(ex - oracle, 0.0) / sobolev_norm(oracle, 0.0));
    worst_mean = std::max(worst_mean, std::abs(integrate(ex.values(), g.dx())) / sobolev_norm(ex, 0.0));
    phis.push_back(phi);
    gphis.push_back(ex);
  }
  for (std::size_t i = 0; i < phis.size(); ++i) {
    for (std::size_t j = i + 1; j < phis.size(); ++j) {
      const double a = inner(phis[i], gphis[j]);
      const double b = inner(phis[j], gphis[i]);
      worst_sym = std::max(worst_sym, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
  }
  const bool ok = worst_rel < kDnRel && worst_sym < kDnSymmetry && worst_mean < kDnSymmetry;
  return {4, "DN cross-validation (M = 4 vs elliptic oracle)", ok,
          "max relative L2 difference " + fmt("%.3e", worst_rel) + " (< 1e-6); symmetry defect " +
              fmt("%.3e", worst_sym) + ", relative mean " + fmt("%.3e", worst_mean) + " (< 1e-10)"};
}

Verdict gradient_oracles(const WaveContext& ctx) {
  std::mt19937_64 rng(kGradientSeed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Grid g(8.0 * std::numbers::pi / ctx.k0, 256);
  auto random_smooth = [&](double h2) {
    std::vector<Complex> c(g.spectral_size());
    for (std::size_t j = 1; j < c.size() / 3; ++j) {
      const double k = g.wavenumber(j);
      const double w = 1.0 / (1.0 + k * k);
      c[j] = Complex(unit(rng), unit(rng)) * w * w;
    }
    const PeriodicProfile p = PeriodicProfile::from_coeffs(g, std::move(c));
    return p * (h2 / sobolev_norm(p, 2.0));
  };
  DnConfig cfg;
  double worst_k = 0.0, worst_l = 0.0, worst_j = 0.0;
  int pairs = 0;
  while (pairs < kGradientPairs) {
    const PeriodicProfile eta = random_smooth(0.1 + 0.2 * std::abs(unit(rng)));
    const PeriodicProfile w = random_smooth(1.0);
    const double mu = 0.01 + 0.015 * (1.0 + unit(rng));
    if (!in_admissible_set(eta)) continue;
    const double h = 1e-4 * sobolev_norm(eta, 0.0) / sobolev_norm(w, 0.0);
    auto central = [&](const std::function<double(const PeriodicProfile&)>& f) {
      return (f(eta + w * h) - f(eta - w * h)) / (2.0 * h);
    };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
    worst_k = std::max(worst_k, rel(inner(grad_K(eta, ctx), w),
                                    central([&](const PeriodicProfile& e) { return eval_K(e, ctx).total; })));
    worst_l = std::max(worst_l, rel(inner(grad_L(eta, cfg).gradient, w),
                                    central([&](const PeriodicProfile& e) { return eval_L_value(e, cfg).value; })));
    worst_j = std::max(worst_j, rel(inner(grad_J(eta, mu, ctx, cfg), w),
                                    central([&](const PeriodicProfile& e) {
                                      return eval_J(e, mu, ctx, cfg).j_mu;
                                    })));
    ++pairs;
  }
  const double worst = std::max({worst_k, worst_l, worst_j});
  return {5, "gradient oracles vs central differences (20 seeded pairs)", worst < kGradientRel,
          "max relative error K' " + fmt("%.2e", worst_k) + ", L' " + fmt("%.2e", worst_l) + ", J' " +
              fmt("%.2e", worst_j) + " (< 1e-5)"};
}

Verdict reruns_identical(const StudyConfig& cfg) {
  const std::string a = to_json(study_nls_limits(cfg)).dump() + to_json(study_threshold(cfg)).dump();
  const std::string b = to_json(study_nls_limits(cfg)).dump() + to_json(study_threshold(cfg)).dump();
  return {13, "", a == b, std::string("re-run of threshold and nls_limits reports ") + (a == b ? "identical" : "differs")};
}

// Minimisers at smaller mu on a shorter box, outside the acceptance grid.
void supplementary(const StudyConfig& cfg, Json& out) {
  const WaveContext& ctx = cfg.ctx;
  const NlsCoefficients c = nls_coefficients(ctx);
  std::printf("\nSupplementary diagnostics (not acceptance criteria): minimisers at smaller mu, C_ell = 2\n");
  std::printf("  predicted (nu - nu0)/mu^2 = %.4f, (J - 2 nu0 mu)/mu^3 = %.4f\n", c.alpha_nls * c.nu_nls, c.c_nls);
  std::printf("  %-9s %-6s %-9s %-16s %-16s %-10s\n", "mu", "conv", "N", "(nu-nu0)/mu^2", "(J-2nu0mu)/mu^3", "seconds");
  Json rows = Json::array();
  for (double mu : {0.005, 0.0025, 0.00125}) {
    MinimizeConfig mc = cfg.minimize;
    mc.mu = mu;
    mc.grid.c_ell = 2.0;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const MinimizeResult r = minimize(ctx, mc);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double nr = (r.nu_mu - ctx.nu0) / (mu * mu);
      const double jr = (r.report.j_mu - 2.0 * ctx.nu0 * mu) / (mu * mu * mu);
      std::printf("  %-9g %-6s %-9zu %-16.6g %-16.6g %-10.1f\n", mu, r.converged ? "yes" : "no", r.eta.size(), nr, jr,
                  secs);
      rows.push_back(Json{{"mu", mu}, {"converged", r.converged}, {"n_points", r.eta.size()}, {"nu_ratio", nr},
                          {"energy_ratio", jr}, {"seconds", secs}});
    } catch (const Error& e) {
      std::printf("  %-9g error: %s\n", mu, e.what());
      rows.push_back(Json{{"mu", mu}, {"error", e.what()}});
    }
  }
  out["supplementary"] = rows;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "acceptance_out";
  const bool extra = !(argc > 2 && std::string(argv[2]) == "--no-supplementary");
  try {
    std::filesystem::create_directories(dir);
    const StudyConfig cfg;
    std::printf("flexwave %s acceptance, k0 = %.6g, gamma = %.17g\n", version_string(), cfg.ctx.k0, cfg.ctx.gamma);
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<StudyReport> all = run_all_studies(cfg);
    for (const auto& r : all) write_report(dir, r);

    const StudyReport& tf = find(all, "test_function");
    const StudyReport& sl = find(all, "speed_law");
    std::vector<Verdict> v;
    v.push_back(from_checks(1, "focussing threshold", find(all, "threshold"), {"k0*", "gamma*"}));
    v.push_back(from_checks(2, "small-k0 limit of A4", find(all, "nls_limits"), {"A4"}));
    v.push_back(from_checks(3, "soliton residual", find(all, "nls_limits"), {"zeta_NLS"}));
    v.push_back(dn_cross_validation(cfg.ctx));
    v.push_back(gradient_oracles(cfg.ctx));
    v.push_back(from_checks(6, "test-function energy law", tf, {"extrapolated", "J_mu(eta*)"}));
    v.push_back(merge(7, "lower bound K2 + mu^2/L2 >= 2 nu0 mu",
                      {from_checks(7, "", tf, {"K2 + mu^2/L2"}), from_checks(7, "", sl, {"K2 + mu^2/L2"})}));
    v.push_back(from_checks(8, "speed law", sl, {"slope", "intercept", "converged"}));
    v.push_back(from_checks(9, "profile convergence", find(all, "profile_convergence")));
    v.push_back(from_checks(10, "quartic asymptotics", find(all, "quartic_asymptotics")));
    v.push_back(from_checks(11, "minimiser bounds", sl, {"||eta||_2^2"}));
    v.push_back(from_checks(12, "sub-additivity witness", find(all, "subadditivity")));
    v.push_back(merge(13, "determinism and box robustness",
                      {from_checks(13, "", find(all, "box_robustness")), reruns_identical(cfg)}));

    Json out{{"version", version_string()}, {"config", to_json(cfg)}, {"config_hash", config_hash(to_json(cfg))}};
    Json crit = Json::array();
    int passed = 0;
    for (const auto& x : v) {
      std::printf("%s  %2d  %-55s %s\n", x.passed ? "PASS" : "FAIL", x.id, x.name.c_str(), x.detail.c_str());
      crit.push_back(Json{{"criterion", x.id}, {"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
      passed += x.passed;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of %zu criteria passed (%.0f s)\n", passed, v.size(), secs);
    out["criteria"] = crit;
    if (extra) supplementary(cfg, out);
    write_json(dir + "/acceptance.json", out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 1;
  }
  return 0;
}
