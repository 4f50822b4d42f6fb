#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flexwave/flexwave.h"
#include "plot_data.hpp"

using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;
constexpr int kExitValidation = 3;

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

int exit_code(fw_status s) {
  switch (s) {
    case FW_OK: return kExitOk;
    case FW_ERR_SOLVER:
    case FW_ERR_INTERNAL: return kExitSolver;
    case FW_ERR_VALIDATION: return kExitValidation;
    default: return kExitInput;
  }
}

void check(fw_status s) {
  if (s != FW_OK) throw CliError(exit_code(s), std::string(fw_status_name(s)) + ": " + fw_last_error());
}

std::string take(char* s) {
  std::string out = s ? s : "";
  fw_string_free(s);
  return out;
}

Json parse(const std::string& text) { return Json::parse(text); }

std::string fmt(double v, const char* f = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

using ContextPtr = std::unique_ptr<fw_context, decltype(&fw_context_free)>;
using ResultPtr = std::unique_ptr<fw_result, decltype(&fw_result_free)>;
using SweepPtr = std::unique_ptr<fw_sweep, decltype(&fw_sweep_free)>;

// Flags shared by every subcommand.
struct Common {
  double k0 = 0.0;
  double gamma = 0.0;
  CLI::Option* k0_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  std::string config_path;
  std::string out_dir;
  CLI::Option* out_opt = nullptr;
  std::string json_dir;
  CLI::Option* json_opt = nullptr;
  std::vector<std::string> formats;
  CLI::Option* formats_opt = nullptr;
};

void add_common(CLI::App* sub, Common& c) {
  c.k0_opt = sub->add_option("--k0", c.k0, "bifurcation wavenumber");
  c.gamma_opt = sub->add_option("--gamma", c.gamma, "flexural rigidity");
  c.k0_opt->excludes(c.gamma_opt);
  sub->add_option("--config", c.config_path, "JSON config file (flags win)")->check(CLI::ExistingFile);
  c.out_opt = sub->add_option("--out", c.out_dir, "output directory (FLEXWAVE_OUT overrides)");
  c.json_opt = sub->add_option("--json", c.json_dir, "write JSON output into this directory");
  c.formats_opt = sub->add_option("--format", c.formats, "output formats: json, csv, svg")
                      ->delimiter(',')
                      ->check(CLI::IsMember({"json", "csv", "svg"}));
}

// Resolved settings of one invocation.
struct Run {
  std::string command;
  Json file = Json::object();
  Json effective = Json::object();
  std::string out_dir;
  std::set<std::string> formats;
  ContextPtr ctx{nullptr, fw_context_free};
  std::string hash;

  bool wants(const char* f) const { return formats.count(f) > 0; }
  std::string path(const std::string& name) const { return (std::filesystem::path(out_dir) / name).string(); }
  std::string comment() const {
    return std::string("flexwave ") + fw_version() + " " + command + " config_hash=" + hash;
  }
  void ensure_dir() const {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw CliError(kExitInput, "cannot create output directory '" + out_dir + "': " + ec.message());
  }
  void finalise() {
    hash = take([&] {
      char* h = nullptr;
      check(fw_config_hash(effective.dump().c_str(), &h));
      return h;
    }());
  }
};

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitInput, "cannot open config '" + path + "'");
  try {
    Json j = Json::parse(in);
    if (!j.is_object()) throw CliError(kExitInput, "config '" + path + "' must hold a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw CliError(kExitInput, "malformed config '" + path + "': " + e.what());
  }
}

template <class T>
T file_value(const Json& file, const char* key, T fallback) {
  if (!file.contains(key)) return fallback;
  try {
    return file.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw CliError(kExitInput, std::string("config key '") + key + "': " + e.what());
  }
}

Run resolve(const std::string& command, const Common& c, std::initializer_list<const char*> extra_keys) {
  Run run;
  run.command = command;
  if (!c.config_path.empty()) run.file = read_config(c.config_path);
  std::set<std::string> allowed{"k0", "gamma", "out", "formats"};
  allowed.insert(extra_keys.begin(), extra_keys.end());
  for (auto it = run.file.begin(); it != run.file.end(); ++it) {
    if (!allowed.count(it.key())) throw CliError(kExitInput, "unknown config key '" + it.key() + "' for " + command);
  }

  fw_context* raw = nullptr;
  if (c.k0_opt->count() > 0) {
    check(fw_context_from_k0(c.k0, &raw));
    run.effective["k0"] = c.k0;
  } else if (c.gamma_opt->count() > 0) {
    check(fw_context_from_gamma(c.gamma, &raw));
    run.effective["gamma"] = c.gamma;
  } else if (run.file.contains("k0") && run.file.contains("gamma")) {
    throw CliError(kExitInput, "config: give exactly one of k0 and gamma");
  } else if (run.file.contains("gamma")) {
    const double g = file_value(run.file, "gamma", 0.0);
    check(fw_context_from_gamma(g, &raw));
    run.effective["gamma"] = g;
  } else {
    const double k = file_value(run.file, "k0", 1.0);
    check(fw_context_from_k0(k, &raw));
    run.effective["k0"] = k;
  }
  run.ctx.reset(raw);

  std::vector<std::string> formats = file_value(run.file, "formats", std::vector<std::string>{"json", "csv"});
  if (c.formats_opt->count() > 0) formats = c.formats;
  run.out_dir = file_value(run.file, "out", std::string("out"));
  if (c.out_opt->count() > 0) run.out_dir = c.out_dir;
  if (c.json_opt->count() > 0) {
    run.out_dir = c.json_dir;
    formats.push_back("json");
  }
  if (const char* env = std::getenv("FLEXWAVE_OUT"); env && *env) run.out_dir = env;
  for (const auto& f : formats) {
    if (f != "json" && f != "csv" && f != "svg") throw CliError(kExitInput, "unknown format '" + f + "'");
    run.formats.insert(f);
  }
  run.effective["command"] = command;
  run.effective["formats"] = std::vector<std::string>(run.formats.begin(), run.formats.end());
  return run;
}

void write_json_file(const Run& run, const std::string& name, Json j) {
  j["config_hash"] = run.hash;
  j["version"] = fw_version();
  const std::string p = run.path(name);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw CliError(kExitInput, "cannot open '" + p + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw CliError(kExitInput, "write failed for '" + p + "'");
}

double context_value(const Run& run, const char* which) {
  double gamma = 0.0, k0 = 0.0, nu0 = 0.0;
  check(fw_context_params(run.ctx.get(), &gamma, &k0, &nu0));
  if (std::string(which) == "gamma") return gamma;
  if (std::string(which) == "k0") return k0;
  return nu0;
}

// Solver settings: the config file's "minimize" object overlaid by flags.
struct SolverFlags {
  int max_iter = 0;
  CLI::Option* max_iter_opt = nullptr;
  double c_ell = 0.0;
  CLI::Option* c_ell_opt = nullptr;
  int ppc = 0;
  CLI::Option* ppc_opt = nullptr;
  int order = 0;
  CLI::Option* order_opt = nullptr;
  double grad_tol = 0.0;
  CLI::Option* grad_tol_opt = nullptr;
};

void add_solver_flags(CLI::App* sub, SolverFlags& s) {
  s.max_iter_opt = sub->add_option("--max-iter", s.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  s.c_ell_opt = sub->add_option("--c-ell", s.c_ell, "domain half-length factor")->check(CLI::PositiveNumber);
  s.ppc_opt = sub->add_option("--points-per-carrier", s.ppc, "grid points per carrier wavelength")
                  ->check(CLI::PositiveNumber);
  s.order_opt = sub->add_option("--order", s.order, "Dirichlet-Neumann expansion order")->check(CLI::Range(1, 6));
  s.grad_tol_opt = sub->add_option("--grad-tol", s.grad_tol, "gradient tolerance")->check(CLI::PositiveNumber);
}

Json solver_config(const Run& run, const SolverFlags& s) {
  Json m = file_value(run.file, "minimize", Json::object());
  if (!m.is_object()) throw CliError(kExitInput, "config key 'minimize' must be an object");
  if (s.max_iter_opt->count() > 0) m["max_iter"] = s.max_iter;
  if (s.c_ell_opt->count() > 0) m["grid"]["c_ell"] = s.c_ell;
  if (s.ppc_opt->count() > 0) m["grid"]["points_per_carrier"] = s.ppc;
  if (s.order_opt->count() > 0) m["dn"]["expansion_order"] = s.order;
  if (s.grad_tol_opt->count() > 0) m["grad_tol"] = s.grad_tol;
  return m;
}

int cmd_dispersion(Run& run, double kmin, double kmax, int points) {
  const double k0 = context_value(run, "k0"), nu0 = context_value(run, "nu0");
  if (!(kmin > 0.0) || !(kmax > kmin) || points < 2) throw CliError(kExitInput, "need 0 < kmin < kmax and points >= 2");
  run.effective["kmin"] = kmin;
  run.effective["kmax"] = kmax;
  run.effective["points"] = points;
  run.finalise();
  std::vector<double> k(points), v(points);
  for (int i = 0; i < points; ++i) k[i] = kmin * std::pow(kmax / kmin, static_cast<double>(i) / (points - 1));
  check(fw_dispersion(run.ctx.get(), k.data(), k.size(), v.data()));

  std::vector<double> tk, tg, tn;
  for (double kk : {0.25, 0.5, 1.0, 2.0, 4.0, 10.0, 50.0, 177.33, 300.0}) {
    fw_context* raw = nullptr;
    check(fw_context_from_k0(kk, &raw));
    ContextPtr c(raw, fw_context_free);
    double g = 0.0, n0 = 0.0;
    check(fw_context_params(c.get(), &g, nullptr, &n0));
    tk.push_back(kk);
    tg.push_back(g);
    tn.push_back(n0);
  }
  std::printf("gamma = %.10g  k0 = %.10g  nu0 = %.10g\n", context_value(run, "gamma"), k0, nu0);
  std::printf("%12s %16s %14s\n", "k0", "gamma", "nu0");
  for (std::size_t i = 0; i < tk.size(); ++i) std::printf("%12.6g %16.8e %14.10f\n", tk[i], tg[i], tn[i]);

  run.ensure_dir();
  if (run.wants("csv")) {
    plot::write_csv(run.path("dispersion.csv"), run.comment(), {{"k", k}, {"nu", v}});
    plot::write_csv(run.path("dispersion_table.csv"), run.comment(), {{"k0", tk}, {"gamma", tg}, {"nu0", tn}});
  }
  if (run.wants("json")) {
    Json table = Json::array();
    for (std::size_t i = 0; i < tk.size(); ++i) table.push_back({{"k0", tk[i]}, {"gamma", tg[i]}, {"nu0", tn[i]}});
    write_json_file(run, "dispersion.json",
                    {{"gamma", context_value(run, "gamma")}, {"k0", k0}, {"nu0", nu0}, {"table", table}});
  }
  if (run.wants("svg")) {
    plot::write_svg(run.path("dispersion.svg"), run.comment(), "phase speed nu(k)", "k", "nu",
                    {{"nu(k)", k, v}, {"nu0", {kmin, kmax}, {nu0, nu0}}});
  }
  return kExitOk;
}

int cmd_coeffs(Run& run) {
  run.finalise();
  char* raw = nullptr;
  check(fw_coefficients_json(run.ctx.get(), &raw));
  const Json j = parse(take(raw));
  std::cout << j.dump(2) << "\n";
  run.ensure_dir();
  if (run.wants("json")) write_json_file(run, "coefficients.json", j);
  if (run.wants("csv")) {
    std::vector<plot::Column> cols;
    for (auto it = j.at("coefficients").begin(); it != j.at("coefficients").end(); ++it) {
      cols.push_back({it.key(), {it.value().get<double>()}});
    }
    plot::write_csv(run.path("coefficients.csv"), run.comment(), cols);
  }
  return kExitOk;
}

int cmd_threshold(Run& run) {
  run.finalise();
  double k0s = 0.0, gs = 0.0;
  check(fw_focussing_threshold(&k0s, &gs));
  std::printf("k0* = %.6f\ngamma* = %.6e\n", k0s, gs);
  run.ensure_dir();
  if (run.wants("json")) write_json_file(run, "threshold.json", {{"k0_star", k0s}, {"gamma_star", gs}});
  if (run.wants("csv")) plot::write_csv(run.path("threshold.csv"), run.comment(), {{"k0_star", {k0s}}, {"gamma_star", {gs}}});
  return kExitOk;
}

int cmd_soliton(Run& run, double half_length, int points) {
  double a = 0.0, b = 0.0;
  check(fw_soliton_params(run.ctx.get(), &a, &b));
  if (half_length <= 0.0) half_length = 40.0 / b;
  if (points < 16 || (points & (points - 1))) throw CliError(kExitInput, "points must be a power of two >= 16");
  run.effective["half_length"] = half_length;
  run.effective["points"] = points;
  run.finalise();
  double residual = 0.0;
  check(fw_soliton_residual(run.ctx.get(), half_length, static_cast<size_t>(points), &residual));
  std::vector<double> x(points), z(points);
  for (int i = 0; i < points; ++i) x[i] = -half_length + 2.0 * half_length * i / points;
  check(fw_zeta_nls(run.ctx.get(), x.data(), x.size(), z.data()));
  std::printf("zeta_NLS(X) = %.10g sech(%.10g X)\nODE residual (max norm) = %.3e\n", a, b, residual);
  run.ensure_dir();
  if (run.wants("csv")) plot::write_csv(run.path("soliton.csv"), run.comment(), {{"X", x}, {"zeta", z}});
  if (run.wants("json")) {
    write_json_file(run, "soliton.json",
                    {{"amplitude", a}, {"rate", b}, {"half_length", half_length}, {"points", points}, {"residual", residual}});
  }
  if (run.wants("svg")) plot::write_svg(run.path("soliton.svg"), run.comment(), "zeta_NLS", "X", "zeta", {{"zeta_NLS", x, z}});
  return kExitOk;
}

std::vector<double> read_profile(const std::string& path, double& half_length) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitInput, "cannot open profile '" + path + "'");
  std::string line;
  std::vector<double> x, eta;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    char comma = 0;
    if (!(row >> a >> comma >> b) || comma != ',') throw CliError(kExitInput, "malformed profile row: " + line);
    x.push_back(a);
    eta.push_back(b);
  }
  if (x.size() < 2) throw CliError(kExitInput, "profile '" + path + "' has fewer than two rows");
  half_length = -x.front();
  return eta;
}

struct ProfileOutput {
  std::vector<double> x, eta;
};

ProfileOutput profile_of(const fw_result* res) {
  size_t n = 0;
  check(fw_result_profile(res, nullptr, nullptr, &n));
  ProfileOutput p{std::vector<double>(n), std::vector<double>(n)};
  check(fw_result_profile(res, p.x.data(), p.eta.data(), &n));
  return p;
}

Json report_of(const fw_result* res) {
  char* raw = nullptr;
  check(fw_result_report_json(res, &raw));
  return parse(take(raw));
}

// alpha zeta_NLS(alpha x): the envelope of the seed, for overlay plots.
std::vector<double> envelope(const Run& run, const std::vector<double>& x, double alpha) {
  std::vector<double> ax(x.size()), z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ax[i] = alpha * x[i];
  check(fw_zeta_nls(run.ctx.get(), ax.data(), ax.size(), z.data()));
  for (double& v : z) v *= alpha;
  return z;
}

void write_profile_outputs(const Run& run, const std::string& stem, const fw_result* res, const Json& report) {
  const ProfileOutput p = profile_of(res);
  const std::vector<double> env = envelope(run, p.x, report.at("alpha_seed").get<double>());
  if (run.wants("csv")) plot::write_csv(run.path(stem + ".csv"), run.comment(), {{"x", p.x}, {"eta", p.eta}, {"envelope", env}});
  if (run.wants("json")) write_json_file(run, stem + ".json", report);
  if (run.wants("svg")) {
    std::vector<double> neg(env.size());
    for (std::size_t i = 0; i < env.size(); ++i) neg[i] = -env[i];
    plot::write_svg(run.path(stem + ".svg"), run.comment(), stem + ": minimiser and NLS envelope", "x", "eta",
                    {{"eta", p.x, p.eta}, {"+envelope", p.x, env}, {"-envelope", p.x, neg}});
  }
}

std::string mu_tag(double mu) { return fmt(mu, "%.6g"); }

int cmd_minimize(Run& run, const SolverFlags& s, double mu, bool mu_given, const std::string& init) {
  Json cfg = solver_config(run, s);
  if (!mu_given) {
    if (!run.file.contains("mu")) throw CliError(kExitInput, "minimize: --mu is required");
    mu = file_value(run.file, "mu", 0.0);
  }
  cfg["mu"] = mu;
  run.effective["minimize"] = cfg;
  if (!init.empty()) run.effective["init"] = init;
  run.finalise();
  fw_result* raw = nullptr;
  if (init.empty()) {
    check(fw_minimize(run.ctx.get(), cfg.dump().c_str(), &raw));
  } else {
    double half = 0.0;
    const std::vector<double> eta = read_profile(init, half);
    check(fw_minimize_from(run.ctx.get(), cfg.dump().c_str(), eta.data(), eta.size(), half, &raw));
  }
  ResultPtr res(raw, fw_result_free);
  Json report = report_of(res.get());
  const double nu0 = context_value(run, "nu0");
  const double j = report.at("report").at("j_mu").get<double>();
  report["two_nu0_mu"] = 2.0 * nu0 * mu;
  report["below_linear"] = j < 2.0 * nu0 * mu;
  run.ensure_dir();
  write_profile_outputs(run, "minimize_mu" + mu_tag(mu), res.get(), report);
  std::printf("mu = %g  J = %.15g  2 nu0 mu = %.15g  nu_mu = %.12g  iterations = %d  %s\n", mu, j, 2.0 * nu0 * mu,
              report.at("nu_mu").get<double>(), report.at("iterations").get<int>(),
              report.at("stop_reason").get<std::string>().c_str());
  if (!report.at("converged").get<bool>()) {
    std::fprintf(stderr, "minimize: not converged (%s)\n", report.at("stop_reason").get<std::string>().c_str());
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_sweep(Run& run, const SolverFlags& s, std::vector<double> grid, bool grid_given) {
  Json cfg = solver_config(run, s);
  if (!grid_given) grid = file_value(run.file, "mu_grid", std::vector<double>{0.04, 0.028, 0.02, 0.014, 0.01});
  run.effective["mu_grid"] = grid;
  run.effective["minimize"] = cfg;
  run.finalise();
  fw_sweep* raw = nullptr;
  check(fw_sweep_run(run.ctx.get(), grid.data(), grid.size(), cfg.dump().c_str(), &raw));
  SweepPtr sweep(raw, fw_sweep_free);
  run.ensure_dir();
  const double nu0 = context_value(run, "nu0");
  Json entries = Json::array();
  std::vector<double> mu_c, mu2_c, nu_c, j_c, conv_c;
  bool all_ok = true;
  for (size_t i = 0; i < fw_sweep_size(sweep.get()); ++i) {
    char* text = nullptr;
    check(fw_sweep_entry_json(sweep.get(), i, &text));
    const Json e = parse(take(text));
    entries.push_back(e);
    const double mu = e.at("mu").get<double>();
    if (!e.contains("result")) {
      all_ok = false;
      std::printf("mu = %-8g failed: %s\n", mu, e.at("error").get<std::string>().c_str());
      continue;
    }
    const Json& r = e.at("result");
    const bool conv = r.at("converged").get<bool>();
    all_ok = all_ok && conv;
    fw_result* one = nullptr;
    check(fw_sweep_entry_result(sweep.get(), i, &one));
    ResultPtr res(one, fw_result_free);
    write_profile_outputs(run, "sweep_mu" + mu_tag(mu), res.get(), r);
    const double nu = r.at("nu_mu").get<double>(), j = r.at("report").at("j_mu").get<double>();
    mu_c.push_back(mu);
    mu2_c.push_back(mu * mu);
    nu_c.push_back(nu);
    j_c.push_back(j);
    conv_c.push_back(conv ? 1.0 : 0.0);
    std::printf("mu = %-8g nu_mu = %.12f  (nu-nu0)/mu^2 = %10.4f  (J-2nu0mu)/mu^3 = %10.4f  %s\n", mu, nu,
                (nu - nu0) / (mu * mu), (j - 2.0 * nu0 * mu) / (mu * mu * mu), r.at("stop_reason").get<std::string>().c_str());
  }
  if (run.wants("json")) write_json_file(run, "sweep.json", {{"nu0", nu0}, {"entries", entries}});
  if (!mu_c.empty()) {
    if (run.wants("csv")) {
      plot::write_csv(run.path("nu_vs_mu2.csv"), run.comment(),
                      {{"mu", mu_c}, {"mu2", mu2_c}, {"nu_mu", nu_c}, {"j_mu", j_c}, {"converged", conv_c}});
    }
    if (run.wants("svg")) {
      plot::write_svg(run.path("nu_vs_mu2.svg"), run.comment(), "speed of minimisers", "mu^2", "nu_mu",
                      {{"nu_mu", mu2_c, nu_c}});
    }
  }
  return all_ok ? kExitOk : kExitSolver;
}

int cmd_validate(Run& run, const std::string& study, std::vector<double> grid, bool grid_given, std::uint64_t seed,
                 bool seed_given) {
  Json cfg = file_value(run.file, "study", Json::object());
  if (!cfg.is_object()) throw CliError(kExitInput, "config key 'study' must be an object");
  cfg.erase("k0");
  cfg.erase("gamma");
  if (run.effective.contains("k0")) cfg["k0"] = run.effective["k0"];
  if (run.effective.contains("gamma")) cfg["gamma"] = run.effective["gamma"];
  if (run.file.contains("minimize")) cfg["minimize"] = run.file["minimize"];
  if (grid_given) cfg["mu_grid"] = grid;
  if (seed_given) cfg["seed"] = seed;
  run.effective["study"] = cfg;
  run.effective["which"] = study;
  run.finalise();
  run.ensure_dir();
  char* raw = nullptr;
  int passed = 0;
  check(fw_study_run(study.c_str(), cfg.dump().c_str(), run.out_dir.c_str(), &raw, &passed));
  Json reports = parse(take(raw));
  if (!reports.is_array()) reports = Json::array({reports});
  Json summary = Json::array();
  for (const Json& r : reports) {
    for (const Json& c : r.at("checks")) {
      const bool ok = c.at("passed").get<bool>();
      std::printf("%s  %-20s %s\n", ok ? "PASS" : "FAIL", r.at("study").get<std::string>().c_str(),
                  c.at("name").get<std::string>().c_str());
      summary.push_back({{"study", r.at("study")}, {"check", c.at("name")}, {"passed", ok}});
    }
  }
  write_json_file(run, "validate_summary.json", {{"passed", passed != 0}, {"checks", summary}});
  std::printf("%s\n", passed ? "all checks passed" : "some checks failed");
  return passed ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solitary hydroelastic waves as constrained minimisers", "flexwave"};
  app.set_version_flag("--version", std::string(fw_version()));
  app.require_subcommand(1);


  auto* disp = app.add_subcommand("dispersion", "phase speed curve and k0/nu0 table");
  Common c_disp;
  add_common(disp, c_disp);
  double kmin = 0.05, kmax = 4.0;
  int dpoints = 400;
  disp->add_option("--kmin", kmin, "smallest wavenumber (times k0)");
  disp->add_option("--kmax", kmax, "largest wavenumber (times k0)");
  disp->add_option("--points", dpoints, "samples");

  auto* coeffs = app.add_subcommand("coeffs", "NLS coefficients");
  Common c_coeffs;
  add_common(coeffs, c_coeffs);

  auto* thresh = app.add_subcommand("threshold", "focussing threshold k0*, gamma*");
  Common c_thresh;
  add_common(thresh, c_thresh);

  auto* sol = app.add_subcommand("soliton", "zeta_NLS samples and ODE residual");
  Common c_sol;
  add_common(sol, c_sol);
  double sol_half = 0.0;
  int sol_points = 512;
  sol->add_option("--half-length", sol_half, "half-length of the slow domain (default 40 / rate)");
  sol->add_option("--points", sol_points, "grid points (power of two)");

  auto* mini = app.add_subcommand("minimize", "minimiser at one mu");
  Common c_min;
  add_common(mini, c_min);
  SolverFlags s_min;
  add_solver_flags(mini, s_min);
  double mu = 0.0;
  auto* mu_opt = mini->add_option("--mu", mu, "impulse parameter")->check(CLI::PositiveNumber);
  std::string init;
  mini->add_option("--init", init, "seed profile CSV (x,eta)")->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "continuation over a descending mu grid");
  Common c_sweep;
  add_common(sweep, c_sweep);
  SolverFlags s_sweep;
  add_solver_flags(sweep, s_sweep);
  std::vector<double> sweep_grid;
  auto* sweep_grid_opt = sweep->add_option("--mu-grid", sweep_grid, "comma-separated mu values")->delimiter(',');

  auto* val = app.add_subcommand("validate", "run the studies and print a pass/fail summary");
  Common c_val;
  add_common(val, c_val);
  std::string study = "all";
  val->add_option("--study", study, "study name or all")
      ->check(CLI::IsMember({"all", "threshold", "nls_limits", "test_function", "speed_law", "profile_convergence",
                             "quartic_asymptotics", "subadditivity", "box_robustness"}));
  std::vector<double> val_grid;
  auto* val_grid_opt = val->add_option("--mu-grid", val_grid, "comma-separated mu values")->delimiter(',');
  std::uint64_t seed = 0;
  auto* seed_opt = val->add_option("--seed", seed, "seed of the random-profile suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitInput;
  }

  try {
    if (*disp) {
      Run run = resolve("dispersion", c_disp, {"kmin", "kmax", "points"});
      const double k0 = context_value(run, "k0");
      kmin = disp->count("--kmin") ? kmin : file_value(run.file, "kmin", kmin);
      kmax = disp->count("--kmax") ? kmax : file_value(run.file, "kmax", kmax);
      dpoints = disp->count("--points") ? dpoints : file_value(run.file, "points", dpoints);
      return cmd_dispersion(run, kmin * k0, kmax * k0, dpoints);
    }
    if (*coeffs) {
      Run run = resolve("coeffs", c_coeffs, {});
      return cmd_coeffs(run);
    }
    if (*thresh) {
      Run run = resolve("threshold", c_thresh, {});
      return cmd_threshold(run);
    }
    if (*sol) {
      Run run = resolve("soliton", c_sol, {"half_length", "points"});
      sol_half = sol->count("--half-length") ? sol_half : file_value(run.file, "half_length", sol_half);
      sol_points = sol->count("--points") ? sol_points : file_value(run.file, "points", sol_points);
      return cmd_soliton(run, sol_half, sol_points);
    }
    if (*mini) {
      Run run = resolve("minimize", c_min, {"mu", "minimize"});
      return cmd_minimize(run, s_min, mu, mu_opt->count() > 0, init);
    }
    if (*sweep) {
      Run run = resolve("sweep", c_sweep, {"mu_grid", "minimize"});
      return cmd_sweep(run, s_sweep, sweep_grid, sweep_grid_opt->count() > 0);
    }
    if (*val) {
      Run run = resolve("validate", c_val, {"study", "minimize"});
      return cmd_validate(run, study, val_grid, val_grid_opt->count() > 0, seed, seed_opt->count() > 0);
    }
  } catch (const CliError& e) {
    std::cerr << "flexwave: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "flexwave: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
