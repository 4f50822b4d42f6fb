#include "flexwave/report_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "flexwave/errors.hpp"

namespace flexwave {

Json to_json(const WaveContext& ctx) {
  return Json{{"gamma", ctx.gamma}, {"k0", ctx.k0}, {"nu0", ctx.nu0}};
}

Json to_json(const NlsCoefficients& c) {
  return Json{{"a3_1", c.a3_1},       {"a3_2", c.a3_2},   {"a4_1", c.a4_1},
              {"a4_2", c.a4_2},       {"a3", c.a3},       {"a4", c.a4},
              {"gpp_k0", c.gpp_k0},   {"alpha_nls", c.alpha_nls},
              {"nu_nls", c.nu_nls},   {"c_nls", c.c_nls}};
}

Json to_json(const FunctionalReport& r) {
  return Json{{"mu", r.mu},
              {"k_total", r.k_total},
              {"k2", r.k2},
              {"k4", r.k4},
              {"k_nl", r.k_nl},
              {"l_total", r.l_total},
              {"l2", r.l2},
              {"l3", r.l3},
              {"l4", r.l4},
              {"l_nl", r.l_nl},
              {"l3_expansion", r.l3_expansion},
              {"l4_expansion", r.l4_expansion},
              {"j_mu", r.j_mu},
              {"nu_eta", r.nu_eta},
              {"e_value", r.e_value},
              {"i_value", r.i_value},
              {"m_mu", r.m_mu},
              {"m_tilde_mu", r.m_tilde_mu}};
}

Json to_json(const DnConfig& cfg) {
  return Json{{"expansion_order", cfg.expansion_order},
              {"oracle_ny", cfg.oracle_ny},
              {"cg_tol", cfg.cg_tol},
              {"cg_max_iter", cfg.cg_max_iter}};
}

Json to_json(const Norms& n) {
  return Json{{"h0", n.h0}, {"h1", n.h1}, {"h2", n.h2}, {"w1inf", n.w1inf}, {"triple_alpha", n.triple_alpha}};
}

Json to_json(const GridPolicy& p) {
  return Json{{"c_ell", p.c_ell}, {"points_per_carrier", p.points_per_carrier}};
}

Json to_json(const MinimizeConfig& cfg) {
  return Json{{"grid", to_json(cfg.grid)},
              {"dn", to_json(cfg.dn)},
              {"initial_step", cfg.initial_step},
              {"backtrack", cfg.backtrack},
              {"armijo", cfg.armijo},
              {"grad_tol", cfg.grad_tol},
              {"stall_tol", cfg.stall_tol},
              {"stall_window", cfg.stall_window},
              {"max_iter", cfg.max_iter},
              {"lbfgs_memory", cfg.lbfgs_memory},
              {"enforce_even", cfg.enforce_even},
              {"carrier_phases", cfg.carrier_phases}};
}

Json to_json(const MinimizeResult& r) {
  return Json{{"mu", r.mu},
              {"nu_mu", r.nu_mu},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"constraint_active", r.constraint_active},
              {"grad_norm", r.grad_norm},
              {"alpha_seed", r.alpha_seed},
              {"seed_phase", r.seed_phase},
              {"stop_reason", r.stop_reason},
              {"n_points", r.eta.size()},
              {"half_length", r.eta.grid().half_length()},
              {"report", to_json(r.report)},
              {"warnings", r.warnings}};
}

void require_known_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

namespace {

template <typename T>
void read_into(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

DnConfig dn_config_from_json(const Json& j) {
  require_known_keys(j, {"expansion_order", "oracle_ny", "cg_tol", "cg_max_iter"}, "dn");
  DnConfig cfg;
  read_into(j, "expansion_order", cfg.expansion_order, "dn");
  read_into(j, "oracle_ny", cfg.oracle_ny, "dn");
  read_into(j, "cg_tol", cfg.cg_tol, "dn");
  read_into(j, "cg_max_iter", cfg.cg_max_iter, "dn");
  cfg.validate();
  return cfg;
}

GridPolicy grid_policy_from_json(const Json& j) {
  require_known_keys(j, {"c_ell", "points_per_carrier"}, "grid");
  GridPolicy p;
  read_into(j, "c_ell", p.c_ell, "grid");
  read_into(j, "points_per_carrier", p.points_per_carrier, "grid");
  if (!(p.c_ell > 0.0) || p.points_per_carrier < 2) throw ConfigError("grid: c_ell > 0 and points_per_carrier >= 2 required");
  return p;
}

MinimizeConfig minimize_config_from_json(const Json& j) {
  require_known_keys(j,
                     {"grid", "dn", "initial_step", "backtrack", "armijo", "grad_tol", "stall_tol",
                      "stall_window", "max_iter", "lbfgs_memory", "enforce_even", "carrier_phases"},
                     "minimize");
  MinimizeConfig cfg;
  if (j.contains("grid")) cfg.grid = grid_policy_from_json(j.at("grid"));
  if (j.contains("dn")) cfg.dn = dn_config_from_json(j.at("dn"));
  read_into(j, "initial_step", cfg.initial_step, "minimize");
  read_into(j, "backtrack", cfg.backtrack, "minimize");
  read_into(j, "armijo", cfg.armijo, "minimize");
  read_into(j, "grad_tol", cfg.grad_tol, "minimize");
  read_into(j, "stall_tol", cfg.stall_tol, "minimize");
  read_into(j, "stall_window", cfg.stall_window, "minimize");
  read_into(j, "max_iter", cfg.max_iter, "minimize");
  read_into(j, "lbfgs_memory", cfg.lbfgs_memory, "minimize");
  read_into(j, "enforce_even", cfg.enforce_even, "minimize");
  read_into(j, "carrier_phases", cfg.carrier_phases, "minimize");
  cfg.validate();
  return cfg;
}

std::string config_hash(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for '" + path + "'");
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_checkpoint(const std::string& path, const PeriodicProfile& eta, const Json& header) {
  write_profile_csv(path, eta, header.dump());
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string first;
  std::getline(in, first);
  if (first.size() < 2 || first[0] != '#') throw IoError("checkpoint '" + path + "' has no header line");
  Json header;
  try {
    header = Json::parse(first.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint '" + path + "' header is not JSON: " + e.what());
  }
  return Checkpoint{std::move(header), read_profile_csv(path)};
}

}  // namespace flexwave
