#include "flexwave/flexwave.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "flexwave/errors.hpp"
#include "flexwave/experiments.hpp"
#include "flexwave/report_io.hpp"

using namespace flexwave;

struct fw_context {
  WaveContext ctx;
};

struct fw_result {
  MinimizeResult result;
};

struct fw_sweep {
  std::vector<SweepEntry> entries;
};

namespace {

thread_local std::string g_last_error;

fw_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return FW_ERR_DOMAIN;
    case ErrorKind::Config: return FW_ERR_CONFIG;
    case ErrorKind::Solver: return FW_ERR_SOLVER;
    case ErrorKind::Validation: return FW_ERR_VALIDATION;
    case ErrorKind::Io: return FW_ERR_IO;
  }
  return FW_ERR_INTERNAL;
}

template <class F>
fw_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FW_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FW_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return FW_ERR_INTERNAL;
  }
}

fw_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return FW_ERR_NULL_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Json parse_config(const char* text) {
  if (!text || !*text) return Json::object();
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
}

// Solver keys plus the run-level mu, checkpoint_path and checkpoint_every.
MinimizeConfig run_config(const char* text, bool need_mu) {
  Json j = parse_config(text);
  double mu = MinimizeConfig{}.mu;
  std::string checkpoint;
  int every = MinimizeConfig{}.checkpoint_every;
  try {
    if (j.contains("mu")) {
      mu = j.at("mu").get<double>();
      j.erase("mu");
    } else if (need_mu) {
      throw ConfigError("config: 'mu' is required");
    }
    if (j.contains("checkpoint_path")) {
      checkpoint = j.at("checkpoint_path").get<std::string>();
      j.erase("checkpoint_path");
    }
    if (j.contains("checkpoint_every")) {
      every = j.at("checkpoint_every").get<int>();
      j.erase("checkpoint_every");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  MinimizeConfig cfg = minimize_config_from_json(j);
  cfg.mu = mu;
  cfg.checkpoint_path = checkpoint;
  cfg.checkpoint_every = every;
  cfg.validate();
  return cfg;
}

std::vector<SweepEntry> sweep_for(const StudyConfig& cfg) {
  return continuation_sweep(cfg.ctx, cfg.mu_grid, cfg.minimize);
}

}  // namespace

extern "C" {

const char* fw_last_error(void) { return g_last_error.c_str(); }

const char* fw_status_name(fw_status status) {
  switch (status) {
    case FW_OK: return "ok";
    case FW_ERR_DOMAIN: return "domain error";
    case FW_ERR_CONFIG: return "config error";
    case FW_ERR_SOLVER: return "solver error";
    case FW_ERR_VALIDATION: return "validation error";
    case FW_ERR_IO: return "io error";
    case FW_ERR_NULL_ARGUMENT: return "null argument";
    case FW_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case FW_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* fw_version(void) { return version_string(); }

void fw_string_free(char* s) { std::free(s); }

fw_status fw_config_hash(const char* json, char** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    Json j;
    try {
      j = Json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    *out = copy_string(config_hash(j));
    return FW_OK;
  });
}

fw_status fw_context_from_k0(double k0, fw_context** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    *out = new fw_context{WaveContext::from_k0(k0)};
    return FW_OK;
  });
}

fw_status fw_context_from_gamma(double gamma, fw_context** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    *out = new fw_context{WaveContext::from_gamma(gamma)};
    return FW_OK;
  });
}

void fw_context_free(fw_context* ctx) { delete ctx; }

fw_status fw_context_params(const fw_context* ctx, double* gamma, double* k0, double* nu0) {
  if (!ctx) return null_argument("ctx");
  g_last_error.clear();
  if (gamma) *gamma = ctx->ctx.gamma;
  if (k0) *k0 = ctx->ctx.k0;
  if (nu0) *nu0 = ctx->ctx.nu0;
  return FW_OK;
}

fw_status fw_coefficients_json(const fw_context* ctx, char** out) {
  if (!ctx) return null_argument("ctx");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const Json j{{"context", to_json(ctx->ctx)}, {"coefficients", to_json(nls_coefficients(ctx->ctx))}};
    *out = copy_string(j.dump());
    return FW_OK;
  });
}

fw_status fw_dispersion(const fw_context* ctx, const double* k, size_t n, double* nu_out) {
  if (!ctx) return null_argument("ctx");
  if (n && (!k || !nu_out)) return null_argument("k or nu_out");
  return guarded([&] {
    for (size_t i = 0; i < n; ++i) nu_out[i] = nu(k[i], ctx->ctx);
    return FW_OK;
  });
}

fw_status fw_focussing_threshold(double* k0_star, double* gamma_star) {
  return guarded([&] {
    const Threshold t = focussing_threshold();
    if (k0_star) *k0_star = t.k0_star;
    if (gamma_star) *gamma_star = t.gamma_star;
    return FW_OK;
  });
}

fw_status fw_soliton_params(const fw_context* ctx, double* amplitude, double* rate) {
  if (!ctx) return null_argument("ctx");
  return guarded([&] {
    const NlsCoefficients c = nls_coefficients(ctx->ctx);
    const double a = zeta_nls_amplitude(c), b = zeta_nls_rate(c);
    if (amplitude) *amplitude = a;
    if (rate) *rate = b;
    return FW_OK;
  });
}

fw_status fw_zeta_nls(const fw_context* ctx, const double* x, size_t n, double* out) {
  if (!ctx) return null_argument("ctx");
  if (n && (!x || !out)) return null_argument("x or out");
  return guarded([&] {
    const NlsCoefficients c = nls_coefficients(ctx->ctx);
    for (size_t i = 0; i < n; ++i) out[i] = zeta_nls(x[i], c);
    return FW_OK;
  });
}

fw_status fw_soliton_residual(const fw_context* ctx, double half_length, size_t n_points, double* residual) {
  if (!ctx) return null_argument("ctx");
  if (!residual) return null_argument("residual");
  return guarded([&] {
    *residual = soliton_residual(nls_coefficients(ctx->ctx), half_length, n_points);
    return FW_OK;
  });
}

fw_status fw_minimize(const fw_context* ctx, const char* config_json, fw_result** out) {
  if (!ctx) return null_argument("ctx");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const MinimizeConfig cfg = run_config(config_json, true);
    *out = new fw_result{minimize(ctx->ctx, cfg)};
    return FW_OK;
  });
}

fw_status fw_minimize_from(const fw_context* ctx, const char* config_json, const double* eta, size_t n,
                           double half_length, fw_result** out) {
  if (!ctx) return null_argument("ctx");
  if (!eta) return null_argument("eta");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    MinimizeConfig cfg = run_config(config_json, true);
    cfg.initial = InitialGuess::Provided;
    cfg.provided = PeriodicProfile(Grid(half_length, n), std::vector<double>(eta, eta + n));
    *out = new fw_result{minimize(ctx->ctx, cfg)};
    return FW_OK;
  });
}

void fw_result_free(fw_result* res) { delete res; }

fw_status fw_result_report_json(const fw_result* res, char** out) {
  if (!res) return null_argument("res");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    Json j = to_json(res->result);
    j["half_length"] = res->result.eta.grid().half_length();
    j["history"] = res->result.history;
    j["grad_history"] = res->result.grad_history;
    *out = copy_string(j.dump());
    return FW_OK;
  });
}

fw_status fw_result_profile(const fw_result* res, double* x, double* eta, size_t* n) {
  if (!res) return null_argument("res");
  if (!n) return null_argument("n");
  const PeriodicProfile& p = res->result.eta;
  g_last_error.clear();
  if (!x && !eta) {
    *n = p.size();
    return FW_OK;
  }
  if (*n < p.size()) {
    g_last_error = "profile needs " + std::to_string(p.size()) + " points";
    *n = p.size();
    return FW_ERR_BUFFER_TOO_SMALL;
  }
  for (size_t i = 0; i < p.size(); ++i) {
    if (x) x[i] = p.grid().x(i);
    if (eta) eta[i] = p[i];
  }
  *n = p.size();
  return FW_OK;
}

fw_status fw_result_write_csv(const fw_result* res, const char* path, const char* header_comment) {
  if (!res) return null_argument("res");
  if (!path) return null_argument("path");
  return guarded([&] {
    write_profile_csv(path, res->result.eta, header_comment ? header_comment : "");
    return FW_OK;
  });
}

fw_status fw_sweep_run(const fw_context* ctx, const double* mu, size_t n_mu, const char* config_json,
                       fw_sweep** out) {
  if (!ctx) return null_argument("ctx");
  if (!mu) return null_argument("mu");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const MinimizeConfig cfg = run_config(config_json, false);
    *out = new fw_sweep{continuation_sweep(ctx->ctx, std::vector<double>(mu, mu + n_mu), cfg)};
    return FW_OK;
  });
}

void fw_sweep_free(fw_sweep* sweep) { delete sweep; }

size_t fw_sweep_size(const fw_sweep* sweep) { return sweep ? sweep->entries.size() : 0; }

fw_status fw_sweep_entry_json(const fw_sweep* sweep, size_t i, char** out) {
  if (!sweep) return null_argument("sweep");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    if (i >= sweep->entries.size()) throw DomainError("sweep index out of range");
    const SweepEntry& e = sweep->entries[i];
    Json j{{"mu", e.mu}};
    if (e.result) {
      j["result"] = to_json(*e.result);
    } else {
      j["error"] = e.error;
    }
    *out = copy_string(j.dump());
    return FW_OK;
  });
}

fw_status fw_sweep_entry_result(const fw_sweep* sweep, size_t i, fw_result** out) {
  if (!sweep) return null_argument("sweep");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    if (i >= sweep->entries.size()) throw DomainError("sweep index out of range");
    const SweepEntry& e = sweep->entries[i];
    if (!e.result) throw SolverError(e.error);
    *out = new fw_result{*e.result};
    return FW_OK;
  });
}

fw_status fw_study_run(const char* study, const char* config_json, const char* out_dir, char** out, int* passed) {
  if (!study) return null_argument("study");
  if (out) *out = nullptr;
  return guarded([&] {
    const StudyConfig cfg = study_config_from_json(parse_config(config_json));
    const std::string name = study;
    std::vector<StudyReport> reports;
    if (name == "all") {
      reports = run_all_studies(cfg);
    } else if (name == "threshold") {
      reports.push_back(study_threshold(cfg));
    } else if (name == "nls_limits") {
      reports.push_back(study_nls_limits(cfg));
    } else if (name == "test_function") {
      reports.push_back(study_test_function(cfg));
    } else if (name == "speed_law") {
      reports.push_back(study_speed_law(cfg));
    } else if (name == "profile_convergence") {
      reports.push_back(study_profile_convergence(cfg, sweep_for(cfg)));
    } else if (name == "quartic_asymptotics") {
      const auto sweep = sweep_for(cfg);
      reports.push_back(study_quartic_asymptotics(cfg, &sweep));
    } else if (name == "subadditivity") {
      reports.push_back(study_subadditivity(cfg, sweep_for(cfg)));
    } else if (name == "box_robustness") {
      reports.push_back(study_box_robustness(cfg, sweep_for(cfg)));
    } else {
      throw ConfigError("unknown study '" + name + "'");
    }
    bool ok = true;
    Json all = Json::array();
    for (const auto& r : reports) {
      ok = ok && r.passed();
      all.push_back(to_json(r));
      if (out_dir) write_report(out_dir, r);
    }
    if (passed) *passed = ok ? 1 : 0;
    if (out) *out = copy_string(name == "all" ? all.dump() : all.front().dump());
    return FW_OK;
  });
}

}  // extern "C"
