#pragma once

#include <string>

#include <json.hpp>

#include "flexwave/dirichlet_neumann.hpp"
#include "flexwave/dispersion.hpp"
#include "flexwave/functionals.hpp"
#include "flexwave/minimizer.hpp"
#include "flexwave/nls_theory.hpp"
#include "flexwave/spectral_grid.hpp"

namespace flexwave {

using Json = nlohmann::ordered_json;

Json to_json(const WaveContext& ctx);
Json to_json(const NlsCoefficients& c);
Json to_json(const FunctionalReport& r);
Json to_json(const DnConfig& cfg);
Json to_json(const Norms& n);
Json to_json(const GridPolicy& p);
Json to_json(const MinimizeConfig& cfg);
// Summary of a result without the profile itself.
Json to_json(const MinimizeResult& r);

// Missing keys keep their defaults; unknown keys are a ConfigError.
DnConfig dn_config_from_json(const Json& j);
GridPolicy grid_policy_from_json(const Json& j);
MinimizeConfig minimize_config_from_json(const Json& j);
void require_known_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where);

// FNV-1a over the compact dump, as 16 hex digits.
std::string config_hash(const Json& j);

// Pretty JSON with a trailing newline.
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

// Checkpoint: a '#'-prefixed compact JSON header line followed by the profile CSV.
void write_checkpoint(const std::string& path, const PeriodicProfile& eta, const Json& header);
struct Checkpoint {
  Json header;
  PeriodicProfile eta;
};
Checkpoint read_checkpoint(const std::string& path);

}  // namespace flexwave
