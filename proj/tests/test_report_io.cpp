#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "flexwave/errors.hpp"
#include "flexwave/report_io.hpp"

using namespace flexwave;

TEST_CASE("config hash is stable and order sensitive") {
  const Json a = Json::parse(R"({"mu": 0.02, "grid": {"c_ell": 12}})");
  const Json b = Json::parse(R"({"mu":0.02,"grid":{"c_ell":12}})");
  const Json c = Json::parse(R"({"mu": 0.02, "grid": {"c_ell": 13}})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
  // FNV-1a of the empty object "{}".
  CHECK(config_hash(Json::object()) == "08f44b07b5901a25");
}

TEST_CASE("minimisation config round trip") {
  MinimizeConfig cfg;
  cfg.mu = 0.014;
  cfg.grid.c_ell = 4.0;
  cfg.dn.expansion_order = 5;
  cfg.carrier_phases = {0.0};
  const Json j = to_json(cfg);
  const MinimizeConfig back = minimize_config_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  Json bad = j;
  bad["grid"]["nope"] = 1;
  CHECK_THROWS_AS(minimize_config_from_json(bad), ConfigError);
  CHECK_THROWS_AS(dn_config_from_json(Json{{"expansion_order", 9}}), ConfigError);
}

TEST_CASE("JSON files and checkpoints") {
  const std::string dir = "report_io_test";
  std::filesystem::create_directories(dir);
  const Json j{{"a", 1.5}, {"b", {1, 2, 3}}};
  write_json(dir + "/x.json", j);
  CHECK(read_json(dir + "/x.json") == j);
  CHECK_THROWS_AS(read_json(dir + "/missing.json"), IoError);
  std::ofstream(dir + "/broken.json") << "{";
  CHECK_THROWS_AS(read_json(dir + "/broken.json"), ConfigError);

  const Grid g(std::numbers::pi, 32);
  const PeriodicProfile p = PeriodicProfile::sample(g, [](double x) { return 0.1 * std::cos(x); });
  write_checkpoint(dir + "/ck.csv", p, Json{{"iteration", 7}});
  const Checkpoint ck = read_checkpoint(dir + "/ck.csv");
  CHECK(ck.header["iteration"] == 7);
  REQUIRE(ck.eta.size() == 32);
  for (std::size_t i = 0; i < 32; ++i) CHECK(ck.eta[i] == p[i]);
}
