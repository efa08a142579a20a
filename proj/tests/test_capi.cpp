#include <cstring>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "naac/naac.h"

namespace fs = std::filesystem;

namespace {

std::string out_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("naac_capi_" + tag);
  fs::remove_all(dir);
  return dir.string();
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

TEST_CASE("version and error strings exist") {
  CHECK(naac_version() != nullptr);
  CHECK(naac_last_error() != nullptr);
}

TEST_CASE("config lifecycle, key setting, json round trip") {
  naac_config* cfg = nullptr;
  REQUIRE(naac_config_create(&cfg) == NAAC_OK);
  REQUIRE(cfg != nullptr);

  CHECK(naac_config_set(cfg, "n_cues", "3") == NAAC_OK);
  CHECK(naac_config_set(cfg, "n_rbs", "3") == NAAC_OK);
  CHECK(naac_config_set(cfg, "n_d2d", "2") == NAAC_OK);
  CHECK(naac_config_set(cfg, "method", quoted("random").c_str()) == NAAC_OK);

  CHECK(naac_config_set(cfg, "gamma", "1.5") == NAAC_ERR_PARSE);
  CHECK(std::strlen(naac_last_error()) > 0);
  CHECK(naac_config_set(cfg, "not_a_key", "1") == NAAC_ERR_PARSE);

  char* json = nullptr;
  REQUIRE(naac_config_to_json(cfg, &json) == NAAC_OK);
  REQUIRE(json != nullptr);
  naac_config* back = nullptr;
  REQUIRE(naac_config_parse(json, &back) == NAAC_OK);
  char* json2 = nullptr;
  REQUIRE(naac_config_to_json(back, &json2) == NAAC_OK);
  CHECK(std::string(json) == json2);
  naac_string_free(json);
  naac_string_free(json2);
  naac_config_destroy(back);
  naac_config_destroy(cfg);
}

TEST_CASE("malformed configs are rejected with parse status") {
  naac_config* cfg = nullptr;
  CHECK(naac_config_parse("{ nope", &cfg) == NAAC_ERR_PARSE);
  CHECK(naac_config_parse(R"({"gamma": 2.0})", &cfg) == NAAC_ERR_PARSE);
  CHECK(naac_config_load("/no/such/file.json", &cfg) == NAAC_ERR_IO);
  CHECK(naac_config_create(nullptr) == NAAC_ERR_CONTRACT);
}

TEST_CASE("train then eval a tiny random run through the C surface") {
  const std::string dir = out_dir("train");
  naac_config* cfg = nullptr;
  REQUIRE(naac_config_create(&cfg) == NAAC_OK);
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"n_cues", "3"},
           {"n_rbs", "3"},
           {"n_d2d", "3"},
           {"method", quoted("random")},
           {"episodes", "2"},
           {"slots_per_episode", "5"},
           {"eval_episodes", "2"},
           {"master_seed", "9"},
           {"out_dir", quoted(dir)}})
    REQUIRE(naac_config_set(cfg, k.c_str(), v.c_str()) == NAAC_OK);

  REQUIRE(naac_run_train(cfg) == NAAC_OK);
  CHECK(fs::exists(fs::path(dir) / "random_seed9_train.csv"));

  double outage = -1.0, rate = -1.0;
  REQUIRE(naac_run_eval(cfg, &outage, &rate) == NAAC_OK);
  CHECK(outage >= 0.0);
  CHECK(outage <= 1.0);
  CHECK(rate >= 0.0);

  // eval of a method without checkpoints fails with io
  REQUIRE(naac_config_set(cfg, "method", quoted("dqn").c_str()) == NAAC_OK);
  CHECK(naac_run_eval(cfg, nullptr, nullptr) == NAAC_ERR_IO);

  naac_config_destroy(cfg);
  fs::remove_all(dir);
}

TEST_CASE("sweep through the C surface") {
  const std::string dir = out_dir("sweep");
  naac_config* cfg = nullptr;
  REQUIRE(naac_config_create(&cfg) == NAAC_OK);
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"n_cues", "2"},
           {"n_rbs", "2"},
           {"episodes", "1"},
           {"slots_per_episode", "4"},
           {"eval_episodes", "1"},
           {"out_dir", quoted(dir)}})
    REQUIRE(naac_config_set(cfg, k.c_str(), v.c_str()) == NAAC_OK);

  const int ns[] = {1, 2};
  const char* methods[] = {"random"};
  REQUIRE(naac_run_sweep(cfg, ns, 2, methods, 1, 2, 1) == NAAC_OK);
  CHECK(fs::exists(fs::path(dir) / "sweep.csv"));
  CHECK(naac_run_sweep(cfg, nullptr, 0, methods, 1, 2, 1) == NAAC_ERR_CONTRACT);
  naac_config_destroy(cfg);
  fs::remove_all(dir);
}

TEST_CASE("oracle json through the C surface") {
  naac_config* cfg = nullptr;
  REQUIRE(naac_config_create(&cfg) == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_cues", "2") == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_rbs", "2") == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_d2d", "2") == NAAC_OK);

  char* json = nullptr;
  REQUIRE(naac_run_oracle(cfg, 5, &json) == NAAC_OK);
  const std::string text(json);
  CHECK(text.find("best_any") != std::string::npos);
  CHECK(text.find("best_feasible") != std::string::npos);
  CHECK(text.find("\"n_d2d\": 2") != std::string::npos);
  naac_string_free(json);

  // oversized instance trips the guard
  REQUIRE(naac_config_set(cfg, "n_cues", "10") == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_rbs", "10") == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_d2d", "10") == NAAC_OK);
  CHECK(naac_run_oracle(cfg, 5, &json) == NAAC_ERR_TOO_LARGE);
  naac_config_destroy(cfg);
}

TEST_CASE("gradcheck through the C surface") {
  naac_config* cfg = nullptr;
  REQUIRE(naac_config_create(&cfg) == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_cues", "3") == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_rbs", "3") == NAAC_OK);
  REQUIRE(naac_config_set(cfg, "n_d2d", "3") == NAAC_OK);
  double a = -1, c = -1, p = -1;
  REQUIRE(naac_run_gradcheck(cfg, 1, &a, &c, &p) == NAAC_OK);
  CHECK(a >= 0.0);
  CHECK(c >= 0.0);
  CHECK(p >= 0.0);
  CHECK(naac_gradcheck_pass(a, c, p) == 1);
  CHECK(naac_gradcheck_pass(1.0, c, p) == 0);
  naac_config_destroy(cfg);
}
