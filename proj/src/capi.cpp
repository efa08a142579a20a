#include "naac/naac.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "json.hpp"
#include "naac/errors.hpp"
#include "naac/harness.hpp"

struct naac_config {
  naac::ScenarioConfig scenario;
  naac::RunConfig run;
};

namespace {

thread_local std::string g_last_error;

naac_status code_to_status(naac::ErrorCode code) {
  switch (code) {
    case naac::ErrorCode::contract:
      return NAAC_ERR_CONTRACT;
    case naac::ErrorCode::parse:
      return NAAC_ERR_PARSE;
    case naac::ErrorCode::io:
      return NAAC_ERR_IO;
    case naac::ErrorCode::too_large:
      return NAAC_ERR_TOO_LARGE;
    case naac::ErrorCode::internal:
      return NAAC_ERR_INTERNAL;
  }
  return NAAC_ERR_INTERNAL;
}

template <typename Fn>
naac_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NAAC_OK;
  } catch (const naac::Error& e) {
    g_last_error = e.what();
    return code_to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NAAC_ERR_INTERNAL;
  }
}

naac_status fail_contract(const char* msg) {
  g_last_error = msg;
  return NAAC_ERR_CONTRACT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* naac_version(void) { return "1.0.0"; }

const char* naac_last_error(void) { return g_last_error.c_str(); }

void naac_string_free(char* s) { std::free(s); }

naac_status naac_config_create(naac_config** out) {
  if (!out) return fail_contract("naac_config_create: out must not be null");
  return guarded([&] { *out = new naac_config{}; });
}

naac_status naac_config_load(const char* path, naac_config** out) {
  if (!path || !out) return fail_contract("naac_config_load: null argument");
  return guarded([&] {
    auto [scenario, run] = naac::load_config(path);
    *out = new naac_config{std::move(scenario), std::move(run)};
  });
}

naac_status naac_config_parse(const char* json_text, naac_config** out) {
  if (!json_text || !out) return fail_contract("naac_config_parse: null argument");
  return guarded([&] {
    auto [scenario, run] = naac::parse_config_json(json_text);
    *out = new naac_config{std::move(scenario), std::move(run)};
  });
}

naac_status naac_config_set(naac_config* cfg, const char* key, const char* json_value) {
  if (!cfg || !key || !json_value) return fail_contract("naac_config_set: null argument");
  return guarded([&] { naac::set_config_key(cfg->scenario, cfg->run, key, json_value); });
}

naac_status naac_config_to_json(const naac_config* cfg, char** out_json) {
  if (!cfg || !out_json) return fail_contract("naac_config_to_json: null argument");
  return guarded([&] { *out_json = dup_string(naac::config_to_json(cfg->scenario, cfg->run)); });
}

void naac_config_destroy(naac_config* cfg) { delete cfg; }

naac_status naac_run_train(const naac_config* cfg) {
  if (!cfg) return fail_contract("naac_run_train: cfg must not be null");
  return guarded([&] { naac::run_training(cfg->scenario, cfg->run); });
}

naac_status naac_run_eval(const naac_config* cfg, double* outage_prob,
                          double* sum_rate_bps_hz) {
  if (!cfg) return fail_contract("naac_run_eval: cfg must not be null");
  return guarded([&] {
    const auto rows = naac::run_eval(cfg->scenario, cfg->run);
    if (outage_prob) *outage_prob = rows.front().outage_prob;
    if (sum_rate_bps_hz) *sum_rate_bps_hz = rows.front().sum_rate_bps_hz;
  });
}

naac_status naac_run_sweep(const naac_config* cfg, const int* n_list, size_t n_count,
                           const char* const* methods, size_t method_count, int seeds,
                           int threads) {
  if (!cfg || !n_list || n_count == 0 || !methods || method_count == 0)
    return fail_contract("naac_run_sweep: null or empty argument");
  return guarded([&] {
    std::vector<int> ns(n_list, n_list + n_count);
    std::vector<std::string> ms;
    ms.reserve(method_count);
    for (size_t i = 0; i < method_count; ++i) {
      if (!methods[i]) naac::throw_contract("naac_run_sweep: null method name");
      ms.emplace_back(methods[i]);
    }
    naac::run_sweep(cfg->scenario, cfg->run, ns, ms, seeds, threads);
  });
}

naac_status naac_run_oracle(const naac_config* cfg, uint64_t seed, char** out_json) {
  if (!cfg || !out_json) return fail_contract("naac_run_oracle: null argument");
  return guarded([&] {
    const naac::OracleRun r = naac::run_oracle(cfg->scenario, seed);
    nlohmann::ordered_json doc;
    doc["n_d2d"] = r.n_d2d;
    doc["n_rbs"] = r.n_rbs;
    doc["seed"] = seed;
    if (r.result.best_feasible) {
      doc["best_feasible"] = r.result.best_feasible->rb_of;
      doc["best_feasible_value"] = r.result.best_feasible_value;
    } else {
      doc["best_feasible"] = nullptr;
      doc["best_feasible_value"] = nullptr;
    }
    doc["best_any"] = r.result.best_any.rb_of;
    doc["best_any_value"] = r.result.best_any_value;
    *out_json = dup_string(doc.dump(2) + "\n");
  });
}

naac_status naac_run_gradcheck(const naac_config* cfg, uint64_t seed, double* actor_err,
                               double* critic_err, double* path_err) {
  if (!cfg) return fail_contract("naac_run_gradcheck: cfg must not be null");
  return guarded([&] {
    const naac::GradcheckReport report =
        naac::run_gradcheck(cfg->scenario, cfg->run, seed);
    if (actor_err) *actor_err = report.actor_err;
    if (critic_err) *critic_err = report.critic_err;
    if (path_err) *path_err = report.path_err;
  });
}

int naac_gradcheck_pass(double actor_err, double critic_err, double path_err) {
  return (actor_err <= naac::kGradTolShape && critic_err <= naac::kGradTolShape &&
          path_err <= naac::kGradTolPath)
             ? 1
             : 0;
}

}  // extern "C"
