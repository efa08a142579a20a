// Command-line front end; drives the simulator exclusively through the C API.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "naac/naac.h"

namespace {

struct ConfigHandle {
  naac_config* cfg = nullptr;
  ~ConfigHandle() { naac_config_destroy(cfg); }
};

int fail(naac_status status, const char* what) {
  std::fprintf(stderr, "%s failed: %s\n", what, naac_last_error());
  return static_cast<int>(status);
}

std::string quote_json(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> values;
  std::string token;
  for (size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      if (!token.empty()) values.push_back(std::stoi(token));
      token.clear();
    } else {
      token.push_back(csv[i]);
    }
  }
  return values;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
  std::vector<std::string> names;
  std::string token;
  for (size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      if (!token.empty()) names.push_back(token);
      token.clear();
    } else {
      token.push_back(csv[i]);
    }
  }
  return names;
}

struct CommonOpts {
  std::string config_path;
  std::string method;
  std::string out_dir;
  uint64_t seed = 0;
  bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_method = true) {
  cmd->add_option("--config", opts.config_path, "Path to a JSON config file");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides the config)")
      ->each([&](const std::string&) { opts.has_seed = true; });
  if (with_method)
    cmd->add_option("--method", opts.method,
                    "Method name (train/eval) or CSV of method names (sweep)");
  cmd->add_option("--out", opts.out_dir, "Output directory (overrides the config)");
}

int build_config(const CommonOpts& opts, ConfigHandle& handle, bool method_is_single) {
  naac_status st = opts.config_path.empty()
                       ? naac_config_create(&handle.cfg)
                       : naac_config_load(opts.config_path.c_str(), &handle.cfg);
  if (st != NAAC_OK) return fail(st, "loading config");
  if (opts.has_seed) {
    st = naac_config_set(handle.cfg, "master_seed", std::to_string(opts.seed).c_str());
    if (st != NAAC_OK) return fail(st, "setting master_seed");
  }
  if (method_is_single && !opts.method.empty()) {
    st = naac_config_set(handle.cfg, "method", quote_json(opts.method).c_str());
    if (st != NAAC_OK) return fail(st, "setting method");
  }
  if (!opts.out_dir.empty()) {
    st = naac_config_set(handle.cfg, "out_dir", quote_json(opts.out_dir).c_str());
    if (st != NAAC_OK) return fail(st, "setting out_dir");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D2D underlay spectrum allocation: link-level simulator and "
               "multi-agent RL training harness"};
  app.require_subcommand(1);

  CommonOpts train_opts, eval_opts, sweep_opts, oracle_opts, grad_opts;
  std::string n_list_csv = "2,4,6,8,10";
  int seeds = 5;
  int threads = -1;

  CLI::App* train = app.add_subcommand("train", "Train one method and write checkpoints");
  add_common(train, train_opts);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate checkpoints greedily");
  add_common(eval, eval_opts);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Train and evaluate the full (method, N, seed) cross product");
  add_common(sweep, sweep_opts);
  sweep->add_option("--n-list", n_list_csv, "CSV list of D2D pair counts");
  sweep->add_option("--seeds", seeds, "Number of seed indices per cell");
  sweep->add_option("--threads", threads,
                    "Worker pool size (-1: honor NAAC_THREADS, 0/1: sequential)");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Exhaustive allocation optimum of one sampled instance");
  add_common(oracle, oracle_opts, false);

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference validation of the gradient paths");
  add_common(gradcheck, grad_opts);

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    ConfigHandle handle;
    if (const int rc = build_config(train_opts, handle, true)) return rc;
    const naac_status st = naac_run_train(handle.cfg);
    if (st != NAAC_OK) return fail(st, "train");
    std::printf("training complete\n");
    return 0;
  }

  if (eval->parsed()) {
    ConfigHandle handle;
    if (const int rc = build_config(eval_opts, handle, true)) return rc;
    double outage = 0.0, sum_rate = 0.0;
    const naac_status st = naac_run_eval(handle.cfg, &outage, &sum_rate);
    if (st != NAAC_OK) return fail(st, "eval");
    std::printf("outage_prob %.9g\nsum_rate_bps_hz %.9g\n", outage, sum_rate);
    return 0;
  }

  if (sweep->parsed()) {
    ConfigHandle handle;
    if (const int rc = build_config(sweep_opts, handle, false)) return rc;
    const std::vector<int> ns = parse_int_list(n_list_csv);
    std::vector<std::string> method_names =
        sweep_opts.method.empty()
            ? std::vector<std::string>{"naac", "ac", "dqn", "qlearning", "random"}
            : parse_name_list(sweep_opts.method);
    std::vector<const char*> method_ptrs;
    method_ptrs.reserve(method_names.size());
    for (const auto& m : method_names) method_ptrs.push_back(m.c_str());
    const naac_status st =
        naac_run_sweep(handle.cfg, ns.data(), ns.size(), method_ptrs.data(),
                       method_ptrs.size(), seeds, threads);
    if (st != NAAC_OK) return fail(st, "sweep");
    std::printf("sweep complete\n");
    return 0;
  }

  if (oracle->parsed()) {
    ConfigHandle handle;
    if (const int rc = build_config(oracle_opts, handle, false)) return rc;
    char* json = nullptr;
    const naac_status st =
        naac_run_oracle(handle.cfg, oracle_opts.has_seed ? oracle_opts.seed : 1, &json);
    if (st != NAAC_OK) return fail(st, "oracle");
    std::fputs(json, stdout);
    naac_string_free(json);
    return 0;
  }

  if (gradcheck->parsed()) {
    ConfigHandle handle;
    if (const int rc = build_config(grad_opts, handle, true)) return rc;
    double actor_err = 0.0, critic_err = 0.0, path_err = 0.0;
    const naac_status st = naac_run_gradcheck(
        handle.cfg, grad_opts.has_seed ? grad_opts.seed : 1, &actor_err, &critic_err,
        &path_err);
    if (st != NAAC_OK) return fail(st, "gradcheck");
    std::printf("actor_max_rel_err %.3e\ncritic_max_rel_err %.3e\npath_max_rel_err %.3e\n",
                actor_err, critic_err, path_err);
    if (!naac_gradcheck_pass(actor_err, critic_err, path_err)) {
      std::fprintf(stderr, "gradcheck failed tolerance\n");
      return 1;
    }
    return 0;
  }

  return 0;
}
