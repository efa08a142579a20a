#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "naac/errors.hpp"
#include "naac/harness.hpp"

namespace naac {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw_parse("config key '" + key + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw_parse("config key '" + key + "' must be an integer");
  return v.get<int>();
}

uint64_t as_u64(const json& v, const std::string& key) {
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<int64_t>() >= 0)))
    throw_parse("config key '" + key + "' must be a nonnegative integer");
  return v.get<uint64_t>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw_parse("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw_parse("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

void apply_key(ScenarioConfig& sc, RunConfig& rc, const std::string& key, const json& v) {
  // scenario
  if (key == "cell_radius_m") sc.cell_radius_m = as_double(v, key);
  else if (key == "n_cues") sc.n_cues = as_int(v, key);
  else if (key == "n_d2d") sc.n_d2d = as_int(v, key);
  else if (key == "n_rbs") sc.n_rbs = as_int(v, key);
  else if (key == "max_d2d_dist_m") sc.max_d2d_dist_m = as_double(v, key);
  else if (key == "p_bs_dbm") sc.p_bs_dbm = as_double(v, key);
  else if (key == "p_d2d_dbm") sc.p_d2d_dbm = as_double(v, key);
  else if (key == "noise_density_dbm_hz") sc.noise_density_dbm_hz = as_double(v, key);
  else if (key == "rb_bandwidth_hz") sc.rb_bandwidth_hz = as_double(v, key);
  else if (key == "cue_sinr_min_db") sc.cue_sinr_min_db = as_double(v, key);
  else if (key == "r_neg") sc.r_neg = as_double(v, key);
  else if (key == "lambda_neighbors") sc.lambda_neighbors = as_int(v, key);
  else if (key == "gamma") sc.gamma = as_double(v, key);
  else if (key == "fading_enabled") sc.fading_enabled = as_bool(v, key);
  else if (key == "shadowing_sigma_db") sc.shadowing_sigma_db = as_double(v, key);
  else if (key == "obs_bs_gain_at_tx") sc.obs_bs_gain_at_tx = as_bool(v, key);
  // run
  else if (key == "method") rc.method = as_string(v, key);
  else if (key == "episodes") rc.episodes = as_int(v, key);
  else if (key == "slots_per_episode") rc.slots_per_episode = as_int(v, key);
  else if (key == "eval_episodes") rc.eval_episodes = as_int(v, key);
  else if (key == "master_seed") rc.master_seed = as_u64(v, key);
  else if (key == "lambda_override") rc.lambda_override = as_int(v, key);
  else if (key == "out_dir") rc.out_dir = as_string(v, key);
  else if (key == "actor_lr") rc.hyper.actor_lr = as_double(v, key);
  else if (key == "critic_lr") rc.hyper.critic_lr = as_double(v, key);
  else if (key == "adam_beta1") rc.hyper.adam_beta1 = as_double(v, key);
  else if (key == "adam_beta2") rc.hyper.adam_beta2 = as_double(v, key);
  else if (key == "adam_eps") rc.hyper.adam_eps = as_double(v, key);
  else if (key == "tau") rc.hyper.tau = as_double(v, key);
  else if (key == "literal_eq12") rc.hyper.literal_eq12 = as_bool(v, key);
  else if (key == "buffer_capacity") rc.hyper.buffer_capacity = as_u64(v, key);
  else if (key == "batch_size") rc.hyper.batch_size = as_int(v, key);
  else if (key == "warmup_transitions") rc.hyper.warmup_transitions = as_u64(v, key);
  else if (key == "eps_start") rc.hyper.eps_start = as_double(v, key);
  else if (key == "eps_end") rc.hyper.eps_end = as_double(v, key);
  else if (key == "eps_decay_frac") rc.hyper.eps_decay_frac = as_double(v, key);
  else if (key == "temp_start") rc.hyper.temp_start = as_double(v, key);
  else if (key == "temp_end") rc.hyper.temp_end = as_double(v, key);
  else if (key == "hidden_width") rc.hyper.hidden_width = as_int(v, key);
  else if (key == "q_alpha") rc.hyper.q_alpha = as_double(v, key);
  else if (key == "update_every") rc.hyper.update_every = as_int(v, key);
  else throw_parse("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods{"naac", "ac", "dqn", "qlearning", "random"};
  return methods;
}

void RunConfig::validate() const {
  const auto& methods = known_methods();
  if (std::find(methods.begin(), methods.end(), method) == methods.end())
    throw_parse("unknown method '" + method + "'");
  if (episodes < 1) throw_parse("episodes must be positive");
  if (slots_per_episode < 1) throw_parse("slots_per_episode must be positive");
  if (eval_episodes < 1) throw_parse("eval_episodes must be positive");
  if (lambda_override < -1) throw_parse("lambda_override must be -1 (unset) or nonnegative");
  if (out_dir.empty()) throw_parse("out_dir must not be empty");
  if (hyper.actor_lr <= 0.0) throw_parse("actor_lr must be positive");
  if (hyper.critic_lr <= 0.0) throw_parse("critic_lr must be positive");
  if (!(hyper.adam_beta1 >= 0.0 && hyper.adam_beta1 < 1.0))
    throw_parse("adam_beta1 must lie in [0, 1)");
  if (!(hyper.adam_beta2 >= 0.0 && hyper.adam_beta2 < 1.0))
    throw_parse("adam_beta2 must lie in [0, 1)");
  if (hyper.adam_eps <= 0.0) throw_parse("adam_eps must be positive");
  if (!(hyper.tau >= 0.0 && hyper.tau <= 1.0)) throw_parse("tau must lie in [0, 1]");
  if (hyper.buffer_capacity < 1) throw_parse("buffer_capacity must be positive");
  if (hyper.batch_size < 1) throw_parse("batch_size must be positive");
  if (!(hyper.eps_start >= 0.0 && hyper.eps_start <= 1.0))
    throw_parse("eps_start must lie in [0, 1]");
  if (!(hyper.eps_end >= 0.0 && hyper.eps_end <= 1.0))
    throw_parse("eps_end must lie in [0, 1]");
  if (!(hyper.eps_decay_frac >= 0.0 && hyper.eps_decay_frac <= 1.0))
    throw_parse("eps_decay_frac must lie in [0, 1]");
  if (hyper.temp_start <= 0.0 || hyper.temp_end <= 0.0)
    throw_parse("temperatures must be positive");
  if (hyper.hidden_width < 1) throw_parse("hidden_width must be positive");
  if (!(hyper.q_alpha > 0.0 && hyper.q_alpha <= 1.0))
    throw_parse("q_alpha must lie in (0, 1]");
  if (hyper.update_every < 1) throw_parse("update_every must be positive");
}

std::pair<ScenarioConfig, RunConfig> parse_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw_parse(std::string("malformed config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw_parse("config document must be a flat JSON object");

  ScenarioConfig sc;
  RunConfig rc;
  for (const auto& [key, value] : doc.items()) apply_key(sc, rc, key, value);
  sc.validate();
  rc.validate();
  return {sc, rc};
}

std::pair<ScenarioConfig, RunConfig> load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw_io("cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_to_json(const ScenarioConfig& sc, const RunConfig& rc) {
  ordered_json doc;
  doc["cell_radius_m"] = sc.cell_radius_m;
  doc["n_cues"] = sc.n_cues;
  doc["n_d2d"] = sc.n_d2d;
  doc["n_rbs"] = sc.n_rbs;
  doc["max_d2d_dist_m"] = sc.max_d2d_dist_m;
  doc["p_bs_dbm"] = sc.p_bs_dbm;
  doc["p_d2d_dbm"] = sc.p_d2d_dbm;
  doc["noise_density_dbm_hz"] = sc.noise_density_dbm_hz;
  doc["rb_bandwidth_hz"] = sc.rb_bandwidth_hz;
  doc["cue_sinr_min_db"] = sc.cue_sinr_min_db;
  doc["r_neg"] = sc.r_neg;
  doc["lambda_neighbors"] = sc.lambda_neighbors;
  doc["gamma"] = sc.gamma;
  doc["fading_enabled"] = sc.fading_enabled;
  doc["shadowing_sigma_db"] = sc.shadowing_sigma_db;
  doc["obs_bs_gain_at_tx"] = sc.obs_bs_gain_at_tx;
  doc["method"] = rc.method;
  doc["episodes"] = rc.episodes;
  doc["slots_per_episode"] = rc.slots_per_episode;
  doc["eval_episodes"] = rc.eval_episodes;
  doc["master_seed"] = rc.master_seed;
  doc["lambda_override"] = rc.lambda_override;
  doc["out_dir"] = rc.out_dir;
  doc["actor_lr"] = rc.hyper.actor_lr;
  doc["critic_lr"] = rc.hyper.critic_lr;
  doc["adam_beta1"] = rc.hyper.adam_beta1;
  doc["adam_beta2"] = rc.hyper.adam_beta2;
  doc["adam_eps"] = rc.hyper.adam_eps;
  doc["tau"] = rc.hyper.tau;
  doc["literal_eq12"] = rc.hyper.literal_eq12;
  doc["buffer_capacity"] = rc.hyper.buffer_capacity;
  doc["batch_size"] = rc.hyper.batch_size;
  doc["warmup_transitions"] = rc.hyper.warmup_transitions;
  doc["eps_start"] = rc.hyper.eps_start;
  doc["eps_end"] = rc.hyper.eps_end;
  doc["eps_decay_frac"] = rc.hyper.eps_decay_frac;
  doc["temp_start"] = rc.hyper.temp_start;
  doc["temp_end"] = rc.hyper.temp_end;
  doc["hidden_width"] = rc.hyper.hidden_width;
  doc["q_alpha"] = rc.hyper.q_alpha;
  doc["update_every"] = rc.hyper.update_every;
  return doc.dump(2) + "\n";
}

void set_config_key(ScenarioConfig& sc, RunConfig& rc, const std::string& key,
                    const std::string& json_value) {
  json v;
  try {
    v = json::parse(json_value);
  } catch (const json::exception& e) {
    throw_parse("invalid value for config key '" + key + "': " + e.what());
  }
  // Apply to copies first: a rejected value must not stick. Cross-field
  // invariants are enforced when a whole document is parsed and again at run
  // entry; per-key sets only range-check so that coupled keys (n_cues/n_rbs)
  // can be set in any order.
  ScenarioConfig sc_next = sc;
  RunConfig rc_next = rc;
  apply_key(sc_next, rc_next, key, v);
  sc_next.validate_fields();
  rc_next.validate();
  sc = sc_next;
  rc = std::move(rc_next);
}

}  // namespace naac
