#include "naac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "naac/errors.hpp"

namespace fs = std::filesystem;

namespace naac {

namespace {

constexpr const char* kCsvHeader =
    "method,seed,n_d2d,episode,total_reward,outage_prob,sum_rate_bps_hz,mean_critic_loss";

fs::path checkpoint_path(const std::string& out_dir, const std::string& method, int agent) {
  return fs::path(out_dir) / (method + "_agent" + std::to_string(agent) + ".params");
}

void save_qtable(const QTable& table, const fs::path& path) {
  // A table is a linear map from one-hot states to action values, so it
  // reuses the network checkpoint format with widths [n_states, K].
  Mlp shell({QTable::n_states(table.n_rbs), table.n_rbs});
  auto params = shell.params();
  std::copy(table.q.begin(), table.q.end(), params.begin());
  shell.save(path.string());
}

QTable load_qtable(const fs::path& path) {
  const Mlp shell = Mlp::load(path.string());
  if (shell.widths().size() != 2) throw_io("not a Q-table checkpoint: " + path.string());
  const int k = shell.widths()[1];
  if (shell.widths()[0] != QTable::n_states(k))
    throw_io("Q-table checkpoint has unexpected state count: " + path.string());
  QTable table;
  table.n_rbs = k;
  const auto params = shell.params();
  table.q.assign(params.begin(), params.begin() + static_cast<size_t>(QTable::n_states(k)) * k);
  return table;
}

std::unique_ptr<Policy> load_policy(const ScenarioConfig& scenario, const RunConfig& run) {
  if (run.method == "random") return std::make_unique<RandomPolicy>(scenario.n_rbs);
  if (run.method == "qlearning") {
    std::vector<QTable> tables;
    for (int i = 0; i < scenario.n_d2d; ++i) {
      const fs::path path = checkpoint_path(run.out_dir, run.method, i);
      if (!fs::exists(path)) throw_io("missing checkpoint: " + path.string());
      tables.push_back(load_qtable(path));
    }
    return std::make_unique<QTablePolicy>(std::move(tables));
  }
  std::vector<Mlp> nets;
  for (int i = 0; i < scenario.n_d2d; ++i) {
    const fs::path path = checkpoint_path(run.out_dir, run.method, i);
    if (!fs::exists(path)) throw_io("missing checkpoint: " + path.string());
    nets.push_back(Mlp::load(path.string()));
  }
  return std::make_unique<ActorPolicy>(std::move(nets));
}

MetricsRow stats_to_row(const EpisodeStats& st, const std::string& method, uint64_t seed,
                        int n_d2d) {
  MetricsRow row;
  row.method = method;
  row.seed = seed;
  row.n_d2d = n_d2d;
  row.episode = std::to_string(st.episode);
  row.total_reward = st.total_reward;
  row.outage_prob = st.outage_prob;
  row.sum_rate_bps_hz = st.mean_sum_rate;
  row.mean_critic_loss = st.mean_loss;
  return row;
}

}  // namespace

std::string format_csv_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw_io("cannot open for write: " + path);
  f << kCsvHeader << '\n';
  for (const auto& row : rows) {
    f << row.method << ',' << row.seed << ',' << row.n_d2d << ',' << row.episode << ','
      << format_csv_value(row.total_reward) << ',' << format_csv_value(row.outage_prob) << ','
      << format_csv_value(row.sum_rate_bps_hz) << ','
      << format_csv_value(row.mean_critic_loss) << '\n';
  }
  if (!f) throw_io("write failed: " + path);
}

std::vector<MetricsRow> parse_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_io("cannot open for read: " + path);
  std::string line;
  if (!std::getline(f, line)) throw_io("empty CSV: " + path);
  if (line != kCsvHeader) throw_io("unexpected CSV header in " + path);

  std::vector<MetricsRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw_io("malformed CSV row in " + path);
    MetricsRow row;
    row.method = fields[0];
    row.seed = std::strtoull(fields[1].c_str(), nullptr, 10);
    row.n_d2d = std::atoi(fields[2].c_str());
    row.episode = fields[3];
    row.total_reward = std::strtod(fields[4].c_str(), nullptr);
    row.outage_prob = std::strtod(fields[5].c_str(), nullptr);
    row.sum_rate_bps_hz = std::strtod(fields[6].c_str(), nullptr);
    row.mean_critic_loss = std::strtod(fields[7].c_str(), nullptr);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> run_training(const ScenarioConfig& scenario, const RunConfig& run) {
  scenario.validate();
  run.validate();
  fs::create_directories(run.out_dir);

  TrainSetup setup;
  setup.scenario = scenario;
  setup.hyper = run.hyper;
  setup.episodes = run.episodes;
  setup.slots_per_episode = run.slots_per_episode;
  setup.master_seed = run.master_seed;
  setup.frozen_topology = run.frozen_topology;

  std::vector<EpisodeStats> episodes;
  if (run.method == "naac" || run.method == "ac") {
    const int lambda = run.method == "ac" ? 0 : run.lambda_override;
    NaacResult res = train_naac(setup, lambda);
    episodes = std::move(res.episodes);
    for (const auto& agent : res.agents)
      agent.actor.save(checkpoint_path(run.out_dir, run.method, agent.index).string());
  } else if (run.method == "dqn") {
    DqnResult res = train_dqn(setup);
    episodes = std::move(res.episodes);
    for (size_t i = 0; i < res.agents.size(); ++i)
      res.agents[i].qnet.save(
          checkpoint_path(run.out_dir, run.method, static_cast<int>(i)).string());
  } else if (run.method == "qlearning") {
    QlResult res = train_qlearning(setup);
    episodes = std::move(res.episodes);
    for (size_t i = 0; i < res.agents.size(); ++i)
      save_qtable(res.agents[i],
                  checkpoint_path(run.out_dir, run.method, static_cast<int>(i)));
  } else if (run.method == "random") {
    episodes = train_random(setup);
  } else {
    throw_parse("unknown method '" + run.method + "'");
  }

  std::vector<MetricsRow> rows;
  rows.reserve(episodes.size());
  for (const auto& st : episodes)
    rows.push_back(stats_to_row(st, run.method, run.master_seed, scenario.n_d2d));

  const fs::path csv = fs::path(run.out_dir) / (run.method + "_seed" +
                                                std::to_string(run.master_seed) + "_train.csv");
  emit_csv(rows, csv.string());
  return rows;
}

EvalSummary evaluate_policy(const Policy& policy, const ScenarioConfig& scenario,
                            const RunConfig& run, uint64_t eval_master) {
  scenario.validate();
  const int n = scenario.n_d2d;

  double outages = 0.0, cue_slots = 0.0, rate_total = 0.0, reward_total = 0.0;
  long slots_total = 0;
  for (int ep = 0; ep < run.eval_episodes; ++ep) {
    Topology topo;
    if (run.frozen_topology) {
      topo = *run.frozen_topology;
    } else {
      RngStream ts(derive_stream_seed(eval_master, kTagEvalTopology, ep, 0));
      topo = sample_topology(scenario, ts);
    }
    DownlinkEnv env(std::move(topo), scenario,
                    RngStream(derive_stream_seed(eval_master, kTagEvalShadowing, ep, 0)),
                    RngStream(derive_stream_seed(eval_master, kTagEvalFading, ep, 0)));
    auto obs = env.reset();

    std::vector<RngStream> action_streams;
    action_streams.reserve(n);
    for (int i = 0; i < n; ++i)
      action_streams.emplace_back(derive_stream_seed(eval_master, kTagEvalAction, ep, i));

    for (int t = 0; t < run.slots_per_episode; ++t) {
      ActionProfile profile;
      profile.rb_of.resize(n);
      for (int i = 0; i < n; ++i)
        profile.rb_of[i] = policy.act(i, obs[i], action_streams[i]);
      const StepOutcome out = env.step(profile);
      for (const auto flag : out.cue_outage_flags) outages += flag;
      cue_slots += static_cast<double>(out.cue_outage_flags.size());
      rate_total += out.sum_rate_bps_hz;
      for (const double r : out.rewards) reward_total += r;
      ++slots_total;
      obs = out.next_obs;
    }
  }

  EvalSummary s;
  s.outage_prob = cue_slots > 0.0 ? outages / cue_slots : 0.0;
  s.sum_rate = slots_total > 0 ? rate_total / static_cast<double>(slots_total) : 0.0;
  s.mean_episode_reward =
      run.eval_episodes > 0 ? reward_total / static_cast<double>(run.eval_episodes) : 0.0;
  return s;
}

namespace {

MetricsRow eval_row(const ScenarioConfig& scenario, const RunConfig& run, uint64_t eval_master,
                    uint64_t seed_column) {
  const auto policy = load_policy(scenario, run);
  const EvalSummary s = evaluate_policy(*policy, scenario, run, eval_master);
  MetricsRow row;
  row.method = run.method;
  row.seed = seed_column;
  row.n_d2d = scenario.n_d2d;
  row.episode = "eval";
  row.total_reward = s.mean_episode_reward;
  row.outage_prob = s.outage_prob;
  row.sum_rate_bps_hz = s.sum_rate;
  row.mean_critic_loss = 0.0;
  return row;
}

}  // namespace

std::vector<MetricsRow> run_eval(const ScenarioConfig& scenario, const RunConfig& run) {
  scenario.validate();
  run.validate();
  const uint64_t eval_master = derive_stream_seed(run.master_seed, kTagEvalRoot, 0, 0);
  const MetricsRow row = eval_row(scenario, run, eval_master, run.master_seed);
  const fs::path csv = fs::path(run.out_dir) / (run.method + "_seed" +
                                                std::to_string(run.master_seed) + "_eval.csv");
  emit_csv({row}, csv.string());
  return {row};
}

int threads_from_env() {
  const char* env = std::getenv("NAAC_THREADS");
  if (!env || !*env) return 1;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
  if (ec != std::errc() || *ptr != '\0' || value < 0)
    throw_parse("NAAC_THREADS must be a nonnegative integer");
  return value == 0 ? 1 : std::min(value, 64);
}

std::vector<MetricsRow> run_sweep(const ScenarioConfig& scenario, const RunConfig& run,
                                  const std::vector<int>& n_list,
                                  const std::vector<std::string>& methods, int seeds,
                                  int threads) {
  scenario.validate();
  run.validate();
  if (n_list.empty()) throw_parse("sweep: n_list must not be empty");
  for (const int n : n_list)
    if (n < 1) throw_parse("sweep: n_list values must be >= 1");
  if (methods.empty()) throw_parse("sweep: methods must not be empty");
  for (const auto& m : methods) {
    const auto& known = known_methods();
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw_parse("sweep: unknown method '" + m + "'");
  }
  if (seeds < 1) throw_parse("sweep: seeds must be >= 1");
  if (threads < 0) threads = threads_from_env();
  threads = std::max(1, threads);

  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<std::string> ms = methods;
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());

  struct Cell {
    std::string method;
    int n = 0;
    int seed_idx = 0;
  };
  std::vector<Cell> cells;
  for (const auto& m : ms)
    for (const int n : ns)
      for (int s = 0; s < seeds; ++s) cells.push_back({m, n, s});

  const fs::path out(run.out_dir);
  const fs::path staging = out / "staging";
  fs::create_directories(staging);
  fs::create_directories(out / "cells");

  auto cell_tag = [](const Cell& c) {
    return c.method + "_n" + std::to_string(c.n) + "_seed" + std::to_string(c.seed_idx);
  };

  auto run_cell = [&](const Cell& cell) {
    ScenarioConfig cell_sc = scenario;
    cell_sc.n_d2d = cell.n;
    RunConfig cell_rc = run;
    cell_rc.method = cell.method;
    cell_rc.out_dir = (out / "cells" / cell_tag(cell)).string();
    // Training and evaluation seeds depend on (N, seed index) only, so every
    // method sees the same topologies: paired seed comparisons.
    cell_rc.master_seed = derive_stream_seed(run.master_seed, kTagSweepCell, cell.n,
                                             cell.seed_idx);
    run_training(cell_sc, cell_rc);
    const uint64_t eval_master =
        derive_stream_seed(run.master_seed, kTagEvalRoot, cell.n, cell.seed_idx);
    const MetricsRow row = eval_row(cell_sc, cell_rc, eval_master,
                                    static_cast<uint64_t>(cell.seed_idx));
    emit_csv({row}, (staging / (cell_tag(cell) + ".csv")).string());
  };

  if (threads <= 1 || cells.size() <= 1) {
    for (const auto& cell : cells) run_cell(cell);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
      while (true) {
        const size_t idx = next.fetch_add(1);
        if (idx >= cells.size()) return;
        try {
          run_cell(cells[idx]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(threads, static_cast<int>(cells.size()));
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Deterministic merge: cells were generated in (method, n, seed) order.
  std::vector<MetricsRow> rows;
  rows.reserve(cells.size());
  for (const auto& cell : cells) {
    const auto cell_rows = parse_csv((staging / (cell_tag(cell) + ".csv")).string());
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
  }
  emit_csv(rows, (out / "sweep.csv").string());
  return rows;
}

OracleRun run_oracle(const ScenarioConfig& scenario, uint64_t seed) {
  scenario.validate();
  RngStream stream(derive_stream_seed(seed, kTagOracle, 0, 0));
  const Topology topo = sample_topology(scenario, stream);
  const ChannelGains gains = compute_gains(topo, scenario, stream);
  OracleRun r;
  r.result = brute_force_oracle(gains, scenario, topo.cue_rb);
  r.n_d2d = scenario.n_d2d;
  r.n_rbs = scenario.n_rbs;
  return r;
}

GradcheckReport run_gradcheck(const ScenarioConfig& scenario, const RunConfig& run,
                              uint64_t seed) {
  scenario.validate();
  run.validate();
  const int n = std::max(scenario.n_d2d, 1);
  const int k = scenario.n_rbs;
  const int obs_dim = 3 + k;
  int lambda = run.method == "ac"
                   ? 0
                   : (run.lambda_override >= 0 ? run.lambda_override
                                               : scenario.lambda_neighbors);
  lambda = std::clamp(lambda, 0, n - 1);
  const int group = lambda + 1;
  const int batch = 4;

  RngStream init(derive_stream_seed(seed, kTagGradcheck, 0, 0));
  AgentBundle bundle =
      make_agent_bundle(0, obs_dim, k, group, run.hyper.hidden_width, run.hyper, init);
  RngStream data(derive_stream_seed(seed, kTagGradcheck, 1, 0));
  auto uniform_pm1 = [&]() { return 2.0 * data.next_unit() - 1.0; };

  GradcheckReport report;
  {
    std::vector<double> x(static_cast<size_t>(batch) * obs_dim);
    for (auto& v : x) v = uniform_pm1();
    std::vector<double> target(static_cast<size_t>(batch) * k);
    for (auto& v : target) v = uniform_pm1();
    auto loss_value = [&](const Mlp& net) {
      const auto out = net.forward(x, batch);
      double loss = 0.0;
      for (size_t i = 0; i < out.size(); ++i) {
        const double d = out[i] - target[i];
        loss += d * d;
      }
      return loss / batch;
    };
    Mlp::Cache cache;
    const auto out = bundle.actor.forward(x, batch, &cache);
    std::vector<double> dy(out.size());
    for (size_t i = 0; i < out.size(); ++i) dy[i] = 2.0 * (out[i] - target[i]) / batch;
    const auto grads = bundle.actor.backward(cache, dy);
    report.actor_err = finite_diff_check(bundle.actor, loss_value, grads.params, 1e-6);
  }
  {
    const int s_dim = group * obs_dim;
    const int a_dim = group * k;
    std::vector<double> x(static_cast<size_t>(batch) * s_dim);
    for (auto& v : x) v = uniform_pm1();
    std::vector<double> aux(static_cast<size_t>(batch) * a_dim);
    for (auto& v : aux) v = data.next_unit();
    std::vector<double> target(batch);
    for (auto& v : target) v = uniform_pm1();
    auto loss_value = [&](const Mlp& net) {
      const auto out = net.forward(x, batch, nullptr, aux);
      double loss = 0.0;
      for (int b = 0; b < batch; ++b) {
        const double d = out[b] - target[b];
        loss += d * d;
      }
      return loss / batch;
    };
    Mlp::Cache cache;
    const auto out = bundle.critic.forward(x, batch, &cache, aux);
    std::vector<double> dy(batch);
    for (int b = 0; b < batch; ++b) dy[b] = 2.0 * (out[b] - target[b]) / batch;
    const auto grads = bundle.critic.backward(cache, dy);
    report.critic_err = finite_diff_check(bundle.critic, loss_value, grads.params, 1e-6);
  }
  {
    // Frozen-noise path through the critic: synthetic joint transitions over
    // `group` agents with this agent first in its own neighbor list.
    std::vector<Transition> storage(batch);
    for (auto& tr : storage) {
      tr.s.resize(static_cast<size_t>(group) * obs_dim);
      for (auto& v : tr.s) v = uniform_pm1();
      tr.s2.resize(static_cast<size_t>(group) * obs_dim);
      for (auto& v : tr.s2) v = uniform_pm1();
      tr.a.assign(static_cast<size_t>(group) * k, 0.0);
      for (int p = 0; p < group; ++p)
        tr.a[static_cast<size_t>(p) * k + data.next_below(static_cast<uint32_t>(k))] = 1.0;
      tr.r.resize(group);
      for (auto& v : tr.r) v = uniform_pm1();
    }
    Minibatch mb;
    for (auto& tr : storage) mb.items.push_back(&tr);
    mb.n_agents = group;
    mb.obs_dim = obs_dim;
    mb.n_rbs = k;
    std::vector<int> nb(group);
    for (int p = 0; p < group; ++p) nb[p] = p;

    std::vector<double> noise(static_cast<size_t>(batch) * k);
    for (auto& v : noise) v = data.gumbel();

    const ActorEval eval =
        actor_objective_grad(bundle.actor, bundle.critic, mb, nb, 0, 1.0, noise);
    auto objective = [&](const Mlp& net) {
      return actor_objective_grad(net, bundle.critic, mb, nb, 0, 1.0, noise).objective;
    };
    report.path_err = finite_diff_check(bundle.actor, objective, eval.actor_grad, 1e-6);
  }
  return report;
}

}  // namespace naac
