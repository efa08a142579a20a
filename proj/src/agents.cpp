#include "naac/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "naac/errors.hpp"

namespace naac {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw_contract("ReplayBuffer: capacity must be positive");
  ring_.reserve(std::min<size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
  } else {
    ring_[head_] = std::move(t);
  }
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++inserted_;
}

const Transition& ReplayBuffer::at(size_t i) const {
  if (i >= size_) throw_contract("ReplayBuffer::at: index out of range");
  const size_t oldest = size_ < capacity_ ? 0 : head_;
  return ring_[(oldest + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(size_t batch, RngStream& stream) const {
  if (size_ < batch)
    throw_contract("ReplayBuffer::sample: fewer transitions than requested batch");
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (size_t b = 0; b < batch; ++b)
    out.push_back(&ring_[stream.next_below(static_cast<uint32_t>(size_))]);
  return out;
}

NeighborIndex neighbor_sets(const Topology& topology, int lambda) {
  const int n = static_cast<int>(topology.d2d_tx_pos.size());
  if (lambda < 0 || lambda > std::max(n - 1, 0))
    throw_contract("neighbor_sets: lambda must lie in [0, N-1]");
  NeighborIndex idx;
  idx.lambda = lambda;
  idx.nb.resize(n);
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      order.emplace_back(dist(topology.d2d_tx_pos[j], topology.d2d_rx_pos[i]), j);
    }
    std::sort(order.begin(), order.end());
    idx.nb[i].reserve(lambda + 1);
    idx.nb[i].push_back(i);
    for (int p = 0; p < lambda; ++p) idx.nb[i].push_back(order[p].second);
  }
  return idx;
}

AgentBundle make_agent_bundle(int index, int obs_dim, int n_rbs, int group_size, int hidden,
                              const TrainHyper& hyper, RngStream& init_stream) {
  AgentBundle b;
  b.index = index;
  b.actor = Mlp::with_uniform_init({obs_dim, hidden, hidden, n_rbs}, init_stream);
  b.critic = Mlp::with_uniform_init({group_size * obs_dim, hidden, hidden, 1}, init_stream,
                                    group_size * n_rbs, 1);
  b.target_actor = b.actor;
  b.target_critic = b.critic;
  b.actor_opt = AdamState(b.actor.param_count(), hyper.actor_adam());
  b.critic_opt = AdamState(b.critic.param_count(), hyper.critic_adam());
  return b;
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

int select_action_greedy(const Mlp& actor, std::span<const double> obs) {
  const auto logits = actor.forward(obs, 1);
  return argmax_lowest(logits);
}

int select_action(const Mlp& actor, std::span<const double> obs, double epsilon,
                  RngStream& stream) {
  if (epsilon > 0.0 && stream.next_unit() < epsilon)
    return static_cast<int>(stream.next_below(static_cast<uint32_t>(actor.output_dim())));
  return select_action_greedy(actor, obs);
}

std::vector<double> compose_states(const Minibatch& mb, const std::vector<int>& nb_i,
                                   bool next) {
  const int batch = mb.size();
  const int group = static_cast<int>(nb_i.size());
  const int d = mb.obs_dim;
  std::vector<double> out(static_cast<size_t>(batch) * group * d);
  for (int b = 0; b < batch; ++b) {
    const auto& src = next ? mb.items[b]->s2 : mb.items[b]->s;
    double* row = out.data() + static_cast<size_t>(b) * group * d;
    for (int p = 0; p < group; ++p)
      std::memcpy(row + static_cast<size_t>(p) * d,
                  src.data() + static_cast<size_t>(nb_i[p]) * d,
                  static_cast<size_t>(d) * sizeof(double));
  }
  return out;
}

std::vector<double> compose_actions(const Minibatch& mb, const std::vector<int>& nb_i) {
  const int batch = mb.size();
  const int group = static_cast<int>(nb_i.size());
  const int k = mb.n_rbs;
  std::vector<double> out(static_cast<size_t>(batch) * group * k);
  for (int b = 0; b < batch; ++b) {
    double* row = out.data() + static_cast<size_t>(b) * group * k;
    for (int p = 0; p < group; ++p)
      std::memcpy(row + static_cast<size_t>(p) * k,
                  mb.items[b]->a.data() + static_cast<size_t>(nb_i[p]) * k,
                  static_cast<size_t>(k) * sizeof(double));
  }
  return out;
}

std::vector<double> gather_agent_obs(const Minibatch& mb, int agent, bool next) {
  const int batch = mb.size();
  const int d = mb.obs_dim;
  std::vector<double> out(static_cast<size_t>(batch) * d);
  for (int b = 0; b < batch; ++b) {
    const auto& src = next ? mb.items[b]->s2 : mb.items[b]->s;
    std::memcpy(out.data() + static_cast<size_t>(b) * d,
                src.data() + static_cast<size_t>(agent) * d,
                static_cast<size_t>(d) * sizeof(double));
  }
  return out;
}

std::vector<double> critic_target(const AgentBundle& bundle, const Minibatch& mb,
                                  const std::vector<int>& nb_i,
                                  const std::vector<AgentBundle>& all, double gamma,
                                  bool literal_eq12) {
  const int batch = mb.size();
  const int k = mb.n_rbs;
  const int group = static_cast<int>(nb_i.size());

  std::vector<double> next_actions(static_cast<size_t>(batch) * group * k, 0.0);
  for (int p = 0; p < group; ++p) {
    const AgentBundle& peer = all[nb_i[p]];
    const Mlp& policy = literal_eq12 ? peer.actor : peer.target_actor;
    const auto x = gather_agent_obs(mb, nb_i[p], true);
    const auto logits = policy.forward(x, batch);
    for (int b = 0; b < batch; ++b) {
      const int choice = argmax_lowest(
          std::span<const double>(logits).subspan(static_cast<size_t>(b) * k, k));
      next_actions[static_cast<size_t>(b) * group * k + static_cast<size_t>(p) * k + choice] =
          1.0;
    }
  }

  const auto next_states = compose_states(mb, nb_i, true);
  const Mlp& qnet = literal_eq12 ? bundle.critic : bundle.target_critic;
  const auto q_next = qnet.forward(next_states, batch, nullptr, next_actions);

  std::vector<double> y(batch);
  for (int b = 0; b < batch; ++b) y[b] = mb.items[b]->r[bundle.index] + gamma * q_next[b];
  return y;
}

double update_critic(AgentBundle& bundle, const Minibatch& mb, const std::vector<int>& nb_i,
                     std::span<const double> targets) {
  const int batch = mb.size();
  const auto states = compose_states(mb, nb_i, false);
  const auto actions = compose_actions(mb, nb_i);
  Mlp::Cache cache;
  const auto pred = bundle.critic.forward(states, batch, &cache, actions);

  double loss = 0.0;
  std::vector<double> dy(batch);
  for (int b = 0; b < batch; ++b) {
    const double diff = pred[b] - targets[b];
    loss += diff * diff;
    dy[b] = 2.0 * diff / batch;
  }
  loss /= batch;

  const auto grads = bundle.critic.backward(cache, dy);
  bundle.critic_opt.step(bundle.critic.params(), grads.params);
  return loss;
}

ActorEval actor_objective_grad(const Mlp& actor, const Mlp& critic, const Minibatch& mb,
                               const std::vector<int>& nb_i, int self_agent,
                               double temperature, std::span<const double> gumbel_noise) {
  if (nb_i.empty() || nb_i[0] != self_agent)
    throw_contract("actor update: neighbor list must start with the agent itself");
  const int batch = mb.size();
  const int k = mb.n_rbs;
  const int group = static_cast<int>(nb_i.size());
  if (gumbel_noise.size() != static_cast<size_t>(batch) * k)
    throw_contract("actor update: gumbel noise must be batch x K");

  const auto own_obs = gather_agent_obs(mb, self_agent, false);
  Mlp::Cache actor_cache;
  const auto logits = actor.forward(own_obs, batch, &actor_cache);

  // Own action relaxed through the softmax, written into slot 0 of the
  // action block; other slots keep the buffered one-hots.
  auto actions = compose_actions(mb, nb_i);
  std::vector<double> relaxed(static_cast<size_t>(batch) * k);
  for (int b = 0; b < batch; ++b) {
    const auto yb = gumbel_softmax_from_noise(
        std::span<const double>(logits).subspan(static_cast<size_t>(b) * k, k),
        gumbel_noise.subspan(static_cast<size_t>(b) * k, k), temperature);
    std::copy(yb.begin(), yb.end(), relaxed.begin() + static_cast<size_t>(b) * k);
    std::copy(yb.begin(), yb.end(), actions.begin() + static_cast<size_t>(b) * group * k);
  }

  const auto states = compose_states(mb, nb_i, false);
  Mlp::Cache critic_cache;
  const auto q = critic.forward(states, batch, &critic_cache, actions);
  ActorEval eval;
  for (int b = 0; b < batch; ++b) eval.objective += q[b];
  eval.objective /= batch;

  const std::vector<double> dq(batch, 1.0 / batch);
  const auto critic_grads = critic.backward(critic_cache, dq, false);

  std::vector<double> dlogits(static_cast<size_t>(batch) * k);
  for (int b = 0; b < batch; ++b) {
    const std::span<const double> d_action(
        critic_grads.aux.data() + static_cast<size_t>(b) * group * k, static_cast<size_t>(k));
    const auto dl = gumbel_softmax_backward(
        std::span<const double>(relaxed).subspan(static_cast<size_t>(b) * k, k), d_action,
        temperature);
    std::copy(dl.begin(), dl.end(), dlogits.begin() + static_cast<size_t>(b) * k);
  }

  eval.actor_grad = actor.backward(actor_cache, dlogits).params;
  return eval;
}

double update_actor(AgentBundle& bundle, const Minibatch& mb, const std::vector<int>& nb_i,
                    double temperature, RngStream& gumbel_stream) {
  const int batch = mb.size();
  const int k = mb.n_rbs;
  std::vector<double> noise(static_cast<size_t>(batch) * k);
  for (double& v : noise) v = gumbel_stream.gumbel();

  ActorEval eval = actor_objective_grad(bundle.actor, bundle.critic, mb, nb_i, bundle.index,
                                        temperature, noise);
  for (double& g : eval.actor_grad) g = -g;  // ascend the objective
  bundle.actor_opt.step(bundle.actor.params(), eval.actor_grad);
  return eval.objective;
}

int QTable::state_index(const Observation& obs) const {
  // dBm bin edges -110 / -95 / -80 expressed on the normalized value
  constexpr double kEdge0 = (-110.0 + 120.0) / 60.0;
  constexpr double kEdge1 = (-95.0 + 120.0) / 60.0;
  constexpr double kEdge2 = (-80.0 + 120.0) / 60.0;
  const double v = obs.i_prev_norm;
  const int bin = v < kEdge0 ? 0 : v < kEdge1 ? 1 : v < kEdge2 ? 2 : 3;
  int k_prev = -1;
  for (int j = 0; j < static_cast<int>(obs.k_prev_onehot.size()); ++j)
    if (obs.k_prev_onehot[j] > 0.5) {
      k_prev = j;
      break;
    }
  return bin * (n_rbs + 1) + (k_prev + 1);
}

int QTablePolicy::act(int agent, const Observation& obs, RngStream&) const {
  const QTable& table = tables_[agent];
  const int s = table.state_index(obs);
  return argmax_lowest(
      std::span<const double>(table.q).subspan(static_cast<size_t>(s) * table.n_rbs,
                                               table.n_rbs));
}

namespace {

struct ScheduleState {
  double eps = 0.0;
  double temp = 0.0;
};

ScheduleState schedule_at(const TrainHyper& hp, long slot, long total_slots) {
  double frac = 1.0;
  if (hp.eps_decay_frac > 0.0) {
    const double horizon = hp.eps_decay_frac * static_cast<double>(total_slots);
    frac = horizon > 0.0 ? std::min(1.0, static_cast<double>(slot) / horizon) : 1.0;
  }
  return {hp.eps_start + (hp.eps_end - hp.eps_start) * frac,
          hp.temp_start + (hp.temp_end - hp.temp_start) * frac};
}

Topology episode_topology(const TrainSetup& setup, int episode) {
  if (setup.frozen_topology) return *setup.frozen_topology;
  RngStream stream(derive_stream_seed(setup.master_seed, kTagTopology,
                                      static_cast<uint64_t>(episode), 0));
  return sample_topology(setup.scenario, stream);
}

DownlinkEnv episode_env(const TrainSetup& setup, int episode, Topology topo) {
  return DownlinkEnv(
      std::move(topo), setup.scenario,
      RngStream(derive_stream_seed(setup.master_seed, kTagShadowing,
                                   static_cast<uint64_t>(episode), 0)),
      RngStream(derive_stream_seed(setup.master_seed, kTagFading,
                                   static_cast<uint64_t>(episode), 0)));
}

struct EpisodeAccum {
  double reward = 0.0;
  double outages = 0.0;
  double cue_slots = 0.0;
  double sum_rate = 0.0;
  double loss = 0.0;
  long loss_count = 0;
  long slots = 0;

  void absorb(const StepOutcome& out) {
    reward += std::accumulate(out.rewards.begin(), out.rewards.end(), 0.0);
    for (const auto flag : out.cue_outage_flags) outages += flag;
    cue_slots += static_cast<double>(out.cue_outage_flags.size());
    sum_rate += out.sum_rate_bps_hz;
    ++slots;
  }

  EpisodeStats stats(int episode) const {
    EpisodeStats st;
    st.episode = episode;
    st.total_reward = reward;
    st.outage_prob = cue_slots > 0.0 ? outages / cue_slots : 0.0;
    st.mean_sum_rate = slots > 0 ? sum_rate / static_cast<double>(slots) : 0.0;
    st.mean_loss = loss_count > 0 ? loss / static_cast<double>(loss_count) : 0.0;
    return st;
  }
};

Transition make_joint_transition(const std::vector<Observation>& obs,
                                 const ActionProfile& profile, const StepOutcome& out,
                                 int n_rbs) {
  const int n = static_cast<int>(obs.size());
  const int d = n > 0 ? obs[0].dim() : 0;
  Transition tr;
  tr.s.resize(static_cast<size_t>(n) * d);
  tr.a.assign(static_cast<size_t>(n) * n_rbs, 0.0);
  tr.r = out.rewards;
  tr.s2.resize(static_cast<size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    obs[i].write_to(tr.s.data() + static_cast<size_t>(i) * d);
    out.next_obs[i].write_to(tr.s2.data() + static_cast<size_t>(i) * d);
    tr.a[static_cast<size_t>(i) * n_rbs + profile.rb_of[i]] = 1.0;
  }
  return tr;
}

void validate_setup(const TrainSetup& setup) {
  setup.scenario.validate();
  if (setup.scenario.n_d2d < 1) throw_contract("training requires at least one D2D pair");
  if (setup.episodes < 1 || setup.slots_per_episode < 1)
    throw_contract("episodes and slots_per_episode must be positive");
  if (setup.hyper.batch_size < 1) throw_contract("batch_size must be positive");
}

}  // namespace

NaacResult train_naac(const TrainSetup& setup, int lambda_override) {
  validate_setup(setup);
  const ScenarioConfig& sc = setup.scenario;
  const TrainHyper& hp = setup.hyper;
  const int n = sc.n_d2d;
  const int k = sc.n_rbs;
  const int obs_dim = 3 + k;
  const int lambda =
      std::min(lambda_override >= 0 ? lambda_override : sc.lambda_neighbors, n - 1);
  const int group = lambda + 1;

  NaacResult result;
  result.lambda_eff = lambda;
  result.agents.reserve(n);
  for (int i = 0; i < n; ++i) {
    RngStream init(derive_stream_seed(setup.master_seed, kTagNetInit, 0, i));
    result.agents.push_back(make_agent_bundle(i, obs_dim, k, group, hp.hidden_width, hp, init));
  }

  ReplayBuffer buffer(hp.buffer_capacity);
  const size_t update_gate = std::max<size_t>(hp.warmup_transitions, hp.batch_size);
  const long total_slots = static_cast<long>(setup.episodes) * setup.slots_per_episode;
  long slot_counter = 0;

  for (int ep = 0; ep < setup.episodes; ++ep) {
    Topology topo = episode_topology(setup, ep);
    const NeighborIndex nbidx = neighbor_sets(topo, lambda);
    DownlinkEnv env = episode_env(setup, ep, std::move(topo));
    auto obs = env.reset();

    std::vector<RngStream> explore, minibatch, gumbel;
    for (int i = 0; i < n; ++i) {
      explore.emplace_back(derive_stream_seed(setup.master_seed, kTagExplore, ep, i));
      minibatch.emplace_back(derive_stream_seed(setup.master_seed, kTagMinibatch, ep, i));
      gumbel.emplace_back(derive_stream_seed(setup.master_seed, kTagGumbel, ep, i));
    }

    EpisodeAccum accum;
    for (int t = 0; t < setup.slots_per_episode; ++t, ++slot_counter) {
      const auto sched = schedule_at(hp, slot_counter, total_slots);
      ActionProfile profile;
      profile.rb_of.resize(n);
      for (int i = 0; i < n; ++i)
        profile.rb_of[i] =
            select_action(result.agents[i].actor, obs[i].flat(), sched.eps, explore[i]);

      const StepOutcome out = env.step(profile);
      buffer.push(make_joint_transition(obs, profile, out, k));
      accum.absorb(out);

      if (buffer.ready(update_gate) && slot_counter % hp.update_every == 0) {
        for (int i = 0; i < n; ++i) {
          AgentBundle& agent = result.agents[i];
          Minibatch mb{buffer.sample(hp.batch_size, minibatch[i]), n, obs_dim, k};
          const auto targets = critic_target(agent, mb, nbidx.nb[i], result.agents, sc.gamma,
                                             hp.literal_eq12);
          accum.loss += update_critic(agent, mb, nbidx.nb[i], targets);
          ++accum.loss_count;
          update_actor(agent, mb, nbidx.nb[i], sched.temp, gumbel[i]);
          soft_update(agent.target_actor, agent.actor, hp.tau);
          soft_update(agent.target_critic, agent.critic, hp.tau);
        }
      }
      obs = out.next_obs;
    }
    result.episodes.push_back(accum.stats(ep));
  }
  return result;
}

DqnResult train_dqn(const TrainSetup& setup) {
  validate_setup(setup);
  const ScenarioConfig& sc = setup.scenario;
  const TrainHyper& hp = setup.hyper;
  const int n = sc.n_d2d;
  const int k = sc.n_rbs;
  const int obs_dim = 3 + k;

  DqnResult result;
  result.agents.reserve(n);
  std::vector<ReplayBuffer> buffers;
  for (int i = 0; i < n; ++i) {
    RngStream init(derive_stream_seed(setup.master_seed, kTagNetInit, 0, i));
    DqnAgentState agent;
    agent.qnet = Mlp::with_uniform_init({obs_dim, hp.hidden_width, hp.hidden_width, k}, init);
    agent.target = agent.qnet;
    agent.opt = AdamState(agent.qnet.param_count(), hp.critic_adam());
    result.agents.push_back(std::move(agent));
    buffers.emplace_back(hp.buffer_capacity);
  }

  const size_t update_gate = std::max<size_t>(hp.warmup_transitions, hp.batch_size);
  const long total_slots = static_cast<long>(setup.episodes) * setup.slots_per_episode;
  long slot_counter = 0;

  for (int ep = 0; ep < setup.episodes; ++ep) {
    DownlinkEnv env = episode_env(setup, ep, episode_topology(setup, ep));
    auto obs = env.reset();

    std::vector<RngStream> explore, minibatch;
    for (int i = 0; i < n; ++i) {
      explore.emplace_back(derive_stream_seed(setup.master_seed, kTagExplore, ep, i));
      minibatch.emplace_back(derive_stream_seed(setup.master_seed, kTagMinibatch, ep, i));
    }

    EpisodeAccum accum;
    for (int t = 0; t < setup.slots_per_episode; ++t, ++slot_counter) {
      const auto sched = schedule_at(hp, slot_counter, total_slots);
      ActionProfile profile;
      profile.rb_of.resize(n);
      for (int i = 0; i < n; ++i)
        profile.rb_of[i] =
            select_action(result.agents[i].qnet, obs[i].flat(), sched.eps, explore[i]);

      const StepOutcome out = env.step(profile);
      for (int i = 0; i < n; ++i) {
        Transition tr;
        tr.s = obs[i].flat();
        tr.a.assign(k, 0.0);
        tr.a[profile.rb_of[i]] = 1.0;
        tr.r = {out.rewards[i]};
        tr.s2 = out.next_obs[i].flat();
        buffers[i].push(std::move(tr));
      }
      accum.absorb(out);

      if (slot_counter % hp.update_every == 0) {
        for (int i = 0; i < n; ++i) {
          if (!buffers[i].ready(update_gate)) continue;
          DqnAgentState& agent = result.agents[i];
          Minibatch mb{buffers[i].sample(hp.batch_size, minibatch[i]), 1, obs_dim, k};
          const int batch = mb.size();

          const auto x2 = gather_agent_obs(mb, 0, true);
          const auto q2 = agent.target.forward(x2, batch);
          const auto x = gather_agent_obs(mb, 0, false);
          Mlp::Cache cache;
          const auto q = agent.qnet.forward(x, batch, &cache);

          std::vector<double> dy(static_cast<size_t>(batch) * k, 0.0);
          double loss = 0.0;
          for (int b = 0; b < batch; ++b) {
            const std::span<const double> row(q2.data() + static_cast<size_t>(b) * k,
                                              static_cast<size_t>(k));
            const double target = mb.items[b]->r[0] + sc.gamma * row[argmax_lowest(row)];
            const int action = argmax_lowest(std::span<const double>(
                mb.items[b]->a.data(), static_cast<size_t>(k)));
            const double diff = q[static_cast<size_t>(b) * k + action] - target;
            loss += diff * diff;
            dy[static_cast<size_t>(b) * k + action] = 2.0 * diff / batch;
          }
          loss /= batch;
          accum.loss += loss;
          ++accum.loss_count;

          const auto grads = agent.qnet.backward(cache, dy);
          agent.opt.step(agent.qnet.params(), grads.params);
          soft_update(agent.target, agent.qnet, hp.tau);
        }
      }
      obs = out.next_obs;
    }
    result.episodes.push_back(accum.stats(ep));
  }
  return result;
}

QlResult train_qlearning(const TrainSetup& setup) {
  validate_setup(setup);
  const ScenarioConfig& sc = setup.scenario;
  const TrainHyper& hp = setup.hyper;
  const int n = sc.n_d2d;
  const int k = sc.n_rbs;

  QlResult result;
  result.agents.assign(
      n, QTable{k, std::vector<double>(static_cast<size_t>(QTable::n_states(k)) * k, 0.0)});

  const long total_slots = static_cast<long>(setup.episodes) * setup.slots_per_episode;
  long slot_counter = 0;

  for (int ep = 0; ep < setup.episodes; ++ep) {
    DownlinkEnv env = episode_env(setup, ep, episode_topology(setup, ep));
    auto obs = env.reset();

    std::vector<RngStream> explore;
    for (int i = 0; i < n; ++i)
      explore.emplace_back(derive_stream_seed(setup.master_seed, kTagExplore, ep, i));

    EpisodeAccum accum;
    for (int t = 0; t < setup.slots_per_episode; ++t, ++slot_counter) {
      const auto sched = schedule_at(hp, slot_counter, total_slots);
      ActionProfile profile;
      profile.rb_of.resize(n);
      std::vector<int> states(n);
      for (int i = 0; i < n; ++i) {
        states[i] = result.agents[i].state_index(obs[i]);
        if (sched.eps > 0.0 && explore[i].next_unit() < sched.eps) {
          profile.rb_of[i] = static_cast<int>(explore[i].next_below(static_cast<uint32_t>(k)));
        } else {
          profile.rb_of[i] = argmax_lowest(std::span<const double>(
              result.agents[i].q.data() + static_cast<size_t>(states[i]) * k,
              static_cast<size_t>(k)));
        }
      }

      const StepOutcome out = env.step(profile);
      for (int i = 0; i < n; ++i) {
        QTable& table = result.agents[i];
        const int s2 = table.state_index(out.next_obs[i]);
        double best_next = table.at(s2, 0);
        for (int a = 1; a < k; ++a) best_next = std::max(best_next, table.at(s2, a));
        const double td = out.rewards[i] + sc.gamma * best_next -
                          table.at(states[i], profile.rb_of[i]);
        table.at(states[i], profile.rb_of[i]) += hp.q_alpha * td;
        accum.loss += td * td;
        ++accum.loss_count;
      }
      accum.absorb(out);
      obs = out.next_obs;
    }
    result.episodes.push_back(accum.stats(ep));
  }
  return result;
}

std::vector<EpisodeStats> train_random(const TrainSetup& setup) {
  validate_setup(setup);
  const ScenarioConfig& sc = setup.scenario;
  const int n = sc.n_d2d;

  std::vector<EpisodeStats> episodes;
  for (int ep = 0; ep < setup.episodes; ++ep) {
    DownlinkEnv env = episode_env(setup, ep, episode_topology(setup, ep));
    auto obs = env.reset();

    std::vector<RngStream> streams;
    for (int i = 0; i < n; ++i)
      streams.emplace_back(derive_stream_seed(setup.master_seed, kTagExplore, ep, i));

    EpisodeAccum accum;
    for (int t = 0; t < setup.slots_per_episode; ++t) {
      ActionProfile profile;
      profile.rb_of.resize(n);
      for (int i = 0; i < n; ++i)
        profile.rb_of[i] =
            static_cast<int>(streams[i].next_below(static_cast<uint32_t>(sc.n_rbs)));
      const StepOutcome out = env.step(profile);
      accum.absorb(out);
      obs = out.next_obs;
    }
    episodes.push_back(accum.stats(ep));
  }
  return episodes;
}

}  // namespace naac
