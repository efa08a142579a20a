#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "naac/env.hpp"
#include "naac/net.hpp"

namespace naac {

// Joint experience tuple: states/actions/rewards/next states of all agents,
// flattened row-major (agent-major). Actions are one-hots of the executed
// discrete choice.
struct Transition {
  std::vector<double> s;   // N x obs_dim
  std::vector<double> a;   // N x K
  std::vector<double> r;   // N
  std::vector<double> s2;  // N x obs_dim
};

// Finite FIFO cache with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void push(Transition t);
  size_t size() const { return size_; }
  size_t capacity() const { return capacity_; }
  uint64_t inserted() const { return inserted_; }
  bool ready(size_t min_count) const { return size_ >= min_count; }
  // i-th oldest element, i in [0, size)
  const Transition& at(size_t i) const;
  // Requires size() >= batch; callers gate on ready() and skip updates
  // otherwise.
  std::vector<const Transition*> sample(size_t batch, RngStream& stream) const;

 private:
  size_t capacity_ = 0;
  std::vector<Transition> ring_;
  size_t head_ = 0;  // next insertion slot
  size_t size_ = 0;
  uint64_t inserted_ = 0;
};

// nb[i] lists agent i first, then its lambda nearest peers ordered by the
// interference-relevant distance tx(j) -> rx(i), ties broken by index.
struct NeighborIndex {
  int lambda = 0;
  std::vector<std::vector<int>> nb;
};

NeighborIndex neighbor_sets(const Topology& topology, int lambda);

struct TrainHyper {
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double tau = 0.01;
  bool literal_eq12 = false;  // bootstrap from live networks instead of targets
  size_t buffer_capacity = 50000;
  int batch_size = 64;
  size_t warmup_transitions = 1000;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_frac = 0.6;  // fraction of total slots spent annealing
  double temp_start = 1.0;
  double temp_end = 0.5;
  int hidden_width = 64;
  double q_alpha = 0.1;  // tabular Q-learning step size
  int update_every = 1;

  AdamConfig actor_adam() const { return {actor_lr, adam_beta1, adam_beta2, adam_eps}; }
  AdamConfig critic_adam() const { return {critic_lr, adam_beta1, adam_beta2, adam_eps}; }

  bool operator==(const TrainHyper&) const = default;
};

// Actor, critic, and their target copies for one agent. The critic consumes
// the concatenated neighbor states, then the concatenated neighbor actions
// injected after its first layer.
struct AgentBundle {
  int index = 0;
  Mlp actor, critic, target_actor, target_critic;
  AdamState actor_opt, critic_opt;
};

AgentBundle make_agent_bundle(int index, int obs_dim, int n_rbs, int group_size, int hidden,
                              const TrainHyper& hyper, RngStream& init_stream);

// First maximal entry wins (ties to the lowest index).
int argmax_lowest(std::span<const double> v);

int select_action_greedy(const Mlp& actor, std::span<const double> obs);
// With probability epsilon a uniform RB, otherwise the greedy choice.
int select_action(const Mlp& actor, std::span<const double> obs, double epsilon,
                  RngStream& stream);

// Sampled minibatch view plus the shape of the stored transitions.
struct Minibatch {
  std::vector<const Transition*> items;
  int n_agents = 0;
  int obs_dim = 0;
  int n_rbs = 0;
  int size() const { return static_cast<int>(items.size()); }
};

std::vector<double> compose_states(const Minibatch& mb, const std::vector<int>& nb_i,
                                   bool next);
std::vector<double> compose_actions(const Minibatch& mb, const std::vector<int>& nb_i);
std::vector<double> gather_agent_obs(const Minibatch& mb, int agent, bool next);

// y_b = r_i + gamma * Q_target(s'_nb, a'_nb) with a'_j the greedy target-actor
// choice at s'_j for every j in nb(i). literal_eq12 bootstraps from the live
// networks instead.
std::vector<double> critic_target(const AgentBundle& bundle, const Minibatch& mb,
                                  const std::vector<int>& nb_i,
                                  const std::vector<AgentBundle>& all, double gamma,
                                  bool literal_eq12);

// One Adam step on the mean squared error against targets; returns the
// pre-step loss.
double update_critic(AgentBundle& bundle, const Minibatch& mb, const std::vector<int>& nb_i,
                     std::span<const double> targets);

// Mean critic value of the minibatch with the agent's own action replaced by
// the Gumbel-Softmax relaxation of the actor's logits (noise given per
// sample, batch x K) and neighbors' buffered one-hots held fixed, plus the
// gradient of that objective with respect to the actor parameters. The
// gradient flows only through the relaxed own action.
struct ActorEval {
  double objective = 0.0;
  std::vector<double> actor_grad;
};
ActorEval actor_objective_grad(const Mlp& actor, const Mlp& critic, const Minibatch& mb,
                               const std::vector<int>& nb_i, int self_agent,
                               double temperature, std::span<const double> gumbel_noise);

// One ascent step on mean Q with fresh noise per sample; returns the pre-step
// objective estimate.
double update_actor(AgentBundle& bundle, const Minibatch& mb, const std::vector<int>& nb_i,
                    double temperature, RngStream& gumbel_stream);

struct EpisodeStats {
  int episode = 0;
  double total_reward = 0.0;  // sum over agents and slots
  double outage_prob = 0.0;
  double mean_sum_rate = 0.0;
  double mean_loss = 0.0;  // value-network loss averaged over updates
};

struct TrainSetup {
  ScenarioConfig scenario;
  TrainHyper hyper;
  int episodes = 1;
  int slots_per_episode = 1;
  uint64_t master_seed = 1;
  // When set, every episode reuses this topology instead of redrawing.
  std::optional<Topology> frozen_topology;
};

struct NaacResult {
  std::vector<AgentBundle> agents;
  std::vector<EpisodeStats> episodes;
  int lambda_eff = 0;
};

// Algorithm: per episode redraw topology/gains and neighbor sets; per slot
// all agents act under the exploration schedule, the joint transition is
// buffered, then each agent in ascending index order samples a minibatch,
// updates critic and actor, and soft-updates its targets.
NaacResult train_naac(const TrainSetup& setup, int lambda_override = -1);

struct DqnAgentState {
  Mlp qnet, target;
  AdamState opt;
};
struct DqnResult {
  std::vector<DqnAgentState> agents;
  std::vector<EpisodeStats> episodes;
};

// Independent per-agent Q-networks on own observations with own replay and
// soft-updated targets; same episode/slot loop as train_naac.
DqnResult train_dqn(const TrainSetup& setup);

// Tabular state: previous-interference bin (4 dBm bins) x previous RB
// ({none} + K), K actions per state.
struct QTable {
  int n_rbs = 0;
  std::vector<double> q;  // n_states x n_rbs row-major

  static int n_states(int n_rbs) { return 4 * (n_rbs + 1); }
  int state_index(const Observation& obs) const;
  double at(int s, int a) const { return q[static_cast<size_t>(s) * n_rbs + a]; }
  double& at(int s, int a) { return q[static_cast<size_t>(s) * n_rbs + a]; }
};
struct QlResult {
  std::vector<QTable> agents;
  std::vector<EpisodeStats> episodes;
};

QlResult train_qlearning(const TrainSetup& setup);

// Uniform action baseline; emits the same per-episode statistics.
std::vector<EpisodeStats> train_random(const TrainSetup& setup);

// Decentralized execution: an agent's action depends only on its own
// observation (plus the stream for the random baseline).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int act(int agent, const Observation& obs, RngStream& stream) const = 0;
};

class ActorPolicy : public Policy {
 public:
  explicit ActorPolicy(std::vector<Mlp> nets) : nets_(std::move(nets)) {}
  int act(int agent, const Observation& obs, RngStream&) const override {
    return select_action_greedy(nets_[agent], obs.flat());
  }

 private:
  std::vector<Mlp> nets_;
};

class QTablePolicy : public Policy {
 public:
  explicit QTablePolicy(std::vector<QTable> tables) : tables_(std::move(tables)) {}
  int act(int agent, const Observation& obs, RngStream&) const override;

 private:
  std::vector<QTable> tables_;
};

class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(int n_rbs) : n_rbs_(n_rbs) {}
  int act(int, const Observation&, RngStream& stream) const override {
    return static_cast<int>(stream.next_below(static_cast<uint32_t>(n_rbs_)));
  }

 private:
  int n_rbs_;
};

}  // namespace naac
