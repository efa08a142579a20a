#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "naac/topology.hpp"

namespace naac {

// Joint RB selection: exactly one RB per D2D pair. Encodes the allocation
// matrix A with A[n][k] = 1 iff rb_of[n] == k.
struct ActionProfile {
  std::vector<int> rb_of;
};

// Per-agent state vector [G_d, G_c, I_prev, onehot(K_prev)], dimension 3+K.
struct Observation {
  double g_d_norm = 0.0;
  double g_c_norm = 0.0;
  double i_prev_norm = 0.0;
  std::vector<double> k_prev_onehot;  // K entries; all zero before the first slot

  int dim() const { return 3 + static_cast<int>(k_prev_onehot.size()); }
  void write_to(double* dst) const;
  std::vector<double> flat() const;
};

// Previous-slot record feeding the observations. Empty vectors mean t = 0:
// interference takes the -150 dBm floor and the one-hot stays all-zero.
struct PrevSlot {
  std::vector<double> interference_mw;  // N, Eq.(2) denominator minus noise
  std::vector<int> rb;                  // N, last chosen RB
};

// SINRs of one slot plus the RB -> CUE inverse map needed to attribute CUE
// outages to the D2D agents sharing that RB.
struct SinrTable {
  std::vector<double> cue_sinr_lin;  // M
  std::vector<double> cue_sinr_db;   // M
  std::vector<double> d2d_sinr_lin;  // N
  std::vector<int> rb_to_cue;        // K
};

struct StepOutcome {
  std::vector<Observation> next_obs;     // N
  std::vector<double> rewards;           // N
  std::vector<double> cue_sinr_db;       // M
  std::vector<double> d2d_sinr_db;       // N
  std::vector<uint8_t> cue_outage_flags; // M
  double sum_rate_bps_hz = 0.0;
};

// Linear SINR of CUE m on its assigned RB: P_b g_bc / (sum of co-channel D2D
// interference + noise).
double cue_sinr(const ChannelGains& gains, const ActionProfile& profile,
                const ScenarioConfig& config, std::span<const int> cue_rb, int m);

// Linear SINR at D2D receiver n: P_d g_tr / (P_b g_br + co-channel D2D + noise).
double d2d_sinr(const ChannelGains& gains, const ActionProfile& profile,
                const ScenarioConfig& config, int n);

// log2(1 + own SINR) when the CUE sharing agent i's RB meets its threshold,
// r_neg otherwise.
double reward_for_agent(const SinrTable& sinrs, const ActionProfile& profile,
                        const ScenarioConfig& config, int i);

// D2D sum rate of the profile, bits/s/Hz.
double sum_rate(const ChannelGains& gains, const ActionProfile& profile,
                const ScenarioConfig& config);

SinrTable compute_sinr_table(const ChannelGains& gains, const ActionProfile& profile,
                             const ScenarioConfig& config, std::span<const int> cue_rb);

// Gains are normalized as (dB + 120)/60 clamped to [-2, 2]; previous
// interference likewise on its dBm value with a -150 dBm floor at zero.
Observation build_observation(const PrevSlot& prev, const ChannelGains& gains,
                              const ScenarioConfig& config, int i);

// One episode's worth of Markov-game dynamics over a fixed topology. Gains
// are pathloss+shadowing at construction; small-scale fading (when enabled)
// is redrawn after every step so next-slot observations see fresh gains.
class DownlinkEnv {
 public:
  DownlinkEnv(Topology topology, const ScenarioConfig& config, RngStream gains_stream,
              RngStream fading_stream);

  // Clears the previous-slot record and returns the t=0 observations.
  std::vector<Observation> reset();
  StepOutcome step(const ActionProfile& joint_action);

  const Topology& topology() const { return topo_; }
  const ChannelGains& gains() const { return current_; }
  const ChannelGains& base_gains() const { return base_; }
  const PrevSlot& prev_slot() const { return prev_; }
  const ScenarioConfig& config() const { return config_; }

 private:
  ScenarioConfig config_;
  Topology topo_;
  ChannelGains base_;
  ChannelGains current_;
  RngStream fading_;
  PrevSlot prev_;
};

struct OracleResult {
  std::optional<ActionProfile> best_feasible;
  double best_feasible_value = 0.0;  // -inf when no profile is feasible
  ActionProfile best_any;
  double best_any_value = 0.0;
};

// Exhaustive search over all K^N profiles (guarded at 10^6). best_feasible
// maximizes the sum rate subject to every CUE meeting its SINR threshold;
// best_any ignores the constraint. Ties break to the lexicographically
// smallest rb_of.
OracleResult brute_force_oracle(const ChannelGains& gains, const ScenarioConfig& config,
                                std::span<const int> cue_rb);

}  // namespace naac
