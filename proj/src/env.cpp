#include "naac/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "naac/errors.hpp"

namespace naac {

namespace {
constexpr double kObsDbOffset = 120.0;
constexpr double kObsDbScale = 60.0;
constexpr double kObsClamp = 2.0;
constexpr double kInterferenceFloorDbm = -150.0;
constexpr double kLog2 = 0.69314718055994530942;

double clamp_norm(double db) {
  const double v = (db + kObsDbOffset) / kObsDbScale;
  return std::clamp(v, -kObsClamp, kObsClamp);
}

double rate_bps_hz(double sinr_lin) { return std::log2(1.0 + sinr_lin); }
}  // namespace

void Observation::write_to(double* dst) const {
  dst[0] = g_d_norm;
  dst[1] = g_c_norm;
  dst[2] = i_prev_norm;
  std::memcpy(dst + 3, k_prev_onehot.data(), k_prev_onehot.size() * sizeof(double));
}

std::vector<double> Observation::flat() const {
  std::vector<double> v(dim());
  write_to(v.data());
  return v;
}

double cue_sinr(const ChannelGains& gains, const ActionProfile& profile,
                const ScenarioConfig& config, std::span<const int> cue_rb, int m) {
  const int k = cue_rb[m];
  double interference = 0.0;
  const double p_d = config.p_d2d_mw();
  for (size_t n = 0; n < profile.rb_of.size(); ++n)
    if (profile.rb_of[n] == k) interference += p_d * gains.tc(static_cast<int>(n), m);
  return config.p_bs_mw() * gains.g_bc[m] / (interference + gains.noise_mw);
}

double d2d_sinr(const ChannelGains& gains, const ActionProfile& profile,
                const ScenarioConfig& config, int n) {
  const int k = profile.rb_of[n];
  double interference = config.p_bs_mw() * gains.g_br[n];
  const double p_d = config.p_d2d_mw();
  for (size_t i = 0; i < profile.rb_of.size(); ++i)
    if (static_cast<int>(i) != n && profile.rb_of[i] == k)
      interference += p_d * gains.trx(static_cast<int>(i), n);
  return config.p_d2d_mw() * gains.g_tr[n] / (interference + gains.noise_mw);
}

SinrTable compute_sinr_table(const ChannelGains& gains, const ActionProfile& profile,
                             const ScenarioConfig& config, std::span<const int> cue_rb) {
  SinrTable t;
  const int m_count = gains.n_cues;
  const int n_count = gains.n_d2d;
  t.cue_sinr_lin.resize(m_count);
  t.cue_sinr_db.resize(m_count);
  t.d2d_sinr_lin.resize(n_count);
  t.rb_to_cue.assign(config.n_rbs, -1);
  for (int m = 0; m < m_count; ++m) {
    t.cue_sinr_lin[m] = cue_sinr(gains, profile, config, cue_rb, m);
    t.cue_sinr_db[m] = linear_to_db(t.cue_sinr_lin[m]);
    t.rb_to_cue[cue_rb[m]] = m;
  }
  for (int n = 0; n < n_count; ++n) t.d2d_sinr_lin[n] = d2d_sinr(gains, profile, config, n);
  return t;
}

double reward_for_agent(const SinrTable& sinrs, const ActionProfile& profile,
                        const ScenarioConfig& config, int i) {
  const int k = profile.rb_of[i];
  const int victim = sinrs.rb_to_cue[k];
  if (victim >= 0 && sinrs.cue_sinr_db[victim] < config.cue_sinr_min_db) return config.r_neg;
  return rate_bps_hz(sinrs.d2d_sinr_lin[i]);
}

double sum_rate(const ChannelGains& gains, const ActionProfile& profile,
                const ScenarioConfig& config) {
  double total = 0.0;
  for (size_t n = 0; n < profile.rb_of.size(); ++n)
    total += rate_bps_hz(d2d_sinr(gains, profile, config, static_cast<int>(n)));
  return total;
}

Observation build_observation(const PrevSlot& prev, const ChannelGains& gains,
                              const ScenarioConfig& config, int i) {
  Observation obs;
  obs.g_d_norm = clamp_norm(linear_to_db(gains.g_tr[i]));
  const double bs_gain = config.obs_bs_gain_at_tx ? gains.g_bt[i] : gains.g_br[i];
  obs.g_c_norm = clamp_norm(linear_to_db(bs_gain));
  double i_dbm = kInterferenceFloorDbm;
  if (!prev.interference_mw.empty() && prev.interference_mw[i] > 0.0)
    i_dbm = mw_to_dbm(prev.interference_mw[i]);
  obs.i_prev_norm = clamp_norm(i_dbm);
  obs.k_prev_onehot.assign(config.n_rbs, 0.0);
  if (!prev.rb.empty() && prev.rb[i] >= 0) obs.k_prev_onehot[prev.rb[i]] = 1.0;
  return obs;
}

DownlinkEnv::DownlinkEnv(Topology topology, const ScenarioConfig& config,
                         RngStream gains_stream, RngStream fading_stream)
    : config_(config),
      topo_(std::move(topology)),
      base_(compute_base_gains(topo_, config_, gains_stream)),
      // advances fading_stream, which fading_ then copies in its final state
      current_(apply_fading(base_, config_, fading_stream)),
      fading_(fading_stream) {}

std::vector<Observation> DownlinkEnv::reset() {
  prev_ = PrevSlot{};
  std::vector<Observation> obs;
  obs.reserve(config_.n_d2d);
  for (int i = 0; i < config_.n_d2d; ++i)
    obs.push_back(build_observation(prev_, current_, config_, i));
  return obs;
}

StepOutcome DownlinkEnv::step(const ActionProfile& joint_action) {
  const int n_count = config_.n_d2d;
  if (static_cast<int>(joint_action.rb_of.size()) != n_count)
    throw_contract("step: joint action size does not match the number of D2D pairs");
  for (int rb : joint_action.rb_of)
    if (rb < 0 || rb >= config_.n_rbs) throw_contract("step: RB index out of range");

  const SinrTable sinrs = compute_sinr_table(current_, joint_action, config_, topo_.cue_rb);

  StepOutcome out;
  out.cue_sinr_db = sinrs.cue_sinr_db;
  out.cue_outage_flags.resize(config_.n_cues);
  for (int m = 0; m < config_.n_cues; ++m)
    out.cue_outage_flags[m] = sinrs.cue_sinr_db[m] < config_.cue_sinr_min_db ? 1 : 0;

  out.d2d_sinr_db.resize(n_count);
  out.rewards.resize(n_count);
  out.sum_rate_bps_hz = 0.0;
  for (int n = 0; n < n_count; ++n) {
    out.d2d_sinr_db[n] = linear_to_db(sinrs.d2d_sinr_lin[n]);
    out.rewards[n] = reward_for_agent(sinrs, joint_action, config_, n);
    out.sum_rate_bps_hz += rate_bps_hz(sinrs.d2d_sinr_lin[n]);
  }

  // Record this slot's aggregate interference (Eq.(2) denominator minus
  // noise) and RB choices, then roll the fading for the next slot.
  prev_.interference_mw.resize(n_count);
  prev_.rb = joint_action.rb_of;
  const double p_d = config_.p_d2d_mw();
  const double p_b = config_.p_bs_mw();
  for (int n = 0; n < n_count; ++n) {
    double interference = p_b * current_.g_br[n];
    for (int i = 0; i < n_count; ++i)
      if (i != n && joint_action.rb_of[i] == joint_action.rb_of[n])
        interference += p_d * current_.trx(i, n);
    prev_.interference_mw[n] = interference;
  }

  if (config_.fading_enabled) current_ = apply_fading(base_, config_, fading_);

  out.next_obs.reserve(n_count);
  for (int i = 0; i < n_count; ++i)
    out.next_obs.push_back(build_observation(prev_, current_, config_, i));
  return out;
}

OracleResult brute_force_oracle(const ChannelGains& gains, const ScenarioConfig& config,
                                std::span<const int> cue_rb) {
  const int n_count = gains.n_d2d;
  const int k_count = config.n_rbs;
  if (n_count < 1) throw_contract("brute_force_oracle: needs at least one D2D pair");
  double profiles = 1.0;
  for (int n = 0; n < n_count; ++n) {
    profiles *= k_count;
    if (profiles > 1e6)
      throw_too_large("brute_force_oracle: K^N exceeds 10^6 profiles");
  }

  OracleResult result;
  result.best_feasible_value = -std::numeric_limits<double>::infinity();
  result.best_any_value = -std::numeric_limits<double>::infinity();

  ActionProfile profile;
  profile.rb_of.assign(n_count, 0);
  const double min_db = config.cue_sinr_min_db;
  // Lexicographic enumeration with strict improvement keeps the smallest
  // rb_of on ties.
  while (true) {
    const double value = sum_rate(gains, profile, config);
    if (value > result.best_any_value) {
      result.best_any_value = value;
      result.best_any = profile;
    }
    bool feasible = true;
    for (int m = 0; m < gains.n_cues && feasible; ++m)
      feasible = linear_to_db(cue_sinr(gains, profile, config, cue_rb, m)) >= min_db;
    if (feasible && value > result.best_feasible_value) {
      result.best_feasible_value = value;
      result.best_feasible = profile;
    }

    int pos = n_count - 1;
    while (pos >= 0 && profile.rb_of[pos] == k_count - 1) profile.rb_of[pos--] = 0;
    if (pos < 0) break;
    ++profile.rb_of[pos];
  }
  return result;
}

}  // namespace naac
