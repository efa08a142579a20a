#pragma once

#include <vector>

#include "naac/rng.hpp"

namespace naac {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double dist(const Vec2& a, const Vec2& b);

// Physical and learning constants of one downlink scenario. Defaults are the
// standard single-cell setup: 10 CUEs on 10 RBs, 46/13 dBm transmit powers,
// -174 dBm/Hz noise over 180 kHz blocks, 0 dB CUE SINR floor.
struct ScenarioConfig {
  double cell_radius_m = 500.0;
  int n_cues = 10;  // M, one pre-assigned RB each
  int n_d2d = 10;   // N
  int n_rbs = 10;   // K, must equal n_cues
  double max_d2d_dist_m = 30.0;
  double p_bs_dbm = 46.0;
  double p_d2d_dbm = 13.0;
  double noise_density_dbm_hz = -174.0;
  double rb_bandwidth_hz = 180e3;
  double cue_sinr_min_db = 0.0;
  double r_neg = -1.0;
  int lambda_neighbors = 3;  // clamped to n_d2d-1 where neighbor sets are built
  double gamma = 0.95;
  bool fading_enabled = true;
  double shadowing_sigma_db = 0.0;
  // Observation switch: feed the BS gain toward the D2D transmitter instead
  // of toward the receiver (the receiver-side gain is the default).
  bool obs_bs_gain_at_tx = false;

  double p_bs_mw() const;
  double p_d2d_mw() const;

  // Per-field range checks only; keys can then be set one at a time.
  void validate_fields() const;
  // validate_fields plus the cross-field invariants (n_rbs == n_cues,
  // max_d2d_dist_m < cell_radius_m). Throws Error(parse) naming the field.
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

struct Topology {
  Vec2 bs_pos;  // origin
  std::vector<Vec2> cue_pos;     // M
  std::vector<Vec2> d2d_tx_pos;  // N
  std::vector<Vec2> d2d_rx_pos;  // N
  std::vector<int> cue_rb;       // bijection CUE m -> RB, identity as sampled
};

// Linear-scale power gains for the five link families plus noise power.
// g_trx is indexed interferer-transmitter-major: trx(i, n) is tx_i -> rx_n.
// Its diagonal mirrors g_tr (the direct link) and is never read as
// interference. g_bt (BS -> D2D transmitter) only feeds the observation
// switch above.
struct ChannelGains {
  int n_cues = 0;
  int n_d2d = 0;
  std::vector<double> g_bc;   // M
  std::vector<double> g_tr;   // N
  std::vector<double> g_tc;   // N x M row-major
  std::vector<double> g_br;   // N
  std::vector<double> g_bt;   // N
  std::vector<double> g_trx;  // N x N row-major
  double noise_mw = 0.0;

  double tc(int n, int m) const { return g_tc[static_cast<size_t>(n) * n_cues + m]; }
  double trx(int i, int n) const { return g_trx[static_cast<size_t>(i) * n_d2d + n]; }
  double& tc(int n, int m) { return g_tc[static_cast<size_t>(n) * n_cues + m]; }
  double& trx(int i, int n) { return g_trx[static_cast<size_t>(i) * n_d2d + n]; }
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);
double db_to_linear(double db);
double linear_to_db(double lin);

// 128.1 + 37.6 log10(d[km]), distance clamped below at 1 m.
double pathloss_cellular_db(double d_km);
// 148.0 + 40 log10(d[km]) (exponent 4), distance clamped below at 1 m.
double pathloss_d2d_db(double d_km);
// Thermal noise over one RB, in mW.
double noise_power_mw(double density_dbm_hz, double bandwidth_hz);

// CUE and D2D transmitter positions uniform over the cell disk; each D2D
// receiver uniform over the max_d2d_dist_m disk around its transmitter,
// rejection-sampled to stay inside the cell. cue_rb comes out as identity.
Topology sample_topology(const ScenarioConfig& config, RngStream& stream);

// Pathloss plus one shadowing draw per link; no small-scale fading.
ChannelGains compute_base_gains(const Topology& topology, const ScenarioConfig& config,
                                RngStream& stream);
// Multiplies unit-mean exponential fading onto every link (identity when
// fading is disabled). One draw per link; the g_trx diagonal tracks g_tr.
ChannelGains apply_fading(const ChannelGains& base, const ScenarioConfig& config,
                          RngStream& stream);
// compute_base_gains followed by apply_fading on the same stream.
ChannelGains compute_gains(const Topology& topology, const ScenarioConfig& config,
                           RngStream& stream);

}  // namespace naac
