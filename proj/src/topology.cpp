#include "naac/topology.hpp"

#include <cmath>
#include <string>

#include "naac/errors.hpp"

namespace naac {

namespace {
constexpr double kMinDistKm = 0.001;  // 1 m clamp, keeps gains finite
constexpr int kRejectionCap = 100000;
}  // namespace

double dist(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

double ScenarioConfig::p_bs_mw() const { return dbm_to_mw(p_bs_dbm); }
double ScenarioConfig::p_d2d_mw() const { return dbm_to_mw(p_d2d_dbm); }

void ScenarioConfig::validate_fields() const {
  if (cell_radius_m <= 0.0) throw_parse("cell_radius_m must be positive");
  if (n_cues < 1) throw_parse("n_cues must be at least 1");
  if (n_rbs < 1) throw_parse("n_rbs must be at least 1");
  if (n_d2d < 0) throw_parse("n_d2d must be nonnegative");
  if (max_d2d_dist_m <= 0.0) throw_parse("max_d2d_dist_m must be positive");
  if (rb_bandwidth_hz <= 0.0) throw_parse("rb_bandwidth_hz must be positive");
  if (!(r_neg < 0.0)) throw_parse("r_neg must be negative");
  if (lambda_neighbors < 0) throw_parse("lambda_neighbors must be nonnegative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw_parse("gamma must lie in [0, 1)");
  if (shadowing_sigma_db < 0.0) throw_parse("shadowing_sigma_db must be nonnegative");
}

void ScenarioConfig::validate() const {
  validate_fields();
  if (n_rbs != n_cues) throw_parse("n_rbs must equal n_cues (one RB per CUE)");
  if (!(max_d2d_dist_m < cell_radius_m))
    throw_parse("max_d2d_dist_m must lie in (0, cell_radius_m)");
}

double pathloss_cellular_db(double d_km) {
  return 128.1 + 37.6 * std::log10(std::max(d_km, kMinDistKm));
}

double pathloss_d2d_db(double d_km) {
  return 148.0 + 40.0 * std::log10(std::max(d_km, kMinDistKm));
}

double noise_power_mw(double density_dbm_hz, double bandwidth_hz) {
  if (bandwidth_hz <= 0.0) throw_contract("noise_power_mw: bandwidth must be positive");
  return dbm_to_mw(density_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

namespace {

Vec2 sample_in_disk(const Vec2& center, double radius, RngStream& stream) {
  const double r = radius * std::sqrt(stream.next_unit());
  const double theta = 6.28318530717958647692 * stream.next_unit();
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

}  // namespace

Topology sample_topology(const ScenarioConfig& config, RngStream& stream) {
  Topology topo;
  topo.bs_pos = {0.0, 0.0};
  topo.cue_pos.reserve(config.n_cues);
  for (int m = 0; m < config.n_cues; ++m)
    topo.cue_pos.push_back(sample_in_disk(topo.bs_pos, config.cell_radius_m, stream));

  topo.d2d_tx_pos.reserve(config.n_d2d);
  topo.d2d_rx_pos.reserve(config.n_d2d);
  for (int n = 0; n < config.n_d2d; ++n) {
    const Vec2 tx = sample_in_disk(topo.bs_pos, config.cell_radius_m, stream);
    topo.d2d_tx_pos.push_back(tx);
    Vec2 rx;
    int tries = 0;
    do {
      if (++tries > kRejectionCap)
        throw Error(ErrorCode::internal,
                    "sample_topology: receiver rejection cap exceeded (degenerate config)");
      rx = sample_in_disk(tx, config.max_d2d_dist_m, stream);
    } while (dist(rx, topo.bs_pos) > config.cell_radius_m);
    topo.d2d_rx_pos.push_back(rx);
  }

  topo.cue_rb.resize(config.n_cues);
  for (int m = 0; m < config.n_cues; ++m) topo.cue_rb[m] = m;
  return topo;
}

namespace {

double link_gain(double d_m, bool cellular, double sigma_db, RngStream& stream) {
  const double pl = cellular ? pathloss_cellular_db(d_m / 1000.0)
                             : pathloss_d2d_db(d_m / 1000.0);
  const double shadow = sigma_db > 0.0 ? stream.normal(0.0, sigma_db) : 0.0;
  return db_to_linear(-(pl + shadow));
}

}  // namespace

ChannelGains compute_base_gains(const Topology& topology, const ScenarioConfig& config,
                                RngStream& stream) {
  const int m_count = static_cast<int>(topology.cue_pos.size());
  const int n_count = static_cast<int>(topology.d2d_tx_pos.size());
  ChannelGains g;
  g.n_cues = m_count;
  g.n_d2d = n_count;
  g.g_bc.resize(m_count);
  g.g_tr.resize(n_count);
  g.g_tc.resize(static_cast<size_t>(n_count) * m_count);
  g.g_br.resize(n_count);
  g.g_bt.resize(n_count);
  g.g_trx.resize(static_cast<size_t>(n_count) * n_count);

  const double sig = config.shadowing_sigma_db;
  // Draw order is fixed: g_bc, g_tr, g_tc, g_br, g_bt, then g_trx row-major
  // with the diagonal copied from g_tr (no extra draw).
  for (int m = 0; m < m_count; ++m)
    g.g_bc[m] = link_gain(dist(topology.bs_pos, topology.cue_pos[m]), true, sig, stream);
  for (int n = 0; n < n_count; ++n)
    g.g_tr[n] =
        link_gain(dist(topology.d2d_tx_pos[n], topology.d2d_rx_pos[n]), false, sig, stream);
  for (int n = 0; n < n_count; ++n)
    for (int m = 0; m < m_count; ++m)
      g.tc(n, m) =
          link_gain(dist(topology.d2d_tx_pos[n], topology.cue_pos[m]), false, sig, stream);
  for (int n = 0; n < n_count; ++n)
    g.g_br[n] = link_gain(dist(topology.bs_pos, topology.d2d_rx_pos[n]), true, sig, stream);
  for (int n = 0; n < n_count; ++n)
    g.g_bt[n] = link_gain(dist(topology.bs_pos, topology.d2d_tx_pos[n]), true, sig, stream);
  for (int i = 0; i < n_count; ++i)
    for (int n = 0; n < n_count; ++n)
      g.trx(i, n) = (i == n)
                        ? g.g_tr[n]
                        : link_gain(dist(topology.d2d_tx_pos[i], topology.d2d_rx_pos[n]),
                                    false, sig, stream);

  g.noise_mw = noise_power_mw(config.noise_density_dbm_hz, config.rb_bandwidth_hz);
  return g;
}

ChannelGains apply_fading(const ChannelGains& base, const ScenarioConfig& config,
                          RngStream& stream) {
  if (!config.fading_enabled) return base;
  ChannelGains g = base;
  for (auto& v : g.g_bc) v *= stream.exponential();
  for (auto& v : g.g_tr) v *= stream.exponential();
  for (auto& v : g.g_tc) v *= stream.exponential();
  for (auto& v : g.g_br) v *= stream.exponential();
  for (auto& v : g.g_bt) v *= stream.exponential();
  for (int i = 0; i < g.n_d2d; ++i)
    for (int n = 0; n < g.n_d2d; ++n)
      if (i != n) g.trx(i, n) = base.trx(i, n) * stream.exponential();
  for (int n = 0; n < g.n_d2d; ++n) g.trx(n, n) = g.g_tr[n];
  return g;
}

ChannelGains compute_gains(const Topology& topology, const ScenarioConfig& config,
                           RngStream& stream) {
  return apply_fading(compute_base_gains(topology, config, stream), config, stream);
}

}  // namespace naac
