#include "naac/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "naac/errors.hpp"

namespace naac {

namespace {

// Y = X * W + b, X: B x in, W: in x out row-major. The axpy form keeps the
// inner loop contiguous and skips rows zeroed by the rectifier.
void affine_forward(const double* __restrict x, int batch, int in, int out,
                    const double* __restrict w, const double* __restrict b,
                    double* __restrict y) {
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<size_t>(bi) * in;
    double* yr = y + static_cast<size_t>(bi) * out;
    std::memcpy(yr, b, static_cast<size_t>(out) * sizeof(double));
    for (int i = 0; i < in; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const double* wr = w + static_cast<size_t>(i) * out;
      for (int o = 0; o < out; ++o) yr[o] += xi * wr[o];
    }
  }
}

// dX = G * W^T via per-row dot products, four accumulators each.
void matmul_grad_input(const double* __restrict g, int batch, int out,
                       const double* __restrict w, int in, double* __restrict dx) {
  for (int bi = 0; bi < batch; ++bi) {
    const double* gr = g + static_cast<size_t>(bi) * out;
    double* dxr = dx + static_cast<size_t>(bi) * in;
    for (int i = 0; i < in; ++i) {
      const double* wr = w + static_cast<size_t>(i) * out;
      double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
      int o = 0;
      for (; o + 4 <= out; o += 4) {
        a0 += gr[o] * wr[o];
        a1 += gr[o + 1] * wr[o + 1];
        a2 += gr[o + 2] * wr[o + 2];
        a3 += gr[o + 3] * wr[o + 3];
      }
      double acc = (a0 + a1) + (a2 + a3);
      for (; o < out; ++o) acc += gr[o] * wr[o];
      dxr[i] = acc;
    }
  }
}

// dW += X^T * G, db += column sums of G.
void accumulate_param_grads(const double* __restrict x, const double* __restrict g,
                            int batch, int in, int out, double* __restrict dw,
                            double* __restrict db) {
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<size_t>(bi) * in;
    const double* gr = g + static_cast<size_t>(bi) * out;
    for (int i = 0; i < in; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      double* dwr = dw + static_cast<size_t>(i) * out;
      for (int o = 0; o < out; ++o) dwr[o] += xi * gr[o];
    }
    for (int o = 0; o < out; ++o) db[o] += gr[o];
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v)
    if (x < 0.0) x = 0.0;
}

template <typename T>
void put_raw(std::vector<unsigned char>& buf, const T& v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T get_raw(std::span<const unsigned char> bytes, size_t& off) {
  if (off + sizeof(T) > bytes.size())
    throw_io("network deserialize: truncated buffer");
  T v;
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

constexpr char kMagic[8] = {'N', 'A', 'A', 'C', 'N', 'E', 'T', '1'};

}  // namespace

AdamState::AdamState(size_t param_count, AdamConfig config)
    : cfg_(config), m_(param_count, 0.0), v_(param_count, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw_contract("adam_step: parameter/gradient shape mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i] * grads[i];
    params[i] -= cfg_.lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + cfg_.eps);
  }
}

Mlp::Mlp(std::vector<int> widths, int aux_dim, int aux_layer)
    : widths_(std::move(widths)), aux_dim_(aux_dim), aux_layer_(aux_layer) {
  build();
}

void Mlp::build() {
  if (widths_.size() < 2) throw_contract("Mlp: needs at least input and output widths");
  for (int w : widths_)
    if (w < 1) throw_contract("Mlp: all layer widths must be positive");
  const int n_layers = static_cast<int>(widths_.size()) - 1;
  if (aux_dim_ < 0) throw_contract("Mlp: aux_dim must be nonnegative");
  if (aux_dim_ > 0 && (aux_layer_ < 0 || aux_layer_ >= n_layers))
    throw_contract("Mlp: aux_layer out of range");
  if (aux_dim_ == 0) aux_layer_ = -1;

  layers_.resize(n_layers);
  size_t off = 0;
  for (int l = 0; l < n_layers; ++l) {
    Layer& lay = layers_[l];
    lay.in = widths_[l] + (l == aux_layer_ ? aux_dim_ : 0);
    lay.out = widths_[l + 1];
    lay.w_off = off;
    off += static_cast<size_t>(lay.in) * lay.out;
    lay.b_off = off;
    off += lay.out;
  }
  params_.assign(off, 0.0);
}

Mlp Mlp::with_uniform_init(std::vector<int> widths, RngStream& stream, int aux_dim,
                           int aux_layer) {
  Mlp net(std::move(widths), aux_dim, aux_layer);
  for (const Layer& lay : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(lay.in));
    double* w = net.params_.data() + lay.w_off;
    const size_t count = static_cast<size_t>(lay.in) * lay.out;
    for (size_t i = 0; i < count; ++i) w[i] = bound * (2.0 * stream.next_unit() - 1.0);
    // biases stay zero
  }
  return net;
}

bool Mlp::same_architecture(const Mlp& other) const {
  return widths_ == other.widths_ && aux_dim_ == other.aux_dim_ &&
         aux_layer_ == other.aux_layer_;
}

std::vector<double> Mlp::forward(std::span<const double> x, int batch, Cache* cache,
                                 std::span<const double> aux) const {
  if (layers_.empty()) throw_contract("forward: network is empty");
  if (batch < 1) throw_contract("forward: batch must be positive");
  if (x.size() != static_cast<size_t>(batch) * widths_.front())
    throw_contract("forward: input size does not match batch x input_dim");
  if (aux_dim_ > 0 && aux.size() != static_cast<size_t>(batch) * aux_dim_)
    throw_contract("forward: aux size does not match batch x aux_dim");

  if (cache) {
    cache->batch = batch;
    cache->acts.clear();
    cache->acts.reserve(layers_.size());
  }

  std::vector<double> cur(x.begin(), x.end());
  const int n_layers = static_cast<int>(layers_.size());
  for (int l = 0; l < n_layers; ++l) {
    const Layer& lay = layers_[l];
    if (l == aux_layer_) {
      std::vector<double> joined(static_cast<size_t>(batch) * lay.in);
      const int base_w = widths_[l];
      for (int bi = 0; bi < batch; ++bi) {
        std::memcpy(joined.data() + static_cast<size_t>(bi) * lay.in,
                    cur.data() + static_cast<size_t>(bi) * base_w,
                    static_cast<size_t>(base_w) * sizeof(double));
        std::memcpy(joined.data() + static_cast<size_t>(bi) * lay.in + base_w,
                    aux.data() + static_cast<size_t>(bi) * aux_dim_,
                    static_cast<size_t>(aux_dim_) * sizeof(double));
      }
      cur = std::move(joined);
    }
    if (cache) cache->acts.push_back(cur);
    std::vector<double> next(static_cast<size_t>(batch) * lay.out);
    affine_forward(cur.data(), batch, lay.in, lay.out, params_.data() + lay.w_off,
                   params_.data() + lay.b_off, next.data());
    if (l + 1 < n_layers) relu_inplace(next);
    cur = std::move(next);
  }
  return cur;
}

Mlp::Grads Mlp::backward(const Cache& cache, std::span<const double> dy,
                         bool with_param_grads) const {
  const int batch = cache.batch;
  if (batch < 1 || cache.acts.size() != layers_.size())
    throw_contract("backward: cache does not match this network");
  if (dy.size() != static_cast<size_t>(batch) * widths_.back())
    throw_contract("backward: dy size does not match batch x output_dim");
  for (size_t l = 0; l < layers_.size(); ++l)
    if (cache.acts[l].size() != static_cast<size_t>(batch) * layers_[l].in)
      throw_contract("backward: stale or mismatched cache");

  Grads g;
  if (with_param_grads) g.params.assign(params_.size(), 0.0);
  if (aux_dim_ > 0) g.aux.assign(static_cast<size_t>(batch) * aux_dim_, 0.0);

  std::vector<double> grad(dy.begin(), dy.end());  // dZ of the last layer
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const Layer& lay = layers_[l];
    const std::vector<double>& x = cache.acts[l];
    if (with_param_grads)
      accumulate_param_grads(x.data(), grad.data(), batch, lay.in, lay.out,
                             g.params.data() + lay.w_off, g.params.data() + lay.b_off);
    std::vector<double> dx(static_cast<size_t>(batch) * lay.in);
    matmul_grad_input(grad.data(), batch, lay.out, params_.data() + lay.w_off, lay.in,
                      dx.data());

    if (l == aux_layer_) {
      const int base_w = widths_[l];
      std::vector<double> trimmed(static_cast<size_t>(batch) * base_w);
      for (int bi = 0; bi < batch; ++bi) {
        std::memcpy(trimmed.data() + static_cast<size_t>(bi) * base_w,
                    dx.data() + static_cast<size_t>(bi) * lay.in,
                    static_cast<size_t>(base_w) * sizeof(double));
        std::memcpy(g.aux.data() + static_cast<size_t>(bi) * aux_dim_,
                    dx.data() + static_cast<size_t>(bi) * lay.in + base_w,
                    static_cast<size_t>(aux_dim_) * sizeof(double));
      }
      dx = std::move(trimmed);
    }
    if (l > 0) {
      // rectifier mask: the first widths_[l] columns of this layer's input
      // are the previous layer's post-activation values
      const std::vector<double>& act = cache.acts[l];
      const int base_w = widths_[l];
      const int row_w = layers_[l].in;
      for (int bi = 0; bi < batch; ++bi)
        for (int j = 0; j < base_w; ++j)
          if (act[static_cast<size_t>(bi) * row_w + j] <= 0.0)
            dx[static_cast<size_t>(bi) * base_w + j] = 0.0;
    }
    grad = std::move(dx);
  }
  g.input = std::move(grad);
  return g;
}

std::vector<unsigned char> Mlp::serialize() const {
  std::vector<unsigned char> buf;
  buf.insert(buf.end(), kMagic, kMagic + sizeof(kMagic));
  put_raw<uint32_t>(buf, static_cast<uint32_t>(widths_.size()));
  for (int w : widths_) put_raw<int32_t>(buf, w);
  put_raw<int32_t>(buf, aux_dim_);
  put_raw<int32_t>(buf, aux_layer_);
  put_raw<uint64_t>(buf, params_.size());
  const auto* p = reinterpret_cast<const unsigned char*>(params_.data());
  buf.insert(buf.end(), p, p + params_.size() * sizeof(double));
  return buf;
}

Mlp Mlp::deserialize(std::span<const unsigned char> bytes) {
  size_t off = 0;
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw_io("network deserialize: bad magic");
  off = sizeof(kMagic);
  const uint32_t n_widths = get_raw<uint32_t>(bytes, off);
  if (n_widths < 2 || n_widths > 64) throw_io("network deserialize: invalid width count");
  std::vector<int> widths(n_widths);
  for (auto& w : widths) w = get_raw<int32_t>(bytes, off);
  const int32_t aux_dim = get_raw<int32_t>(bytes, off);
  const int32_t aux_layer = get_raw<int32_t>(bytes, off);
  Mlp net(std::move(widths), aux_dim, aux_layer);
  const uint64_t count = get_raw<uint64_t>(bytes, off);
  if (count != net.params_.size()) throw_io("network deserialize: parameter count mismatch");
  if (off + count * sizeof(double) > bytes.size())
    throw_io("network deserialize: truncated parameters");
  std::memcpy(net.params_.data(), bytes.data() + off, count * sizeof(double));
  return net;
}

void Mlp::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw_io("cannot open for write: " + path);
  const auto bytes = serialize();
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw_io("write failed: " + path);
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_io("cannot open for read: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!target.same_architecture(source))
    throw_contract("soft_update: architecture mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw_contract("soft_update: tau must lie in [0, 1]");
  auto t = target.params();
  auto s = source.params();
  for (size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - tau) * t[i] + tau * s[i];
}

std::vector<double> sample_gumbel(int n, RngStream& stream) {
  std::vector<double> g(n);
  for (double& v : g) v = stream.gumbel();
  return g;
}

std::vector<double> gumbel_softmax_from_noise(std::span<const double> logits,
                                              std::span<const double> noise,
                                              double temperature) {
  if (temperature <= 0.0) throw_contract("gumbel_softmax: temperature must be positive");
  if (logits.size() != noise.size()) throw_contract("gumbel_softmax: noise size mismatch");
  std::vector<double> z(logits.size());
  double zmax = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < z.size(); ++i) {
    z[i] = (logits[i] + noise[i]) / temperature;
    zmax = std::max(zmax, z[i]);
  }
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

std::vector<double> gumbel_softmax_sample(std::span<const double> logits, double temperature,
                                          RngStream& stream) {
  const auto noise = sample_gumbel(static_cast<int>(logits.size()), stream);
  return gumbel_softmax_from_noise(logits, noise, temperature);
}

std::vector<double> gumbel_softmax_backward(std::span<const double> y,
                                            std::span<const double> dy, double temperature) {
  if (y.size() != dy.size()) throw_contract("gumbel_softmax_backward: size mismatch");
  double dot = 0.0;
  for (size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  std::vector<double> dlogits(y.size());
  for (size_t i = 0; i < y.size(); ++i) dlogits[i] = y[i] * (dy[i] - dot) / temperature;
  return dlogits;
}

double finite_diff_check(Mlp& net, const std::function<double(const Mlp&)>& loss,
                         std::span<const double> analytic_grad, double h) {
  if (net.param_count() == 0) throw_contract("finite_diff_check: network has no parameters");
  if (analytic_grad.size() != net.param_count())
    throw_contract("finite_diff_check: gradient size mismatch");
  if (h <= 0.0) throw_contract("finite_diff_check: h must be positive");

  auto params = net.params();
  std::vector<double> numeric(net.param_count());
  for (size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss(net);
    params[i] = saved - h;
    const double down = loss(net);
    params[i] = saved;
    numeric[i] = (up - down) / (2.0 * h);
  }

  double scale = 0.0;
  for (size_t i = 0; i < numeric.size(); ++i)
    scale = std::max({scale, std::fabs(numeric[i]), std::fabs(analytic_grad[i])});
  const double floor = std::max(1e-4 * scale, 1e-12);
  double worst = 0.0;
  for (size_t i = 0; i < numeric.size(); ++i) {
    const double denom =
        std::max({std::fabs(numeric[i]), std::fabs(analytic_grad[i]), floor});
    worst = std::max(worst, std::fabs(numeric[i] - analytic_grad[i]) / denom);
  }
  return worst;
}

}  // namespace naac
