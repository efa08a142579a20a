#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "naac/errors.hpp"
#include "naac/net.hpp"

using namespace naac;

namespace {

// Naive per-sample evaluation of the same architecture, written against the
// serialized parameter layout rather than the library's forward pass.
std::vector<double> reference_forward(const Mlp& net, std::span<const double> x, int batch,
                                      std::span<const double> aux) {
  const auto& widths = net.widths();
  const auto params = net.params();
  std::vector<double> out;
  size_t off = 0;
  std::vector<std::vector<double>> layer_w, layer_b;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l] + (static_cast<int>(l) == net.aux_layer() ? net.aux_dim() : 0);
    const int o = widths[l + 1];
    layer_w.emplace_back(params.begin() + off, params.begin() + off + in * o);
    off += static_cast<size_t>(in) * o;
    layer_b.emplace_back(params.begin() + off, params.begin() + off + o);
    off += o;
  }
  for (int b = 0; b < batch; ++b) {
    std::vector<double> h(x.begin() + static_cast<size_t>(b) * widths[0],
                          x.begin() + static_cast<size_t>(b + 1) * widths[0]);
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
      if (static_cast<int>(l) == net.aux_layer())
        h.insert(h.end(), aux.begin() + static_cast<size_t>(b) * net.aux_dim(),
                 aux.begin() + static_cast<size_t>(b + 1) * net.aux_dim());
      const int in = static_cast<int>(h.size());
      const int o = widths[l + 1];
      std::vector<double> z(o);
      for (int j = 0; j < o; ++j) {
        double acc = layer_b[l][j];
        for (int i = 0; i < in; ++i) acc += h[i] * layer_w[l][static_cast<size_t>(i) * o + j];
        z[j] = acc;
      }
      if (l + 2 < widths.size())
        for (auto& v : z) v = std::max(v, 0.0);
      h = std::move(z);
    }
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

std::vector<double> random_vec(size_t n, RngStream& s, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * s.next_unit();
  return v;
}

}  // namespace

TEST_CASE("forward: zero parameters give zero output") {
  Mlp net({4, 8, 3});
  const std::vector<double> x(4, 1.5);
  const auto y = net.forward(x, 1);
  for (const double v : y) CHECK(v == 0.0);
}

TEST_CASE("forward: identity single layer passes input through") {
  Mlp net({3, 3});
  auto p = net.params();
  // weights row-major (in x out): identity
  for (int i = 0; i < 3; ++i) p[static_cast<size_t>(i) * 3 + i] = 1.0;
  const std::vector<double> x{-1.0, 0.5, 2.0};
  const auto y = net.forward(x, 1);
  CHECK(y[0] == -1.0);  // output layer is linear, no rectifier
  CHECK(y[1] == 0.5);
  CHECK(y[2] == 2.0);
}

TEST_CASE("forward matches the independent evaluation to 1e-12") {
  RngStream s(5);
  Mlp net = Mlp::with_uniform_init({6, 16, 16, 4}, s);
  const auto x = random_vec(5 * 6, s);
  const auto got = net.forward(x, 5);
  const auto want = reference_forward(net, x, 5, {});
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("forward with an injected action block matches the independent evaluation") {
  RngStream s(6);
  Mlp net = Mlp::with_uniform_init({10, 12, 12, 1}, s, 8, 1);
  const auto x = random_vec(3 * 10, s);
  const auto aux = random_vec(3 * 8, s, 0.0, 1.0);
  const auto got = net.forward(x, 3, nullptr, aux);
  const auto want = reference_forward(net, x, 3, aux);
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("backward: zero upstream gradient zeroes everything") {
  RngStream s(7);
  Mlp net = Mlp::with_uniform_init({5, 8, 2}, s);
  const auto x = random_vec(2 * 5, s);
  Mlp::Cache cache;
  net.forward(x, 2, &cache);
  const std::vector<double> dy(2 * 2, 0.0);
  const auto grads = net.backward(cache, dy);
  for (const double g : grads.params) CHECK(g == 0.0);
  for (const double g : grads.input) CHECK(g == 0.0);
}

TEST_CASE("backward: scalar linear net has dy/dw = x and dy/dx = w") {
  Mlp net({1, 1});
  net.params()[0] = 3.0;  // w
  net.params()[1] = 0.25;  // b
  const std::vector<double> x{2.0};
  Mlp::Cache cache;
  const auto y = net.forward(x, 1, &cache);
  CHECK(y[0] == doctest::Approx(6.25));
  const auto grads = net.backward(cache, std::vector<double>{1.0});
  CHECK(grads.params[0] == doctest::Approx(2.0));  // dw = x
  CHECK(grads.params[1] == doctest::Approx(1.0));  // db
  CHECK(grads.input[0] == doctest::Approx(3.0));   // dx = w
}

TEST_CASE("backward matches central finite differences on a random net") {
  RngStream s(8);
  Mlp net = Mlp::with_uniform_init({4, 12, 12, 3}, s);
  const auto x = random_vec(4 * 4, s);
  const auto target = random_vec(4 * 3, s);

  auto loss_value = [&](const Mlp& candidate) {
    const auto out = candidate.forward(x, 4);
    double loss = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
      const double d = out[i] - target[i];
      loss += d * d;
    }
    return loss;
  };
  Mlp::Cache cache;
  const auto out = net.forward(x, 4, &cache);
  std::vector<double> dy(out.size());
  for (size_t i = 0; i < out.size(); ++i) dy[i] = 2.0 * (out[i] - target[i]);
  const auto grads = net.backward(cache, dy);
  CHECK(finite_diff_check(net, loss_value, grads.params, 1e-5) <= 1e-4);
}

TEST_CASE("backward propagates exact gradients into the aux block") {
  RngStream s(9);
  Mlp net = Mlp::with_uniform_init({6, 10, 10, 1}, s, 4, 1);
  const auto x = random_vec(6, s);
  auto aux = random_vec(4, s, 0.0, 1.0);
  Mlp::Cache cache;
  net.forward(x, 1, &cache, aux);
  const auto grads = net.backward(cache, std::vector<double>{1.0});
  REQUIRE(grads.aux.size() == 4);

  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    const double saved = aux[i];
    aux[i] = saved + h;
    const double up = net.forward(x, 1, nullptr, aux)[0];
    aux[i] = saved - h;
    const double down = net.forward(x, 1, nullptr, aux)[0];
    aux[i] = saved;
    CHECK(grads.aux[i] == doctest::Approx((up - down) / (2.0 * h)).epsilon(1e-5));
  }
}

TEST_CASE("adam: zero gradient from a fresh state leaves parameters unchanged") {
  RngStream s(10);
  Mlp net = Mlp::with_uniform_init({3, 5, 2}, s);
  const std::vector<double> before(net.params().begin(), net.params().end());
  AdamState opt(net.param_count(), {1e-3, 0.9, 0.999, 1e-8});
  const std::vector<double> zeros(net.param_count(), 0.0);
  opt.step(net.params(), zeros);
  for (size_t i = 0; i < before.size(); ++i) CHECK(net.params()[i] == before[i]);
}

TEST_CASE("adam: first step approximates -lr * sign(g)") {
  const double lr = 1e-3;
  std::vector<double> params{1.0, -2.0, 0.5};
  std::vector<double> grads{0.2, -0.7, 3.0};  // |g| >> eps
  AdamState opt(3, {lr, 0.9, 0.999, 1e-8});
  opt.step(params, grads);
  CHECK(params[0] == doctest::Approx(1.0 - lr).epsilon(0.01));
  CHECK(params[1] == doctest::Approx(-2.0 + lr).epsilon(0.01));
  CHECK(params[2] == doctest::Approx(0.5 - lr).epsilon(0.01));
}

TEST_CASE("adam is deterministic") {
  std::vector<double> p1{1.0, 2.0}, p2{1.0, 2.0};
  AdamState o1(2, {1e-2, 0.9, 0.999, 1e-8}), o2(2, {1e-2, 0.9, 0.999, 1e-8});
  const std::vector<double> g{0.3, -0.4};
  for (int i = 0; i < 10; ++i) {
    o1.step(p1, g);
    o2.step(p2, g);
  }
  CHECK(p1[0] == p2[0]);
  CHECK(p1[1] == p2[1]);
}

TEST_CASE("soft_update blends parameters") {
  RngStream s(11);
  Mlp target = Mlp::with_uniform_init({3, 4, 2}, s);
  Mlp source = Mlp::with_uniform_init({3, 4, 2}, s);
  const std::vector<double> t0(target.params().begin(), target.params().end());

  Mlp t_copy = target;
  soft_update(t_copy, source, 0.0);
  for (size_t i = 0; i < t0.size(); ++i) CHECK(t_copy.params()[i] == t0[i]);

  t_copy = target;
  soft_update(t_copy, source, 1.0);
  for (size_t i = 0; i < t0.size(); ++i) CHECK(t_copy.params()[i] == source.params()[i]);

  t_copy = target;
  soft_update(t_copy, source, 0.5);
  for (size_t i = 0; i < t0.size(); ++i)
    CHECK(t_copy.params()[i] ==
          doctest::Approx(0.5 * (t0[i] + source.params()[i])).epsilon(1e-15));

  Mlp other = Mlp::with_uniform_init({3, 5, 2}, s);
  CHECK_THROWS_AS(soft_update(other, source, 0.5), Error);
}

TEST_CASE("gumbel softmax lands on the simplex") {
  RngStream s(12);
  const std::vector<double> logits{0.3, -1.0, 2.0, 0.0};
  for (int i = 0; i < 200; ++i) {
    const auto y = gumbel_softmax_sample(logits, 0.7, s);
    double total = 0.0;
    for (const double v : y) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gumbel softmax at low temperature concentrates on the argmax") {
  RngStream s(13);
  const std::vector<double> logits{5.0, 0.0, -5.0};
  int concentrated = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const auto y = gumbel_softmax_sample(logits, 0.01, s);
    if (*std::max_element(y.begin(), y.end()) > 0.999) ++concentrated;
  }
  CHECK(concentrated > trials * 0.98);
}

TEST_CASE("gumbel softmax argmax frequencies are uniform for uniform logits") {
  RngStream s(14);
  const std::vector<double> logits(5, 0.0);
  std::vector<int> counts(5, 0);
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const auto y = gumbel_softmax_sample(logits, 1.0, s);
    ++counts[std::max_element(y.begin(), y.end()) - y.begin()];
  }
  const double expected = trials / 5.0;
  const double sigma = std::sqrt(expected * (1.0 - 0.2));
  for (const int c : counts) CHECK(std::fabs(c - expected) < 3.0 * sigma);
}

TEST_CASE("gumbel softmax backward matches finite differences on logits") {
  RngStream s(15);
  std::vector<double> logits{0.5, -0.25, 1.0};
  const auto noise = sample_gumbel(3, s);
  const std::vector<double> dy{1.0, -2.0, 0.5};
  const double temp = 0.8;

  const auto y = gumbel_softmax_from_noise(logits, noise, temp);
  const auto dlogits = gumbel_softmax_backward(y, dy, temp);

  const double h = 1e-7;
  for (int i = 0; i < 3; ++i) {
    const double saved = logits[i];
    logits[i] = saved + h;
    const auto up = gumbel_softmax_from_noise(logits, noise, temp);
    logits[i] = saved - h;
    const auto down = gumbel_softmax_from_noise(logits, noise, temp);
    logits[i] = saved;
    double num = 0.0;
    for (int j = 0; j < 3; ++j) num += dy[j] * (up[j] - down[j]) / (2.0 * h);
    CHECK(dlogits[i] == doctest::Approx(num).epsilon(1e-5));
  }
}

TEST_CASE("finite_diff_check: quadratic loss on a linear net is near-exact") {
  RngStream s(16);
  Mlp net = Mlp::with_uniform_init({3, 2}, s);
  const auto x = random_vec(3, s);
  auto loss_value = [&](const Mlp& candidate) {
    const auto out = candidate.forward(x, 1);
    return 0.5 * (out[0] * out[0] + out[1] * out[1]);
  };
  Mlp::Cache cache;
  const auto out = net.forward(x, 1, &cache);
  const auto grads = net.backward(cache, out);  // dL/dy = y
  CHECK(finite_diff_check(net, loss_value, grads.params, 1e-5) <= 1e-8);
}

TEST_CASE("finite_diff_check rejects empty networks and bad inputs") {
  CHECK_THROWS_AS(Mlp(std::vector<int>{}), Error);
  CHECK_THROWS_AS(Mlp(std::vector<int>{4}), Error);
  RngStream s(17);
  Mlp net = Mlp::with_uniform_init({2, 2}, s);
  const std::vector<double> wrong_size(1, 0.0);
  CHECK_THROWS_AS(
      finite_diff_check(net, [](const Mlp&) { return 0.0; }, wrong_size, 1e-5), Error);
}

TEST_CASE("serialization round-trips losslessly") {
  RngStream s(18);
  const Mlp net = Mlp::with_uniform_init({7, 9, 4}, s, 6, 1);
  const auto bytes = net.serialize();
  const Mlp back = Mlp::deserialize(bytes);
  CHECK(back.widths() == net.widths());
  CHECK(back.aux_dim() == net.aux_dim());
  CHECK(back.aux_layer() == net.aux_layer());
  REQUIRE(back.param_count() == net.param_count());
  for (size_t i = 0; i < net.param_count(); ++i)
    CHECK(back.params()[i] == net.params()[i]);
  CHECK(back.serialize() == bytes);

  const auto path = std::filesystem::temp_directory_path() / "naac_net_roundtrip.params";
  net.save(path.string());
  const Mlp loaded = Mlp::load(path.string());
  CHECK(loaded.serialize() == bytes);
  std::filesystem::remove(path);
}

TEST_CASE("deserialize rejects corrupt buffers") {
  RngStream s(19);
  const Mlp net = Mlp::with_uniform_init({3, 3}, s);
  auto bytes = net.serialize();
  bytes[0] = 'X';
  CHECK_THROWS_AS(Mlp::deserialize(bytes), Error);
  auto truncated = net.serialize();
  truncated.resize(truncated.size() - 8);
  CHECK_THROWS_AS(Mlp::deserialize(truncated), Error);
}
