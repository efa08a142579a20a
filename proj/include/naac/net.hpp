#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "naac/rng.hpp"

namespace naac {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction over one flat parameter array.
class AdamState {
 public:
  AdamState() = default;
  AdamState(size_t param_count, AdamConfig config);

  void step(std::span<double> params, std::span<const double> grads);
  long step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

// Dense network with rectifier hidden layers and a linear output. An optional
// auxiliary input block of aux_dim features is concatenated in front of layer
// aux_layer (the critic feeds states through the first layer and injects the
// action block there). All parameters live in one flat array, weights
// row-major (input-index major), biases after each weight block.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> widths, int aux_dim = 0, int aux_layer = -1);
  static Mlp with_uniform_init(std::vector<int> widths, RngStream& stream, int aux_dim = 0,
                               int aux_layer = -1);

  struct Cache {
    int batch = 0;
    std::vector<std::vector<double>> acts;  // input of each layer, post-concat
  };
  struct Grads {
    std::vector<double> params;  // same layout as params()
    std::vector<double> input;   // batch x input_dim
    std::vector<double> aux;     // batch x aux_dim
  };

  // x is batch x input_dim row-major; returns batch x output_dim. aux must be
  // batch x aux_dim when the network has an auxiliary block.
  std::vector<double> forward(std::span<const double> x, int batch, Cache* cache = nullptr,
                              std::span<const double> aux = {}) const;
  // Exact reverse-mode gradients of sum(output * dy). dy is batch x output_dim.
  Grads backward(const Cache& cache, std::span<const double> dy,
                 bool with_param_grads = true) const;

  const std::vector<int>& widths() const { return widths_; }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int aux_dim() const { return aux_dim_; }
  int aux_layer() const { return aux_layer_; }
  size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  bool same_architecture(const Mlp& other) const;

  std::vector<unsigned char> serialize() const;
  static Mlp deserialize(std::span<const unsigned char> bytes);
  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

 private:
  struct Layer {
    int in = 0, out = 0;
    size_t w_off = 0, b_off = 0;
  };

  void build();

  std::vector<int> widths_;
  int aux_dim_ = 0;
  int aux_layer_ = -1;
  std::vector<Layer> layers_;
  std::vector<double> params_;
};

// target <- (1 - tau) * target + tau * source, elementwise over parameters.
void soft_update(Mlp& target, const Mlp& source, double tau);

std::vector<double> sample_gumbel(int n, RngStream& stream);
// softmax((logits + noise) / temperature); lands strictly inside the simplex.
std::vector<double> gumbel_softmax_from_noise(std::span<const double> logits,
                                              std::span<const double> noise,
                                              double temperature);
std::vector<double> gumbel_softmax_sample(std::span<const double> logits, double temperature,
                                          RngStream& stream);
// Gradient through the softmax relaxation: dlogits from (sample y, dy).
std::vector<double> gumbel_softmax_backward(std::span<const double> y,
                                            std::span<const double> dy, double temperature);

// Central-difference check of analytic_grad (one entry per parameter) against
// loss evaluated under perturbed parameters. Returns the max relative error;
// relative scale floors at 1e-4 of the largest gradient magnitude so that
// noise on negligible coordinates does not dominate.
double finite_diff_check(Mlp& net, const std::function<double(const Mlp&)>& loss,
                         std::span<const double> analytic_grad, double h);

}  // namespace naac
