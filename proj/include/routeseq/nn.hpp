#pragma once

// Minimal differentiable kernel: LSTM cell, MLP, softmax, cross-entropy and
// Adam. Each forward op can record a cache; the matching backward op
// accumulates exact reverse-mode gradients into a parameter-shaped buffer.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "routeseq/kernels.hpp"
#include "routeseq/tensor.hpp"

namespace routeseq::nn {

using Rng = std::mt19937_64;

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
void init_uniform(Tensor& W, std::size_t fan_in, Rng& rng);

struct LstmCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Tensor W_f, W_i, W_o, W_c;  // hidden x input
  Tensor U_f, U_i, U_o, U_c;  // hidden x hidden
  Tensor b_f, b_i, b_o, b_c;  // hidden x 1

  static LstmCellParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  static LstmCellParams random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".W_f", W_f); f(prefix + ".W_i", W_i); f(prefix + ".W_o", W_o); f(prefix + ".W_c", W_c);
    f(prefix + ".U_f", U_f); f(prefix + ".U_i", U_i); f(prefix + ".U_o", U_o); f(prefix + ".U_c", U_c);
    f(prefix + ".b_f", b_f); f(prefix + ".b_i", b_i); f(prefix + ".b_o", b_o); f(prefix + ".b_c", b_c);
  }
};

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden_dim) { return {Vector(hidden_dim, 0.0), Vector(hidden_dim, 0.0)}; }
};

struct LstmCache {
  Vector x, h_prev, c_prev;
  Vector f, i, o, g;  // gate activations; g is the tanh candidate
  Vector c, tanh_c;
};

// One step. The cell output equals the new hidden state (single layer,
// one direction). Throws NumericError on non-finite input.
LstmState lstm_cell(std::span<const double> x, const LstmState& state, const LstmCellParams& p,
                    LstmCache* cache = nullptr);

struct LstmInputGrads {
  Vector dx, dh_prev, dc_prev;
};

LstmInputGrads lstm_cell_backward(const LstmCache& cache, std::span<const double> dh,
                                  std::span<const double> dc, const LstmCellParams& p,
                                  LstmCellParams& grads);

// Affine layers with rectified-linear hidden activations and identity output.
struct MlpParams {
  std::vector<Tensor> weights;  // layer l: out_l x in_l
  std::vector<Tensor> biases;   // layer l: out_l x 1

  static MlpParams random(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                          std::size_t output_dim, Rng& rng);
  static MlpParams zeros(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                         std::size_t output_dim);

  std::size_t input_dim() const { return weights.empty() ? 0 : weights.front().cols; }
  std::size_t output_dim() const { return weights.empty() ? 0 : weights.back().rows; }
  bool empty() const { return weights.empty(); }

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      f(prefix + ".W" + std::to_string(l), weights[l]);
      f(prefix + ".b" + std::to_string(l), biases[l]);
    }
  }
};

struct MlpCache {
  std::vector<Vector> inputs;  // input to each layer (post-activation of previous)
  std::vector<Vector> pre;     // pre-activation of each layer
};

Vector mlp_forward(std::span<const double> x, const MlpParams& p, MlpCache* cache = nullptr,
                   kernels::Exec exec = kernels::Exec::serial);

// Returns dL/dx.
Vector mlp_backward(const MlpCache& cache, std::span<const double> dy, const MlpParams& p, MlpParams& grads);

Vector softmax(std::span<const double> u);

// dL/du given dL/dp for p = softmax(u).
Vector softmax_backward(std::span<const double> p, std::span<const double> dp);

inline constexpr double kProbabilityFloor = 1e-12;

// -ln(max(probs[target], 1e-12)).
double cross_entropy(std::span<const double> probs, std::size_t target);

// dL/dp for the clamped cross-entropy (zero when the clamp is active).
Vector cross_entropy_backward(std::span<const double> probs, std::size_t target);

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<Vector> m, v;  // one per parameter tensor, flattened
};

// params[k] -= lr * m_hat / (sqrt(v_hat) + eps). Throws NumericError and
// leaves everything untouched if any gradient is non-finite.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state);

}  // namespace routeseq::nn
