#pragma once

// Sequence models over a zone-level route:
//   pairwise  - pointer network whose attention logits come from a shared MLP
//               over [pair features; decoder output; encoder output]
//   pointer   - content-based pointer attention plus a linear local term
//   lstm_ed   - LSTM encoder-decoder with a fully-connected softmax head over
//               a zone-id vocabulary
//   asnn      - the shared pair MLP alone, over [pair features; x_from; x_to]

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "routeseq/kernels.hpp"
#include "routeseq/nn.hpp"
#include "routeseq/tensor.hpp"

namespace routeseq::model {

enum class Variant { pairwise, pointer, lstm_ed, asnn };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
inline constexpr Variant kAllVariants[] = {Variant::asnn, Variant::lstm_ed, Variant::pointer, Variant::pairwise};

struct ModelDims {
  std::size_t zone_features = 0;  // K
  std::size_t pair_features = 0;  // P
  std::size_t hidden = 32;        // encoder and decoder hidden/output width
  std::size_t pointer_hidden = 32;
  std::vector<std::size_t> mlp_hidden{128, 128};
  std::size_t n_classes = 0;  // K_z, lstm_ed only; class 0 is reserved for unseen ids
};

struct ModelParams {
  Variant variant = Variant::pairwise;
  ModelDims dims;
  nn::LstmCellParams encoder, decoder;  // absent for asnn
  nn::MlpParams asnn;                   // pairwise, asnn
  Tensor w1, W2, W3, w4;                // pointer: w1 (H'x1), W2 (H'xH), W3 (H'xH), w4 (Px1)
  nn::MlpParams fc;                     // lstm_ed

  static ModelParams random(Variant variant, const ModelDims& dims, nn::Rng& rng);
  static ModelParams zeros(Variant variant, const ModelDims& dims);

  std::size_t decoder_input_width() const;
  std::size_t attention_input_width() const;

  template <class F>
  void visit(F&& f) {
    if (variant != Variant::asnn) {
      encoder.visit("encoder", f);
      decoder.visit("decoder", f);
    }
    switch (variant) {
      case Variant::pairwise:
      case Variant::asnn:
        asnn.visit("asnn", f);
        break;
      case Variant::pointer:
        f("pointer.w1", w1); f("pointer.W2", W2); f("pointer.W3", W3); f("pointer.w4", w4);
        break;
      case Variant::lstm_ed:
        fc.visit("fc", f);
        break;
    }
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit([&](const std::string& name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
  }

  std::size_t parameter_count() const;
};

// Model-ready numeric view of one route.
struct ModelInput {
  std::size_t n = 0;                    // zones
  Tensor zone_x;                        // n x K
  Vector depot_x;                       // K
  Tensor pair;                          // (n+1)*n x P; row from*n + j, from 0 = depot, z+1 = zone z
  std::vector<std::size_t> input_order; // encoder reading order (zone indices)
  std::vector<std::size_t> zone_class;  // lstm_ed class per zone

  std::span<const double> pair_row(std::size_t from, std::size_t j) const { return pair.row(from * n + j); }
  std::span<const double> features_of(std::size_t from) const {
    return from == 0 ? std::span<const double>(depot_x) : zone_x.row(from - 1);
  }
};

void validate_input(const ModelInput& input, const ModelParams& params);

struct EncoderOutputs {
  std::vector<Vector> e;  // indexed by zone (not by reading position)
  nn::LstmState final_state;
  std::vector<nn::LstmCache> caches;  // by reading position, when recorded
};

EncoderOutputs encode(const ModelInput& input, const ModelParams& params, bool record = false);

// Attention over all n zones from `from` (0 = depot, z+1 = zone z).
Vector asnn_attention(std::size_t from, std::span<const double> d, const ModelInput& input,
                      const EncoderOutputs& enc, const ModelParams& params,
                      kernels::Exec exec = kernels::Exec::serial);
Vector pointer_attention(std::size_t from, std::span<const double> d, const ModelInput& input,
                         const EncoderOutputs& enc, const ModelParams& params);

// One decoder step on [x_last; w_prev] (or x_last alone for lstm_ed).
nn::LstmState decode_step(std::span<const double> x_last, std::span<const double> w_prev,
                          const nn::LstmState& state, const ModelParams& params, nn::LstmCache* cache = nullptr);

struct DecoderStepTrace {
  std::size_t step = 0;
  Vector attention;  // over the route's n zones, sums to 1
  std::size_t chosen = 0;
  Vector context;    // w after this step (pairwise, pointer)
  Vector decoder_output;
};

// Step-wise decoder shared by training (teacher forcing) and inference.
class Rollout {
 public:
  // With `mask_visited`, zones already chosen get probability 0 in every
  // later distribution.
  Rollout(const ModelParams& params, const ModelInput& input, bool record = false,
          kernels::Exec exec = kernels::Exec::serial, bool mask_visited = false);

  // Distribution over all zones for the next pick, given the history so far.
  const Vector& attention();
  // Commit the next zone and move on.
  void advance(std::size_t chosen);

  std::size_t step() const { return step_; }
  const std::vector<DecoderStepTrace>& traces() const { return traces_; }

  // Full-vocabulary probabilities of the pending step (lstm_ed only).
  const Vector& class_probabilities();

  // Reverse-mode pass for a recorded teacher-forced rollout.
  void backward(const std::vector<std::size_t>& target, ModelParams& grads) const;

 private:
  struct StepRecord {
    std::size_t from = 0;
    nn::LstmCache lstm;
    Vector d;
    std::vector<nn::MlpCache> mlp;     // per candidate (pairwise, asnn)
    std::vector<Vector> tanh_hidden;   // per candidate (pointer)
    nn::MlpCache fc;
    Vector class_probs;                // lstm_ed
    Vector probs;                      // over route zones
    Vector context;                    // pairwise, pointer
  };

  void compute_pending();

  const ModelParams& params_;
  const ModelInput& input_;
  bool record_;
  kernels::Exec exec_;
  bool mask_visited_;
  std::vector<bool> visited_;
  EncoderOutputs enc_;
  nn::LstmState state_;
  Vector context_;
  std::size_t from_ = 0;
  std::size_t step_ = 0;
  bool pending_ready_ = false;
  StepRecord pending_;
  nn::LstmState pending_state_;
  std::vector<StepRecord> records_;
  std::vector<DecoderStepTrace> traces_;
};

struct ForwardResult {
  double loss = 0.0;  // total negative log-likelihood
  std::vector<double> step_losses;
  std::vector<DecoderStepTrace> traces;
};

// Teacher-forced negative log-likelihood of `target`; when `grads` is given
// (shaped like `params`), the exact gradient is accumulated into it.
ForwardResult forward_logprob(const ModelInput& input, const std::vector<std::size_t>& target,
                              const ModelParams& params, ModelParams* grads = nullptr, bool mask_visited = false);

}  // namespace routeseq::model
