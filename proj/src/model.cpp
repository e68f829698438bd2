#include "routeseq/model.hpp"

#include <cmath>

#include "routeseq/error.hpp"

namespace routeseq::model {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::pairwise: return "pairwise";
    case Variant::pointer: return "pointer";
    case Variant::lstm_ed: return "lstm_ed";
    case Variant::asnn: return "asnn";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "pairwise") return Variant::pairwise;
  if (name == "pointer") return Variant::pointer;
  if (name == "lstm_ed") return Variant::lstm_ed;
  if (name == "asnn") return Variant::asnn;
  throw ConfigError("unknown model variant '" + name + "' (pairwise|pointer|lstm_ed|asnn)");
}

std::size_t ModelParams::decoder_input_width() const {
  switch (variant) {
    case Variant::pairwise:
    case Variant::pointer: return dims.zone_features + dims.hidden;
    case Variant::lstm_ed: return dims.zone_features;
    case Variant::asnn: return 0;
  }
  return 0;
}

std::size_t ModelParams::attention_input_width() const {
  switch (variant) {
    case Variant::pairwise: return dims.pair_features + 2 * dims.hidden;
    case Variant::asnn: return dims.pair_features + 2 * dims.zone_features;
    default: return 0;
  }
}

namespace {

ModelParams make(Variant variant, const ModelDims& dims, nn::Rng* rng) {
  if (dims.zone_features == 0 || dims.pair_features == 0 || dims.hidden == 0)
    throw ConfigError("model dimensions must be positive");
  if (variant == Variant::lstm_ed && dims.n_classes < 2)
    throw ConfigError("lstm_ed needs a zone vocabulary (n_classes >= 2)");
  ModelParams p;
  p.variant = variant;
  p.dims = dims;
  const std::size_t H = dims.hidden;
  if (variant != Variant::asnn) {
    p.encoder = rng ? nn::LstmCellParams::random(dims.zone_features, H, *rng)
                    : nn::LstmCellParams::zeros(dims.zone_features, H);
    const std::size_t dec_in = p.decoder_input_width();
    p.decoder = rng ? nn::LstmCellParams::random(dec_in, H, *rng) : nn::LstmCellParams::zeros(dec_in, H);
  }
  switch (variant) {
    case Variant::pairwise:
    case Variant::asnn: {
      const std::size_t in = p.attention_input_width();
      p.asnn = rng ? nn::MlpParams::random(in, dims.mlp_hidden, 1, *rng) : nn::MlpParams::zeros(in, dims.mlp_hidden, 1);
      break;
    }
    case Variant::pointer: {
      const std::size_t A = dims.pointer_hidden;
      p.w1 = Tensor(A, 1);
      p.W2 = Tensor(A, H);
      p.W3 = Tensor(A, H);
      p.w4 = Tensor(dims.pair_features, 1);
      if (rng) {
        nn::init_uniform(p.w1, A, *rng);
        nn::init_uniform(p.W2, H, *rng);
        nn::init_uniform(p.W3, H, *rng);
        nn::init_uniform(p.w4, dims.pair_features, *rng);
      }
      break;
    }
    case Variant::lstm_ed:
      p.fc = rng ? nn::MlpParams::random(H, dims.mlp_hidden, dims.n_classes, *rng)
                 : nn::MlpParams::zeros(H, dims.mlp_hidden, dims.n_classes);
      break;
  }
  return p;
}

Vector concat(std::span<const double> a, std::span<const double> b, std::span<const double> c = {}) {
  Vector v;
  v.reserve(a.size() + b.size() + c.size());
  v.insert(v.end(), a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  v.insert(v.end(), c.begin(), c.end());
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

ModelParams ModelParams::random(Variant variant, const ModelDims& dims, nn::Rng& rng) { return make(variant, dims, &rng); }
ModelParams ModelParams::zeros(Variant variant, const ModelDims& dims) { return make(variant, dims, nullptr); }

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  visit([&](const std::string&, const Tensor& t) { total += t.size(); });
  return total;
}

void validate_input(const ModelInput& input, const ModelParams& params) {
  const auto& d = params.dims;
  if (input.n == 0) throw InvalidInput("model input has no zones");
  if (input.zone_x.rows != input.n || input.zone_x.cols != d.zone_features || input.depot_x.size() != d.zone_features)
    throw InvalidInput("zone feature width mismatch");
  if (input.pair.rows != (input.n + 1) * input.n || input.pair.cols != d.pair_features)
    throw InvalidInput("pair feature width mismatch");
  if (input.input_order.size() != input.n) throw InvalidInput("input order must list every zone");
  std::vector<bool> seen(input.n, false);
  for (std::size_t z : input.input_order) {
    if (z >= input.n || seen[z]) throw InvalidInput("input order is not a permutation of the zones");
    seen[z] = true;
  }
  if (params.variant == Variant::lstm_ed) {
    if (input.zone_class.size() != input.n) throw InvalidInput("lstm_ed input needs a class per zone");
    for (std::size_t c : input.zone_class)
      if (c >= d.n_classes) throw InvalidInput("zone class outside the model vocabulary");
  }
}

EncoderOutputs encode(const ModelInput& input, const ModelParams& params, bool record) {
  if (input.n == 0) throw InvalidInput("encode: empty zone set");
  if (params.variant == Variant::asnn) throw InvalidInput("encode: asnn variant has no encoder");
  EncoderOutputs out;
  out.e.assign(input.n, Vector());
  nn::LstmState state = nn::LstmState::zeros(params.dims.hidden);
  if (record) out.caches.resize(input.n);
  for (std::size_t k = 0; k < input.n; ++k) {
    const std::size_t zone = input.input_order[k];
    state = nn::lstm_cell(input.zone_x.row(zone), state, params.encoder, record ? &out.caches[k] : nullptr);
    out.e[zone] = state.h;
  }
  out.final_state = std::move(state);
  return out;
}

Vector asnn_attention(std::size_t from, std::span<const double> d, const ModelInput& input, const EncoderOutputs& enc,
                      const ModelParams& params, kernels::Exec exec) {
  if (params.variant != Variant::pairwise) throw ConfigError("asnn_attention needs the pairwise variant");
  if (d.size() != params.dims.hidden) throw InvalidInput("asnn_attention: decoder output width mismatch");
  Vector u(input.n);
  kernels::for_each_index(
      input.n,
      [&](std::size_t j) {
        const Vector v = concat(input.pair_row(from, j), d, enc.e[j]);
        u[j] = nn::mlp_forward(v, params.asnn)[0];
      },
      exec);
  return nn::softmax(u);
}

Vector pointer_attention(std::size_t from, std::span<const double> d, const ModelInput& input, const EncoderOutputs& enc,
                         const ModelParams& params) {
  if (params.variant != Variant::pointer) throw ConfigError("pointer_attention needs the pointer variant");
  if (params.w4.rows != params.dims.pair_features) throw ConfigError("pointer attention is missing W4");
  const std::size_t A = params.dims.pointer_hidden;
  Vector proj_d(A), proj_e(A), u(input.n);
  kernels::matvec(params.W3, d, proj_d);
  for (std::size_t j = 0; j < input.n; ++j) {
    kernels::matvec(params.W2, enc.e[j], proj_e);
    double s = 0.0;
    for (std::size_t a = 0; a < A; ++a) s += params.w1.data[a] * std::tanh(proj_e[a] + proj_d[a]);
    u[j] = s + dot(params.w4.data, input.pair_row(from, j));
  }
  return nn::softmax(u);
}

nn::LstmState decode_step(std::span<const double> x_last, std::span<const double> w_prev, const nn::LstmState& state,
                          const ModelParams& params, nn::LstmCache* cache) {
  if (params.variant == Variant::asnn) throw InvalidInput("decode_step: asnn variant has no decoder");
  if (params.variant == Variant::lstm_ed) return nn::lstm_cell(x_last, state, params.decoder, cache);
  const Vector input = concat(x_last, w_prev);
  return nn::lstm_cell(input, state, params.decoder, cache);
}

Rollout::Rollout(const ModelParams& params, const ModelInput& input, bool record, kernels::Exec exec, bool mask_visited)
    : params_(params), input_(input), record_(record), exec_(exec), mask_visited_(mask_visited), visited_(input.n, false) {
  validate_input(input, params);
  if (params.variant != Variant::asnn) {
    enc_ = encode(input, params, record);
    state_ = enc_.final_state;  // decoder starts from the encoder's final (h, c)
  }
  if (params.variant == Variant::pairwise || params.variant == Variant::pointer) context_.assign(params.dims.hidden, 0.0);
}

void Rollout::compute_pending() {
  if (step_ >= input_.n) throw InvalidInput("rollout already visited every zone");
  const std::size_t n = input_.n;
  const auto route_softmax = [&](const Vector& u) {
    if (!mask_visited_) return nn::softmax(u);
    Vector open_u;
    for (std::size_t j = 0; j < n; ++j)
      if (!visited_[j]) open_u.push_back(u[j]);
    const Vector q = nn::softmax(open_u);
    Vector p(n, 0.0);
    for (std::size_t j = 0, k = 0; j < n; ++j)
      if (!visited_[j]) p[j] = q[k++];
    return p;
  };
  StepRecord rec;
  rec.from = from_;
  const auto x_from = input_.features_of(from_);
  nn::LstmCache* lstm_cache = record_ ? &rec.lstm : nullptr;

  switch (params_.variant) {
    case Variant::pairwise: {
      pending_state_ = decode_step(x_from, context_, state_, params_, lstm_cache);
      rec.d = pending_state_.h;
      Vector u(n);
      if (record_) rec.mlp.resize(n);
      kernels::for_each_index(
          n,
          [&](std::size_t j) {
            const Vector v = concat(input_.pair_row(from_, j), rec.d, enc_.e[j]);
            u[j] = nn::mlp_forward(v, params_.asnn, record_ ? &rec.mlp[j] : nullptr)[0];
          },
          exec_);
      rec.probs = route_softmax(u);
      break;
    }
    case Variant::pointer: {
      pending_state_ = decode_step(x_from, context_, state_, params_, lstm_cache);
      rec.d = pending_state_.h;
      const std::size_t A = params_.dims.pointer_hidden;
      Vector proj_d(A), u(n);
      kernels::matvec(params_.W3, rec.d, proj_d);
      rec.tanh_hidden.assign(n, Vector(A));
      for (std::size_t j = 0; j < n; ++j) {
        Vector& t = rec.tanh_hidden[j];
        kernels::matvec(params_.W2, enc_.e[j], t);
        for (std::size_t a = 0; a < A; ++a) t[a] = std::tanh(t[a] + proj_d[a]);
        u[j] = dot(params_.w1.data, t) + dot(params_.w4.data, input_.pair_row(from_, j));
      }
      rec.probs = route_softmax(u);
      break;
    }
    case Variant::lstm_ed: {
      pending_state_ = decode_step(x_from, {}, state_, params_, lstm_cache);
      rec.d = pending_state_.h;
      const Vector logits = nn::mlp_forward(rec.d, params_.fc, record_ ? &rec.fc : nullptr);
      rec.class_probs = nn::softmax(logits);
      Vector restricted(n);
      for (std::size_t j = 0; j < n; ++j) restricted[j] = logits[input_.zone_class[j]];
      rec.probs = route_softmax(restricted);
      break;
    }
    case Variant::asnn: {
      Vector u(n);
      if (record_) rec.mlp.resize(n);
      kernels::for_each_index(
          n,
          [&](std::size_t j) {
            const Vector v = concat(input_.pair_row(from_, j), x_from, input_.zone_x.row(j));
            u[j] = nn::mlp_forward(v, params_.asnn, record_ ? &rec.mlp[j] : nullptr)[0];
          },
          exec_);
      rec.probs = route_softmax(u);
      break;
    }
  }

  if (params_.variant == Variant::pairwise || params_.variant == Variant::pointer) {
    rec.context.assign(params_.dims.hidden, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < rec.context.size(); ++k) rec.context[k] += rec.probs[j] * enc_.e[j][k];
  }
  pending_ = std::move(rec);
  pending_ready_ = true;
}

const Vector& Rollout::attention() {
  if (!pending_ready_) compute_pending();
  return pending_.probs;
}

const Vector& Rollout::class_probabilities() {
  if (params_.variant != Variant::lstm_ed) throw ConfigError("class probabilities exist only for lstm_ed");
  if (!pending_ready_) compute_pending();
  return pending_.class_probs;
}

void Rollout::advance(std::size_t chosen) {
  if (chosen >= input_.n) throw InvalidInput("rollout: chosen zone out of range");
  if (!pending_ready_) compute_pending();
  DecoderStepTrace trace;
  trace.step = step_;
  trace.attention = pending_.probs;
  trace.chosen = chosen;
  trace.context = pending_.context;
  trace.decoder_output = pending_.d;
  traces_.push_back(std::move(trace));

  state_ = pending_state_;
  context_ = pending_.context;
  if (record_) records_.push_back(std::move(pending_));
  pending_ = StepRecord{};
  pending_ready_ = false;
  visited_[chosen] = true;
  from_ = chosen + 1;
  ++step_;
}

void Rollout::backward(const std::vector<std::size_t>& target, ModelParams& grads) const {
  if (!record_) throw InvalidInput("backward needs a recorded rollout");
  if (records_.size() != target.size()) throw InvalidInput("backward: rollout does not cover the target");
  const std::size_t n = input_.n;
  const std::size_t H = params_.dims.hidden;
  const std::size_t K = params_.dims.zone_features;
  const std::size_t P = params_.dims.pair_features;
  const auto variant = params_.variant;

  std::vector<Vector> de(n, Vector(H, 0.0));
  Vector carry_h(H, 0.0), carry_c(H, 0.0), d_context(H, 0.0);

  for (std::size_t i = records_.size(); i-- > 0;) {
    const StepRecord& rec = records_[i];
    Vector dd(H, 0.0);

    if (variant == Variant::lstm_ed) {
      const Vector dfull = nn::cross_entropy_backward(rec.class_probs, input_.zone_class[target[i]]);
      const Vector dlogits = nn::softmax_backward(rec.class_probs, dfull);
      dd = nn::mlp_backward(rec.fc, dlogits, params_.fc, grads.fc);
    } else {
      Vector dp = nn::cross_entropy_backward(rec.probs, target[i]);
      if (variant == Variant::pairwise || variant == Variant::pointer) {
        // context = sum_j p_j e_j, consumed by the following decoder step
        for (std::size_t j = 0; j < n; ++j) {
          dp[j] += dot(d_context, enc_.e[j]);
          for (std::size_t k = 0; k < H; ++k) de[j][k] += rec.probs[j] * d_context[k];
        }
      }
      const Vector du = nn::softmax_backward(rec.probs, dp);

      if (variant == Variant::pairwise) {
        for (std::size_t j = 0; j < n; ++j) {
          const Vector dv = nn::mlp_backward(rec.mlp[j], std::span<const double>(&du[j], 1), params_.asnn, grads.asnn);
          for (std::size_t k = 0; k < H; ++k) {
            dd[k] += dv[P + k];
            de[j][k] += dv[P + H + k];
          }
        }
      } else if (variant == Variant::asnn) {
        for (std::size_t j = 0; j < n; ++j)
          nn::mlp_backward(rec.mlp[j], std::span<const double>(&du[j], 1), params_.asnn, grads.asnn);
      } else {  // pointer
        const std::size_t A = params_.dims.pointer_hidden;
        Vector dpre(A);
        for (std::size_t j = 0; j < n; ++j) {
          const Vector& t = rec.tanh_hidden[j];
          const auto z = input_.pair_row(rec.from, j);
          for (std::size_t a = 0; a < A; ++a) {
            grads.w1.data[a] += du[j] * t[a];
            dpre[a] = du[j] * params_.w1.data[a] * (1.0 - t[a] * t[a]);
          }
          for (std::size_t q = 0; q < P; ++q) grads.w4.data[q] += du[j] * z[q];
          kernels::outer_accumulate(grads.W2, dpre, enc_.e[j]);
          kernels::outer_accumulate(grads.W3, dpre, rec.d);
          kernels::matvec_transposed_accumulate(params_.W2, dpre, de[j]);
          kernels::matvec_transposed_accumulate(params_.W3, dpre, dd);
        }
      }
    }

    if (variant == Variant::asnn) continue;

    for (std::size_t k = 0; k < H; ++k) dd[k] += carry_h[k];
    const auto g = nn::lstm_cell_backward(rec.lstm, dd, carry_c, params_.decoder, grads.decoder);
    carry_h = g.dh_prev;
    carry_c = g.dc_prev;
    if (variant == Variant::pairwise || variant == Variant::pointer) {
      d_context.assign(g.dx.begin() + static_cast<std::ptrdiff_t>(K), g.dx.end());
    }
  }

  if (variant == Variant::asnn) return;

  // Encoder: the final state seeded the decoder; each output fed attention.
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t zone = input_.input_order[k];
    for (std::size_t h = 0; h < H; ++h) carry_h[h] += de[zone][h];
    const auto g = nn::lstm_cell_backward(enc_.caches[k], carry_h, carry_c, params_.encoder, grads.encoder);
    carry_h = g.dh_prev;
    carry_c = g.dc_prev;
  }
}

ForwardResult forward_logprob(const ModelInput& input, const std::vector<std::size_t>& target, const ModelParams& params,
                              ModelParams* grads, bool mask_visited) {
  if (target.size() != input.n) throw InvalidInput("forward_logprob: target must list every zone");
  std::vector<bool> seen(input.n, false);
  for (std::size_t z : target) {
    if (z >= input.n || seen[z]) throw InvalidInput("forward_logprob: target is not a permutation");
    seen[z] = true;
  }
  Rollout rollout(params, input, grads != nullptr, kernels::Exec::serial, mask_visited);
  ForwardResult out;
  for (std::size_t i = 0; i < input.n; ++i) {
    double step_loss = 0.0;
    if (params.variant == Variant::lstm_ed) {
      step_loss = nn::cross_entropy(rollout.class_probabilities(), input.zone_class[target[i]]);
    } else {
      step_loss = nn::cross_entropy(rollout.attention(), target[i]);
    }
    out.step_losses.push_back(step_loss);
    out.loss += step_loss;
    rollout.advance(target[i]);
  }
  if (grads) rollout.backward(target, *grads);
  out.traces = rollout.traces();
  return out;
}

}  // namespace routeseq::model
