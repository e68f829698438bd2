#include "routeseq/nn.hpp"

#include <algorithm>
#include <cmath>

#include "routeseq/error.hpp"

namespace routeseq::nn {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite value");
}

// out = W x + U h + b
void gate_preactivation(const Tensor& W, const Tensor& U, const Tensor& b, std::span<const double> x,
                        std::span<const double> h, Vector& out) {
  const std::size_t H = W.rows;
  out.assign(H, 0.0);
  for (std::size_t r = 0; r < H; ++r) {
    double s = b.data[r];
    const double* w = W.data.data() + r * W.cols;
    for (std::size_t c = 0; c < W.cols; ++c) s += w[c] * x[c];
    const double* u = U.data.data() + r * U.cols;
    for (std::size_t c = 0; c < U.cols; ++c) s += u[c] * h[c];
    out[r] = s;
  }
}

}  // namespace

void init_uniform(Tensor& W, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : W.data) w = dist(rng);
}

LstmCellParams LstmCellParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  LstmCellParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  for (Tensor* W : {&p.W_f, &p.W_i, &p.W_o, &p.W_c}) *W = Tensor(hidden_dim, input_dim);
  for (Tensor* U : {&p.U_f, &p.U_i, &p.U_o, &p.U_c}) *U = Tensor(hidden_dim, hidden_dim);
  for (Tensor* b : {&p.b_f, &p.b_i, &p.b_o, &p.b_c}) *b = Tensor(hidden_dim, 1);
  return p;
}

LstmCellParams LstmCellParams::random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  LstmCellParams p = zeros(input_dim, hidden_dim);
  for (Tensor* W : {&p.W_f, &p.W_i, &p.W_o, &p.W_c}) init_uniform(*W, input_dim, rng);
  for (Tensor* U : {&p.U_f, &p.U_i, &p.U_o, &p.U_c}) init_uniform(*U, hidden_dim, rng);
  return p;
}

LstmState lstm_cell(std::span<const double> x, const LstmState& state, const LstmCellParams& p, LstmCache* cache) {
  if (x.size() != p.input_dim) throw InvalidInput("lstm_cell: input width mismatch");
  if (state.h.size() != p.hidden_dim || state.c.size() != p.hidden_dim)
    throw InvalidInput("lstm_cell: state width mismatch");
  require_finite(x, "lstm_cell input");

  const std::size_t H = p.hidden_dim;
  Vector f, i, o, g;
  gate_preactivation(p.W_f, p.U_f, p.b_f, x, state.h, f);
  gate_preactivation(p.W_i, p.U_i, p.b_i, x, state.h, i);
  gate_preactivation(p.W_o, p.U_o, p.b_o, x, state.h, o);
  gate_preactivation(p.W_c, p.U_c, p.b_c, x, state.h, g);

  LstmState next{Vector(H), Vector(H)};
  Vector tanh_c(H);
  for (std::size_t k = 0; k < H; ++k) {
    f[k] = logistic(f[k]);
    i[k] = logistic(i[k]);
    o[k] = logistic(o[k]);
    g[k] = std::tanh(g[k]);
    next.c[k] = f[k] * state.c[k] + i[k] * g[k];
    tanh_c[k] = std::tanh(next.c[k]);
    next.h[k] = o[k] * tanh_c[k];
  }
  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->f = std::move(f);
    cache->i = std::move(i);
    cache->o = std::move(o);
    cache->g = std::move(g);
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

LstmInputGrads lstm_cell_backward(const LstmCache& cache, std::span<const double> dh, std::span<const double> dc,
                                  const LstmCellParams& p, LstmCellParams& grads) {
  const std::size_t H = p.hidden_dim;
  Vector dzf(H), dzi(H), dzo(H), dzg(H);
  LstmInputGrads out{Vector(p.input_dim, 0.0), Vector(H, 0.0), Vector(H, 0.0)};
  for (std::size_t k = 0; k < H; ++k) {
    const double f = cache.f[k], i = cache.i[k], o = cache.o[k], g = cache.g[k], tc = cache.tanh_c[k];
    const double dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
    dzo[k] = dh[k] * tc * o * (1.0 - o);
    dzf[k] = dct * cache.c_prev[k] * f * (1.0 - f);
    dzi[k] = dct * g * i * (1.0 - i);
    dzg[k] = dct * i * (1.0 - g * g);
    out.dc_prev[k] = dct * f;
  }
  const auto gate = [&](const Vector& dz, const Tensor& W, const Tensor& U, Tensor& dW, Tensor& dU, Tensor& db) {
    kernels::outer_accumulate(dW, dz, cache.x);
    kernels::outer_accumulate(dU, dz, cache.h_prev);
    for (std::size_t k = 0; k < H; ++k) db.data[k] += dz[k];
    kernels::matvec_transposed_accumulate(W, dz, out.dx);
    kernels::matvec_transposed_accumulate(U, dz, out.dh_prev);
  };
  gate(dzf, p.W_f, p.U_f, grads.W_f, grads.U_f, grads.b_f);
  gate(dzi, p.W_i, p.U_i, grads.W_i, grads.U_i, grads.b_i);
  gate(dzo, p.W_o, p.U_o, grads.W_o, grads.U_o, grads.b_o);
  gate(dzg, p.W_c, p.U_c, grads.W_c, grads.U_c, grads.b_c);
  return out;
}

MlpParams MlpParams::zeros(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim) {
  MlpParams p;
  std::size_t in = input_dim;
  const auto add = [&](std::size_t out) {
    p.weights.emplace_back(out, in);
    p.biases.emplace_back(out, 1);
    in = out;
  };
  for (std::size_t h : hidden) add(h);
  add(output_dim);
  return p;
}

MlpParams MlpParams::random(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
                            Rng& rng) {
  MlpParams p = zeros(input_dim, hidden, output_dim);
  for (auto& W : p.weights) init_uniform(W, W.cols, rng);
  return p;
}

Vector mlp_forward(std::span<const double> x, const MlpParams& p, MlpCache* cache, kernels::Exec exec) {
  if (p.empty()) throw InvalidInput("mlp_forward: no layers");
  if (x.size() != p.input_dim()) throw InvalidInput("mlp_forward: input width mismatch");
  Vector a(x.begin(), x.end());
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  const std::size_t L = p.weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    const Tensor& W = p.weights[l];
    Vector z(W.rows);
    kernels::matvec(W, a, z, exec);
    for (std::size_t r = 0; r < W.rows; ++r) z[r] += p.biases[l].data[r];
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    if (l + 1 < L)
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    a = std::move(z);
  }
  return a;
}

Vector mlp_backward(const MlpCache& cache, std::span<const double> dy, const MlpParams& p, MlpParams& grads) {
  const std::size_t L = p.weights.size();
  Vector g(dy.begin(), dy.end());
  for (std::size_t l = L; l-- > 0;) {
    if (l + 1 < L) {
      const Vector& z = cache.pre[l];
      for (std::size_t r = 0; r < g.size(); ++r)
        if (z[r] <= 0.0) g[r] = 0.0;
    }
    kernels::outer_accumulate(grads.weights[l], g, cache.inputs[l]);
    for (std::size_t r = 0; r < g.size(); ++r) grads.biases[l].data[r] += g[r];
    Vector prev(p.weights[l].cols, 0.0);
    kernels::matvec_transposed_accumulate(p.weights[l], g, prev);
    g = std::move(prev);
  }
  return g;
}

Vector softmax(std::span<const double> u) {
  if (u.empty()) throw InvalidInput("softmax: empty input");
  require_finite(u, "softmax");
  const double peak = *std::max_element(u.begin(), u.end());
  Vector p(u.size());
  double total = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    p[k] = std::exp(u[k] - peak);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

Vector softmax_backward(std::span<const double> p, std::span<const double> dp) {
  double dot = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) dot += p[k] * dp[k];
  Vector du(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) du[k] = p[k] * (dp[k] - dot);
  return du;
}

double cross_entropy(std::span<const double> probs, std::size_t target) {
  if (target >= probs.size()) throw InvalidInput("cross_entropy: target out of range");
  return -std::log(std::max(probs[target], kProbabilityFloor));
}

Vector cross_entropy_backward(std::span<const double> probs, std::size_t target) {
  if (target >= probs.size()) throw InvalidInput("cross_entropy: target out of range");
  Vector dp(probs.size(), 0.0);
  if (probs[target] >= kProbabilityFloor) dp[target] = -1.0 / probs[target];
  return dp;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state) {
  if (params.size() != grads.size()) throw InvalidInput("adam_step: parameter/gradient count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k]->same_shape(*grads[k])) throw InvalidInput("adam_step: gradient shape mismatch");
    require_finite(grads[k]->data, "adam_step gradient");
  }
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->size(), 0.0);
      state.v.emplace_back(p->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw InvalidInput("adam_step: state does not match parameters");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& w = params[k]->data;
    const auto& g = grads[k]->data;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t e = 0; e < w.size(); ++e) {
      m[e] = state.beta1 * m[e] + (1.0 - state.beta1) * g[e];
      v[e] = state.beta2 * v[e] + (1.0 - state.beta2) * g[e] * g[e];
      const double m_hat = m[e] / c1;
      const double v_hat = v[e] / c2;
      w[e] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace routeseq::nn
