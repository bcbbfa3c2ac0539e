#include "uavirl/mlp.hpp"

#include <cmath>

#include "uavirl/errors.hpp"

namespace uavirl::dqn {

namespace {

DenseLayer make_layer(int in, int out) {
  DenseLayer l;
  l.in = in;
  l.out = out;
  l.weights.assign(static_cast<std::size_t>(in * out), 0.0);
  l.bias.assign(static_cast<std::size_t>(out), 0.0);
  return l;
}

// out = W x + b
template <std::size_t N>
void affine(const DenseLayer& l, const double* x, std::array<double, N>& out) {
  for (int o = 0; o < l.out; ++o) {
    const double* row = &l.weights[static_cast<std::size_t>(o * l.in)];
    double s = l.bias[static_cast<std::size_t>(o)];
    for (int i = 0; i < l.in; ++i) s += row[i] * x[i];
    out[static_cast<std::size_t>(o)] = s;
  }
}

struct Activations {
  std::array<double, kHidden1> h1{};  // post-ReLU
  std::array<double, kHidden2> h2{};
  QValues q{};
};

Activations forward_cached(const MlpParams& p, const FeatureVector& phi) {
  Activations a;
  affine(p.layers[0], phi.data(), a.h1);
  for (double& v : a.h1) v = v > 0.0 ? v : 0.0;
  affine(p.layers[1], a.h1.data(), a.h2);
  for (double& v : a.h2) v = v > 0.0 ? v : 0.0;
  affine(p.layers[2], a.h2.data(), a.q);
  return a;
}

}  // namespace

MlpParams MlpParams::zeros() {
  MlpParams p;
  p.layers[0] = make_layer(kNumFeatures, kHidden1);
  p.layers[1] = make_layer(kHidden1, kHidden2);
  p.layers[2] = make_layer(kHidden2, kNumActions);
  return p;
}

MlpParams MlpParams::glorot(Rng& rng) {
  MlpParams p = zeros();
  for (auto& l : p.layers) {
    const double limit = std::sqrt(6.0 / (l.in + l.out));
    for (double& v : l.weights) v = rng.uniform(-limit, limit);
  }
  return p;
}

std::size_t MlpParams::num_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

QValues mlp_forward(const MlpParams& params, const FeatureVector& phi) { return forward_cached(params, phi).q; }

double mse_loss(std::span<const double> pred_q, std::span<const double> target_q) {
  if (pred_q.empty() || pred_q.size() != target_q.size()) throw ContractError("mse_loss: size mismatch or empty batch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred_q.size(); ++i) {
    const double d = target_q[i] - pred_q[i];
    s += d * d;
  }
  return s / static_cast<double>(pred_q.size());
}

MlpParams backward(const MlpParams& params, std::span<const Sample> batch, std::span<const double> targets,
                   double* loss) {
  if (batch.empty() || batch.size() != targets.size()) throw ContractError("backward: size mismatch or empty batch");
  MlpParams g = MlpParams::zeros();
  const double n = static_cast<double>(batch.size());
  const DenseLayer& l2 = params.layers[1];
  const DenseLayer& l3 = params.layers[2];
  double total = 0.0;

  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Activations a = forward_cached(params, batch[s].phi);
    const int act = batch[s].action;
    const double residual = a.q[static_cast<std::size_t>(act)] - targets[s];
    total += residual * residual;
    const double dq = 2.0 * residual / n;

    // Output layer: only the selected action's row receives gradient.
    std::array<double, kHidden2> dh2{};
    for (int i = 0; i < kHidden2; ++i) {
      g.layers[2].w(act, i) += dq * a.h2[static_cast<std::size_t>(i)];
      dh2[static_cast<std::size_t>(i)] = a.h2[static_cast<std::size_t>(i)] > 0.0 ? dq * l3.w(act, i) : 0.0;
    }
    g.layers[2].bias[static_cast<std::size_t>(act)] += dq;

    std::array<double, kHidden1> dh1{};
    for (int o = 0; o < kHidden2; ++o) {
      const double d = dh2[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      for (int i = 0; i < kHidden1; ++i) {
        g.layers[1].w(o, i) += d * a.h1[static_cast<std::size_t>(i)];
        dh1[static_cast<std::size_t>(i)] += d * l2.w(o, i);
      }
      g.layers[1].bias[static_cast<std::size_t>(o)] += d;
    }
    for (int o = 0; o < kHidden1; ++o) {
      const double d = a.h1[static_cast<std::size_t>(o)] > 0.0 ? dh1[static_cast<std::size_t>(o)] : 0.0;
      if (d == 0.0) continue;
      for (int i = 0; i < kNumFeatures; ++i) g.layers[0].w(o, i) += d * batch[s].phi[static_cast<std::size_t>(i)];
      g.layers[0].bias[static_cast<std::size_t>(o)] += d;
    }
  }
  if (loss) *loss = total / n;
  return g;
}

AdamState AdamState::for_params(const MlpParams& params) {
  AdamState s;
  s.m = params;
  s.v = params;
  s.m.for_each([](double& x) { x = 0.0; });
  s.v.for_each([](double& x) { x = 0.0; });
  return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
      }
    };
    update(params.layers[li].weights, grads.layers[li].weights, state.m.layers[li].weights,
           state.v.layers[li].weights);
    update(params.layers[li].bias, grads.layers[li].bias, state.m.layers[li].bias, state.v.layers[li].bias);
  }
}

}  // namespace uavirl::dqn
