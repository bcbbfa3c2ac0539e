#pragma once

#include <array>
#include <span>
#include <vector>

#include "uavirl/rng.hpp"
#include "uavirl/world.hpp"

namespace uavirl::dqn {

inline constexpr int kHidden1 = 30;
inline constexpr int kHidden2 = 30;

// Fully connected layer, weights stored row-major as [out][in].
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(int o, int i) { return weights[static_cast<std::size_t>(o * in + i)]; }
  double w(int o, int i) const { return weights[static_cast<std::size_t>(o * in + i)]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// 5 -> 30 -> 30 -> 36, ReLU on the hidden layers, linear output.
struct MlpParams {
  std::array<DenseLayer, 3> layers;

  static MlpParams zeros();
  // Glorot-uniform weights, zero biases.
  static MlpParams glorot(Rng& rng);

  std::size_t num_params() const;
  // Visits every parameter in a fixed order (layer, weights then bias).
  template <typename F>
  void for_each(F&& f) {
    for (auto& l : layers) {
      for (double& v : l.weights) f(v);
      for (double& v : l.bias) f(v);
    }
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& l : layers) {
      for (double v : l.weights) f(v);
      for (double v : l.bias) f(v);
    }
  }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

using QValues = std::array<double, kNumActions>;

QValues mlp_forward(const MlpParams& params, const FeatureVector& phi);

// (1/n) * sum (target - pred)^2
double mse_loss(std::span<const double> pred_q, std::span<const double> target_q);

struct Sample {
  FeatureVector phi{};
  int action = 0;
};

// Gradient of the batch MSE with respect to every parameter. Only the
// selected action's output carries loss per sample.
MlpParams backward(const MlpParams& params, std::span<const Sample> batch, std::span<const double> targets,
                   double* loss = nullptr);

struct AdamState {
  MlpParams m;
  MlpParams v;
  long long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const MlpParams& params);
};

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr = 0.001);

}  // namespace uavirl::dqn
