// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mtdyn/types.hpp"

namespace mtdyn {

// Fully connected network with tanh hidden layers and a linear output, plus
// per-component z-score normalization baked into the weights file. The
// canonical use has 8 inputs (origin, insertion, alpha, radius in surface
// coordinates) and 3 outputs (mass-point position in surface coordinates).
struct MLPWeights {
  std::vector<int> layer_sizes;        // e.g. {8, 64, 64, 64, 64, 3}
  std::vector<MatX> weights;           // weights[k]: layer_sizes[k+1] x layer_sizes[k]
  std::vector<VecX> biases;
  VecX input_mean, input_scale;        // size = layer_sizes.front()
  VecX output_mean, output_scale;      // size = layer_sizes.back()
  VecX input_min, input_max;           // training-range metadata (may be empty)

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  void validate() const;
};

VecX mlp_forward(const MLPWeights& w, const VecX& input);
// Column i holds one input sample; returns outputs column-wise.
MatX mlp_forward_batch(const MLPWeights& w, const MatX& inputs);

// Exact reverse-mode d(output)/d(input), denormalization included.
MatX mlp_input_jacobian(const MLPWeights& w, const VecX& input);
std::vector<MatX> mlp_input_jacobian_batch(const MLPWeights& w, const MatX& inputs);

struct TrainConfig {
  std::vector<int> hidden = {64, 64, 64, 64};
  int steps = 50000;
  int batch = 128;
  double learning_rate = 1e-4;  // Adam, beta1 0.9, beta2 0.999, eps 1e-8
  double holdout_fraction = 0.1;
  uint64_t seed = 1;
  int log_every = 1000;
};

struct TrainReport {
  MLPWeights weights;
  std::vector<double> loss_history;    // normalized-space MSE per logged step
  double final_train_loss = 0.0;
  double holdout_rmse = 0.0;           // denormalized, per output vector
};

// inputs: d_in x N, targets: d_out x N. Deterministic given the seed.
TrainReport mlp_train(const MatX& inputs, const MatX& targets, const TrainConfig& cfg);

void save_mlp_weights(const MLPWeights& w, const std::string& path);
MLPWeights load_mlp_weights(const std::string& path);

}  // namespace mtdyn
