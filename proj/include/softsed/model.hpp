// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_MODEL_HPP
#define SOFTSED_MODEL_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "softsed/common.hpp"
#include "softsed/features.hpp"

namespace softsed {

enum class Head { kSigmoid, kLinear };
enum class LossKind { kBce, kMse };

// Label source x loss x output head, as trained and compared in the
// experiments.
enum class TrainingSetup { kHardBceSigmoid, kSoftBceSigmoid, kSoftMseLinear };

Head head_of(TrainingSetup setup);
LossKind loss_of(TrainingSetup setup);
std::string setup_name(TrainingSetup setup);
TrainingSetup setup_from_name(const std::string& name);

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // row-major [out][in]
  std::vector<double> bias;     // [out]
};

// input -> hidden(ReLU) -> hidden(ReLU) -> output(head).
struct ModelParams {
  std::vector<Layer> layers;
  Head head = Head::kSigmoid;

  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }
};

// Glorot-uniform init: Uniform(-s, s), s = sqrt(6 / (fan_in + fan_out)).
// Deterministic given the seed.
ModelParams init_params(int input_dim, int hidden_dim, int n_classes,
                        Head head, std::uint64_t seed);

// Forward pass for one feature vector. Throws NumericError on non-finite
// input.
std::vector<double> forward(const ModelParams& params,
                            std::span<const double> x);

// Mean over batch and classes. BCE clamps outputs to [1e-7, 1 - 1e-7].
double loss(std::span<const double> outputs, std::span<const double> targets,
            LossKind kind);

inline constexpr double kBceClamp = 1e-7;

// Exact analytic gradient of the mean loss over the batch; same shape as the
// parameters.
ModelParams gradients(const ModelParams& params,
                      const std::vector<std::vector<double>>& batch_x,
                      const std::vector<std::vector<double>>& batch_t,
                      LossKind kind);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  int hidden_dim = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
};

struct TrainRun {
  ModelParams params;
  std::vector<double> loss_history;  // mean training loss per epoch
  std::uint64_t seed = 0;
  TrainConfig config;
};

// Mini-batch Adam with a fixed shuffle order per epoch. Aborts with
// NumericError if the loss goes non-finite.
TrainRun train(const std::vector<std::vector<double>>& features,
               const std::vector<std::vector<double>>& targets,
               TrainingSetup setup, const TrainConfig& config);

// Per-segment per-class scores. Linear-head scores are returned raw; clamp
// to [0,1] only when exporting for KLD.
std::vector<std::vector<double>> predict(const ModelParams& params,
                                         const SegmentFeatures& features);

// Flat binary: magic "SSMP", u32 layer count, u32 head tag, per layer
// u32 in/out dims, then float64 weights and biases in declaration order.
void save_model(std::ostream& out, const ModelParams& params);
ModelParams load_model(std::istream& in);

}  // namespace softsed

#endif  // SOFTSED_MODEL_HPP
