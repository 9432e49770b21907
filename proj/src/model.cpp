// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "softsed/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace softsed {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ForwardCache {
  // activations[0] is the input; activations[i+1] is layer i's output after
  // its nonlinearity. preacts[i] is layer i's output before it.
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> preacts;
};

std::vector<double> layer_forward(const Layer& layer,
                                  std::span<const double> x) {
  std::vector<double> z(static_cast<std::size_t>(layer.out));
  for (int o = 0; o < layer.out; ++o) {
    double acc = layer.bias[static_cast<std::size_t>(o)];
    const double* w =
        layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
    for (int i = 0; i < layer.in; ++i) acc += w[i] * x[static_cast<std::size_t>(i)];
    z[static_cast<std::size_t>(o)] = acc;
  }
  return z;
}

ForwardCache forward_cached(const ModelParams& params,
                            std::span<const double> x) {
  ForwardCache cache;
  cache.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto z = layer_forward(params.layers[l], cache.activations.back());
    cache.preacts.push_back(z);
    bool last = l + 1 == params.layers.size();
    if (last) {
      if (params.head == Head::kSigmoid)
        for (auto& v : z) v = sigmoid(v);
      // linear head: identity
    } else {
      for (auto& v : z) v = std::max(0.0, v);
    }
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

ModelParams zero_like(const ModelParams& params) {
  ModelParams g = params;
  for (auto& layer : g.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return g;
}

// Backprop for one sample; accumulates into `grads` and returns the sample's
// summed (not yet batch-averaged) loss contribution.
double backprop_sample(const ModelParams& params, std::span<const double> x,
                       std::span<const double> t, LossKind kind,
                       double inv_denominator, ModelParams& grads) {
  ForwardCache cache = forward_cached(params, x);
  const auto& y = cache.activations.back();
  const std::size_t n_out = y.size();

  double sample_loss = 0.0;
  // dL/dz for the output layer, loss and head fused.
  std::vector<double> delta(n_out);
  for (std::size_t c = 0; c < n_out; ++c) {
    double target = t[c];
    if (kind == LossKind::kBce) {
      double yc = std::clamp(y[c], kBceClamp, 1.0 - kBceClamp);
      sample_loss -=
          target * std::log(yc) + (1.0 - target) * std::log(1.0 - yc);
      double dy = y[c] > kBceClamp && y[c] < 1.0 - kBceClamp
                      ? (-target / yc + (1.0 - target) / (1.0 - yc))
                      : 0.0;
      double dz = params.head == Head::kSigmoid ? dy * y[c] * (1.0 - y[c])
                                                : dy;
      delta[c] = dz * inv_denominator;
    } else {
      double d = y[c] - target;
      sample_loss += d * d;
      double dy = 2.0 * d;
      double dz = params.head == Head::kSigmoid ? dy * y[c] * (1.0 - y[c])
                                                : dy;
      delta[c] = dz * inv_denominator;
    }
  }

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const Layer& layer = params.layers[l];
    Layer& grad = grads.layers[l];
    const auto& input = cache.activations[l];
    for (int o = 0; o < layer.out; ++o) {
      double d = delta[static_cast<std::size_t>(o)];
      grad.bias[static_cast<std::size_t>(o)] += d;
      double* gw =
          grad.weights.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i)
        gw[i] += d * input[static_cast<std::size_t>(i)];
    }
    if (l == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
    for (int i = 0; i < layer.in; ++i) {
      double acc = 0.0;
      for (int o = 0; o < layer.out; ++o)
        acc += layer.weights[static_cast<std::size_t>(o) * layer.in +
                             static_cast<std::size_t>(i)] *
               delta[static_cast<std::size_t>(o)];
      // ReLU gate of the upstream layer.
      prev[static_cast<std::size_t>(i)] =
          cache.preacts[l - 1][static_cast<std::size_t>(i)] > 0.0 ? acc : 0.0;
    }
    delta = std::move(prev);
  }
  return sample_loss;
}

struct BatchResult {
  ModelParams grads;
  double mean_loss = 0.0;
};

BatchResult batch_gradients(const ModelParams& params,
                            const std::vector<std::vector<double>>& batch_x,
                            const std::vector<std::vector<double>>& batch_t,
                            LossKind kind) {
  if (batch_x.empty() || batch_x.size() != batch_t.size())
    throw DataError("batch features and targets must align and be non-empty");
  BatchResult result;
  result.grads = zero_like(params);
  const double denom = static_cast<double>(batch_x.size()) *
                       static_cast<double>(params.output_dim());
  double total = 0.0;
  for (std::size_t s = 0; s < batch_x.size(); ++s)
    total += backprop_sample(params, batch_x[s], batch_t[s], kind,
                             1.0 / denom, result.grads);
  result.mean_loss = total / denom;
  return result;
}

struct AdamState {
  ModelParams m;
  ModelParams v;
  long step = 0;
};

void adam_update(ModelParams& params, const ModelParams& grads,
                 const TrainConfig& cfg, AdamState& state) {
  ++state.step;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        double mh = m[i] / bc1;
        double vh = v[i] / bc2;
        p[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_epsilon);
      }
    };
    update(params.layers[l].weights, grads.layers[l].weights,
           state.m.layers[l].weights, state.v.layers[l].weights);
    update(params.layers[l].bias, grads.layers[l].bias,
           state.m.layers[l].bias, state.v.layers[l].bias);
  }
}

}  // namespace

Head head_of(TrainingSetup setup) {
  return setup == TrainingSetup::kSoftMseLinear ? Head::kLinear
                                                : Head::kSigmoid;
}

LossKind loss_of(TrainingSetup setup) {
  return setup == TrainingSetup::kSoftMseLinear ? LossKind::kMse
                                                : LossKind::kBce;
}

std::string setup_name(TrainingSetup setup) {
  switch (setup) {
    case TrainingSetup::kHardBceSigmoid: return "H_BCE_sig";
    case TrainingSetup::kSoftBceSigmoid: return "S_BCE_sig";
    case TrainingSetup::kSoftMseLinear: return "S_MSE_lin";
  }
  throw DataError("bad training setup");
}

TrainingSetup setup_from_name(const std::string& name) {
  if (name == "H_BCE_sig") return TrainingSetup::kHardBceSigmoid;
  if (name == "S_BCE_sig") return TrainingSetup::kSoftBceSigmoid;
  if (name == "S_MSE_lin") return TrainingSetup::kSoftMseLinear;
  throw DataError("unknown training setup '" + name + "'");
}

ModelParams init_params(int input_dim, int hidden_dim, int n_classes,
                        Head head, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || n_classes < 1)
    throw DataError("model dimensions must be positive");
  Rng rng(seed);
  ModelParams params;
  params.head = head;
  std::vector<std::pair<int, int>> dims = {
      {input_dim, hidden_dim}, {hidden_dim, hidden_dim},
      {hidden_dim, n_classes}};
  for (auto [in, out] : dims) {
    Layer layer;
    layer.in = in;
    layer.out = out;
    double s = std::sqrt(6.0 / static_cast<double>(in + out));
    layer.weights.resize(static_cast<std::size_t>(in) * out);
    for (auto& w : layer.weights) w = rng.uniform(-s, s);
    layer.bias.assign(static_cast<std::size_t>(out), 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

std::vector<double> forward(const ModelParams& params,
                            std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(params.input_dim()))
    throw DataError("feature dimension mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("non-finite model input");
  return forward_cached(params, x).activations.back();
}

double loss(std::span<const double> outputs, std::span<const double> targets,
            LossKind kind) {
  if (outputs.size() != targets.size() || outputs.empty())
    throw DataError("outputs and targets must align and be non-empty");
  double total = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (kind == LossKind::kBce) {
      double y = std::clamp(outputs[i], kBceClamp, 1.0 - kBceClamp);
      total -= targets[i] * std::log(y) +
               (1.0 - targets[i]) * std::log(1.0 - y);
    } else {
      double d = outputs[i] - targets[i];
      total += d * d;
    }
  }
  return total / static_cast<double>(outputs.size());
}

ModelParams gradients(const ModelParams& params,
                      const std::vector<std::vector<double>>& batch_x,
                      const std::vector<std::vector<double>>& batch_t,
                      LossKind kind) {
  return batch_gradients(params, batch_x, batch_t, kind).grads;
}

TrainRun train(const std::vector<std::vector<double>>& features,
               const std::vector<std::vector<double>>& targets,
               TrainingSetup setup, const TrainConfig& config) {
  if (features.empty() || features.size() != targets.size())
    throw DataError("training features and targets must align");
  const int input_dim = static_cast<int>(features.front().size());
  const int n_classes = static_cast<int>(targets.front().size());

  TrainRun run;
  run.seed = config.seed;
  run.config = config;
  run.params = init_params(input_dim, config.hidden_dim, n_classes,
                           head_of(setup), derive_seed(config.seed, 0));

  AdamState adam;
  adam.m = zero_like(run.params);
  adam.v = zero_like(run.params);

  Rng shuffle_rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const LossKind kind = loss_of(setup);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(config.batch_size)) {
      std::size_t end = std::min(
          off + static_cast<std::size_t>(config.batch_size), order.size());
      std::vector<std::vector<double>> bx, bt;
      bx.reserve(end - off);
      bt.reserve(end - off);
      for (std::size_t i = off; i < end; ++i) {
        bx.push_back(features[order[i]]);
        bt.push_back(targets[order[i]]);
      }
      BatchResult batch = batch_gradients(run.params, bx, bt, kind);
      if (!std::isfinite(batch.mean_loss))
        throw NumericError("training loss went non-finite at epoch " +
                           std::to_string(epoch));
      adam_update(run.params, batch.grads, config, adam);
      epoch_loss += batch.mean_loss;
      ++n_batches;
    }
    run.loss_history.push_back(epoch_loss /
                               static_cast<double>(n_batches));
  }
  return run;
}

std::vector<std::vector<double>> predict(const ModelParams& params,
                                         const SegmentFeatures& features) {
  std::vector<std::vector<double>> scores;
  scores.reserve(static_cast<std::size_t>(features.n_segments));
  for (long s = 0; s < features.n_segments; ++s)
    scores.push_back(forward(params, features.segment(s)));
  return scores;
}

void save_model(std::ostream& out, const ModelParams& params) {
  auto write_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write("SSMP", 4);
  write_u32(static_cast<std::uint32_t>(params.layers.size()));
  write_u32(params.head == Head::kSigmoid ? 0u : 1u);
  for (const auto& layer : params.layers) {
    write_u32(static_cast<std::uint32_t>(layer.in));
    write_u32(static_cast<std::uint32_t>(layer.out));
  }
  for (const auto& layer : params.layers) {
    out.write(reinterpret_cast<const char*>(layer.weights.data()),
              static_cast<std::streamsize>(layer.weights.size() *
                                           sizeof(double)));
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(layer.bias.size() *
                                           sizeof(double)));
  }
}

ModelParams load_model(std::istream& in) {
  auto read_u32 = [&]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ParseError("truncated model file");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SSMP", 4) != 0)
    throw ParseError("not a model file (bad magic)");
  ModelParams params;
  std::uint32_t n_layers = read_u32();
  params.head = read_u32() == 0 ? Head::kSigmoid : Head::kLinear;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    Layer layer;
    layer.in = static_cast<int>(read_u32());
    layer.out = static_cast<int>(read_u32());
    layer.weights.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.bias.resize(static_cast<std::size_t>(layer.out));
    params.layers.push_back(std::move(layer));
  }
  for (auto& layer : params.layers) {
    in.read(reinterpret_cast<char*>(layer.weights.data()),
            static_cast<std::streamsize>(layer.weights.size() *
                                         sizeof(double)));
    in.read(reinterpret_cast<char*>(layer.bias.data()),
            static_cast<std::streamsize>(layer.bias.size() *
                                         sizeof(double)));
    if (!in) throw ParseError("truncated model payload");
  }
  return params;
}

}  // namespace softsed
