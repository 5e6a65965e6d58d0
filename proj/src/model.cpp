#include "radi/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "radi/errors.hpp"

namespace radi {
namespace {

void relu_in_place(DenseVector& v) {
  for (double& x : v) x = std::max(0.0, x);
}

DenseVector affine(const DenseLayer& layer, std::span<const double> input) {
  DenseVector out = layer.weights.multiply(input);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += layer.bias[i];
  return out;
}

std::uint64_t hash_words(std::uint64_t h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DenseVector draw_mask(std::size_t width, double rate, Rng& rng) {
  DenseVector mask(width);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

}  // namespace

ScoreModel::ScoreModel(std::vector<DenseLayer> layers, double dropout_rate)
    : layers_(std::move(layers)), dropout_rate_(dropout_rate) {
  if (layers_.empty()) throw ArgumentError("ScoreModel: at least one layer required");
  if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0)) {
    throw ArgumentError("ScoreModel: dropout rate must lie in [0, 1)");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].outputs()) {
      throw DimensionError("ScoreModel: bias length mismatch in layer " + std::to_string(l));
    }
    if (l > 0 && layers_[l].inputs() != layers_[l - 1].outputs()) {
      throw DimensionError("ScoreModel: layer " + std::to_string(l) + " does not compose");
    }
  }
}

ScoreModel ScoreModel::initialize(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                                  std::size_t num_answers, double dropout_rate, Rng& rng) {
  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), hidden_sizes.begin(), hidden_sizes.end());
  widths.push_back(num_answers);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer{DenseMatrix(widths[l + 1], widths[l]), DenseVector(widths[l + 1], 0.0)};
    const double stddev = std::sqrt(2.0 / static_cast<double>(widths[l]));
    for (double& w : layer.weights.values()) w = stddev * rng.normal();
    layers.push_back(std::move(layer));
  }
  return ScoreModel(std::move(layers), dropout_rate);
}

std::size_t ScoreModel::num_parameters() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

std::uint64_t ScoreModel::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_words(h, std::bit_cast<std::uint64_t>(dropout_rate_));
  for (const auto& layer : layers_) {
    h = hash_words(h, layer.outputs());
    h = hash_words(h, layer.inputs());
    for (double w : layer.weights.values()) h = hash_words(h, std::bit_cast<std::uint64_t>(w));
    for (double b : layer.bias) h = hash_words(h, std::bit_cast<std::uint64_t>(b));
  }
  return h;
}

ModelGradient ModelGradient::zeros_like(const ScoreModel& model) {
  ModelGradient g;
  for (const auto& layer : model.layers()) {
    g.layers.push_back({DenseMatrix(layer.outputs(), layer.inputs()),
                        DenseVector(layer.outputs(), 0.0)});
  }
  return g;
}

double ModelGradient::squared_norm() const {
  double s = 0.0;
  for (const auto& layer : layers) s += radi::squared_norm(layer.weights.values()) + radi::squared_norm(layer.bias);
  return s;
}

void ModelGradient::scale(double factor) {
  for (auto& layer : layers) {
    for (double& w : layer.weights.values()) w *= factor;
    for (double& b : layer.bias) b *= factor;
  }
}

void ModelGradient::add(const ModelGradient& other, double factor) {
  if (other.layers.size() != layers.size()) throw DimensionError("ModelGradient::add: layer count");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto dst = layers[l].weights.values();
    auto src = other.layers[l].weights.values();
    if (dst.size() != src.size()) throw DimensionError("ModelGradient::add: shape mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * src[i];
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
      layers[l].bias[i] += factor * other.layers[l].bias[i];
    }
  }
}

bool ModelGradient::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const DenseLayer& layer) {
    return radi::all_finite(layer.weights.values()) && radi::all_finite(layer.bias);
  });
}

ScoreVector forward(const ScoreModel& model, std::span<const double> features) {
  return forward_trace(model, features, nullptr).scores;
}

ForwardTrace forward_trace(const ScoreModel& model, std::span<const double> features,
                           Rng* dropout_rng) {
  if (features.size() != model.input_dim()) {
    throw DimensionError("forward: expected " + std::to_string(model.input_dim()) +
                         " features, got " + std::to_string(features.size()));
  }
  const auto& layers = model.layers();
  ForwardTrace trace;
  trace.inputs.reserve(layers.size());
  trace.inputs.emplace_back(features.begin(), features.end());
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    DenseVector h = affine(layers[l], trace.inputs.back());
    relu_in_place(h);
    trace.inputs.push_back(std::move(h));
  }
  const DenseVector& last_input = trace.inputs.back();
  if (dropout_rng != nullptr && model.dropout_rate() > 0.0) {
    trace.output_mask = draw_mask(last_input.size(), model.dropout_rate(), *dropout_rng);
    DenseVector dropped(last_input.size());
    for (std::size_t i = 0; i < dropped.size(); ++i) dropped[i] = last_input[i] * trace.output_mask[i];
    trace.scores = affine(layers.back(), dropped);
  } else {
    trace.scores = affine(layers.back(), last_input);
  }
  return trace;
}

std::vector<ScoreVector> mc_dropout_scores(const ScoreModel& model,
                                           std::span<const double> features, std::size_t passes,
                                           Rng& rng) {
  if (passes == 0) throw ArgumentError("mc_dropout_scores: at least one pass required");
  const ForwardTrace base = forward_trace(model, features, nullptr);
  const DenseLayer& head = model.layers().back();
  const DenseVector& hidden = base.inputs.back();
  std::vector<ScoreVector> out;
  out.reserve(passes);
  if (model.dropout_rate() == 0.0) {
    out.assign(passes, base.scores);
    return out;
  }
  DenseVector dropped(hidden.size());
  for (std::size_t t = 0; t < passes; ++t) {
    const DenseVector mask = draw_mask(hidden.size(), model.dropout_rate(), rng);
    for (std::size_t i = 0; i < hidden.size(); ++i) dropped[i] = hidden[i] * mask[i];
    out.push_back(affine(head, dropped));
  }
  return out;
}

void accumulate_backward(const ScoreModel& model, const ForwardTrace& trace,
                         std::span<const double> upstream, ModelGradient& grad) {
  const auto& layers = model.layers();
  if (upstream.size() != model.num_answers()) throw DimensionError("backward: upstream length mismatch");
  if (grad.layers.size() != layers.size()) throw DimensionError("backward: gradient shape mismatch");

  DenseVector delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    DenseLayer& g = grad.layers[l];
    const bool is_head = (l + 1 == layers.size());
    const DenseVector& raw_input = trace.inputs[l];
    const bool masked = is_head && !trace.output_mask.empty();

    for (std::size_t r = 0; r < layer.outputs(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      g.bias[r] += d;
      auto grow = g.weights.row(r);
      if (masked) {
        for (std::size_t c = 0; c < grow.size(); ++c) grow[c] += d * raw_input[c] * trace.output_mask[c];
      } else {
        for (std::size_t c = 0; c < grow.size(); ++c) grow[c] += d * raw_input[c];
      }
    }
    if (l == 0) break;
    DenseVector next = layer.weights.multiply_transposed(delta);
    if (masked) {
      for (std::size_t c = 0; c < next.size(); ++c) next[c] *= trace.output_mask[c];
    }
    // inputs[l] is a rectified activation for l >= 1
    for (std::size_t c = 0; c < next.size(); ++c) {
      if (raw_input[c] <= 0.0) next[c] = 0.0;
    }
    delta = std::move(next);
  }
}

ModelGradient backward(const ScoreModel& model, std::span<const double> features,
                       std::span<const double> upstream) {
  if (upstream.size() != model.num_answers()) throw DimensionError("backward: upstream length mismatch");
  ModelGradient grad = ModelGradient::zeros_like(model);
  accumulate_backward(model, forward_trace(model, features, nullptr), upstream, grad);
  return grad;
}

double clip_gradient(ModelGradient& grad, double clip_norm) {
  if (!grad.all_finite()) throw TrainingError("non-finite gradient");
  const double norm = std::sqrt(grad.squared_norm());
  if (std::isfinite(clip_norm) && norm > clip_norm && norm > 0.0) grad.scale(clip_norm / norm);
  return norm;
}

ScoreModel sgd_step(const ScoreModel& model, const ModelGradient& grad, double lr,
                    double clip_norm) {
  if (!(lr > 0.0)) throw ArgumentError("sgd_step: learning rate must be positive");
  ModelGradient clipped = grad;
  clip_gradient(clipped, clip_norm);
  ScoreModel next = model;
  auto& layers = next.mutable_layers();
  if (clipped.layers.size() != layers.size()) throw DimensionError("sgd_step: shape mismatch");
  ModelGradient as_params{layers};
  as_params.add(clipped, -lr);
  layers = std::move(as_params.layers);
  return next;
}

void SgdOptimizer::step(ScoreModel& model, ModelGradient grad, double lr, double clip_norm) {
  if (!(lr > 0.0)) throw ArgumentError("SgdOptimizer: learning rate must be positive");
  clip_gradient(grad, clip_norm);
  if (momentum_ > 0.0) {
    if (velocity_.layers.empty()) {
      velocity_ = ModelGradient::zeros_like(model);
    }
    velocity_.scale(momentum_);
    velocity_.add(grad);
    grad = velocity_;
  }
  ModelGradient params{std::move(model.mutable_layers())};
  params.add(grad, -lr);
  model.mutable_layers() = std::move(params.layers);
}

}  // namespace radi
