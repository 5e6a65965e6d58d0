#ifndef RADI_MODEL_HPP_
#define RADI_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "radi/numerics.hpp"
#include "radi/rng.hpp"

namespace radi {

/// Raw (non-normalised) per-answer scores for one instance.
using ScoreVector = DenseVector;

/// One affine layer; `weights` is (outputs x inputs).
struct DenseLayer {
  DenseMatrix weights;
  DenseVector bias;

  std::size_t inputs() const noexcept { return weights.cols(); }
  std::size_t outputs() const noexcept { return weights.rows(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward scorer: rectified hidden layers followed by a linear output
/// layer with one unit per answer. Dropout, when active, is applied to the
/// input of the output layer only.
class ScoreModel {
 public:
  ScoreModel(std::vector<DenseLayer> layers, double dropout_rate);

  /// He-normal weights, zero biases.
  static ScoreModel initialize(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                               std::size_t num_answers, double dropout_rate, Rng& rng);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& mutable_layers() noexcept { return layers_; }
  double dropout_rate() const noexcept { return dropout_rate_; }
  std::size_t input_dim() const noexcept { return layers_.front().inputs(); }
  std::size_t num_answers() const noexcept { return layers_.back().outputs(); }
  std::size_t num_parameters() const noexcept;

  /// FNV-1a over shapes, dropout rate and the exact parameter bits.
  std::uint64_t checksum() const;

  friend bool operator==(const ScoreModel&, const ScoreModel&) = default;

 private:
  std::vector<DenseLayer> layers_;
  double dropout_rate_;
};

/// Gradient with the same layer shapes as the model it came from.
struct ModelGradient {
  std::vector<DenseLayer> layers;

  static ModelGradient zeros_like(const ScoreModel& model);
  double squared_norm() const;
  void scale(double factor);
  /// this += factor * other
  void add(const ModelGradient& other, double factor = 1.0);
  bool all_finite() const;
};

/// Activations recorded by a forward pass, enough to run backward.
struct ForwardTrace {
  /// inputs[l] is the input of layer l; inputs[0] is the features.
  std::vector<DenseVector> inputs;
  /// Inverted-dropout multipliers on the output layer input; empty if inactive.
  DenseVector output_mask;
  ScoreVector scores;
};

/// Deterministic scores (dropout disabled).
ScoreVector forward(const ScoreModel& model, std::span<const double> features);

/// Forward pass that keeps activations. With `dropout_rng` non-null and a
/// positive dropout rate, one inverted-dropout mask is drawn for the output
/// layer input.
ForwardTrace forward_trace(const ScoreModel& model, std::span<const double> features,
                           Rng* dropout_rng = nullptr);

/// T stochastic score vectors. Hidden activations are computed once; only the
/// output layer is re-run, each time under a fresh mask on its input.
std::vector<ScoreVector> mc_dropout_scores(const ScoreModel& model,
                                           std::span<const double> features, std::size_t passes,
                                           Rng& rng);

/// Gradient of dot(scores, upstream) w.r.t. every parameter (dropout off).
ModelGradient backward(const ScoreModel& model, std::span<const double> features,
                       std::span<const double> upstream);

/// Adds the gradient of dot(trace.scores, upstream) into `grad`.
void accumulate_backward(const ScoreModel& model, const ForwardTrace& trace,
                         std::span<const double> upstream, ModelGradient& grad);

/// Clips `grad` to a global L2 norm of `clip_norm` in place and returns the
/// norm before clipping. Throws TrainingError if the gradient is non-finite.
double clip_gradient(ModelGradient& grad, double clip_norm);

/// model - lr * clip(grad).
ScoreModel sgd_step(const ScoreModel& model, const ModelGradient& grad, double lr,
                    double clip_norm);

/// SGD with heavy-ball momentum; velocity lives with the optimiser.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(double momentum = 0.0) : momentum_(momentum) {}

  void step(ScoreModel& model, ModelGradient grad, double lr, double clip_norm);

 private:
  double momentum_;
  ModelGradient velocity_;
};

}  // namespace radi

#endif  // RADI_MODEL_HPP_
