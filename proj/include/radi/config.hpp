#ifndef RADI_CONFIG_HPP_
#define RADI_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radi/listwise.hpp"
#include "radi/synthdata.hpp"

namespace radi {

enum class Scheme { kClsOnly, kRadiP, kRadiL, kLabelSmoothing, kPseudoLabeling, kVanillaKd };
enum class StudentInit { kScratch, kFromTeacher, kIndividual };
/// How pairwise margins are weighted: Sinkhorn plan over uncertainties, one
/// shared margin, random weights, or inverse uncertainty.
enum class MarginMode { kOt, kUniform, kRandom, kUncertainty };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);
std::string to_string(StudentInit init);
StudentInit student_init_from_string(const std::string& name);
std::string to_string(MarginMode mode);
MarginMode margin_mode_from_string(const std::string& name);

struct TrainSettings {
  std::size_t epochs = 30;
  double lr = 0.2;
  double clip_norm = 0.1;
};

struct PairwiseSettings {
  double base_margin = 1.0;
  /// 0 selects lambda_scale x the median off-diagonal uncertainty per instance.
  double lambda = 0.0;
  double lambda_scale = 1.0;
  double tolerance = 1e-8;
  std::size_t max_iterations = 10000;
  std::size_t mc_passes = 10;
  std::size_t truncate_k = 50;
  bool rescale = true;
  MarginMode mode = MarginMode::kOt;
};

struct ListwiseSettings {
  SamplingPlan plan;
  std::string loss = "listmle";
  double beta = 1.0;
  double sigma = 1.0;
  double mu = 5.0;
};

struct BaselineSettings {
  double smoothing_sigma = 0.1;
  std::size_t pseudo_k = 3;
  double kd_temperature = 1.0;
};

/// Everything needed to replay a two-stage run. Serialised as one flat JSON
/// object with snake_case keys; CLI flags use the kebab-case spelling of the
/// same keys.
struct ExperimentConfig {
  TaskSpec task;
  std::vector<std::size_t> hidden_sizes{64, 64};
  double dropout_rate = 0.1;
  TrainSettings teacher;
  TrainSettings student;
  std::size_t student_pretrain_epochs = 30;
  std::size_t batch_size = 32;
  double momentum = 0.9;
  double warmup_fraction = 0.1;
  bool student_select_best = false;
  Scheme scheme = Scheme::kRadiL;
  std::optional<double> alpha_rank;
  PairwiseSettings pairwise;
  ListwiseSettings listwise;
  BaselineSettings baseline;
  StudentInit student_init = StudentInit::kIndividual;
  std::uint64_t seed = 0;
  std::size_t eval_k = 5;
  bool graded_relevance = false;

  /// alpha_rank if set, else the scheme default (100 pairwise, 10 listwise,
  /// 1 for vanilla KD, 0 otherwise).
  double effective_alpha() const;
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Starts from `base` and overrides the keys present in `j`. Unknown keys
/// raise ArgumentError.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});
/// Every accepted key, in serialisation order.
std::vector<std::string> config_keys();
/// Applies one `key=value` override where value is given as text.
void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value);

/// FNV-1a of the canonical JSON dump.
std::uint64_t config_checksum(const ExperimentConfig& config);
std::string hex64(std::uint64_t value);

}  // namespace radi

#endif  // RADI_CONFIG_HPP_
