#ifndef RADI_HARNESS_HPP_
#define RADI_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radi/config.hpp"
#include "radi/distill_core.hpp"
#include "radi/metrics.hpp"
#include "radi/pairwise.hpp"
#include "radi/synthdata.hpp"

namespace radi {

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  EvalResult val;
};

/// One optimisation stage: per-epoch logs and the epoch whose weights were kept
/// (0 means the initial weights).
struct StageRecord {
  std::vector<EpochLog> epochs;
  std::size_t selected_epoch = 0;
};

struct TrainedModel {
  ScoreModel model;
  StageRecord record;
};

/// Frozen teacher outputs for every training instance.
struct TeacherSnapshot {
  std::uint64_t teacher_checksum = 0;
  std::vector<RankedList> rankings;
  /// Filled for radi-p only; aligned with `rankings`.
  std::vector<SoftMarginSet> margins;
  std::vector<std::uint64_t> sinkhorn_failures;
  bool loaded_from_cache = false;

  /// FNV-1a over every ranking and margin bit.
  std::uint64_t checksum() const;
};

struct RunRecord {
  std::string config_checksum;
  std::string scheme;
  StageRecord teacher;
  EvalResult teacher_test;
  StageRecord student;
  EvalResult test;
  double hidden_positive_recovery = 0.0;
  std::size_t sinkhorn_failures = 0;
  std::string snapshot_checksum;
  double wall_clock_seconds = 0.0;
  std::string version;
};

nlohmann::json to_json(const EvalResult& result);
nlohmann::json to_json(const StageRecord& record);
nlohmann::json to_json(const RunRecord& record, bool include_wall_clock = true);
/// "epoch,split,acc1,hit5,ndcg5": student validation rows then the test row.
std::string metrics_csv(const RunRecord& record);

DatasetSplits make_datasets(const ExperimentConfig& config);

/// Minimises the classification loss on revealed labels and keeps the epoch
/// with the best validation Acc@1. `training_seed` drives initialisation,
/// shuffling and dropout; the data are untouched by it.
TrainedModel train_teacher(const ExperimentConfig& config, const DatasetSplits& data,
                           std::uint64_t training_seed, std::size_t epochs);
TrainedModel train_teacher(const ExperimentConfig& config, const DatasetSplits& data);

/// Rankings for all training instances; for radi-p also MC-dropout
/// uncertainties turned into soft margins. With `cache_path`, margins are read
/// from a matching cache file or written to it.
TeacherSnapshot snapshot_teacher(const ScoreModel& teacher, const Dataset& train, const ExperimentConfig& config,
                                 const std::optional<std::filesystem::path>& cache_path = std::nullopt);

/// Checksum of the settings that determine cached margins.
std::uint64_t margin_settings_checksum(const ExperimentConfig& config);

/// Trains the student from `init` with cls + alpha * rank (or the baseline's
/// substitute objective).
TrainedModel distill_student(const TeacherSnapshot& snapshot, const ScoreModel& init, const DatasetSplits& data,
                             const ExperimentConfig& config);

/// Student starting weights per config.student_init.
ScoreModel initial_student(const ExperimentConfig& config, const ScoreModel& teacher, const DatasetSplits& data);

/// Memoises data, teachers, pretrained students and snapshots across runs
/// that share the settings they depend on.
class RunCache {
 public:
  const DatasetSplits& data(const ExperimentConfig& config);
  const TrainedModel& teacher(const ExperimentConfig& config);
  const ScoreModel& student_init(const ExperimentConfig& config);
  const TeacherSnapshot& snapshot(const ExperimentConfig& config,
                                  const std::optional<std::filesystem::path>& cache_path = std::nullopt);

 private:
  std::map<std::uint64_t, std::unique_ptr<DatasetSplits>> data_;
  std::map<std::uint64_t, std::unique_ptr<TrainedModel>> teachers_;
  std::map<std::uint64_t, std::unique_ptr<ScoreModel>> inits_;
  std::map<std::uint64_t, std::unique_ptr<TeacherSnapshot>> snapshots_;
};

/// teacher -> snapshot -> student -> evaluation. With `out_dir`, writes
/// config.json, run.json, metrics.csv, teacher.json and student.json.
RunRecord run_experiment(const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                         RunCache* cache = nullptr);

struct SweepCell {
  std::string value;
  std::optional<RunRecord> record;
  std::string error;
};

/// One run per value of `axis`; failures are recorded per cell. Teachers and
/// snapshots are shared between cells whenever the axis does not touch them.
std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                 const std::vector<std::string>& values,
                                 const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace radi

#endif  // RADI_HARNESS_HPP_
