#ifndef RADI_IO_HPP_
#define RADI_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radi/model.hpp"
#include "radi/pairwise.hpp"
#include "radi/synthdata.hpp"

namespace radi {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr std::uint32_t kSnapshotFormatVersion = 1;

nlohmann::json model_to_json(const ScoreModel& model);
ScoreModel model_from_json(const nlohmann::json& j);
void save_model(const ScoreModel& model, const std::filesystem::path& path);
ScoreModel load_model(const std::filesystem::path& path);

nlohmann::json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const nlohmann::json& j);

/// Line-delimited JSON: a header record {"format", "version", "split", "task"}
/// followed by one record per instance.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Cached pairwise margins for the training instances of one teacher.
struct MarginCache {
  std::uint64_t teacher_checksum = 0;
  std::uint64_t settings_checksum = 0;
  std::vector<std::uint64_t> instance_ids;
  std::vector<SoftMarginSet> margins;
  /// Instances whose Sinkhorn solve failed and fell back to uniform weights.
  std::vector<std::uint64_t> failed_ids;

  friend bool operator==(const MarginCache&, const MarginCache&) = default;
};

/// Little-endian binary: "RADIMRGN", u32 version, u64 teacher checksum,
/// u64 settings checksum, u64 count, u64 failure count, failure ids, then per
/// instance u64 id, u32 K, f64 base margin, u32 ids[K], f64 margins[K*K].
void save_margin_cache(const MarginCache& cache, const std::filesystem::path& path);
MarginCache load_margin_cache(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace radi

#endif  // RADI_IO_HPP_
