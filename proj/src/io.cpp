#include "radi/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "radi/errors.hpp"

namespace radi {

using nlohmann::json;

json model_to_json(const ScoreModel& model) {
  json layers = json::array();
  for (const auto& layer : model.layers()) {
    layers.push_back({{"outputs", layer.outputs()},
                      {"inputs", layer.inputs()},
                      {"weights", std::vector<double>(layer.weights.values().begin(), layer.weights.values().end())},
                      {"bias", layer.bias}});
  }
  return {{"format", "radi-model"},
          {"version", kModelFormatVersion},
          {"activation", "relu"},
          {"dropout_rate", model.dropout_rate()},
          {"layers", layers}};
}

ScoreModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "radi-model") throw ArgumentError("model file: wrong format tag");
    if (j.at("version").get<int>() != kModelFormatVersion) throw ArgumentError("model file: unsupported version");
    std::vector<DenseLayer> layers;
    for (const auto& l : j.at("layers")) {
      layers.push_back({DenseMatrix(l.at("outputs").get<std::size_t>(), l.at("inputs").get<std::size_t>(),
                                    l.at("weights").get<std::vector<double>>()),
                        l.at("bias").get<std::vector<double>>()});
    }
    return ScoreModel(std::move(layers), j.at("dropout_rate").get<double>());
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("model file: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << text;
}

void save_model(const ScoreModel& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model).dump() + "\n");
}

ScoreModel load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

json task_to_json(const TaskSpec& t) {
  return {{"num_answers", t.num_answers},   {"feature_dim", t.feature_dim},
          {"num_clusters", t.num_clusters}, {"min_positives", t.min_positives},
          {"max_positives", t.max_positives}, {"label_noise", t.label_noise},
          {"feature_noise", t.feature_noise}, {"answer_signal", t.answer_signal},
          {"train_size", t.train_size},     {"val_size", t.val_size},
          {"test_size", t.test_size},       {"seed", t.seed}};
}

TaskSpec task_from_json(const json& j) {
  TaskSpec t;
  t.num_answers = j.at("num_answers");
  t.feature_dim = j.at("feature_dim");
  t.num_clusters = j.at("num_clusters");
  t.min_positives = j.at("min_positives");
  t.max_positives = j.at("max_positives");
  t.label_noise = j.at("label_noise");
  t.feature_noise = j.at("feature_noise");
  t.answer_signal = j.at("answer_signal");
  t.train_size = j.at("train_size");
  t.val_size = j.at("val_size");
  t.test_size = j.at("test_size");
  t.seed = j.at("seed");
  return t;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ostringstream out;
  out << json{{"format", "radi-dataset"},
              {"version", kDatasetFormatVersion},
              {"split", to_string(dataset.split)},
              {"task", task_to_json(dataset.task)}}
             .dump()
      << '\n';
  for (const auto& inst : dataset.instances) {
    out << json{{"id", inst.id},
                {"features", inst.features},
                {"full_positives", inst.full_positives},
                {"revealed_positives", inst.revealed_positives},
                {"annotation_counts", inst.annotation_counts}}
               .dump()
        << '\n';
  }
  write_text_file(path, out.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::string line;
  Dataset ds;
  try {
    if (!std::getline(in, line)) throw ArgumentError(path.string() + ": missing header");
    const json header = json::parse(line);
    if (header.at("format") != "radi-dataset") throw ArgumentError(path.string() + ": wrong format tag");
    if (header.at("version").get<int>() != kDatasetFormatVersion) throw ArgumentError(path.string() + ": unsupported version");
    ds.split = split_from_string(header.at("split").get<std::string>());
    ds.task = task_from_json(header.at("task"));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json r = json::parse(line);
      Instance inst;
      inst.id = r.at("id");
      inst.features = r.at("features").get<DenseVector>();
      inst.full_positives = r.at("full_positives").get<std::vector<std::size_t>>();
      inst.revealed_positives = r.at("revealed_positives").get<std::vector<std::size_t>>();
      if (r.contains("annotation_counts")) inst.annotation_counts = r.at("annotation_counts").get<std::vector<std::size_t>>();
      if (inst.features.size() != ds.task.feature_dim) throw DimensionError(path.string() + ": feature length mismatch");
      ds.instances.push_back(std::move(inst));
    }
  } catch (const json::exception& e) {
    throw ArgumentError(path.string() + ": " + e.what());
  }
  return ds;
}

namespace {

constexpr char kMagic[8] = {'R', 'A', 'D', 'I', 'M', 'R', 'G', 'N'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "cache writer assumes little-endian hosts");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ArgumentError("margin cache: truncated file");
  return value;
}

}  // namespace

void save_margin_cache(const MarginCache& cache, const std::filesystem::path& path) {
  if (cache.instance_ids.size() != cache.margins.size()) throw DimensionError("margin cache: id/margin count mismatch");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kSnapshotFormatVersion);
  put<std::uint64_t>(out, cache.teacher_checksum);
  put<std::uint64_t>(out, cache.settings_checksum);
  put<std::uint64_t>(out, cache.instance_ids.size());
  put<std::uint64_t>(out, cache.failed_ids.size());
  for (auto id : cache.failed_ids) put<std::uint64_t>(out, id);
  for (std::size_t i = 0; i < cache.margins.size(); ++i) {
    const auto& m = cache.margins[i];
    put<std::uint64_t>(out, cache.instance_ids[i]);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.answer_ids.size()));
    put<double>(out, m.base_margin);
    for (auto a : m.answer_ids) put<std::uint32_t>(out, static_cast<std::uint32_t>(a));
    for (double v : m.margins.values()) put<double>(out, v);
  }
}

MarginCache load_margin_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ArgumentError(path.string() + ": not a margin cache");
  }
  if (take<std::uint32_t>(in) != kSnapshotFormatVersion) throw ArgumentError(path.string() + ": unsupported version");
  MarginCache cache;
  cache.teacher_checksum = take<std::uint64_t>(in);
  cache.settings_checksum = take<std::uint64_t>(in);
  const auto count = take<std::uint64_t>(in);
  const auto failures = take<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < failures; ++i) cache.failed_ids.push_back(take<std::uint64_t>(in));
  for (std::uint64_t i = 0; i < count; ++i) {
    cache.instance_ids.push_back(take<std::uint64_t>(in));
    const auto k = take<std::uint32_t>(in);
    SoftMarginSet m;
    m.base_margin = take<double>(in);
    for (std::uint32_t a = 0; a < k; ++a) m.answer_ids.push_back(take<std::uint32_t>(in));
    m.margins = DenseMatrix(k, k);
    for (double& v : m.margins.values()) v = take<double>(in);
    cache.margins.push_back(std::move(m));
  }
  return cache;
}

}  // namespace radi
