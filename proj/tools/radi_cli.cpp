// radi: command-line driver for the two-stage ranking distillation pipeline.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "radi/config.hpp"
#include "radi/errors.hpp"
#include "radi/harness.hpp"
#include "radi/io.hpp"
#include "radi/metrics.hpp"
#include "radi/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string kebab(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// Config flags shared by every subcommand. Values are kept as text and applied
// after --config has been loaded, so flags override the file.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    for (const auto& key : radi::config_keys()) {
      app->add_option("--" + kebab(key), values[key], "config field " + key);
    }
  }

  radi::ExperimentConfig resolve() const {
    radi::ExperimentConfig config;
    if (!config_path.empty()) config = radi::config_from_json(radi::read_json_file(config_path));
    for (const auto& [key, text] : values) {
      if (!text.empty()) radi::set_config_field(config, key, text);
    }
    config.task.seed = config.seed;
    config.validate();
    return config;
  }
};

radi::DatasetSplits load_or_generate(const std::string& data_dir, const radi::ExperimentConfig& config) {
  if (data_dir.empty()) return radi::make_datasets(config);
  const fs::path dir(data_dir);
  return {radi::load_dataset(dir / "train.jsonl"), radi::load_dataset(dir / "val.jsonl"),
          radi::load_dataset(dir / "test.jsonl")};
}

void write_config(const fs::path& dir, const radi::ExperimentConfig& config) {
  radi::write_text_file(dir / "config.json", radi::to_json(config).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranking distillation on synthetic insufficient-label tasks"};
  app.require_subcommand(1);

  std::string out_dir, data_dir, teacher_path, snapshot_path, model_path, data_file, axis, values;
  std::size_t eval_k = radi::kDefaultEvalK;
  bool graded = false;

  ConfigFlags gen_flags, teacher_flags, snap_flags, distill_flags, run_flags, sweep_flags;

  auto* gen = app.add_subcommand("gen-data", "Generate train/val/test JSONL files");
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen_flags.attach(gen);

  auto* train = app.add_subcommand("train-teacher", "Train the teacher on revealed labels");
  train->add_option("--data", data_dir, "Directory with train/val/test.jsonl (generated when omitted)");
  train->add_option("--out", out_dir, "Output directory")->required();
  teacher_flags.attach(train);

  auto* snap = app.add_subcommand("snapshot", "Extract teacher rankings and pairwise margins");
  snap->add_option("--data", data_dir, "Directory with train/val/test.jsonl (generated when omitted)");
  snap->add_option("--teacher", teacher_path, "Teacher checkpoint")->required()->check(CLI::ExistingFile);
  snap->add_option("--out", out_dir, "Output directory")->required();
  snap_flags.attach(snap);

  auto* distill = app.add_subcommand("distill", "Train a student from a teacher snapshot");
  distill->add_option("--data", data_dir, "Directory with train/val/test.jsonl (generated when omitted)");
  distill->add_option("--teacher", teacher_path, "Teacher checkpoint")->required()->check(CLI::ExistingFile);
  distill->add_option("--snapshot", snapshot_path, "Margin cache written by `snapshot`");
  distill->add_option("--out", out_dir, "Output directory")->required();
  distill_flags.attach(distill);

  auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on one split");
  eval->add_option("--model", model_path, "Model checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_file, "Dataset JSONL file")->required()->check(CLI::ExistingFile);
  eval->add_option("--eval-k", eval_k, "Cut-off for Hit@k and nDCG@k");
  eval->add_flag("--graded-relevance", graded, "Use annotation counts as graded relevance");

  auto* run = app.add_subcommand("run", "Teacher, snapshot, student and evaluation in one go");
  run->add_option("--out", out_dir, "Output directory")->required();
  run_flags.attach(run);

  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a config field");
  sweep->add_option("--axis", axis, "Config field to vary")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep_flags.attach(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto config = gen_flags.resolve();
      const auto data = radi::make_datasets(config);
      const fs::path dir(out_dir);
      radi::save_dataset(data.train, dir / "train.jsonl");
      radi::save_dataset(data.val, dir / "val.jsonl");
      radi::save_dataset(data.test, dir / "test.jsonl");
      std::cout << json{{"train", data.train.instances.size()},
                        {"val", data.val.instances.size()},
                        {"test", data.test.instances.size()},
                        {"hidden_positive_rate", radi::hidden_positive_rate(data.train)}}
                       .dump()
                << "\n";
    } else if (*train) {
      const auto config = teacher_flags.resolve();
      const auto data = load_or_generate(data_dir, config);
      const auto teacher = radi::train_teacher(config, data);
      const fs::path dir(out_dir);
      radi::save_model(teacher.model, dir / "teacher.json");
      write_config(dir, config);
      json record{{"teacher", radi::to_json(teacher.record)},
                  {"test", radi::to_json(radi::evaluate(teacher.model, data.test, config.eval_k,
                                                        config.graded_relevance))}};
      radi::write_text_file(dir / "teacher_record.json", record.dump(2) + "\n");
      std::cout << record["test"].dump() << "\n";
    } else if (*snap) {
      const auto config = snap_flags.resolve();
      const auto data = load_or_generate(data_dir, config);
      const auto teacher = radi::load_model(teacher_path);
      const fs::path dir(out_dir);
      std::optional<fs::path> cache;
      if (config.scheme == radi::Scheme::kRadiP) cache = dir / "margins.bin";
      const auto snapshot = radi::snapshot_teacher(teacher, data.train, config, cache);
      json summary{{"teacher_checksum", radi::hex64(snapshot.teacher_checksum)},
                   {"instances", snapshot.rankings.size()},
                   {"margin_sets", snapshot.margins.size()},
                   {"sinkhorn_failures", snapshot.sinkhorn_failures.size()},
                   {"from_cache", snapshot.loaded_from_cache},
                   {"checksum", radi::hex64(snapshot.checksum())}};
      radi::write_text_file(dir / "snapshot.json", summary.dump(2) + "\n");
      std::cout << summary.dump() << "\n";
    } else if (*distill) {
      const auto config = distill_flags.resolve();
      const auto data = load_or_generate(data_dir, config);
      const auto teacher = radi::load_model(teacher_path);
      std::optional<fs::path> cache;
      if (!snapshot_path.empty()) cache = fs::path(snapshot_path);
      const auto snapshot = radi::snapshot_teacher(teacher, data.train, config, cache);
      const auto init = radi::initial_student(config, teacher, data);
      const auto student = radi::distill_student(snapshot, init, data, config);
      const fs::path dir(out_dir);
      radi::save_model(student.model, dir / "student.json");
      write_config(dir, config);
      radi::RunRecord record;
      record.config_checksum = radi::hex64(radi::config_checksum(config));
      record.scheme = radi::to_string(config.scheme);
      record.teacher_test = radi::evaluate(teacher, data.test, config.eval_k, config.graded_relevance);
      record.student = student.record;
      record.test = radi::evaluate(student.model, data.test, config.eval_k, config.graded_relevance);
      record.hidden_positive_recovery = radi::hidden_positive_recovery(student.model, data.train, config.eval_k);
      record.sinkhorn_failures = snapshot.sinkhorn_failures.size();
      record.snapshot_checksum = radi::hex64(snapshot.checksum());
      record.version = radi::kVersion;
      radi::write_text_file(dir / "run.json", radi::to_json(record).dump(2) + "\n");
      radi::write_text_file(dir / "metrics.csv", radi::metrics_csv(record));
      std::cout << radi::to_json(record.test).dump() << "\n";
    } else if (*eval) {
      const auto model = radi::load_model(model_path);
      const auto data = radi::load_dataset(data_file);
      std::cout << radi::to_json(radi::evaluate(model, data, eval_k, graded)).dump() << "\n";
    } else if (*run) {
      const auto config = run_flags.resolve();
      const auto record = radi::run_experiment(config, fs::path(out_dir));
      std::cout << radi::to_json(record.test).dump() << "\n";
    } else if (*sweep) {
      const auto config = sweep_flags.resolve();
      std::vector<std::string> list;
      std::stringstream ss(values);
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) list.push_back(item);
      }
      const auto cells = radi::run_sweep(config, axis, list, fs::path(out_dir));
      json summary = json::array();
      bool failed = false;
      for (const auto& cell : cells) {
        json row{{"value", cell.value}};
        if (cell.record) {
          row["config_checksum"] = cell.record->config_checksum;
          row["test"] = radi::to_json(cell.record->test);
        } else {
          row["error"] = cell.error;
          failed = true;
        }
        summary.push_back(row);
      }
      radi::write_text_file(fs::path(out_dir) / "sweep.json", summary.dump(2) + "\n");
      std::cout << summary.dump() << "\n";
      return failed ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "radi: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
