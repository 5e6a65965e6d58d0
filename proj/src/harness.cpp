#include "radi/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "radi/baselines.hpp"
#include "radi/errors.hpp"
#include "radi/io.hpp"
#include "radi/listwise.hpp"
#include "radi/version.hpp"

namespace radi {

using nlohmann::json;

namespace {

struct TrainOptions {
  std::size_t epochs = 0;
  double lr = 0.01;
  double clip_norm = 0.1;
  std::size_t batch_size = 32;
  double momentum = 0.0;
  double warmup_fraction = 0.0;
  bool select_best = true;
  std::size_t eval_k = 5;
  bool graded = false;
  std::string stage = "train";
};

using InstanceLoss = std::function<LossValue(std::size_t index, std::span<const double> scores, Rng& rng)>;

double scheduled_lr(const TrainOptions& opt, std::size_t step, std::size_t total_steps) {
  const auto warmup = static_cast<std::size_t>(std::floor(opt.warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) return opt.lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  const double remaining = static_cast<double>(total_steps - step);
  const double span = static_cast<double>(total_steps - warmup);
  return opt.lr * remaining / span;
}

// Mini-batch SGD over `train`. Each epoch draws its shuffle, dropout masks
// and loss randomness from separate child streams of `rng`.
TrainedModel train_loop(ScoreModel model, const Dataset& train, const Dataset& val, const InstanceLoss& loss_fn,
                        const TrainOptions& opt, const Rng& rng) {
  TrainedModel out{model, {}};
  if (opt.epochs == 0 || train.instances.empty()) return out;

  const std::size_t n = train.instances.size();
  const std::size_t batches = (n + opt.batch_size - 1) / opt.batch_size;
  const std::size_t total_steps = batches * opt.epochs;
  SgdOptimizer optimizer(opt.momentum);
  std::vector<std::size_t> order(n);
  double best_acc = -1.0;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    Rng shuffle_rng = rng.child("shuffle").child(epoch);
    Rng dropout_rng = rng.child("dropout").child(epoch);
    Rng loss_rng = rng.child("loss").child(epoch);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * opt.batch_size;
      const std::size_t end = std::min(n, begin + opt.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      ModelGradient grad = ModelGradient::zeros_like(model);
      for (std::size_t p = begin; p < end; ++p) {
        const std::size_t idx = order[p];
        const ForwardTrace trace = forward_trace(model, train.instances[idx].features, &dropout_rng);
        if (!all_finite(trace.scores)) {
          throw TrainingError(opt.stage + ": non-finite scores in epoch " + std::to_string(epoch));
        }
        LossValue loss = loss_fn(idx, trace.scores, loss_rng);
        if (!std::isfinite(loss.value) || !all_finite(loss.gradient)) {
          throw TrainingError(opt.stage + ": non-finite loss in epoch " + std::to_string(epoch));
        }
        epoch_loss += loss.value;
        for (double& g : loss.gradient) g *= inv;
        accumulate_backward(model, trace, loss.gradient, grad);
      }
      try {
        optimizer.step(model, std::move(grad), scheduled_lr(opt, step, total_steps), opt.clip_norm);
      } catch (const TrainingError&) {
        throw TrainingError(opt.stage + ": non-finite gradient in epoch " + std::to_string(epoch));
      }
      ++step;
    }
    EpochLog log{epoch, epoch_loss / static_cast<double>(n), evaluate(model, val, opt.eval_k, opt.graded)};
    out.record.epochs.push_back(log);
    if (!opt.select_best || log.val.acc_at_1 > best_acc) {
      best_acc = log.val.acc_at_1;
      out.model = model;
      out.record.selected_epoch = epoch;
    }
  }
  return out;
}

TrainOptions options_for(const ExperimentConfig& config, const TrainSettings& settings, std::size_t epochs,
                         bool select_best, std::string stage) {
  TrainOptions opt;
  opt.epochs = epochs;
  opt.lr = settings.lr;
  opt.clip_norm = settings.clip_norm;
  opt.batch_size = config.batch_size;
  opt.momentum = config.momentum;
  opt.warmup_fraction = config.warmup_fraction;
  opt.select_best = select_best;
  opt.eval_k = config.eval_k;
  opt.graded = config.graded_relevance;
  opt.stage = std::move(stage);
  return opt;
}

std::uint64_t hash_json_subset(const json& full, std::initializer_list<const char*> keys, std::uint64_t salt = 0) {
  json subset;
  for (const char* k : keys) subset[k] = full.at(k);
  return fnv1a(subset.dump(), 0xcbf29ce484222325ULL ^ salt);
}

#define RADI_DATA_KEYS                                                                                    \
  "num_answers", "feature_dim", "num_clusters", "min_positives", "max_positives", "label_noise",         \
      "feature_noise", "answer_signal", "train_size", "val_size", "test_size", "seed"
#define RADI_MODEL_KEYS \
  "hidden_sizes", "dropout_rate", "batch_size", "momentum", "warmup_fraction", "eval_k", "graded_relevance"

std::uint64_t data_key(const ExperimentConfig& c) { return hash_json_subset(to_json(c), {RADI_DATA_KEYS}); }

std::uint64_t teacher_key(const ExperimentConfig& c) {
  return hash_json_subset(to_json(c), {RADI_DATA_KEYS, RADI_MODEL_KEYS, "teacher_epochs", "teacher_lr", "teacher_clip"});
}

std::uint64_t init_key(const ExperimentConfig& c) {
  const json j = to_json(c);
  if (c.student_init == StudentInit::kFromTeacher) return teacher_key(c);
  return hash_json_subset(j, {RADI_DATA_KEYS, RADI_MODEL_KEYS, "teacher_lr", "teacher_clip", "student_pretrain_epochs",
                              "student_init"});
}

std::uint64_t snapshot_key(const ExperimentConfig& c) {
  const std::uint64_t base = teacher_key(c);
  if (c.scheme != Scheme::kRadiP) return base;
  return base ^ mix64(margin_settings_checksum(c));
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::uint64_t hash_double(std::uint64_t h, double v) { return fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h); }

}  // namespace

std::uint64_t TeacherSnapshot::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ teacher_checksum;
  for (const auto& r : rankings) {
    for (auto a : r.permutation) h = hash_double(h, static_cast<double>(a));
    for (double s : r.teacher_scores) h = hash_double(h, s);
  }
  for (const auto& m : margins) {
    for (auto a : m.answer_ids) h = hash_double(h, static_cast<double>(a));
    for (double v : m.margins.values()) h = hash_double(h, v);
  }
  return h;
}

json to_json(const EvalResult& r) {
  return {{"acc_at_1", r.acc_at_1},   {"hit_at_k", r.hit_at_k},           {"ndcg_at_k", r.ndcg_at_k},
          {"k", r.k},                 {"num_instances", r.num_instances}, {"ndcg_excluded", r.ndcg_excluded}};
}

json to_json(const StageRecord& record) {
  json epochs = json::array();
  for (const auto& e : record.epochs) epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val", to_json(e.val)}});
  return {{"epochs", epochs}, {"selected_epoch", record.selected_epoch}};
}

json to_json(const RunRecord& r, bool include_wall_clock) {
  json j{{"config_checksum", r.config_checksum},
         {"scheme", r.scheme},
         {"teacher", to_json(r.teacher)},
         {"teacher_test", to_json(r.teacher_test)},
         {"student", to_json(r.student)},
         {"test", to_json(r.test)},
         {"hidden_positive_recovery", r.hidden_positive_recovery},
         {"sinkhorn_failures", r.sinkhorn_failures},
         {"snapshot_checksum", r.snapshot_checksum},
         {"version", r.version}};
  if (include_wall_clock) j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

std::string metrics_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "epoch,split,acc1,hit5,ndcg5\n";
  auto row = [&](std::size_t epoch, const char* split, const EvalResult& e) {
    out << epoch << ',' << split << ',' << format_metric(e.acc_at_1) << ',' << format_metric(e.hit_at_k) << ','
        << format_metric(e.ndcg_at_k) << '\n';
  };
  for (const auto& e : record.student.epochs) row(e.epoch, "val", e.val);
  row(record.student.selected_epoch, "test", record.test);
  return out.str();
}

DatasetSplits make_datasets(const ExperimentConfig& config) {
  TaskSpec task = config.task;
  task.seed = config.seed;
  Rng rng(config.seed, fnv1a("data"));
  return generate(task, rng);
}

TrainedModel train_teacher(const ExperimentConfig& config, const DatasetSplits& data, std::uint64_t training_seed,
                           std::size_t epochs) {
  Rng rng(training_seed, fnv1a("teacher"));
  Rng init_rng = rng.child("init");
  ScoreModel model = ScoreModel::initialize(config.task.feature_dim, config.hidden_sizes, config.task.num_answers,
                                            config.dropout_rate, init_rng);
  const Dataset& train = data.train;
  InstanceLoss loss = [&](std::size_t idx, std::span<const double> scores, Rng&) {
    return classification_loss(scores, train.instances[idx].revealed_positives);
  };
  return train_loop(std::move(model), train, data.val, loss,
                    options_for(config, config.teacher, epochs, true, "teacher"), rng);
}

TrainedModel train_teacher(const ExperimentConfig& config, const DatasetSplits& data) {
  return train_teacher(config, data, config.seed, config.teacher.epochs);
}

std::uint64_t margin_settings_checksum(const ExperimentConfig& config) {
  return hash_json_subset(to_json(config), {"base_margin", "sinkhorn_lambda", "sinkhorn_lambda_scale", "sinkhorn_tol", "sinkhorn_max_iters",
                                            "mc_passes", "truncate_k", "rescale_margins", "margin_mode", "seed"});
}

TeacherSnapshot snapshot_teacher(const ScoreModel& teacher, const Dataset& train, const ExperimentConfig& config,
                                 const std::optional<std::filesystem::path>& cache_path) {
  TeacherSnapshot snap;
  snap.teacher_checksum = teacher.checksum();
  snap.rankings.reserve(train.instances.size());
  for (const auto& inst : train.instances) snap.rankings.push_back(teacher_ranking(forward(teacher, inst.features)));
  if (config.scheme != Scheme::kRadiP) return snap;

  const std::uint64_t settings = margin_settings_checksum(config);
  if (cache_path && std::filesystem::exists(*cache_path)) {
    MarginCache cache = load_margin_cache(*cache_path);
    if (cache.teacher_checksum == snap.teacher_checksum && cache.settings_checksum == settings &&
        cache.margins.size() == train.instances.size()) {
      snap.margins = std::move(cache.margins);
      snap.sinkhorn_failures = std::move(cache.failed_ids);
      snap.loaded_from_cache = true;
      return snap;
    }
  }

  const auto& pw = config.pairwise;
  const std::size_t k = std::min(pw.truncate_k, config.task.num_answers);
  snap.margins.reserve(train.instances.size());
  for (const auto& inst : train.instances) {
    Rng mc_rng(config.seed, derive_stream(fnv1a("mc-dropout"), inst.id));
    const auto mc = mc_dropout_scores(teacher, inst.features, pw.mc_passes, mc_rng);
    const UncertaintyMatrix u = pairwise_uncertainty(mc, k);
    MarginScalingMatrix w;
    switch (pw.mode) {
      case MarginMode::kOt: {
        const double lambda = pw.lambda > 0.0 ? pw.lambda : default_sinkhorn_lambda(u, pw.lambda_scale);
        try {
          w = sinkhorn_margins(u, lambda, pw.tolerance, pw.max_iterations);
        } catch (const ConvergenceError&) {
          snap.sinkhorn_failures.push_back(inst.id);
          w = uniform_margins(u.answer_ids);
        }
        break;
      }
      case MarginMode::kUniform: w = uniform_margins(u.answer_ids); break;
      case MarginMode::kRandom: {
        Rng r = mc_rng.child("random-margins");
        w = random_margins(u.answer_ids, r);
        break;
      }
      case MarginMode::kUncertainty: w = inverse_uncertainty_margins(u); break;
    }
    snap.margins.push_back(soft_margins(w, pw.base_margin, pw.rescale));
  }

  if (cache_path) {
    MarginCache cache{snap.teacher_checksum, settings, {}, snap.margins, snap.sinkhorn_failures};
    for (const auto& inst : train.instances) cache.instance_ids.push_back(inst.id);
    save_margin_cache(cache, *cache_path);
  }
  return snap;
}

ScoreModel initial_student(const ExperimentConfig& config, const ScoreModel& teacher, const DatasetSplits& data) {
  switch (config.student_init) {
    case StudentInit::kFromTeacher: return teacher;
    case StudentInit::kScratch: {
      Rng rng(config.seed, fnv1a("student-scratch"));
      return ScoreModel::initialize(config.task.feature_dim, config.hidden_sizes, config.task.num_answers,
                                    config.dropout_rate, rng);
    }
    case StudentInit::kIndividual: break;
  }
  return train_teacher(config, data, config.seed + 1, config.student_pretrain_epochs).model;
}

TrainedModel distill_student(const TeacherSnapshot& snapshot, const ScoreModel& init, const DatasetSplits& data,
                             const ExperimentConfig& config) {
  const Dataset& train = data.train;
  if (snapshot.rankings.size() != train.instances.size()) {
    throw ArgumentError("distill_student: snapshot does not match the training set");
  }
  if (config.scheme == Scheme::kRadiP && snapshot.margins.size() != train.instances.size()) {
    throw ArgumentError("distill_student: radi-p requires cached margins");
  }
  const double alpha = config.scheme == Scheme::kClsOnly ? 0.0 : config.effective_alpha();
  const std::size_t n = config.task.num_answers;

  ListwiseOptions listwise;
  listwise.plan = config.listwise.plan;
  listwise.tag = listwise_loss_from_string(config.listwise.loss);
  listwise.beta = config.listwise.beta;
  listwise.weighting.sigma = config.listwise.sigma;
  listwise.weighting.mu = config.listwise.mu;

  std::vector<std::vector<std::size_t>> pseudo;
  if (config.scheme == Scheme::kPseudoLabeling) {
    for (std::size_t i = 0; i < train.instances.size(); ++i) {
      pseudo.push_back(pseudo_labels(snapshot.rankings[i], train.instances[i].revealed_positives,
                                     config.baseline.pseudo_k).labels);
    }
  }

  InstanceLoss loss = [&](std::size_t idx, std::span<const double> scores, Rng& rng) -> LossValue {
    const Instance& inst = train.instances[idx];
    const RankedList& ranking = snapshot.rankings[idx];
    switch (config.scheme) {
      case Scheme::kLabelSmoothing:
        return smoothed_cross_entropy(scores, smooth_labels(inst.revealed_positives, n, config.baseline.smoothing_sigma));
      case Scheme::kPseudoLabeling: return classification_loss(scores, pseudo[idx]);
      default: break;
    }
    LossValue cls = classification_loss(scores, inst.revealed_positives);
    if (alpha == 0.0) return cls;
    switch (config.scheme) {
      case Scheme::kRadiP:
        return combined_loss(cls, pairwise_margin_loss(scores, ranking, snapshot.margins[idx]), alpha);
      case Scheme::kRadiL: return combined_loss(cls, listwise_rank_loss(scores, ranking, listwise, rng), alpha);
      case Scheme::kVanillaKd:
        return combined_loss(cls, vanilla_kd_loss(scores, ranking.teacher_scores, config.baseline.kd_temperature),
                             alpha);
      default: return cls;
    }
  };

  Rng rng(config.seed, fnv1a("student"));
  return train_loop(init, train, data.val, loss,
                    options_for(config, config.student, config.student.epochs, config.student_select_best, "student"),
                    rng);
}

const DatasetSplits& RunCache::data(const ExperimentConfig& config) {
  auto& slot = data_[data_key(config)];
  if (!slot) slot = std::make_unique<DatasetSplits>(make_datasets(config));
  return *slot;
}

const TrainedModel& RunCache::teacher(const ExperimentConfig& config) {
  auto& slot = teachers_[teacher_key(config)];
  if (!slot) slot = std::make_unique<TrainedModel>(train_teacher(config, data(config)));
  return *slot;
}

const ScoreModel& RunCache::student_init(const ExperimentConfig& config) {
  auto& slot = inits_[init_key(config)];
  if (!slot) slot = std::make_unique<ScoreModel>(initial_student(config, teacher(config).model, data(config)));
  return *slot;
}

const TeacherSnapshot& RunCache::snapshot(const ExperimentConfig& config,
                                          const std::optional<std::filesystem::path>& cache_path) {
  auto& slot = snapshots_[snapshot_key(config)];
  if (!slot) {
    slot = std::make_unique<TeacherSnapshot>(
        snapshot_teacher(teacher(config).model, data(config).train, config, cache_path));
  }
  return *slot;
}

RunRecord run_experiment(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out_dir,
                         RunCache* cache) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunCache local;
  RunCache& rc = cache ? *cache : local;

  const DatasetSplits& data = rc.data(config);
  const TrainedModel& teacher = rc.teacher(config);
  std::optional<std::filesystem::path> margin_cache;
  if (out_dir && config.scheme == Scheme::kRadiP) margin_cache = *out_dir / "margins.bin";
  const TeacherSnapshot& snapshot = rc.snapshot(config, margin_cache);
  const std::uint64_t snapshot_before = snapshot.checksum();
  const ScoreModel& init = rc.student_init(config);

  TrainedModel student = distill_student(snapshot, init, data, config);
  if (snapshot.checksum() != snapshot_before) throw Error("run_experiment: teacher snapshot was modified");

  RunRecord record;
  record.config_checksum = hex64(config_checksum(config));
  record.scheme = to_string(config.scheme);
  record.teacher = teacher.record;
  record.teacher_test = evaluate(teacher.model, data.test, config.eval_k, config.graded_relevance);
  record.student = student.record;
  record.test = evaluate(student.model, data.test, config.eval_k, config.graded_relevance);
  record.hidden_positive_recovery = hidden_positive_recovery(student.model, data.train, config.eval_k);
  record.sinkhorn_failures = snapshot.sinkhorn_failures.size();
  record.snapshot_checksum = hex64(snapshot_before);
  record.version = kVersion;
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_text_file(*out_dir / "config.json", to_json(config).dump(2) + "\n");
    write_text_file(*out_dir / "run.json", to_json(record).dump(2) + "\n");
    write_text_file(*out_dir / "metrics.csv", metrics_csv(record));
    save_model(teacher.model, *out_dir / "teacher.json");
    save_model(student.model, *out_dir / "student.json");
  }
  return record;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                 const std::vector<std::string>& values,
                                 const std::optional<std::filesystem::path>& out_dir) {
  const auto keys = config_keys();
  if (std::find(keys.begin(), keys.end(), axis) == keys.end()) {
    throw ArgumentError("sweep: unknown config field '" + axis + "'");
  }
  std::vector<SweepCell> cells;
  RunCache cache;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepCell cell{values[i], std::nullopt, {}};
    try {
      ExperimentConfig config = base;
      set_config_field(config, axis, values[i]);
      std::optional<std::filesystem::path> dir;
      if (out_dir) dir = *out_dir / (std::to_string(i) + "_" + axis + "=" + values[i]);
      cell.record = run_experiment(config, dir, &cache);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace radi
