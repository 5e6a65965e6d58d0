#include "radi/config.hpp"

#include <cstdio>

#include "radi/errors.hpp"

namespace radi {

using nlohmann::json;

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kClsOnly: return "cls-only";
    case Scheme::kRadiP: return "radi-p";
    case Scheme::kRadiL: return "radi-l";
    case Scheme::kLabelSmoothing: return "label-smoothing";
    case Scheme::kPseudoLabeling: return "pseudo-labeling";
    case Scheme::kVanillaKd: return "vanilla-kd";
  }
  return "cls-only";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "cls-only" || name == "none") return Scheme::kClsOnly;
  if (name == "radi-p") return Scheme::kRadiP;
  if (name == "radi-l") return Scheme::kRadiL;
  if (name == "label-smoothing") return Scheme::kLabelSmoothing;
  if (name == "pseudo-labeling") return Scheme::kPseudoLabeling;
  if (name == "vanilla-kd") return Scheme::kVanillaKd;
  throw ArgumentError("unknown scheme '" + name + "'");
}

std::string to_string(StudentInit init) {
  switch (init) {
    case StudentInit::kScratch: return "scratch";
    case StudentInit::kFromTeacher: return "from-teacher";
    case StudentInit::kIndividual: return "individual";
  }
  return "individual";
}

StudentInit student_init_from_string(const std::string& name) {
  if (name == "scratch") return StudentInit::kScratch;
  if (name == "from-teacher") return StudentInit::kFromTeacher;
  if (name == "individual") return StudentInit::kIndividual;
  throw ArgumentError("unknown student init '" + name + "'");
}

std::string to_string(MarginMode mode) {
  switch (mode) {
    case MarginMode::kOt: return "ot";
    case MarginMode::kUniform: return "uniform";
    case MarginMode::kRandom: return "random";
    case MarginMode::kUncertainty: return "uncertainty";
  }
  return "ot";
}

MarginMode margin_mode_from_string(const std::string& name) {
  if (name == "ot") return MarginMode::kOt;
  if (name == "uniform") return MarginMode::kUniform;
  if (name == "random") return MarginMode::kRandom;
  if (name == "uncertainty") return MarginMode::kUncertainty;
  throw ArgumentError("unknown margin mode '" + name + "'");
}

double ExperimentConfig::effective_alpha() const {
  if (alpha_rank) return *alpha_rank;
  switch (scheme) {
    case Scheme::kRadiP: return 100.0;
    case Scheme::kRadiL: return 10.0;
    case Scheme::kVanillaKd: return 1.0;
    default: return 0.0;
  }
}

void ExperimentConfig::validate() const {
  task.validate();
  if (hidden_sizes.empty()) throw ArgumentError("config: at least one hidden layer required");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ArgumentError("config: dropout_rate must lie in [0, 1)");
  for (const auto* t : {&teacher, &student}) {
    if (!(t->lr > 0.0)) throw ArgumentError("config: learning rates must be positive");
    if (!(t->clip_norm > 0.0)) throw ArgumentError("config: clip norms must be positive");
  }
  if (batch_size == 0) throw ArgumentError("config: batch_size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("config: momentum must lie in [0, 1)");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) throw ArgumentError("config: warmup_fraction must lie in [0, 1]");
  if (alpha_rank && !(*alpha_rank >= 0.0)) throw ArgumentError("config: alpha_rank must be non-negative");
  if (eval_k == 0 || eval_k > task.num_answers) throw ArgumentError("config: eval_k must lie in [1, N]");
  if (scheme == Scheme::kRadiP) {
    if (!(pairwise.base_margin > 0.0)) throw ArgumentError("config: base_margin must be positive");
    if (pairwise.mc_passes < 2) throw ArgumentError("config: mc_passes must be at least 2");
    if (pairwise.truncate_k < 2) throw ArgumentError("config: truncate_k must be at least 2");
    if (pairwise.lambda < 0.0) throw ArgumentError("config: sinkhorn_lambda must be non-negative");
    if (!(pairwise.lambda_scale > 0.0)) throw ArgumentError("config: sinkhorn_lambda_scale must be positive");
  }
  if (scheme == Scheme::kRadiL) {
    listwise_loss_from_string(listwise.loss);
    const auto& plan = listwise.plan;
    if (plan.scheme != SamplingScheme::kFull && plan.hot_size + plan.cold_size > task.num_answers) {
      throw ArgumentError("config: hot_size + cold_size exceeds num_answers");
    }
    if (!(plan.smoothing > 0.0)) throw ArgumentError("config: sampling_smoothing must be positive");
  }
  if (scheme == Scheme::kLabelSmoothing &&
      !(baseline.smoothing_sigma >= 0.0 && baseline.smoothing_sigma < 1.0)) {
    throw ArgumentError("config: smoothing_sigma must lie in [0, 1)");
  }
  if (scheme == Scheme::kVanillaKd && !(baseline.kd_temperature > 0.0)) {
    throw ArgumentError("config: kd_temperature must be positive");
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["num_answers"] = c.task.num_answers;
  j["feature_dim"] = c.task.feature_dim;
  j["num_clusters"] = c.task.num_clusters;
  j["min_positives"] = c.task.min_positives;
  j["max_positives"] = c.task.max_positives;
  j["label_noise"] = c.task.label_noise;
  j["feature_noise"] = c.task.feature_noise;
  j["answer_signal"] = c.task.answer_signal;
  j["train_size"] = c.task.train_size;
  j["val_size"] = c.task.val_size;
  j["test_size"] = c.task.test_size;
  j["hidden_sizes"] = c.hidden_sizes;
  j["dropout_rate"] = c.dropout_rate;
  j["teacher_epochs"] = c.teacher.epochs;
  j["teacher_lr"] = c.teacher.lr;
  j["teacher_clip"] = c.teacher.clip_norm;
  j["student_epochs"] = c.student.epochs;
  j["student_lr"] = c.student.lr;
  j["student_clip"] = c.student.clip_norm;
  j["student_pretrain_epochs"] = c.student_pretrain_epochs;
  j["batch_size"] = c.batch_size;
  j["momentum"] = c.momentum;
  j["warmup_fraction"] = c.warmup_fraction;
  j["student_select_best"] = c.student_select_best;
  j["scheme"] = to_string(c.scheme);
  j["alpha_rank"] = c.alpha_rank ? json(*c.alpha_rank) : json(nullptr);
  j["base_margin"] = c.pairwise.base_margin;
  j["sinkhorn_lambda"] = c.pairwise.lambda;
  j["sinkhorn_lambda_scale"] = c.pairwise.lambda_scale;
  j["sinkhorn_tol"] = c.pairwise.tolerance;
  j["sinkhorn_max_iters"] = c.pairwise.max_iterations;
  j["mc_passes"] = c.pairwise.mc_passes;
  j["truncate_k"] = c.pairwise.truncate_k;
  j["rescale_margins"] = c.pairwise.rescale;
  j["margin_mode"] = to_string(c.pairwise.mode);
  j["hot_size"] = c.listwise.plan.hot_size;
  j["cold_size"] = c.listwise.plan.cold_size;
  j["sampling"] = to_string(c.listwise.plan.scheme);
  j["sampling_smoothing"] = c.listwise.plan.smoothing;
  j["sampling_with_replacement"] = c.listwise.plan.with_replacement;
  j["listwise_loss"] = c.listwise.loss;
  j["stlistnet_beta"] = c.listwise.beta;
  j["lambda_sigma"] = c.listwise.sigma;
  j["lambda_mu"] = c.listwise.mu;
  j["smoothing_sigma"] = c.baseline.smoothing_sigma;
  j["pseudo_k"] = c.baseline.pseudo_k;
  j["kd_temperature"] = c.baseline.kd_temperature;
  j["student_init"] = to_string(c.student_init);
  j["seed"] = c.seed;
  j["eval_k"] = c.eval_k;
  j["graded_relevance"] = c.graded_relevance;
  return j;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  const json defaults = to_json(ExperimentConfig{});
  for (const auto& [k, v] : defaults.items()) keys.push_back(k);
  return keys;
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ArgumentError("config: field '" + key + "' has the wrong type");
  }
}

void assign(ExperimentConfig& c, const std::string& key, const json& v) {
  auto sz = [&] {
    if (v.is_number_integer() && v.get<long long>() < 0) throw ArgumentError("config: field '" + key + "' must be non-negative");
    if (v.is_number_float()) throw ArgumentError("config: field '" + key + "' must be an integer");
    return get_as<std::size_t>(v, key);
  };
  auto real = [&] { return get_as<double>(v, key); };
  auto flag = [&] { return get_as<bool>(v, key); };
  auto text = [&] { return get_as<std::string>(v, key); };

  if (key == "num_answers") c.task.num_answers = sz();
  else if (key == "feature_dim") c.task.feature_dim = sz();
  else if (key == "num_clusters") c.task.num_clusters = sz();
  else if (key == "min_positives") c.task.min_positives = sz();
  else if (key == "max_positives") c.task.max_positives = sz();
  else if (key == "label_noise") c.task.label_noise = real();
  else if (key == "feature_noise") c.task.feature_noise = real();
  else if (key == "answer_signal") c.task.answer_signal = real();
  else if (key == "train_size") c.task.train_size = sz();
  else if (key == "val_size") c.task.val_size = sz();
  else if (key == "test_size") c.task.test_size = sz();
  else if (key == "hidden_sizes") c.hidden_sizes = get_as<std::vector<std::size_t>>(v, key);
  else if (key == "dropout_rate") c.dropout_rate = real();
  else if (key == "teacher_epochs") c.teacher.epochs = sz();
  else if (key == "teacher_lr") c.teacher.lr = real();
  else if (key == "teacher_clip") c.teacher.clip_norm = real();
  else if (key == "student_epochs") c.student.epochs = sz();
  else if (key == "student_lr") c.student.lr = real();
  else if (key == "student_clip") c.student.clip_norm = real();
  else if (key == "student_pretrain_epochs") c.student_pretrain_epochs = sz();
  else if (key == "batch_size") c.batch_size = sz();
  else if (key == "momentum") c.momentum = real();
  else if (key == "warmup_fraction") c.warmup_fraction = real();
  else if (key == "student_select_best") c.student_select_best = flag();
  else if (key == "scheme") c.scheme = scheme_from_string(text());
  else if (key == "alpha_rank") c.alpha_rank = v.is_null() ? std::nullopt : std::optional<double>(real());
  else if (key == "base_margin") c.pairwise.base_margin = real();
  else if (key == "sinkhorn_lambda") c.pairwise.lambda = real();
  else if (key == "sinkhorn_lambda_scale") c.pairwise.lambda_scale = real();
  else if (key == "sinkhorn_tol") c.pairwise.tolerance = real();
  else if (key == "sinkhorn_max_iters") c.pairwise.max_iterations = sz();
  else if (key == "mc_passes") c.pairwise.mc_passes = sz();
  else if (key == "truncate_k") c.pairwise.truncate_k = sz();
  else if (key == "rescale_margins") c.pairwise.rescale = flag();
  else if (key == "margin_mode") c.pairwise.mode = margin_mode_from_string(text());
  else if (key == "hot_size") c.listwise.plan.hot_size = sz();
  else if (key == "cold_size") c.listwise.plan.cold_size = sz();
  else if (key == "sampling") c.listwise.plan.scheme = sampling_scheme_from_string(text());
  else if (key == "sampling_smoothing") c.listwise.plan.smoothing = real();
  else if (key == "sampling_with_replacement") c.listwise.plan.with_replacement = flag();
  else if (key == "listwise_loss") c.listwise.loss = text();
  else if (key == "stlistnet_beta") c.listwise.beta = real();
  else if (key == "lambda_sigma") c.listwise.sigma = real();
  else if (key == "lambda_mu") c.listwise.mu = real();
  else if (key == "smoothing_sigma") c.baseline.smoothing_sigma = real();
  else if (key == "pseudo_k") c.baseline.pseudo_k = sz();
  else if (key == "kd_temperature") c.baseline.kd_temperature = real();
  else if (key == "student_init") c.student_init = student_init_from_string(text());
  else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
  else if (key == "eval_k") c.eval_k = sz();
  else if (key == "graded_relevance") c.graded_relevance = flag();
  else throw ArgumentError("config: unknown field '" + key + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw ArgumentError("config: expected a JSON object");
  ExperimentConfig c = base;
  for (const auto& [key, value] : j.items()) assign(c, key, value);
  c.task.seed = c.seed;
  return c;
}

void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const json current = to_json(config);
  if (!current.contains(key)) throw ArgumentError("config: unknown field '" + key + "'");
  const json& slot = current.at(key);
  json parsed;
  if (slot.is_string()) {
    parsed = value;
  } else if (key == "alpha_rank" && (value == "null" || value == "auto")) {
    parsed = nullptr;
  } else {
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      throw ArgumentError("config: cannot parse value '" + value + "' for field '" + key + "'");
    }
  }
  config = config_from_json(json{{key, parsed}}, config);
}

std::uint64_t config_checksum(const ExperimentConfig& config) {
  return fnv1a(to_json(config).dump());
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace radi
