#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "radi/baselines.hpp"
#include "radi/config.hpp"
#include "radi/distill_core.hpp"
#include "radi/errors.hpp"
#include "radi/harness.hpp"
#include "radi/io.hpp"
#include "radi/listwise.hpp"
#include "radi/metrics.hpp"
#include "radi/pairwise.hpp"
#include "radi/synthdata.hpp"
#include "radi/version.hpp"

namespace py = pybind11;
using namespace radi;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

ExperimentConfig config_from(const py::object& o) {
  ExperimentConfig c = o.is_none() ? ExperimentConfig{} : config_from_json(from_python(o));
  c.validate();
  return c;
}

py::array_t<double> to_array(const DenseMatrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  }
  return out;
}

DenseMatrix from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::tuple loss_tuple(const LossValue& l) { return py::make_tuple(l.value, l.gradient); }

py::dict sublist_dict(const Sublist& s) {
  py::dict d;
  d["answer_ids"] = s.answer_ids;
  d["source_ranks"] = s.source_ranks;
  d["hot_count"] = s.hot_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Uncertainty-aware ranking distillation core";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def("top_k", [](const std::vector<double>& s, std::size_t k) { return top_k(s, k); }, py::arg("scores"),
        py::arg("k"));
  m.def(
      "acc_at_1", [](const std::vector<double>& s, const std::vector<std::size_t>& p) { return acc_at_1(s, p); },
      py::arg("scores"), py::arg("positives"));
  m.def(
      "hit_at_k",
      [](const std::vector<double>& s, const std::vector<std::size_t>& p, std::size_t k) { return hit_at_k(s, p, k); },
      py::arg("scores"), py::arg("positives"), py::arg("k") = kDefaultEvalK);
  m.def(
      "ndcg_at_k",
      [](const std::vector<double>& s, const std::vector<double>& rel, std::size_t k) { return ndcg_at_k(s, rel, k); },
      py::arg("scores"), py::arg("relevance"), py::arg("k") = kDefaultEvalK,
      "Returns None when every relevance is zero.");

  m.def(
      "pairwise_uncertainty",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& passes, std::size_t truncate_to) {
        const DenseMatrix a = from_array(passes);
        std::vector<ScoreVector> mc(a.rows());
        for (std::size_t t = 0; t < a.rows(); ++t) {
          for (std::size_t j = 0; j < a.cols(); ++j) mc[t].push_back(a(t, j));
        }
        const auto u = pairwise_uncertainty(mc, truncate_to);
        return py::make_tuple(to_array(u.matrix), u.answer_ids);
      },
      py::arg("mc_scores"), py::arg("truncate_to"),
      "Rows of mc_scores are dropout passes. Returns (U, answer_ids).");
  m.def(
      "sinkhorn",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& u, double lambda, double tol,
         std::size_t max_iters) {
        UncertaintyMatrix um{from_array(u), {}};
        for (std::size_t i = 0; i < um.matrix.rows(); ++i) um.answer_ids.push_back(i);
        const auto plan = sinkhorn_margins(um, lambda, tol, max_iters);
        py::dict d;
        d["plan"] = to_array(plan.matrix);
        d["iterations"] = plan.iterations;
        d["residual"] = plan.residual;
        return d;
      },
      py::arg("uncertainty"), py::arg("lam"), py::arg("tol") = kSinkhornTolerance,
      py::arg("max_iters") = kSinkhornMaxIterations);
  m.def(
      "default_sinkhorn_lambda",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& u, double scale) {
        return default_sinkhorn_lambda(UncertaintyMatrix{from_array(u), {}}, scale);
      },
      py::arg("uncertainty"), py::arg("scale") = 1.0);

  m.def(
      "classification_loss",
      [](const std::vector<double>& s, const std::vector<std::size_t>& labels) {
        return loss_tuple(classification_loss(s, labels));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "vanilla_kd_loss",
      [](const std::vector<double>& s, const std::vector<double>& t, double temperature) {
        return loss_tuple(vanilla_kd_loss(s, t, temperature));
      },
      py::arg("student_scores"), py::arg("teacher_scores"), py::arg("temperature") = 1.0);
  m.def(
      "sample_sublist",
      [](const std::vector<double>& teacher_scores, std::size_t hot, std::size_t cold, const std::string& scheme,
         double smoothing, std::uint64_t seed) {
        SamplingPlan plan;
        plan.hot_size = hot;
        plan.cold_size = cold;
        plan.scheme = sampling_scheme_from_string(scheme);
        plan.smoothing = smoothing;
        Rng rng(seed, 0);
        return sublist_dict(sample_sublist(teacher_ranking(teacher_scores), plan, rng));
      },
      py::arg("teacher_scores"), py::arg("hot_size"), py::arg("cold_size"), py::arg("scheme") = "zipf",
      py::arg("smoothing") = 1.0, py::arg("seed") = 0);
  m.def(
      "listwise_loss",
      [](const std::vector<double>& student, const std::vector<double>& teacher, const std::string& loss,
         std::size_t hot, std::size_t cold, std::uint64_t seed) {
        ListwiseOptions opt;
        opt.tag = listwise_loss_from_string(loss);
        opt.plan.hot_size = hot;
        opt.plan.cold_size = cold;
        Rng rng(seed, 0);
        return loss_tuple(listwise_rank_loss(student, teacher_ranking(teacher), opt, rng));
      },
      py::arg("student_scores"), py::arg("teacher_scores"), py::arg("loss") = "listmle", py::arg("hot_size") = 10,
      py::arg("cold_size") = 5, py::arg("seed") = 0);

  m.def("default_config", [] { return to_python(to_json(ExperimentConfig{})); });
  m.def("config_keys", &config_keys);
  m.def(
      "generate_data",
      [](const py::object& config) {
        const auto c = config_from(config);
        const auto data = make_datasets(c);
        py::dict d;
        d["task"] = to_python(task_to_json(c.task));
        for (const Dataset* ds : {&data.train, &data.val, &data.test}) {
          py::list rows;
          for (const auto& inst : ds->instances) {
            py::dict r;
            r["id"] = inst.id;
            r["features"] = inst.features;
            r["full_positives"] = inst.full_positives;
            r["revealed_positives"] = inst.revealed_positives;
            r["annotation_counts"] = inst.annotation_counts;
            rows.append(r);
          }
          d[py::str(to_string(ds->split))] = rows;
        }
        return d;
      },
      py::arg("config") = py::none());
  m.def(
      "run_experiment",
      [](const py::object& config, std::optional<std::filesystem::path> out_dir) {
        const auto c = config_from(config);
        RunRecord r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c, out_dir);
        }
        return to_python(to_json(r, false));
      },
      py::arg("config") = py::none(), py::arg("out_dir") = py::none());
  m.def(
      "run_sweep",
      [](const py::object& config, const std::string& axis, const std::vector<std::string>& values,
         std::optional<std::filesystem::path> out_dir) {
        const auto c = config_from(config);
        std::vector<SweepCell> cells;
        {
          py::gil_scoped_release release;
          cells = run_sweep(c, axis, values, out_dir);
        }
        py::list out;
        for (const auto& cell : cells) {
          py::dict d;
          d["value"] = cell.value;
          d["record"] = cell.record ? to_python(to_json(*cell.record, false)) : py::none();
          d["error"] = cell.error;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("axis"), py::arg("values"), py::arg("out_dir") = py::none());
}
