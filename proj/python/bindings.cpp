#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sinreq/analyze.hpp"
#include "sinreq/config.hpp"
#include "sinreq/dataset.hpp"
#include "sinreq/errors.hpp"
#include "sinreq/experiment.hpp"
#include "sinreq/quantize.hpp"
#include "sinreq/regularizer.hpp"
#include "sinreq/schedule.hpp"

namespace py = pybind11;
using namespace sinreq;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  if (a.ndim() == 0) shape = {1};
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

QuantizerSpec spec_of(const std::string& scheme, int bits) {
  QuantizerSpec s{parse_scheme(scheme), bits};
  validate(s);
  return s;
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["epoch"] = r.epoch;
  d["train_acc"] = r.train_acc;
  d["val_acc"] = r.val_acc;
  d["task_loss"] = r.task_loss;
  d["total_loss"] = r.total_loss;
  py::dict layers;
  for (const auto& [name, l] : r.per_layer) {
    py::dict ld;
    ld["sinreq_loss"] = l.sinreq_loss;
    ld["lambda_q"] = l.lambda_q;
    ld["quant_error"] = l.quant_error;
    ld["frac_near_level"] = l.frac_near_level;
    layers[py::str(name)] = ld;
  }
  d["per_layer"] = layers;
  py::dict traj;
  for (const auto& [name, pts] : r.trajectories) traj[py::str(name)] = pts;
  d["trajectories"] = traj;
  return d;
}

// An empty path disables file output.
std::filesystem::path out_path(const std::optional<std::string>& dir) {
  return dir ? std::filesystem::path(*dir) : std::filesystem::path();
}

}  // namespace

PYBIND11_MODULE(_sinreq, m) {
  m.doc() = "SinReQ quantization-aware training core";

  static py::exception<Error> error(m, "SinReQError", PyExc_RuntimeError);
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      PyErr_SetString(parse_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def(
      "level_geometry",
      [](const std::string& scheme, int bits) {
        const LevelGeometry g = level_geometry(spec_of(scheme, bits));
        py::dict d;
        d["levels"] = py::array_t<double>(static_cast<py::ssize_t>(g.levels.size()), g.levels.data());
        d["period"] = g.period;
        d["delta"] = g.delta;
        return d;
      },
      py::arg("scheme"), py::arg("bits"));

  m.def("dorefa_quantize", [](const Array& w, int bits) { return to_array(dorefa_quantize(to_tensor(w), bits)); },
        py::arg("w"), py::arg("bits"));
  m.def("wrpn_quantize", [](const Array& w, int bits) { return to_array(wrpn_quantize(to_tensor(w), bits)); },
        py::arg("w"), py::arg("bits"));
  m.def(
      "quantize",
      [](const Array& w, const std::string& scheme, int bits) {
        return to_array(quantize(to_tensor(w), spec_of(scheme, bits)));
      },
      py::arg("w"), py::arg("scheme"), py::arg("bits"));
  m.def(
      "snap_to_levels",
      [](const Array& w, const std::string& scheme, int bits) {
        return to_array(snap_to_levels(to_tensor(w), level_geometry(spec_of(scheme, bits))));
      },
      py::arg("w"), py::arg("scheme"), py::arg("bits"));

  m.def(
      "sinreq_loss",
      [](const Array& w, const std::string& scheme, int bits) {
        Graph g;
        const NodeId leaf = g.leaf(to_tensor(w));
        const NodeId loss = sinreq_loss(g, leaf, level_geometry(spec_of(scheme, bits)));
        g.backward(loss);
        Tensor grad(g.value(leaf).shape(), std::vector<double>(g.grad(leaf).begin(), g.grad(leaf).end()));
        return py::make_tuple(g.value(loss).item(), to_array(grad));
      },
      py::arg("w"), py::arg("scheme"), py::arg("bits"), "Loss value and its gradient with respect to w.");
  m.def(
      "weight_decay_loss",
      [](const std::vector<Array>& weights, double lambda_wd) {
        Graph g;
        std::vector<NodeId> ids;
        for (const Array& w : weights) ids.push_back(g.leaf(to_tensor(w)));
        return g.value(weight_decay_loss(g, ids, lambda_wd)).item();
      },
      py::arg("weights"), py::arg("lambda_wd"));

  m.def(
      "lambda_at",
      [](const std::string& kind, double start, double end, std::int64_t horizon, std::int64_t step) {
        if (kind != "constant" && kind != "exponential") throw ParameterError("unknown schedule kind '" + kind + "'");
        const LambdaSchedule s = kind == "constant" ? LambdaSchedule::constant(start)
                                                    : LambdaSchedule::exponential(start, end, horizon);
        return lambda_at(s, step);
      },
      py::arg("kind"), py::arg("start"), py::arg("end") = 0.0, py::arg("horizon") = 1, py::arg("step"));

  m.def(
      "quant_error",
      [](const Array& w, const std::string& scheme, int bits) {
        return quant_error(to_tensor(w), level_geometry(spec_of(scheme, bits)));
      },
      py::arg("w"), py::arg("scheme"), py::arg("bits"));
  m.def(
      "frac_near_level",
      [](const Array& w, const std::string& scheme, int bits, double eps_fraction) {
        return frac_near_level(to_tensor(w), level_geometry(spec_of(scheme, bits)), eps_fraction);
      },
      py::arg("w"), py::arg("scheme"), py::arg("bits"), py::arg("eps_fraction") = 0.05);
  m.def(
      "histogram",
      [](const Array& w, std::size_t bins, double lo, double hi) { return histogram(to_tensor(w), bins, lo, hi); },
      py::arg("w"), py::arg("bins"), py::arg("lo"), py::arg("hi"));

  m.def(
      "load_idx",
      [](const std::string& images, const std::string& labels, std::size_t classes) {
        const Dataset d = load_idx(images, labels, classes);
        return py::make_tuple(to_array(d.features), py::array_t<int>(static_cast<py::ssize_t>(d.labels.size()), d.labels.data()));
      },
      py::arg("images"), py::arg("labels"), py::arg("classes") = 10);
  m.def(
      "write_idx",
      [](const Array& features, const std::vector<int>& labels, std::size_t classes) {
        Dataset d{to_tensor(features), labels, classes, std::nullopt};
        auto [img, lab] = write_idx(d);
        return py::make_tuple(py::bytes(img), py::bytes(lab));
      },
      py::arg("features"), py::arg("labels"), py::arg("classes") = 10);

  m.def("normalize_config", [](const std::string& text) { return dump_config(parse_config(text)); },
        py::arg("config_json"), "Parses, validates and re-serializes a config with every field explicit.");

  m.def(
      "train",
      [](const std::string& config_json, const std::optional<std::string>& output_dir) {
        const TrainOutcome out = run_train(parse_config(config_json), out_path(output_dir));
        py::list records;
        for (const RunRecord& r : out.records) records.append(record_dict(r));
        py::dict d;
        d["records"] = records;
        if (out.quantized) {
          d["pre_snap"] = out.quantized->pre_snap;
          d["post_snap"] = out.quantized->post_snap;
        }
        return d;
      },
      py::arg("config_json"), py::arg("output_dir") = std::nullopt,
      "Runs an experiment; with no output_dir nothing is written to disk.");
  m.def(
      "evaluate",
      [](const std::string& checkpoint, const std::string& config_json) {
        return run_eval(checkpoint, parse_config(config_json));
      },
      py::arg("checkpoint"), py::arg("config_json"));
  m.def(
      "paired",
      [](const std::string& config_json, const std::optional<std::string>& output_dir) {
        return run_paired(parse_config(config_json), out_path(output_dir)).json;
      },
      py::arg("config_json"), py::arg("output_dir") = std::nullopt);
}
