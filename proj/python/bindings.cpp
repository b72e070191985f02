#include "geointent/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

namespace py = pybind11;
using namespace geointent;

// Structured values cross the boundary as JSON text; the Python package wraps
// them with json.loads/json.dumps.

namespace {

PipelineConfig config_from(const std::string& text) {
  PipelineConfig c = nlohmann::json::parse(text, nullptr, true, true).get<PipelineConfig>();
  c.validate();
  return c;
}

Eigen::MatrixXd state_rows(const std::vector<FlightState>& states) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size()), 10);
  for (std::size_t k = 0; k < states.size(); ++k) {
    m(static_cast<Eigen::Index>(k), 0) = states[k].t;
    m.row(static_cast<Eigen::Index>(k)).tail<9>() = states[k].s.transpose();
  }
  return m;
}

ClassifierParams load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_params(is);
}

}  // namespace

PYBIND11_MODULE(_geointent, m) {
  m.doc() = "Geo-fence UAV intent inference core";

  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  m.def("cv_block", &cv_block, py::arg("period"));
  m.def("ca_block", &ca_block, py::arg("period"));
  m.def("ct3d_block", &ct3d_block, py::arg("omega"), py::arg("period"));
  m.def("hct_block", [](double w, double T) -> Eigen::MatrixXd { return hct_block(w, T); }, py::arg("omega"),
        py::arg("period"));

  m.def("softmax", &softmax, py::arg("logits"));
  m.def("loss_cce", &loss_cce, py::arg("y"), py::arg("y_hat"));
  m.def("loss_afl", &loss_afl, py::arg("y"), py::arg("y_hat"), py::arg("gamma"));

  m.def(
      "default_config",
      [](int dim, int per_intent) {
        nlohmann::json j = PipelineConfig::standard(dim, per_intent);
        return j.dump();
      },
      py::arg("dim") = 2, py::arg("per_intent") = 20);

  m.def(
      "normalize_config", [](const std::string& text) { return nlohmann::json(config_from(text)).dump(); },
      py::arg("config"));

  m.def(
      "generate_trajectory",
      [](const std::string& config, const std::string& intent, int index) {
        const GeneratedTrajectory g = generate_trajectory(config_from(config), intent, index);
        py::dict d;
        d["record"] = nlohmann::json(g.record).dump();
        d["truth"] = state_rows(g.trajectory.states);
        std::vector<FlightState> est;
        std::vector<int> segments;
        for (const auto& p : g.track) {
          est.push_back(p.estimate.state);
          segments.push_back(p.segment);
        }
        d["track"] = state_rows(est);
        d["segments"] = segments;
        std::size_t n = 0;
        for (const auto& l : g.looks) n += l.detections.size();
        d["detections"] = n;
        return d;
      },
      py::arg("config"), py::arg("intent"), py::arg("index"));

  m.def(
      "generate_dataset",
      [](const std::string& config, const std::string& out_dir) {
        const PipelineConfig c = config_from(config);
        DatasetManifest man;
        {
          py::gil_scoped_release release;
          man = generate_dataset(c, out_dir);
        }
        return nlohmann::json(man).dump();
      },
      py::arg("config"), py::arg("out_dir"));

  m.def(
      "run_experiment",
      [](const std::string& config, const std::string& dataset_dir, int window, const std::string& out_dir) {
        const PipelineConfig c = config_from(config);
        ExperimentOptions opt;
        if (!out_dir.empty()) opt.out_dir = out_dir;
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c, dataset_dir, window, opt);
        }
        return nlohmann::json(r).dump();
      },
      py::arg("config"), py::arg("dataset_dir"), py::arg("window"), py::arg("out_dir") = "");

  m.def(
      "predict",
      [](const std::string& model_path, const Eigen::MatrixXd& window) {
        return forward(load_model(model_path), window);
      },
      py::arg("model_path"), py::arg("window"));

  m.def(
      "infer_detections",
      [](const std::string& config, const std::string& model_path, const std::string& detections_csv) {
        const PipelineConfig c = config_from(config);
        const ClassifierParams p = load_model(model_path);
        std::ifstream is(detections_csv);
        if (!is) throw std::runtime_error("cannot open " + detections_csv);
        const auto series = infer_stream(p, read_detections_csv(is), c, p.arch.window());
        Eigen::MatrixXd out(static_cast<Eigen::Index>(series.size()), 1 + static_cast<Eigen::Index>(p.labels.size()));
        for (std::size_t k = 0; k < series.size(); ++k) {
          out(static_cast<Eigen::Index>(k), 0) = series[k].tau;
          out.row(static_cast<Eigen::Index>(k)).tail(series[k].posterior.size()) = series[k].posterior.transpose();
        }
        return py::make_tuple(p.labels, out);
      },
      py::arg("config"), py::arg("model_path"), py::arg("detections_csv"));
}
