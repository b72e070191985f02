#include "geointent/pipeline.hpp"

#include <CLI11.hpp>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>

namespace fs = std::filesystem;
using namespace geointent;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  int dim = 2;
  std::vector<int> windows;
  std::optional<double> overlap;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--dim", o.dim, "Dimensionality when no config is given")->check(CLI::IsMember({2, 3}));
  cmd->add_option("--window", o.windows, "Window length(s) in steps");
  cmd->add_option("--overlap", o.overlap, "Fractional overlap of adjacent windows")->check(CLI::Range(0.0, 0.99));
}

PipelineConfig resolve(const CommonOptions& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig::standard(o.dim) : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.windows.empty()) c.windows = o.windows;
  if (o.overlap) c.overlap = *o.overlap;
  c.validate();
  return c;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

int single_window(const PipelineConfig& c) {
  if (c.windows.size() != 1) throw std::runtime_error("select one window with --window");
  return c.windows.front();
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training reallocates the same large activation buffers every batch; keep
  // them on the heap instead of round-tripping through mmap.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  CLI::App app{"Geo-fence UAV intent inference toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out, input, model, dataset, label = "unknown", id = "stream";
  bool emit_plots = false, intrusion = false;

  auto* gen = app.add_subcommand("generate", "Generate a labelled dataset");
  add_common(gen, common);
  gen->add_option("--out", out, "Dataset directory")->required();

  auto* trk = app.add_subcommand("track", "Run the IMM tracker over a detection CSV");
  add_common(trk, common);
  trk->add_option("--detections", input, "Detection CSV")->required()->check(CLI::ExistingFile);
  trk->add_option("--out", out, "Track CSV")->required();

  auto* feat = app.add_subcommand("features", "Cut a track CSV into feature windows");
  add_common(feat, common);
  feat->add_option("--track", input, "Track CSV")->required()->check(CLI::ExistingFile);
  feat->add_option("--label", label, "Intent label written to each window");
  feat->add_option("--id", id, "Trajectory id written to each window");
  feat->add_flag("--intrusion", intrusion, "Mark the windows as coming from an intruding trajectory");
  feat->add_option("--out", out, "Windows CSV")->required();

  auto* tr = app.add_subcommand("train", "Train and validate over random splits");
  add_common(tr, common);
  tr->add_option("--dataset", dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", out, "Output directory for models and reports")->required();
  tr->add_flag("--emit-plots", emit_plots, "Write training-history and posterior CSVs");

  auto* ev = app.add_subcommand("eval", "Evaluate a trained model on a dataset");
  add_common(ev, common);
  ev->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  ev->add_option("--dataset", dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);

  auto* inf = app.add_subcommand("infer", "Posterior evolution over a detection stream");
  add_common(inf, common);
  inf->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  inf->add_option("--detections", input, "Detection CSV")->required()->check(CLI::ExistingFile);
  inf->add_option("--out", out, "Posterior CSV (stdout when omitted)");

  auto* rep = app.add_subcommand("report", "Summarize report_W*.json files of a training run");
  rep->add_option("--out", out, "Directory holding the reports")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const PipelineConfig c = resolve(common);
      const DatasetManifest m = generate_dataset(c, out);
      std::map<std::string, std::pair<int, int>> counts;
      for (const auto& r : m.records) {
        auto& [kept, intruding] = counts[r.intent];
        if (r.skipped) continue;
        ++kept;
        if (r.intrusion_time != kNeverIntrudes) ++intruding;
      }
      for (const auto& [intent, n] : counts) {
        std::cout << intent << ": " << n.first << " trajectories, " << n.second << " intrude\n";
      }
    } else if (trk->parsed()) {
      const PipelineConfig c = resolve(common);
      auto is = open_in(input);
      const auto track = run_tracker(read_detections_csv(is), c.radar, c.tracker);
      auto os = open_out(out);
      write_track_csv(os, track);
    } else if (feat->parsed()) {
      const PipelineConfig c = resolve(common);
      auto is = open_in(input);
      const auto track = read_track_csv(is);
      const auto windows = extract_features(track, c.dim, single_window(c), c.overlap, label, id, intrusion);
      auto os = open_out(out);
      write_windows_csv(os, windows);
    } else if (tr->parsed()) {
      PipelineConfig c = resolve(common);
      if (common.windows.empty()) {
        const auto m = read_manifest(dataset);
        c.windows = m.window_sizes;
      }
      for (int w : c.windows) {
        ExperimentOptions opt;
        opt.out_dir = fs::path(out);
        opt.emit_plots = emit_plots;
        const auto r = run_experiment(c, dataset, w, opt);
        std::cout << "W=" << w << " accuracy " << std::fixed << std::setprecision(2) << 100.0 * r.mean_accuracy
                  << "% +- " << 100.0 * r.std_accuracy << " over " << r.split_accuracies.size() << " splits\n";
      }
    } else if (ev->parsed()) {
      auto is = open_in(model);
      const ClassifierParams p = read_params(is);
      const auto m = read_manifest(dataset);
      const auto windows = load_windows(dataset, m, p.arch.window());
      std::vector<const FeatureWindow*> ptrs;
      for (const auto& w : windows) ptrs.push_back(&w);
      const auto e = evaluate(p, make_labeled_set(ptrs, p.labels, m.intrusion_times()));
      nlohmann::json j{{"window", p.arch.window()}, {"windows", windows.size()}, {"accuracy", e.accuracy}};
      std::vector<std::vector<double>> conf;
      for (Eigen::Index r = 0; r < e.confusion.rows(); ++r) conf.emplace_back(e.confusion.row(r).begin(), e.confusion.row(r).end());
      j["confusion"] = conf;
      j["labels"] = p.labels;
      std::cout << j.dump(2) << "\n";
    } else if (inf->parsed()) {
      const PipelineConfig c = resolve(common);
      auto ms = open_in(model);
      const ClassifierParams p = read_params(ms);
      auto is = open_in(input);
      const auto series = infer_stream(p, read_detections_csv(is), c, p.arch.window());
      if (out.empty()) {
        write_posterior_csv(std::cout, series, p.labels);
      } else {
        auto os = open_out(out);
        write_posterior_csv(os, series, p.labels);
      }
    } else if (rep->parsed()) {
      const std::regex name("report_W([0-9]+)\\.json");
      std::map<int, nlohmann::json> reports;
      for (const auto& e : fs::directory_iterator(out)) {
        std::smatch m;
        const std::string f = e.path().filename().string();
        if (std::regex_match(f, m, name)) {
          std::ifstream is(e.path());
          reports[std::stoi(m[1])] = nlohmann::json::parse(is);
        }
      }
      if (reports.empty()) throw std::runtime_error("no report_W*.json in " + out);
      auto os = open_out(fs::path(out) / "summary.csv");
      os << "window,mean_accuracy,std_accuracy,splits,expected_cost,intrusion_cost\n";
      std::cout << std::left << std::setw(8) << "W" << std::setw(12) << "mean %" << std::setw(10) << "std %"
                << "cost\n";
      for (const auto& [w, j] : reports) {
        const double mean = j.at("mean_accuracy"), sd = j.at("std_accuracy"), cost = j.at("expected_misclassification_cost");
        os << w << ',' << mean << ',' << sd << ',' << j.at("split_accuracies").size() << ',' << cost << ','
           << j.at("intrusion_cost").get<double>() << '\n';
        std::cout << std::setw(8) << w << std::setw(12) << std::fixed << std::setprecision(2) << 100.0 * mean
                  << std::setw(10) << 100.0 * sd << std::setprecision(4) << cost << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
