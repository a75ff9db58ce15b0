// jpsa command line: data generation, segmentation, fitting, evaluation,
// grid search and layer sweeps driven by key=value config files.

#include "jpsa/harness.hpp"
#include "jpsa/io_formats.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace {

using namespace jpsa;
namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> seed;
  std::string out;
  bool include_unlabeled = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "extra key=value setting (repeatable)");
  cmd->add_option("--seed", c.seed, "master seed (split and synthetic scene)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_flag("--include-unlabeled-in-graph", c.include_unlabeled, "add label-0 pixels to the fused graph");
}

ExperimentConfig resolve(const Common& c) {
  return run_stage("config", [&] {
    ConfigMap m = c.config_path.empty() ? ConfigMap{} : ConfigMap::load(c.config_path);
    for (const auto& kv : c.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
      m.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) m.set("seed", std::to_string(*c.seed));
    if (!c.out.empty()) m.set("out", c.out);
    if (c.include_unlabeled) m.set("graph.include_unlabeled", "true");
    return ExperimentConfig::from_map(m);
  });
}

void print_metrics(const MetricsReport& r) {
  std::cout << "OA=" << io::format_real(r.oa) << " AA=" << io::format_real(r.aa)
            << " kappa=" << io::format_real(r.kappa) << "\n";
}

int cmd_generate(const ExperimentConfig& cfg) {
  const auto scene = run_stage("generate", [&] { return generate_synthetic(cfg.synthetic); });
  run_stage("write", [&] {
    const auto& d = cfg.output_dir;
    io::save_cube(d / "cube.json", d / "cube.bin", scene.cube, scene.width, scene.height);
    io::save_labels(d / "labels.txt", scene.labels);
    io::write_file(d / "truth_map.ppm",
                   io::render_class_map(scene.labels, scene.width, scene.height,
                                        io::ClassPalette::standard(cfg.synthetic.n_classes)));
  });
  std::cout << "wrote " << scene.width << "x" << scene.height << "x" << cfg.synthetic.bands << " cube to "
            << cfg.output_dir.generic_string() << "\n";
  return 0;
}

int cmd_segment(const ExperimentConfig& cfg) {
  const auto data = run_stage("load", [&] { return load_dataset(cfg); });
  const auto streams = run_stage("segment", [&] { return compute_streams(data, cfg); });
  run_stage("write", [&] {
    std::vector<int> ids(streams.seg.labels.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = streams.seg.labels[i] + 1;
    io::save_labels(cfg.output_dir / "segments.txt", streams.seg.labels);
    io::write_file(cfg.output_dir / "segments.ppm",
                   io::render_class_map(ids, data.width, data.height,
                                        io::ClassPalette::standard(streams.seg.n_segments)));
  });
  std::cout << streams.seg.n_segments << " segments\n";
  return 0;
}

int cmd_fit(const ExperimentConfig& cfg) {
  const auto data = run_stage("load", [&] { return load_dataset(cfg); });
  const auto split = run_stage("split", [&] {
    return make_split(data.labels, data.n_classes, cfg.train_per_class, cfg.seed);
  });
  std::optional<Streams> streams;
  if (cfg.method == Method::jpsa) streams = run_stage("segment", [&] { return compute_streams(data, cfg); });
  const auto model = run_stage("fit", [&] {
    return fit_method(data, streams ? &*streams : nullptr, split.train_indices, split.unlabeled_indices, cfg);
  });
  run_stage("write", [&] {
    const auto& d = cfg.output_dir;
    io::write_file(d / "config.txt", cfg.echo());
    io::write_file(d / "model.bin", io::save_model(model.stack));
    io::write_file(d / "convergence.csv",
                   model.report ? model.report->to_csv() : std::string("outer_iter,objective\n"));
  });
  if (model.report) {
    std::cout << "outer iterations: " << model.report->outer_iterations << ", final objective "
              << io::format_real(model.report->objective_trace.back()) << "\n";
  }
  return 0;
}

int cmd_transform(const std::string& model_path, const std::string& header, const std::string& payload,
                  const fs::path& out) {
  const auto stack = run_stage("load", [&] { return io::load_model(io::read_file(model_path)); });
  const auto cube = run_stage("load", [&] { return io::load_cube(header, payload); });
  const auto feats = run_stage("transform", [&] { return transform(stack, cube.features()); });
  run_stage("write", [&] {
    io::save_cube(out / "features.json", out / "features.bin", feats.values(), cube.width, cube.height);
  });
  std::cout << "projected " << cube.pixels() << " pixels to " << feats.dim() << " dimensions\n";
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg) {
  const auto r = run_experiment(cfg);
  print_metrics(r.metrics);
  return 0;
}

int cmd_grid(ExperimentConfig cfg, std::optional<int> budget) {
  if (cfg.grid.empty()) {
    for (const auto& [k, v] : default_grid()) {
      std::string list;
      for (std::size_t i = 0; i < v.size(); ++i) list += (i ? "," : "") + v[i];
      cfg.settings.set("grid." + k, list);
    }
  }
  if (budget) cfg.settings.set("grid.budget", std::to_string(*budget));
  cfg = run_stage("config", [&] { return ExperimentConfig::from_map(cfg.settings); });
  const auto result = run_stage("grid", [&] { return grid_search_cv(cfg); });
  run_stage("write", [&] {
    io::write_file(cfg.output_dir / "grid.csv", result.to_csv());
    io::write_file(cfg.output_dir / "best_config.txt", result.best_config.echo());
  });
  std::cout << "best cell " << result.best().id << " mean CV OA " << io::format_real(result.best().mean_oa);
  for (const auto& [k, v] : result.best().values) std::cout << " " << k << "=" << v;
  std::cout << "\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::vector<int>& layers) {
  const auto rows = layer_sweep(cfg, layers);
  run_stage("write", [&] { io::write_file(cfg.output_dir / "layers.csv", sweep_csv(rows)); });
  std::cout << sweep_csv(rows);
  return 0;
}

int cmd_render(const std::string& labels_path, int width, int height, int classes, const fs::path& out) {
  const auto labels = run_stage("load", [&] {
    return io::load_labels(labels_path, static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  });
  run_stage("render", [&] {
    int n = classes;
    if (n <= 0) n = std::max(1, *std::max_element(labels.begin(), labels.end()));
    io::write_file(out, io::render_class_map(labels, width, height, io::ClassPalette::standard(n)));
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint and progressive subspace analysis for hyperspectral dimensionality reduction"};
  app.require_subcommand(1);

  Common gen_opts, seg_opts, fit_opts, eval_opts, grid_opts, sweep_opts;
  auto* gen = app.add_subcommand("generate", "write a synthetic scene (cube.json, cube.bin, labels.txt)");
  add_common(gen, gen_opts);
  auto* seg = app.add_subcommand("segment", "SLIC superpixels of the configured scene");
  add_common(seg, seg_opts);
  auto* fit = app.add_subcommand("fit", "learn the projection stack and write model.bin");
  add_common(fit, fit_opts);
  auto* eval = app.add_subcommand("evaluate", "full pipeline with metrics, traces and maps");
  add_common(eval, eval_opts);
  auto* grid = app.add_subcommand("grid", "cross-validated grid search");
  add_common(grid, grid_opts);
  std::optional<int> grid_budget;
  grid->add_option("--grid-budget", grid_budget, "evaluate at most this many cells")->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep-layers", "evaluate jpsa for several layer counts");
  add_common(sweep, sweep_opts);
  std::vector<int> sweep_layers{1, 2, 3, 4, 5, 6, 7, 8};
  sweep->add_option("--layers", sweep_layers, "layer counts")->delimiter(',');

  auto* tr = app.add_subcommand("transform", "project a cube with a saved model");
  std::string model_path, header, payload, tr_out = "out";
  tr->add_option("--model", model_path, "model.bin")->required()->check(CLI::ExistingFile);
  tr->add_option("--header", header, "cube header (json)")->required()->check(CLI::ExistingFile);
  tr->add_option("--payload", payload, "cube payload")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "output directory");

  auto* render = app.add_subcommand("render-map", "render a label file as a PPM class map");
  std::string labels_path, render_out = "map.ppm";
  int width = 0, height = 0, classes = 0;
  render->add_option("--labels", labels_path, "label file")->required()->check(CLI::ExistingFile);
  render->add_option("--width", width)->required()->check(CLI::PositiveNumber);
  render->add_option("--height", height)->required()->check(CLI::PositiveNumber);
  render->add_option("--classes", classes, "palette size (default: largest label)");
  render->add_option("--out", render_out, "output .ppm file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(resolve(gen_opts));
    if (*seg) return cmd_segment(resolve(seg_opts));
    if (*fit) return cmd_fit(resolve(fit_opts));
    if (*eval) return cmd_evaluate(resolve(eval_opts));
    if (*grid) return cmd_grid(resolve(grid_opts), grid_budget);
    if (*sweep) return cmd_sweep(resolve(sweep_opts), sweep_layers);
    if (*tr) return cmd_transform(model_path, header, payload, tr_out);
    if (*render) return cmd_render(labels_path, width, height, classes, render_out);
  } catch (const StageError& e) {
    std::cerr << "jpsa: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "jpsa: [" << app.get_subcommands().front()->get_name() << "] " << e.what() << "\n";
    return 2;
  }
  return 1;
}
