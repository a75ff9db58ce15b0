#include "jpsa/harness.hpp"

#include "jpsa/graph.hpp"
#include "jpsa/init_embed.hpp"
#include "jpsa/io_formats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

namespace jpsa {

Method parse_method(const std::string& name) {
  if (name == "raw") return Method::raw;
  if (name == "pca") return Method::pca;
  if (name == "lpp") return Method::lpp;
  if (name == "jpsa") return Method::jpsa;
  throw InputError("unknown method '" + name + "' (expected raw, pca, lpp or jpsa)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::raw: return "raw";
    case Method::pca: return "pca";
    case Method::lpp: return "lpp";
    case Method::jpsa: return "jpsa";
  }
  return "?";
}

ConfigMap preset(const std::string& name) {
  ConfigMap m;
  if (name == "indian_pines" || name == "houston") {
    m.set("jpsa.alpha", "1");
    m.set("jpsa.beta", "0.1");
    m.set("jpsa.gamma", "0.1");
    m.set("jpsa.d", name == "houston" ? "30" : "20");
    return m;
  }
  throw InputError("unknown preset '" + name + "' (expected indian_pines or houston)");
}

std::map<std::string, std::vector<std::string>> default_grid() {
  const std::vector<std::string> steps{"10", "20", "30", "40", "50"};
  const std::vector<std::string> decades{"0.01", "0.1", "1", "10", "100"};
  return {{"jpsa.d", steps},        {"graph.k", steps},        {"graph.sigma", decades},
          {"jpsa.alpha", decades}, {"jpsa.beta", decades}, {"jpsa.gamma", decades}};
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "preset",           "method",          "seed",
      "out",              "data.header",     "data.payload",
      "data.labels",      "synthetic.width", "synthetic.height",
      "synthetic.bands",  "synthetic.classes", "synthetic.separation",
      "synthetic.noise",  "synthetic.blob_size", "synthetic.nuisance",
      "synthetic.nuisance_rank", "synthetic.proportions", "synthetic.seed",
      "split.train_per_class", "jpsa.alpha", "jpsa.beta",
      "jpsa.gamma",       "jpsa.eta",        "jpsa.m",
      "jpsa.d",           "jpsa.dims",       "jpsa.zeta",
      "jpsa.max_outer_iters", "graph.k",     "graph.sigma",
      "graph.include_unlabeled", "graph.max_unlabeled", "superpixel.fraction",
      "superpixel.compactness", "superpixel.max_iters", "admm.mu0",
      "admm.mu_max",      "admm.rho",        "admm.eps",
      "admm.max_iters",   "grid.budget",     "cv.folds",
      "threads"};
  return keys;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + io::format_real(v[i]);
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& raw) {
  ConfigMap m;
  if (auto name = raw.get("preset")) m = preset(*name);
  for (const auto& [k, v] : raw.entries()) {
    if (k.compare(0, 5, "grid.") != 0 && !known_keys().count(k)) throw InputError("unknown config key '" + k + "'");
    m.set(k, v);
  }

  ExperimentConfig c;
  c.settings = raw;
  c.method = parse_method(m.get_string("method", "jpsa"));
  {
    const int s = m.get_int("seed", 7);
    if (s < 0) throw InputError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  c.output_dir = m.get_string("out", "out");

  if (auto h = m.get("data.header")) {
    c.header_path = *h;
    auto p = m.get("data.payload");
    auto l = m.get("data.labels");
    if (!p || !l) throw InputError("data.header requires data.payload and data.labels");
    c.payload_path = *p;
    c.labels_path = *l;
  }

  auto& s = c.synthetic;
  s.width = m.get_int("synthetic.width", s.width);
  s.height = m.get_int("synthetic.height", s.height);
  s.bands = m.get_int("synthetic.bands", s.bands);
  s.n_classes = m.get_int("synthetic.classes", s.n_classes);
  s.separation = m.get_double("synthetic.separation", s.separation);
  s.noise = m.get_double("synthetic.noise", s.noise);
  s.blob_size = m.get_double("synthetic.blob_size", s.blob_size);
  s.nuisance = m.get_double("synthetic.nuisance", s.nuisance);
  s.nuisance_rank = m.get_int("synthetic.nuisance_rank", s.nuisance_rank);
  s.proportions = m.get_doubles("synthetic.proportions");
  s.seed = static_cast<std::uint64_t>(m.get_int("synthetic.seed", static_cast<int>(c.seed)));
  s.validate();

  c.train_per_class = m.get_int("split.train_per_class", c.train_per_class);
  if (c.train_per_class < 1) throw InputError("split.train_per_class must be >= 1");
  c.include_unlabeled = m.get_bool("graph.include_unlabeled", c.include_unlabeled);
  c.max_unlabeled = m.get_int("graph.max_unlabeled", c.max_unlabeled);
  if (c.max_unlabeled < 0) throw InputError("graph.max_unlabeled must be >= 0");

  auto& hp = c.hp;
  hp.alpha = m.get_double("jpsa.alpha", hp.alpha);
  hp.beta = m.get_double("jpsa.beta", hp.beta);
  hp.gamma = m.get_double("jpsa.gamma", hp.gamma);
  hp.eta = m.get_double("jpsa.eta", hp.beta);
  hp.zeta = m.get_double("jpsa.zeta", hp.zeta);
  hp.max_outer_iters = m.get_int("jpsa.max_outer_iters", hp.max_outer_iters);
  hp.knn_k = m.get_int("graph.k", hp.knn_k);
  hp.sigma = m.get_double("graph.sigma", hp.sigma);
  hp.superpixel_fraction = m.get_double("superpixel.fraction", hp.superpixel_fraction);
  if (m.contains("jpsa.dims")) {
    hp.dims = m.get_ints("jpsa.dims");
    hp.m = m.get_int("jpsa.m", static_cast<int>(hp.dims.size()));
    if (hp.m != static_cast<int>(hp.dims.size())) {
      throw InputError("jpsa.dims lists " + std::to_string(hp.dims.size()) + " sizes but jpsa.m = " +
                       std::to_string(hp.m));
    }
  } else {
    hp.m = m.get_int("jpsa.m", 1);
    if (hp.m < 1) throw InputError("jpsa.m must be >= 1");
    hp.dims.assign(static_cast<std::size_t>(hp.m), m.get_int("jpsa.d", 20));
  }
  hp.validate();

  auto& a = c.admm;
  a.mu0 = m.get_double("admm.mu0", a.mu0);
  a.mu_max = m.get_double("admm.mu_max", a.mu_max);
  a.rho = m.get_double("admm.rho", a.rho);
  a.eps = m.get_double("admm.eps", a.eps);
  a.max_iters = m.get_int("admm.max_iters", a.max_iters);
  a.validate();

  c.slic_compactness = m.get_double("superpixel.compactness", c.slic_compactness);
  c.slic_max_iters = m.get_int("superpixel.max_iters", c.slic_max_iters);
  if (!(c.slic_compactness > 0) || c.slic_max_iters < 1) {
    throw InputError("superpixel.compactness must be > 0 and superpixel.max_iters >= 1");
  }

  for (const auto& [k, v] : m.with_prefix("grid")) {
    if (k == "budget") continue;
    auto values = split_list(v);
    if (values.empty()) throw InputError("grid." + k + " has no candidates");
    if (!known_keys().count(k) || k.compare(0, 5, "grid.") == 0) throw InputError("grid key '" + k + "' is not a setting");
    c.grid[k] = std::move(values);
  }
  c.grid_budget = m.get_int("grid.budget", 0);
  if (c.grid_budget < 0) throw InputError("grid.budget must be >= 0");
  c.cv_folds = m.get_int("cv.folds", c.cv_folds);
  if (c.cv_folds < 2) throw InputError("cv.folds must be >= 2");
  c.threads = m.get_int("threads", 0);
  return c;
}

ExperimentConfig ExperimentConfig::with(const std::string& key, const std::string& value) const {
  ConfigMap m = settings;
  m.set(key, value);
  return from_map(m);
}

std::string ExperimentConfig::echo() const {
  ConfigMap e;
  e.set("method", to_string(method));
  e.set("seed", std::to_string(seed));
  e.set("out", output_dir.generic_string());
  if (header_path) {
    e.set("data.header", header_path->generic_string());
    e.set("data.payload", payload_path->generic_string());
    e.set("data.labels", labels_path->generic_string());
  } else {
    e.set("synthetic.width", std::to_string(synthetic.width));
    e.set("synthetic.height", std::to_string(synthetic.height));
    e.set("synthetic.bands", std::to_string(synthetic.bands));
    e.set("synthetic.classes", std::to_string(synthetic.n_classes));
    e.set("synthetic.separation", io::format_real(synthetic.separation));
    e.set("synthetic.noise", io::format_real(synthetic.noise));
    e.set("synthetic.blob_size", io::format_real(synthetic.blob_size));
    e.set("synthetic.nuisance", io::format_real(synthetic.nuisance));
    e.set("synthetic.nuisance_rank", std::to_string(synthetic.nuisance_rank));
    if (!synthetic.proportions.empty()) e.set("synthetic.proportions", join(synthetic.proportions));
    e.set("synthetic.seed", std::to_string(synthetic.seed));
  }
  e.set("split.train_per_class", std::to_string(train_per_class));
  e.set("graph.include_unlabeled", include_unlabeled ? "true" : "false");
  e.set("graph.max_unlabeled", std::to_string(max_unlabeled));
  e.set("graph.k", std::to_string(hp.knn_k));
  e.set("graph.sigma", io::format_real(hp.sigma));
  e.set("jpsa.alpha", io::format_real(hp.alpha));
  e.set("jpsa.beta", io::format_real(hp.beta));
  e.set("jpsa.gamma", io::format_real(hp.gamma));
  e.set("jpsa.eta", io::format_real(hp.eta));
  e.set("jpsa.m", std::to_string(hp.m));
  e.set("jpsa.dims", join(hp.dims));
  e.set("jpsa.zeta", io::format_real(hp.zeta));
  e.set("jpsa.max_outer_iters", std::to_string(hp.max_outer_iters));
  e.set("superpixel.fraction", io::format_real(hp.superpixel_fraction));
  e.set("superpixel.compactness", io::format_real(slic_compactness));
  e.set("superpixel.max_iters", std::to_string(slic_max_iters));
  e.set("admm.mu0", io::format_real(admm.mu0));
  e.set("admm.mu_max", io::format_real(admm.mu_max));
  e.set("admm.rho", io::format_real(admm.rho));
  e.set("admm.eps", io::format_real(admm.eps));
  e.set("admm.max_iters", std::to_string(admm.max_iters));
  for (const auto& [k, v] : grid) {
    std::string list;
    for (std::size_t i = 0; i < v.size(); ++i) list += (i ? "," : "") + v[i];
    e.set("grid." + k, list);
  }
  if (grid_budget > 0) e.set("grid.budget", std::to_string(grid_budget));
  e.set("cv.folds", std::to_string(cv_folds));
  return e.to_text();
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  Dataset d;
  if (cfg.header_path) {
    auto cube = io::load_cube(*cfg.header_path, *cfg.payload_path);
    d.labels = io::load_labels(*cfg.labels_path, cube.pixels());
    d.cube = std::move(cube.values);
    d.width = cube.width;
    d.height = cube.height;
    d.n_classes = d.labels.empty() ? 0 : *std::max_element(d.labels.begin(), d.labels.end());
    if (d.n_classes < 1) throw InputError("label file has no labeled pixels");
  } else {
    auto scene = generate_synthetic(cfg.synthetic);
    d.cube = std::move(scene.cube);
    d.labels = std::move(scene.labels);
    d.width = scene.width;
    d.height = scene.height;
    d.n_classes = cfg.synthetic.n_classes;
  }
  const double max_norm = d.cube.colwise().norm().maxCoeff();
  if (max_norm > 0) {
    d.scale = max_norm;
    d.cube /= max_norm;
  }
  return d;
}

SampleSplit make_split(std::span<const int> labels, int n_classes, int train_per_class, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  SampleSplit split;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l > n_classes) throw InputError("label " + std::to_string(l) + " at pixel " + std::to_string(i) +
                                                 " outside [0, " + std::to_string(n_classes) + "]");
    if (l == 0) {
      split.unlabeled_indices.push_back(i);
    } else {
      by_class[static_cast<std::size_t>(l - 1)].push_back(i);
    }
  }
  std::mt19937_64 rng(seed);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t keep_for_test = members.size() > 1 ? 1 : 0;
    const std::size_t take = std::min(static_cast<std::size_t>(train_per_class), members.size() - keep_for_test);
    split.train_indices.insert(split.train_indices.end(), members.begin(), members.begin() + take);
    split.test_indices.insert(split.test_indices.end(), members.begin() + take, members.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  split.validate(labels.size());
  return split;
}

Streams compute_streams(const Dataset& data, const ExperimentConfig& cfg) {
  SlicOptions opts;
  opts.n_segments = superpixel_count(data.pixels(), cfg.hp.superpixel_fraction);
  opts.compactness = cfg.slic_compactness;
  opts.max_iters = cfg.slic_max_iters;
  const FeatureMatrix cube(data.cube, FeatureKind::pixel);
  Streams s;
  s.seg = slic_segment(cube, data.width, data.height, opts);
  s.stream = superpixel_stream(cube, s.seg).values();
  return s;
}

namespace {

std::vector<int> labels_at(const Dataset& data, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data.labels[i]);
  return out;
}

// Evenly strided subset of at most `cap` entries.
std::vector<std::size_t> strided(std::span<const std::size_t> idx, std::size_t cap) {
  if (idx.size() <= cap) return {idx.begin(), idx.end()};
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cap; ++i) out.push_back(idx[i * idx.size() / cap]);
  return out;
}

}  // namespace

FittedModel fit_method(const Dataset& data, const Streams* streams, std::span<const std::size_t> train,
                       std::span<const std::size_t> unlabeled, const ExperimentConfig& cfg) {
  if (train.empty()) throw InputError("no training pixels");
  const Matrix x_train = select_columns(data.cube, train);
  const int d = cfg.final_dim();
  FittedModel out;
  switch (cfg.method) {
    case Method::raw:
      out.stack.thetas.push_back(Matrix::Identity(data.cube.rows(), data.cube.rows()));
      break;
    case Method::pca:
      out.stack.thetas.push_back(pca_fit(x_train, d).projection);
      break;
    case Method::lpp: {
      const int k = std::min<int>(cfg.hp.knn_k, static_cast<int>(train.size()) - 1);
      if (k < 1) throw InputError("lpp needs at least two training pixels");
      const SparseMatrix w = knn_heat_graph(x_train, k, cfg.hp.sigma);
      out.stack.thetas.push_back(lpp_fit(x_train, laplacian(w), degrees(w), d).projection);
      break;
    }
    case Method::jpsa: {
      if (streams == nullptr) throw InputError("jpsa needs superpixel streams");
      std::vector<std::size_t> cols(train.begin(), train.end());
      if (cfg.include_unlabeled) {
        const auto extra = strided(unlabeled, static_cast<std::size_t>(cfg.max_unlabeled));
        cols.insert(cols.end(), extra.begin(), extra.end());
      }
      std::vector<int> labels = labels_at(data, train);
      labels.resize(cols.size(), 0);
      std::vector<int> seg_of_col;
      seg_of_col.reserve(cols.size());
      for (auto c : cols) seg_of_col.push_back(streams->seg.labels[c]);

      HyperParams hp = cfg.hp;
      hp.knn_k = std::min<int>(hp.knn_k, static_cast<int>(cols.size()) - 1);
      if (hp.knn_k < 1) throw InputError("jpsa needs at least two graph columns");
      const FeatureMatrix pixels(select_columns(data.cube, cols), FeatureKind::pixel);
      const FeatureMatrix stream(select_columns(streams->stream, cols), FeatureKind::superpixel_stream);
      auto fit = jpsa_fit(pixels, stream, labels, seg_of_col, data.n_classes, hp, cfg.admm);
      out.stack = std::move(fit.stack);
      out.report = std::move(fit.report);
      break;
    }
  }
  out.stack.validate();
  return out;
}

MetricsReport evaluate_model(const Dataset& data, const ProjectionStack& stack, std::span<const std::size_t> train,
                             std::span<const std::size_t> test) {
  if (test.empty()) throw InputError("no test pixels");
  const Matrix t = stack.compose(1, stack.layers());
  const Matrix f_train = t * select_columns(data.cube, train);
  const Matrix f_test = t * select_columns(data.cube, test);
  const auto pred = nn_classify(f_train, labels_at(data, train), f_test);
  return metrics(confusion(labels_at(data, test), pred, data.n_classes));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
  ExperimentResult r;
  const Dataset data = run_stage("load", [&] { return load_dataset(cfg); });
  r.split = run_stage("split", [&] { return make_split(data.labels, data.n_classes, cfg.train_per_class, cfg.seed); });
  std::optional<Streams> streams;
  if (cfg.method == Method::jpsa) streams = run_stage("segment", [&] { return compute_streams(data, cfg); });
  r.model = run_stage("fit", [&] {
    return fit_method(data, streams ? &*streams : nullptr, r.split.train_indices, r.split.unlabeled_indices, cfg);
  });
  r.metrics = run_stage("evaluate", [&] {
    return evaluate_model(data, r.model.stack, r.split.train_indices, r.split.test_indices);
  });
  r.prediction_map = run_stage("transform", [&] {
    const Matrix t = r.model.stack.compose(1, r.model.stack.layers());
    return nn_classify(t * select_columns(data.cube, r.split.train_indices), labels_at(data, r.split.train_indices),
                       t * data.cube);
  });
  if (!write_outputs) return r;

  run_stage("write", [&] {
    const auto& dir = cfg.output_dir;
    auto put = [&](const std::string& name, std::string_view bytes) {
      io::write_file(dir / name, bytes);
      r.files.push_back(dir / name);
    };
    put("config.txt", cfg.echo());
    put("metrics.csv", r.metrics.csv_header() + r.metrics.csv_row());
    put("convergence.csv", r.model.report ? r.model.report->to_csv() : std::string("outer_iter,objective\n"));
    if (r.model.report) {
      for (std::size_t l = 0; l < r.model.report->init_reports.size(); ++l) {
        put("init_layer" + std::to_string(l + 1) + ".csv", r.model.report->init_reports[l].to_csv());
      }
    }
    put("model.bin", io::save_model(r.model.stack));
    const auto palette = io::ClassPalette::standard(data.n_classes);
    put("truth_map.ppm", io::render_class_map(data.labels, data.width, data.height, palette));
    put("prediction_map.ppm", io::render_class_map(r.prediction_map, data.width, data.height, palette));
  });
  return r;
}

namespace {

std::string csv_safe(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

double cross_validate(const ExperimentConfig& cfg, std::vector<double>& fold_oa) {
  const Dataset data = run_stage("load", [&] { return load_dataset(cfg); });
  const auto split = run_stage("split", [&] {
    return make_split(data.labels, data.n_classes, cfg.train_per_class, cfg.seed);
  });
  std::optional<Streams> streams;
  if (cfg.method == Method::jpsa) streams = run_stage("segment", [&] { return compute_streams(data, cfg); });

  // stratified fold assignment: shuffle each class, deal round-robin
  const std::size_t folds = std::min(static_cast<std::size_t>(cfg.cv_folds), split.train_indices.size());
  if (folds < 2) throw InputError("cross-validation needs at least two training pixels");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.n_classes));
  for (auto i : split.train_indices) by_class[static_cast<std::size_t>(data.labels[i] - 1)].push_back(i);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::vector<std::size_t>> fold_members(folds);
  std::size_t dealt = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) fold_members[dealt++ % folds].push_back(i);
  }

  fold_oa.clear();
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr;
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) tr.insert(tr.end(), fold_members[g].begin(), fold_members[g].end());
    }
    std::sort(tr.begin(), tr.end());
    auto te = fold_members[f];
    std::sort(te.begin(), te.end());
    const auto model = run_stage("fit", [&] {
      return fit_method(data, streams ? &*streams : nullptr, tr, split.unlabeled_indices, cfg);
    });
    fold_oa.push_back(run_stage("evaluate", [&] { return evaluate_model(data, model.stack, tr, te).oa; }));
  }
  double sum = 0;
  for (double v : fold_oa) sum += v;
  return sum / static_cast<double>(fold_oa.size());
}

}  // namespace

GridResult grid_search_cv(const ExperimentConfig& cfg) {
  if (cfg.grid.empty()) throw InputError("grid_search_cv: empty grid");
  std::vector<std::string> keys;
  std::vector<std::size_t> radix;
  std::uint64_t total = 1;
  for (const auto& [k, v] : cfg.grid) {
    if (v.empty()) throw InputError("grid_search_cv: grid." + k + " is empty");
    keys.push_back(k);
    radix.push_back(v.size());
    if (total > std::numeric_limits<std::uint64_t>::max() / v.size()) throw InputError("grid_search_cv: grid too large");
    total *= v.size();
  }
  std::vector<std::uint64_t> ids;
  if (cfg.grid_budget > 0 && total > static_cast<std::uint64_t>(cfg.grid_budget)) {
    const auto b = static_cast<std::uint64_t>(cfg.grid_budget);
    for (std::uint64_t i = 0; i < b; ++i) ids.push_back(static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(i) * total / b));
  } else {
    for (std::uint64_t i = 0; i < total; ++i) ids.push_back(i);
  }

  GridResult result;
  result.cells.resize(ids.size());
  for (std::size_t c = 0; c < ids.size(); ++c) {
    auto& cell = result.cells[c];
    cell.id = static_cast<int>(ids[c]);
    std::uint64_t rest = ids[c];
    for (std::size_t k = keys.size(); k-- > 0;) {
      cell.values[keys[k]] = cfg.grid.at(keys[k])[rest % radix[k]];
      rest /= radix[k];
    }
  }

  auto evaluate_cell = [&](GridCell& cell) {
    try {
      ConfigMap m = cfg.settings;
      for (const auto& [k, v] : cell.values) m.set(k, v);
      const auto cc = run_stage("config", [&] { return ExperimentConfig::from_map(m); });
      cell.mean_oa = cross_validate(cc, cell.fold_oa);
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.mean_oa = std::numeric_limits<double>::quiet_NaN();
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw, result.cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) evaluate_cell(result.cells[i]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& cell = result.cells[i];
    if (!cell.error.empty()) continue;
    if (result.best_index < 0 || cell.mean_oa > result.cells[static_cast<std::size_t>(result.best_index)].mean_oa) {
      result.best_index = static_cast<int>(i);
    }
  }
  if (result.best_index < 0) {
    throw InputError("grid_search_cv: every cell failed; first error: " + result.cells.front().error);
  }
  ConfigMap best = cfg.settings;
  for (const auto& [k, v] : result.best().values) best.set(k, v);
  result.best_config = ExperimentConfig::from_map(best);
  return result;
}

std::string GridResult::to_csv() const {
  std::string out = "cell";
  const std::vector<std::string> keys = [&] {
    std::vector<std::string> k;
    if (!cells.empty()) {
      for (const auto& [key, v] : cells.front().values) k.push_back(key);
    }
    return k;
  }();
  for (const auto& k : keys) out += "," + k;
  out += ",mean_oa,fold_oa,error\n";
  for (const auto& cell : cells) {
    out += std::to_string(cell.id);
    for (const auto& k : keys) out += "," + cell.values.at(k);
    out += "," + (cell.error.empty() ? io::format_real(cell.mean_oa) : std::string());
    out += ",";
    for (std::size_t i = 0; i < cell.fold_oa.size(); ++i) out += (i ? ";" : "") + io::format_real(cell.fold_oa[i]);
    out += "," + csv_safe(cell.error) + "\n";
  }
  return out;
}

std::vector<SweepRow> layer_sweep(const ExperimentConfig& cfg, const std::vector<int>& m_list) {
  if (m_list.empty()) throw InputError("layer_sweep: empty layer list");
  std::vector<SweepRow> rows;
  for (int m : m_list) {
    if (m < 1) throw InputError("layer_sweep: layer count must be >= 1, got " + std::to_string(m));
    ConfigMap s = cfg.settings;
    s.erase("jpsa.dims");
    s.set("jpsa.d", std::to_string(cfg.final_dim()));
    s.set("jpsa.m", std::to_string(m));
    s.set("method", "jpsa");
    const auto cc = run_stage("config", [&] { return ExperimentConfig::from_map(s); });
    rows.push_back({m, run_experiment(cc, false).metrics});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "m,oa,aa,kappa\n";
  for (const auto& r : rows) {
    out += std::to_string(r.m) + "," + io::format_real(r.metrics.oa) + "," + io::format_real(r.metrics.aa) + "," +
           io::format_real(r.metrics.kappa) + "\n";
  }
  return out;
}

}  // namespace jpsa
