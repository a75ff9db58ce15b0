#include "jpsa/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jpsa {

namespace {

struct Grid {
  int width;
  int height;
  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
};

// SLIC feature space: leading PCA scores rescaled so the widest component
// spans 100 units.
Matrix slic_features(const Matrix& spectra, int components) {
  const auto n = spectra.cols();
  const int p = static_cast<int>(std::min<Eigen::Index>({components, spectra.rows(), n}));
  Matrix centered = spectra.colwise() - spectra.rowwise().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(centered * centered.transpose() / static_cast<double>(n));
  // Eigenvalues ascend; take the last p eigenvectors, largest first.
  Matrix basis(spectra.rows(), p);
  for (int i = 0; i < p; ++i) basis.col(i) = eig.eigenvectors().col(spectra.rows() - 1 - i);
  Matrix scores = basis.transpose() * centered;
  double widest = 0;
  for (int i = 0; i < p; ++i) widest = std::max(widest, scores.row(i).maxCoeff() - scores.row(i).minCoeff());
  if (widest > 1e-12) scores *= 100.0 / widest;
  else scores.setZero();
  return scores;
}

std::vector<SegmentCenter> seed_grid(const Matrix& feats, Grid g, int k) {
  int rows = std::clamp(static_cast<int>(std::lround(std::sqrt(static_cast<double>(k) * g.height / g.width))), 1,
                        std::min(g.height, k));
  // Grow the row count until no row needs more seeds than it has pixels.
  while ((k + rows - 1) / rows > g.width) ++rows;
  std::vector<SegmentCenter> centers;
  centers.reserve(k);
  const int base = k / rows;
  const int extra = k % rows;
  for (int r = 0; r < rows; ++r) {
    const int count = base + (r < extra ? 1 : 0);
    const double y = (r + 0.5) * g.height / rows - 0.5;
    for (int j = 0; j < count; ++j) {
      const double x = (j + 0.5) * g.width / count - 0.5;
      const int py = std::clamp(static_cast<int>(std::lround(y)), 0, g.height - 1);
      const int px = std::clamp(static_cast<int>(std::lround(x)), 0, g.width - 1);
      centers.push_back({y, x, feats.col(static_cast<Eigen::Index>(py) * g.width + px)});
    }
  }
  return centers;
}

// 4-connected components of equal label; returns component id per pixel.
std::vector<int> label_components(const std::vector<int>& labels, Grid g, int& n_components) {
  std::vector<int> comp(g.size(), -1);
  n_components = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < g.size(); ++start) {
    if (comp[start] >= 0) continue;
    comp[start] = n_components;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int r = static_cast<int>(p / g.width);
      const int c = static_cast<int>(p % g.width);
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {c, c, c - 1, c + 1};
      for (int t = 0; t < 4; ++t) {
        if (nr[t] < 0 || nr[t] >= g.height || nc[t] < 0 || nc[t] >= g.width) continue;
        const std::size_t q = static_cast<std::size_t>(nr[t]) * g.width + nc[t];
        if (comp[q] < 0 && labels[q] == labels[p]) {
          comp[q] = n_components;
          stack.push_back(q);
        }
      }
    }
    ++n_components;
  }
  return comp;
}

void enforce_connectivity(std::vector<int>& labels, Grid g, int n_labels) {
  // Each pass keeps the largest piece per label and merges every orphan that
  // touches some label's kept piece into it. Orphans bordering only other
  // orphans wait for a later pass; every merge removes a component.
  while (true) {
    int n_comp = 0;
    const auto comp = label_components(labels, g, n_comp);
    std::vector<std::size_t> comp_size(n_comp, 0);
    std::vector<int> comp_label(n_comp, -1);
    for (std::size_t p = 0; p < g.size(); ++p) {
      ++comp_size[comp[p]];
      comp_label[comp[p]] = labels[p];
    }
    // Ties keep the earliest piece in raster order.
    std::vector<int> keeper(n_labels, -1);
    for (int c = 0; c < n_comp; ++c) {
      int& k = keeper[comp_label[c]];
      if (k < 0 || comp_size[c] > comp_size[k]) k = c;
    }
    if (n_comp == static_cast<int>(std::count_if(keeper.begin(), keeper.end(), [](int k) { return k >= 0; }))) return;

    std::vector<std::size_t> label_size(n_labels, 0);
    for (int l : labels) ++label_size[l];
    std::vector<std::vector<std::size_t>> members(n_comp);
    for (std::size_t p = 0; p < g.size(); ++p) members[comp[p]].push_back(p);

    // Components are numbered in raster order of their first pixel.
    for (int c = 0; c < n_comp; ++c) {
      const int own = comp_label[c];
      if (keeper[own] == c) continue;
      int best = -1;
      for (std::size_t p : members[c]) {
        const int r = static_cast<int>(p / g.width);
        const int col = static_cast<int>(p % g.width);
        const int nr[4] = {r - 1, r + 1, r, r};
        const int nc[4] = {col, col, col - 1, col + 1};
        for (int t = 0; t < 4; ++t) {
          if (nr[t] < 0 || nr[t] >= g.height || nc[t] < 0 || nc[t] >= g.width) continue;
          const std::size_t q = static_cast<std::size_t>(nr[t]) * g.width + nc[t];
          const int other = comp_label[comp[q]];
          if (other == own || keeper[other] != comp[q]) continue;
          if (best < 0 || label_size[other] > label_size[best] ||
              (label_size[other] == label_size[best] && other < best)) {
            best = other;
          }
        }
      }
      if (best < 0) continue;
      for (std::size_t p : members[c]) labels[p] = best;
      label_size[own] -= members[c].size();
      label_size[best] += members[c].size();
    }
  }
}

}  // namespace

void Segmentation::validate() const {
  if (n_segments < 1) throw InputError("segmentation: no segments");
  std::vector<std::size_t> count(n_segments, 0);
  for (int l : labels) {
    if (l < 0 || l >= n_segments) throw InputError("segmentation: id " + std::to_string(l) + " out of range");
    ++count[l];
  }
  for (int s = 0; s < n_segments; ++s) {
    if (count[s] == 0) throw InputError("segmentation: segment " + std::to_string(s) + " is empty");
  }
}

std::vector<std::size_t> Segmentation::segment_sizes() const {
  std::vector<std::size_t> count(n_segments, 0);
  for (int l : labels) ++count[l];
  return count;
}

int superpixel_count(std::size_t n_pixels, double fraction) {
  if (n_pixels == 0) throw InputError("superpixel_count: no pixels");
  if (!(fraction > 0) || fraction > 1) throw InputError("superpixel fraction must lie in (0, 1]");
  const auto k = static_cast<long long>(std::llround(fraction * static_cast<double>(n_pixels)));
  return static_cast<int>(std::clamp<long long>(k, 1, static_cast<long long>(n_pixels)));
}

Segmentation slic_segment(const FeatureMatrix& cube, int width, int height, const SlicOptions& options) {
  const Grid g{width, height};
  if (width < 1 || height < 1) throw InputError("slic: image dimensions must be positive");
  if (static_cast<std::size_t>(cube.samples()) != g.size()) {
    throw InputError("slic: cube has " + std::to_string(cube.samples()) + " pixels, expected width*height = " +
                     std::to_string(g.size()));
  }
  const int k = options.n_segments;
  if (k < 1) throw InputError("slic: n_segments must be >= 1");
  if (static_cast<std::size_t>(k) > g.size()) {
    throw InputError("slic: n_segments " + std::to_string(k) + " exceeds pixel count " + std::to_string(g.size()));
  }
  if (!(options.compactness > 0)) throw InputError("slic: compactness must be > 0");

  const Matrix feats = slic_features(cube.values(), options.feature_components);
  const double step = std::sqrt(static_cast<double>(g.size()) / k);
  const double spatial_weight = options.compactness / step;
  auto centers = seed_grid(feats, g, k);

  auto distance2 = [&](const SegmentCenter& c, std::size_t p) {
    const double r = static_cast<double>(p / width) - c.row;
    const double col = static_cast<double>(p % width) - c.col;
    const double df = (feats.col(static_cast<Eigen::Index>(p)) - c.feature).squaredNorm();
    return df + (r * r + col * col) * spatial_weight * spatial_weight;
  };

  std::vector<int> labels(g.size(), -1);
  std::vector<double> best(g.size());
  const int radius = static_cast<int>(std::ceil(step));
  for (int iter = 0; iter < std::max(1, options.max_iters); ++iter) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    std::vector<int> next(g.size(), -1);
    for (int c = 0; c < k; ++c) {
      const int r0 = std::max(0, static_cast<int>(std::floor(centers[c].row)) - radius);
      const int r1 = std::min(height - 1, static_cast<int>(std::ceil(centers[c].row)) + radius);
      const int c0 = std::max(0, static_cast<int>(std::floor(centers[c].col)) - radius);
      const int c1 = std::min(width - 1, static_cast<int>(std::ceil(centers[c].col)) + radius);
      for (int r = r0; r <= r1; ++r) {
        for (int col = c0; col <= c1; ++col) {
          const std::size_t p = static_cast<std::size_t>(r) * width + col;
          const double d = distance2(centers[c], p);
          if (d < best[p]) {
            best[p] = d;
            next[p] = c;
          }
        }
      }
    }
    // Pixels outside every window fall back to a global search.
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (next[p] >= 0) continue;
      for (int c = 0; c < k; ++c) {
        const double d = distance2(centers[c], p);
        if (d < best[p]) {
          best[p] = d;
          next[p] = c;
        }
      }
    }
    const bool changed = next != labels;
    labels = std::move(next);

    std::vector<double> rs(k, 0), cs(k, 0);
    std::vector<std::size_t> counts(k, 0);
    Matrix fsum = Matrix::Zero(feats.rows(), k);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const int c = labels[p];
      rs[c] += static_cast<double>(p / width);
      cs[c] += static_cast<double>(p % width);
      fsum.col(c) += feats.col(static_cast<Eigen::Index>(p));
      ++counts[c];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[c]);
      centers[c].row = rs[c] * inv;
      centers[c].col = cs[c] * inv;
      centers[c].feature = fsum.col(c) * inv;
    }
    if (!changed) break;
  }

  enforce_connectivity(labels, g, k);

  // Compact ids preserving the original center order.
  std::vector<int> remap(k, -1);
  std::vector<bool> present(k, false);
  for (int l : labels) present[l] = true;
  int next_id = 0;
  for (int c = 0; c < k; ++c) {
    if (present[c]) remap[c] = next_id++;
  }
  Segmentation seg;
  seg.n_segments = next_id;
  seg.labels.resize(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) seg.labels[p] = remap[labels[p]];

  seg.centers.assign(seg.n_segments, SegmentCenter{0, 0, Vector::Zero(feats.rows())});
  const auto sizes = seg.segment_sizes();
  for (std::size_t p = 0; p < g.size(); ++p) {
    auto& c = seg.centers[seg.labels[p]];
    c.row += static_cast<double>(p / width);
    c.col += static_cast<double>(p % width);
    c.feature += feats.col(static_cast<Eigen::Index>(p));
  }
  for (int s = 0; s < seg.n_segments; ++s) {
    const double inv = 1.0 / static_cast<double>(sizes[s]);
    seg.centers[s].row *= inv;
    seg.centers[s].col *= inv;
    seg.centers[s].feature *= inv;
  }
  seg.validate();
  return seg;
}

FeatureMatrix superpixel_stream(const FeatureMatrix& cube, const Segmentation& seg) {
  if (static_cast<std::size_t>(cube.samples()) != seg.labels.size()) {
    throw InputError("superpixel_stream: segmentation covers " + std::to_string(seg.labels.size()) +
                     " pixels, cube has " + std::to_string(cube.samples()));
  }
  const Matrix& x = cube.values();
  Matrix sums = Matrix::Zero(x.rows(), seg.n_segments);
  std::vector<std::size_t> counts(seg.n_segments, 0);
  for (std::size_t p = 0; p < seg.labels.size(); ++p) {
    const int s = seg.labels[p];
    if (s < 0 || s >= seg.n_segments) throw InputError("superpixel_stream: invalid segment id");
    sums.col(s) += x.col(static_cast<Eigen::Index>(p));
    ++counts[s];
  }
  for (int s = 0; s < seg.n_segments; ++s) {
    if (counts[s] == 0) throw NumericalError("superpixel_stream: segment " + std::to_string(s) + " is empty");
    sums.col(s) /= static_cast<double>(counts[s]);
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t p = 0; p < seg.labels.size(); ++p) {
    out.col(static_cast<Eigen::Index>(p)) = sums.col(seg.labels[p]);
  }
  return FeatureMatrix(std::move(out), FeatureKind::superpixel_stream);
}

std::vector<int> stream_labels(std::span<const int> labels, const Segmentation& seg) {
  if (labels.size() != seg.labels.size()) throw InputError("stream_labels: length mismatch with segmentation");
  return {labels.begin(), labels.end()};
}

}  // namespace jpsa
