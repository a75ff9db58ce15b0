#include "jpsa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace jpsa {

void SyntheticSpec::validate() const {
  if (width < 1 || height < 1 || bands < 1) throw InputError("synthetic: width, height and bands must be positive");
  if (n_classes < 1) throw InputError("synthetic: n_classes must be positive");
  if (static_cast<long>(n_classes) > static_cast<long>(width) * height) {
    throw InputError("synthetic: more classes than pixels");
  }
  if (!(separation >= 0) || !(noise >= 0) || !(nuisance >= 0)) {
    throw InputError("synthetic: separation, noise and nuisance must be >= 0");
  }
  if (!(blob_size > 0)) throw InputError("synthetic: blob_size must be > 0");
  if (nuisance_rank < 0) throw InputError("synthetic: nuisance_rank must be >= 0");
  if (!proportions.empty()) {
    if (proportions.size() != static_cast<std::size_t>(n_classes)) {
      throw InputError("synthetic: " + std::to_string(proportions.size()) + " proportions for " +
                       std::to_string(n_classes) + " classes");
    }
    for (double p : proportions) {
      if (!(p > 0) || !std::isfinite(p)) throw InputError("synthetic: proportions must be positive");
    }
  }
}

std::vector<std::size_t> class_counts(const SyntheticSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);
  const auto c = static_cast<std::size_t>(spec.n_classes);
  std::vector<double> p = spec.proportions.empty() ? std::vector<double>(c, 1.0) : spec.proportions;
  const double total = std::accumulate(p.begin(), p.end(), 0.0);

  std::vector<std::size_t> counts(c);
  std::vector<std::pair<double, std::size_t>> rem(c);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < c; ++i) {
    const double exact = static_cast<double>(n) * p[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = {exact - static_cast<double>(counts[i]), i};
    assigned += counts[i];
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[rem[i % c].second];
  // every class gets at least one pixel
  for (std::size_t i = 0; i < c; ++i) {
    if (counts[i] == 0) {
      auto big = std::max_element(counts.begin(), counts.end());
      --*big;
      counts[i] = 1;
    }
  }
  return counts;
}

namespace {

// Sum of Gaussian bumps with N(0,1) amplitudes, normalized to zero mean and
// unit standard deviation over the raster.
Vector smooth_field(int width, int height, double length, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.0, width);
  std::uniform_real_distribution<double> uy(0.0, height);
  std::normal_distribution<double> amp(0.0, 1.0);
  const int bumps = std::max(8, static_cast<int>(std::lround(2.0 * width * height / (length * length))));
  const double inv = 1.0 / (2.0 * length * length);

  Vector f = Vector::Zero(static_cast<Eigen::Index>(width) * height);
  for (int b = 0; b < bumps; ++b) {
    const double cx = ux(rng);
    const double cy = uy(rng);
    const double a = amp(rng);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double dx = c - cx;
        const double dy = r - cy;
        f(static_cast<Eigen::Index>(r) * width + c) += a * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  f.array() -= f.mean();
  const double sd = std::sqrt(f.squaredNorm() / static_cast<double>(f.size()));
  if (sd > 0) f /= sd;
  return f;
}

// Smooth spectral curve from a few Gaussian bumps over the band axis, unit RMS.
Vector smooth_curve(int bands, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(0.0, 1.0);
  std::normal_distribution<double> amp(0.0, 1.0);
  Vector v = Vector::Zero(bands);
  for (int j = 0; j < 4; ++j) {
    const double u = centre(rng);
    const double a = amp(rng);
    for (int b = 0; b < bands; ++b) {
      const double t = bands == 1 ? 0.0 : static_cast<double>(b) / (bands - 1);
      v(b) += a * std::exp(-(t - u) * (t - u) / (2 * 0.08 * 0.08));
    }
  }
  const double rms = std::sqrt(v.squaredNorm() / bands);
  return rms > 0 ? Vector(v / rms) : Vector(Vector::Ones(bands));
}

}  // namespace

SyntheticScene generate_synthetic(const SyntheticSpec& spec) {
  const auto counts = class_counts(spec);
  std::mt19937_64 rng(spec.seed);
  const int w = spec.width;
  const int h = spec.height;
  const auto n = static_cast<Eigen::Index>(w) * h;

  // class map: quantile bands of one smooth field, class order shuffled
  const Vector field = smooth_field(w, h, spec.blob_size, rng);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return field(a) < field(b); });
  std::vector<int> class_of_band(static_cast<std::size_t>(spec.n_classes));
  std::iota(class_of_band.begin(), class_of_band.end(), 1);
  std::shuffle(class_of_band.begin(), class_of_band.end(), rng);

  SyntheticScene scene;
  scene.width = w;
  scene.height = h;
  scene.labels.assign(static_cast<std::size_t>(n), 0);
  {
    std::size_t pos = 0;
    for (std::size_t band = 0; band < counts.size(); ++band) {
      const int cls = class_of_band[band];
      for (std::size_t k = 0; k < counts[static_cast<std::size_t>(cls - 1)]; ++k) {
        scene.labels[static_cast<std::size_t>(order[pos++])] = cls;
      }
    }
  }

  // spectra
  Vector base(spec.bands);
  for (int b = 0; b < spec.bands; ++b) {
    const double t = spec.bands == 1 ? 0.0 : static_cast<double>(b) / (spec.bands - 1);
    base(b) = 0.5 + 0.2 * std::sin(2 * std::numbers::pi * 0.8 * t);
  }
  std::vector<Vector> signatures;
  for (int c = 0; c < spec.n_classes; ++c) signatures.push_back(base + spec.separation * smooth_curve(spec.bands, rng));

  std::vector<Vector> directions;
  std::vector<Vector> coeffs;
  for (int j = 0; j < spec.nuisance_rank && spec.nuisance > 0; ++j) {
    directions.push_back(smooth_curve(spec.bands, rng));
    coeffs.push_back(smooth_field(w, h, spec.blob_size, rng));
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  scene.cube.resize(spec.bands, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector x = signatures[static_cast<std::size_t>(scene.labels[static_cast<std::size_t>(i)] - 1)];
    for (std::size_t j = 0; j < directions.size(); ++j) x += spec.nuisance * coeffs[j](i) * directions[j];
    for (int b = 0; b < spec.bands; ++b) x(b) += spec.noise * gauss(rng);
    scene.cube.col(i) = x.cwiseMax(0.0);
  }
  return scene;
}

}  // namespace jpsa
