#ifndef JPSA_SUPERPIXEL_HPP
#define JPSA_SUPERPIXEL_HPP

#include "jpsa/data_model.hpp"

#include <span>
#include <vector>

namespace jpsa {

struct SegmentCenter {
  double row = 0;
  double col = 0;
  Vector feature;  // mean of the SLIC feature vectors in the segment
};

/// Superpixel assignment over a width x height raster (pixel index =
/// row*width + col). Ids are contiguous in [0, n_segments) and every
/// segment is non-empty.
struct Segmentation {
  std::vector<int> labels;
  int n_segments = 0;
  std::vector<SegmentCenter> centers;

  void validate() const;
  std::vector<std::size_t> segment_sizes() const;
};

struct SlicOptions {
  int n_segments = 10;
  double compactness = 10.0;
  int max_iters = 10;
  int feature_components = 3;  // PCA components the clustering runs on
};

/// round(fraction * n_pixels), clamped to [1, n_pixels].
int superpixel_count(std::size_t n_pixels, double fraction);

/// SLIC over the leading PCA components of the spectra.
///
/// Centers start on a regular grid with spacing S = sqrt(N / K) and are
/// refined k-means style using D = sqrt(d_feat^2 + (d_xy / S)^2 * m^2),
/// searching a 2S x 2S window around each center. Afterwards every
/// connected piece that is not the largest piece of its label is merged
/// into the largest adjacent segment, and ids are compacted. The PCA
/// features are rescaled so the widest component spans 100 units, the
/// range compactness is usually tuned against.
Segmentation slic_segment(const FeatureMatrix& cube, int width, int height, const SlicOptions& options);

/// Column i is the mean spectrum of the pixels sharing pixel i's segment.
FeatureMatrix superpixel_stream(const FeatureMatrix& cube, const Segmentation& seg);

/// Stream column i inherits pixel i's own label.
std::vector<int> stream_labels(std::span<const int> labels, const Segmentation& seg);

}  // namespace jpsa

#endif  // JPSA_SUPERPIXEL_HPP
