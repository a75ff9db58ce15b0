#ifndef JPSA_SYNTHETIC_HPP
#define JPSA_SYNTHETIC_HPP

#include "jpsa/data_model.hpp"

#include <cstdint>
#include <vector>

namespace jpsa {

struct SyntheticSpec {
  int width = 40;
  int height = 40;
  int bands = 30;
  int n_classes = 6;
  double separation = 0.10;  // scale of class-specific signature offsets
  double noise = 0.05;       // i.i.d. per-band standard deviation
  double blob_size = 6.0;    // spatial correlation length in pixels
  double nuisance = 0.3;     // amplitude of smooth shared illumination / mixing drift
  int nuisance_rank = 3;
  std::vector<double> proportions;  // empty means equal
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticScene {
  Matrix cube;              // bands x (width*height), column = row*width + col
  std::vector<int> labels;  // 1..n_classes, every pixel labeled
  int width = 0;
  int height = 0;
};

/// Blobby class map from the quantiles of a smooth random field, per-class
/// smooth spectral signatures, optional spatially smooth nuisance directions
/// and i.i.d. Gaussian noise. Values are clipped at zero. Bit-identical for
/// equal specs.
SyntheticScene generate_synthetic(const SyntheticSpec& spec);

/// Exact per-class pixel counts the generator assigns (largest remainder).
std::vector<std::size_t> class_counts(const SyntheticSpec& spec);

}  // namespace jpsa

#endif  // JPSA_SYNTHETIC_HPP
