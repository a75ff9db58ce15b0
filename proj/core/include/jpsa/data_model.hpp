#ifndef JPSA_DATA_MODEL_HPP
#define JPSA_DATA_MODEL_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jpsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy shared by every module.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureKind { pixel, superpixel_stream, two_stream };

const char* to_string(FeatureKind kind);

/// Column-per-sample feature matrix (rows = feature dimension).
///
/// Construction validates that every entry is finite; for two-stream
/// matrices the column count must be even (pixel block followed by the
/// superpixel block of equal width).
class FeatureMatrix {
 public:
  FeatureMatrix(Matrix values, FeatureKind kind);

  const Matrix& values() const { return values_; }
  FeatureKind kind() const { return kind_; }
  Eigen::Index dim() const { return values_.rows(); }
  Eigen::Index samples() const { return values_.cols(); }

  // For two_stream matrices: the pixel block and the superpixel block.
  FeatureMatrix pixel_block() const;
  FeatureMatrix stream_block() const;

 private:
  Matrix values_;
  FeatureKind kind_;
};

FeatureMatrix two_stream_concat(const FeatureMatrix& x, const FeatureMatrix& xsp);

/// Binary class-indicator matrix, rows = classes, one column per sample.
struct OneHotLabels {
  Matrix values;
  std::vector<std::string> class_names;

  Eigen::Index classes() const { return values.rows(); }
  Eigen::Index samples() const { return values.cols(); }
};

// Labels are 1-based class ids; row label-1 gets the 1.
OneHotLabels one_hot_encode(std::span<const int> labels, int num_classes);

struct SampleSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<std::size_t> unlabeled_indices;

  // Throws InputError on overlap or an index >= n_samples.
  void validate(std::size_t n_samples) const;
};

struct HyperParams {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.1;
  double eta = 0.1;
  int m = 1;
  std::vector<int> dims{20};
  int knn_k = 10;
  double sigma = 1.0;
  double zeta = 1e-4;
  int max_outer_iters = 50;
  double superpixel_fraction = 0.10;

  void validate() const;
};

struct AdmmConfig {
  double mu0 = 1e-3;
  double mu_max = 1e6;
  double rho = 2.0;
  double eps = 1e-6;
  int max_iters = 500;

  void validate() const;
};

// Column selection helper used across the pipeline.
Matrix select_columns(const Matrix& m, std::span<const std::size_t> cols);

}  // namespace jpsa

#endif  // JPSA_DATA_MODEL_HPP
