#include "jpsa/data_model.hpp"

#include <string>
#include <unordered_set>

namespace jpsa {

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::pixel:
      return "pixel";
    case FeatureKind::superpixel_stream:
      return "superpixel_stream";
    case FeatureKind::two_stream:
      return "two_stream";
  }
  return "unknown";
}

FeatureMatrix::FeatureMatrix(Matrix values, FeatureKind kind)
    : values_(std::move(values)), kind_(kind) {
  if (!values_.allFinite()) {
    throw InputError("feature matrix contains non-finite entries");
  }
  if (kind_ == FeatureKind::two_stream && values_.cols() % 2 != 0) {
    throw InputError("two-stream feature matrix needs an even column count, got " +
                     std::to_string(values_.cols()));
  }
}

FeatureMatrix FeatureMatrix::pixel_block() const {
  if (kind_ != FeatureKind::two_stream) throw InputError("pixel_block() requires a two-stream matrix");
  return FeatureMatrix(values_.leftCols(values_.cols() / 2), FeatureKind::pixel);
}

FeatureMatrix FeatureMatrix::stream_block() const {
  if (kind_ != FeatureKind::two_stream) throw InputError("stream_block() requires a two-stream matrix");
  return FeatureMatrix(values_.rightCols(values_.cols() / 2), FeatureKind::superpixel_stream);
}

FeatureMatrix two_stream_concat(const FeatureMatrix& x, const FeatureMatrix& xsp) {
  if (x.dim() != xsp.dim() || x.samples() != xsp.samples()) {
    throw InputError("two_stream_concat: shape mismatch " + std::to_string(x.dim()) + "x" +
                     std::to_string(x.samples()) + " vs " + std::to_string(xsp.dim()) + "x" +
                     std::to_string(xsp.samples()));
  }
  Matrix out(x.dim(), 2 * x.samples());
  out << x.values(), xsp.values();
  return FeatureMatrix(std::move(out), FeatureKind::two_stream);
}

OneHotLabels one_hot_encode(std::span<const int> labels, int num_classes) {
  if (num_classes < 1) throw InputError("one_hot_encode: class count must be >= 1");
  OneHotLabels out;
  out.values = Matrix::Zero(num_classes, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const int c = labels[k];
    if (c < 1 || c > num_classes) {
      throw InputError("one_hot_encode: label " + std::to_string(c) + " at index " +
                       std::to_string(k) + " outside [1, " + std::to_string(num_classes) + "]");
    }
    out.values(c - 1, static_cast<Eigen::Index>(k)) = 1.0;
  }
  out.class_names.reserve(num_classes);
  for (int c = 1; c <= num_classes; ++c) out.class_names.push_back("class" + std::to_string(c));
  return out;
}

void SampleSplit::validate(std::size_t n_samples) const {
  std::unordered_set<std::size_t> seen;
  auto check = [&](const std::vector<std::size_t>& list, const char* name) {
    for (auto i : list) {
      if (i >= n_samples) {
        throw InputError(std::string("split: ") + name + " index " + std::to_string(i) +
                         " out of range (n=" + std::to_string(n_samples) + ")");
      }
      if (!seen.insert(i).second) {
        throw InputError(std::string("split: index ") + std::to_string(i) + " appears twice");
      }
    }
  };
  check(train_indices, "train");
  check(test_indices, "test");
  check(unlabeled_indices, "unlabeled");
}

void HyperParams::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0 || eta < 0) {
    throw InputError("hyperparameters alpha, beta, gamma, eta must be nonnegative");
  }
  if (m < 1) throw InputError("layer count m must be >= 1");
  if (static_cast<int>(dims.size()) != m) {
    throw InputError("dims has length " + std::to_string(dims.size()) + " but m = " + std::to_string(m));
  }
  for (int d : dims) {
    if (d < 1) throw InputError("every layer dimension must be >= 1");
  }
  if (knn_k < 1) throw InputError("knn_k must be >= 1");
  if (!(sigma > 0)) throw InputError("sigma must be > 0");
  if (!(zeta > 0)) throw InputError("zeta must be > 0");
  if (max_outer_iters < 1) throw InputError("max_outer_iters must be >= 1");
  if (!(superpixel_fraction > 0) || superpixel_fraction > 1) {
    throw InputError("superpixel_fraction must lie in (0, 1]");
  }
}

void AdmmConfig::validate() const {
  if (!(mu0 > 0) || mu0 > mu_max) throw InputError("admm: need 0 < mu0 <= mu_max");
  if (!(rho > 1)) throw InputError("admm: rho must be > 1");
  if (!(eps > 0)) throw InputError("admm: eps must be > 0");
  if (max_iters < 1) throw InputError("admm: max_iters must be >= 1");
}

Matrix select_columns(const Matrix& m, std::span<const std::size_t> cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

}  // namespace jpsa
