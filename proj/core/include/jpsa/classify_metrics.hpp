#ifndef JPSA_CLASSIFY_METRICS_HPP
#define JPSA_CLASSIFY_METRICS_HPP

#include "jpsa/data_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jpsa {

/// Label of the Euclidean-nearest training column; ties go to the lowest
/// training index.
std::vector<int> nn_classify(const Matrix& train_feats, std::span<const int> train_labels, const Matrix& test_feats);

struct ConfusionMatrix {
  // counts(t, p): samples of true class t+1 predicted as p+1.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  int classes() const { return static_cast<int>(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int n_classes);

struct MetricsReport {
  double oa = 0;
  double aa = 0;
  double kappa = 0;
  std::vector<double> per_class;  // NaN for classes absent from the truth

  // oa,aa,kappa,class1..classC
  std::string csv_header() const;
  std::string csv_row() const;
};

/// OA = N_c / N_a; AA averages per-class recall over classes present in the
/// truth; kappa = (OA - P_e) / (1 - P_e), P_e = sum_i N_r^i N_p^i / N_a^2,
/// with kappa = 0 when P_e = 1.
MetricsReport metrics(const ConfusionMatrix& cm);

}  // namespace jpsa

#endif  // JPSA_CLASSIFY_METRICS_HPP
