#include "jpsa/classify_metrics.hpp"

#include "jpsa/io_formats.hpp"

#include <cmath>
#include <limits>

namespace jpsa {

std::vector<int> nn_classify(const Matrix& train_feats, std::span<const int> train_labels, const Matrix& test_feats) {
  if (train_feats.cols() == 0) throw InputError("nn_classify: empty training set");
  if (static_cast<std::size_t>(train_feats.cols()) != train_labels.size()) {
    throw InputError("nn_classify: " + std::to_string(train_labels.size()) + " labels for " +
                     std::to_string(train_feats.cols()) + " training columns");
  }
  if (train_feats.rows() != test_feats.rows()) {
    throw InputError("nn_classify: feature dimensions differ (" + std::to_string(train_feats.rows()) + " vs " +
                     std::to_string(test_feats.rows()) + ")");
  }
  std::vector<int> out(static_cast<std::size_t>(test_feats.cols()));
  for (Eigen::Index q = 0; q < test_feats.cols(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index j = 0; j < train_feats.cols(); ++j) {
      const double d = (train_feats.col(j) - test_feats.col(q)).squaredNorm();
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    out[static_cast<std::size_t>(q)] = train_labels[static_cast<std::size_t>(arg)];
  }
  return out;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int n_classes) {
  if (truth.size() != predicted.size()) {
    throw InputError("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  if (n_classes < 1) throw InputError("confusion: class count must be >= 1");
  ConfusionMatrix cm;
  cm.counts.setZero(n_classes, n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 1 || t > n_classes || p < 1 || p > n_classes) {
      throw InputError("confusion: label outside [1, " + std::to_string(n_classes) + "] at sample " +
                       std::to_string(i));
    }
    ++cm.counts(t - 1, p - 1);
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const int c = cm.classes();
  if (c == 0 || cm.counts.cols() != c) throw InputError("metrics: confusion matrix must be square and non-empty");
  if ((cm.counts.array() < 0).any()) throw InputError("metrics: negative counts");
  const auto total = cm.total();
  if (total == 0) throw InputError("metrics: confusion matrix is empty");

  const double na = static_cast<double>(total);
  MetricsReport r;
  r.oa = static_cast<double>(cm.counts.trace()) / na;

  double aa_sum = 0;
  int present = 0;
  double pe_num = 0;
  r.per_class.resize(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) {
    const auto real = cm.counts.row(i).sum();
    const auto pred = cm.counts.col(i).sum();
    pe_num += static_cast<double>(real) * static_cast<double>(pred);
    if (real > 0) {
      r.per_class[i] = static_cast<double>(cm.counts(i, i)) / static_cast<double>(real);
      aa_sum += r.per_class[i];
      ++present;
    } else {
      r.per_class[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  r.aa = aa_sum / present;
  const double pe = pe_num / (na * na);
  r.kappa = pe == 1.0 ? 0.0 : (r.oa - pe) / (1.0 - pe);
  return r;
}

std::string MetricsReport::csv_header() const {
  std::string out = "oa,aa,kappa";
  for (std::size_t i = 0; i < per_class.size(); ++i) out += ",class" + std::to_string(i + 1);
  return out + "\n";
}

std::string MetricsReport::csv_row() const {
  std::string out = io::format_real(oa) + "," + io::format_real(aa) + "," + io::format_real(kappa);
  for (double v : per_class) out += "," + (std::isnan(v) ? std::string("") : io::format_real(v));
  return out + "\n";
}

}  // namespace jpsa
