#ifndef JPSA_JPSA_HPP
#define JPSA_JPSA_HPP

#include "jpsa/autorule.hpp"
#include "jpsa/data_model.hpp"
#include "jpsa/graph.hpp"
#include "jpsa/projection_stack.hpp"

#include <span>
#include <string>
#include <vector>

namespace jpsa {

/// Everything the multi-layer objective needs, over 2n two-stream columns:
/// X~ = [X Xsp], Y~ = [Y Y], per-column label weights (1 labeled,
/// 0 unlabeled) and the fused Laplacian.
struct TrainingProblem {
  Matrix x_tilde;
  Matrix y_tilde;
  Vector label_weight;
  SparseMatrix lf;
  Vector degree;

  Eigen::Index columns() const { return x_tilde.cols(); }
  bool fully_labeled() const { return (label_weight.array() == 1.0).all(); }

  // labels: 0 = unlabeled, 1..n_classes; one per pixel column.
  static TrainingProblem build(const FeatureMatrix& pixels, const FeatureMatrix& stream, std::span<const int> labels,
                               int n_classes, const GraphBundle& graph);

  void validate() const;
};

struct ObjectiveTerms {
  double reconstruction = 0;  // sum_l |X~_{l-1} - T_l^T T_l X~_{l-1}|^2
  double prediction = 0;      // |Y~ - P T_m..T_1 X~|^2 over labeled columns
  double graph = 0;           // sum_l tr(T_l X~_{l-1} L X~_{l-1}^T T_l^T)
  double regression = 0;      // |P|^2
  double total = 0;           // weighted with 1/2, alpha/2, beta/2, gamma/2
};

ObjectiveTerms objective_terms(const ProjectionStack& stack, const TrainingProblem& prob, const HyperParams& hp);
double objective_value(const ProjectionStack& stack, const TrainingProblem& prob, const HyperParams& hp);
// All columns labeled.
double objective_value(const ProjectionStack& stack, const Matrix& x_tilde, const Matrix& y_tilde,
                       const SparseMatrix& lf, const HyperParams& hp);

/// Ridge solution P = alpha Y~ W V^T (alpha V W V^T + gamma I)^-1 with
/// V = T_m..T_1 X~ and W the label weights.
Matrix update_p(const ProjectionStack& stack, const TrainingProblem& prob, double alpha, double gamma);

/// H = (alpha P_l^T P_l + G G^T + mu I)^-1 (alpha P_l^T Y~ + G X + mu T X - L1)
/// on labeled columns; unlabeled columns drop the alpha terms.
Matrix update_h_finetune(const AdmmState& st, const Matrix& x, const Matrix& p_l, const Matrix& y_tilde,
                         const Vector& label_weight, double alpha);
Matrix update_h_finetune(const AdmmState& st, const Matrix& x, const Matrix& p_l, const Matrix& y_tilde,
                         double alpha);

// Downstream operator for layer index `layer` (0-based): P T_m .. T_{layer+2}.
Matrix downstream_operator(const ProjectionStack& stack, int layer);

// Input to layer `layer` (0-based): T_layer .. T_1 X~.
Matrix layer_input(const ProjectionStack& stack, const Matrix& x_tilde, int layer);

/// Per-layer fine-tuning objective with every other layer and P fixed.
double layer_objective(const ProjectionStack& stack, int layer, const Matrix& theta, const TrainingProblem& prob,
                       const HyperParams& hp);

struct FinetuneResult {
  Matrix theta;  // equals the entry value when the ADMM candidate did not improve
  bool improved = false;
  double entry_objective = 0;
  double exit_objective = 0;
  AutoRuleReport report;
};

/// Re-solves one layer (0-based) with the supervised H step and graph weight
/// beta, started from the layer's current projection.
FinetuneResult finetune_theta(int layer, const ProjectionStack& stack, const TrainingProblem& prob,
                              const HyperParams& hp, const AdmmConfig& cfg);

enum class StopReason { converged, max_outer_iters };

struct FitReport {
  int outer_iterations = 0;
  std::vector<double> objective_trace;  // length outer_iterations + 1
  StopReason stop_reason = StopReason::max_outer_iters;
  std::vector<AutoRuleReport> init_reports;
  int accepted_layer_updates = 0;

  // outer_iter,objective
  std::string to_csv() const;
};

struct FitResult {
  ProjectionStack stack;
  FitReport report;
};

/// Greedy layer-wise initialization (LPP then AutoRULe) followed by
/// alternating P / per-layer fine-tuning until the relative objective change
/// drops below hp.zeta or hp.max_outer_iters sweeps ran.
FitResult jpsa_fit(const TrainingProblem& prob, const HyperParams& hp, const AdmmConfig& cfg);

/// Builds the fused graph over the given columns and fits.
FitResult jpsa_fit(const FeatureMatrix& pixels, const FeatureMatrix& stream, std::span<const int> labels,
                   std::span<const int> segment_of_column, int n_classes, const HyperParams& hp,
                   const AdmmConfig& cfg);

/// T_m .. T_1 x for new pixels (no superpixel stream needed).
FeatureMatrix transform(const ProjectionStack& stack, const FeatureMatrix& x_new);

}  // namespace jpsa

#endif  // JPSA_JPSA_HPP
