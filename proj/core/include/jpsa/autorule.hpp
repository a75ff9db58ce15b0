#ifndef JPSA_AUTORULE_HPP
#define JPSA_AUTORULE_HPP

#include "jpsa/data_model.hpp"
#include "jpsa/graph.hpp"

#include <functional>
#include <string>
#include <vector>

namespace jpsa {

/// Per-layer ADMM state. Shapes for a layer mapping d_in -> d_out over
/// 2n two-stream columns: theta, g, lambda2 are d_out x d_in; h, q, s,
/// lambda1, lambda3, lambda4 are d_out x 2n.
struct AdmmState {
  Matrix theta;
  Matrix h, g, q, s;
  Matrix lambda1, lambda2, lambda3, lambda4;
  double mu = 0;

  // H = theta0 X, every other auxiliary and multiplier zero.
  static AdmmState initial(const Matrix& theta0, const Matrix& x, double mu0);
};

/// X X^T and X L X^T for one layer input; both enter every theta solve.
struct LayerGrams {
  Matrix xxt;
  Matrix xlxt;

  static LayerGrams compute(const Matrix& x, const SparseMatrix& lf);
};

// Elementwise max(., 0).
Matrix prox_nonneg(const Matrix& m);
// Columns with norm > 1 are rescaled to unit norm, others pass through.
Matrix prox_unit_ball(const Matrix& m);

// theta = (mu H X^T + mu G + mu Q X^T + mu S X^T + L1 X^T + L2 + L3 X^T + L4 X^T)
//         * (eta X L X^T + 3 mu X X^T + mu I)^-1
Matrix update_theta(const AdmmState& st, const Matrix& x, const LayerGrams& grams, double eta);
Matrix update_theta(const AdmmState& st, const Matrix& x, const SparseMatrix& lf, double eta);

// H = (G G^T + mu I)^-1 (G X + mu theta X - L1)
Matrix update_h_pretrain(const AdmmState& st, const Matrix& x);
// G = (H H^T + mu I)^-1 (H X^T + mu theta - L2)
Matrix update_g(const AdmmState& st, const Matrix& x);
// Q = max(theta X - L3 / mu, 0)
Matrix update_q(const AdmmState& st, const Matrix& x);
// S = prox_unit_ball(theta X - L4 / mu)
Matrix update_s(const AdmmState& st, const Matrix& x);

struct Multipliers {
  Matrix lambda1, lambda2, lambda3, lambda4;
};
Multipliers update_multipliers(const AdmmState& st, const Matrix& x);

struct AdmmTraceRow {
  int iter = 0;
  double r_h = 0, r_g = 0, r_q = 0, r_s = 0;
  double mu = 0;
  double objective = 0;
};

struct AutoRuleReport {
  int iterations = 0;
  bool converged = false;
  double r_h = 0, r_g = 0, r_q = 0, r_s = 0;
  std::vector<AdmmTraceRow> trace;

  // iter,r_H,r_G,r_Q,r_S,mu,objective
  std::string to_csv() const;
};

struct AutoRuleResult {
  Matrix theta;
  AutoRuleReport report;
  AdmmState state;
};

using HUpdate = std::function<Matrix(const AdmmState&, const Matrix&)>;
using LayerObjective = std::function<double(const Matrix& theta)>;

/// Generic layer solve: theta -> H -> G -> Q -> S -> multipliers -> mu,
/// stopping once all four constraint residuals drop below cfg.eps or after
/// cfg.max_iters sweeps. `h_update` chooses the H subproblem; `objective`
/// is evaluated once per sweep for the trace only.
AutoRuleResult solve_layer_admm(const Matrix& x, const LayerGrams& grams, const Matrix& theta0, double graph_weight,
                                const AdmmConfig& cfg, const HUpdate& h_update, const LayerObjective& objective);

/// 0.5 |X - theta^T theta X|_F^2 + 0.5 eta tr(theta X L X^T theta^T)
double autorule_objective(const Matrix& theta, const Matrix& x, const LayerGrams& grams, double eta);

/// Unsupervised layer pre-training.
AutoRuleResult autorule_fit(const Matrix& x, const SparseMatrix& lf, const Matrix& theta0, double eta,
                            const AdmmConfig& cfg);

}  // namespace jpsa

#endif  // JPSA_AUTORULE_HPP
