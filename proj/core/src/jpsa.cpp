#include "jpsa/jpsa.hpp"

#include "jpsa/init_embed.hpp"
#include "jpsa/io_formats.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace jpsa {

namespace {

constexpr double kSolveRidge = 1e-10;

Matrix spd_solve(Matrix a, const Matrix& b, const char* what) {
  a.diagonal().array() += kSolveRidge;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Matrix> ldlt(a);
    throw NumericalError(std::string(what) + ": system is not positive definite (rcond estimate " +
                         io::format_real(ldlt.rcond()) + ")");
  }
  return llt.solve(b);
}

double graph_trace(const Matrix& theta, const Matrix& x, const SparseMatrix& lf) {
  const Matrix tx = theta * x;                                  // d x 2n
  const Matrix txl = (lf.transpose() * tx.transpose()).transpose();  // T X L
  return (txl.array() * tx.array()).sum();
}

double weighted_residual(const Matrix& y, const Matrix& pred, const Vector& w) {
  double acc = 0;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    if (w(k) != 0.0) acc += w(k) * (y.col(k) - pred.col(k)).squaredNorm();
  }
  return acc;
}

}  // namespace

void ProjectionStack::validate() const {
  for (std::size_t l = 0; l < thetas.size(); ++l) {
    if (thetas[l].size() == 0) throw InputError("projection stack: layer " + std::to_string(l + 1) + " is empty");
    if (!thetas[l].allFinite()) {
      throw InputError("projection stack: layer " + std::to_string(l + 1) + " has non-finite entries");
    }
    if (l > 0 && thetas[l].cols() != thetas[l - 1].rows()) {
      throw InputError("projection stack: layer " + std::to_string(l + 1) + " expects input dimension " +
                       std::to_string(thetas[l].cols()) + " but layer " + std::to_string(l) + " outputs " +
                       std::to_string(thetas[l - 1].rows()));
    }
  }
  if (p) {
    if (!p->allFinite()) throw InputError("projection stack: P has non-finite entries");
    if (!thetas.empty() && p->cols() != thetas.back().rows()) {
      throw InputError("projection stack: P has " + std::to_string(p->cols()) + " columns, expected " +
                       std::to_string(thetas.back().rows()));
    }
  }
}

Matrix ProjectionStack::compose(int lo, int hi) const {
  const int m = layers();
  if (m == 0) throw InputError("projection stack is empty");
  if (lo < 1 || lo > m + 1 || hi > m) throw InputError("compose: layer range out of bounds");
  const Eigen::Index base = lo <= m ? thetas[lo - 1].cols() : thetas[m - 1].rows();
  Matrix out = Matrix::Identity(base, base);
  for (int l = lo; l <= hi; ++l) out = thetas[l - 1] * out;
  return out;
}

TrainingProblem TrainingProblem::build(const FeatureMatrix& pixels, const FeatureMatrix& stream,
                                       std::span<const int> labels, int n_classes, const GraphBundle& graph) {
  const auto n = pixels.samples();
  if (stream.samples() != n || stream.dim() != pixels.dim()) {
    throw InputError("training problem: pixel and stream blocks must have equal shape");
  }
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InputError("training problem: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                     " columns");
  }
  if (graph.lf.rows() != 2 * n) {
    throw InputError("training problem: fused Laplacian is " + std::to_string(graph.lf.rows()) +
                     " wide, expected " + std::to_string(2 * n));
  }
  TrainingProblem prob;
  prob.x_tilde = two_stream_concat(pixels, stream).values();
  prob.y_tilde = Matrix::Zero(n_classes, 2 * n);
  prob.label_weight = Vector::Zero(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int c = labels[k];
    if (c < 0 || c > n_classes) {
      throw InputError("training problem: label " + std::to_string(c) + " at column " + std::to_string(k) +
                       " outside [0, " + std::to_string(n_classes) + "]");
    }
    if (c == 0) continue;
    prob.y_tilde(c - 1, k) = 1.0;
    prob.y_tilde(c - 1, n + k) = 1.0;
    prob.label_weight(k) = 1.0;
    prob.label_weight(n + k) = 1.0;
  }
  prob.lf = graph.lf;
  prob.degree = graph.degree;
  prob.validate();
  return prob;
}

void TrainingProblem::validate() const {
  const auto n2 = x_tilde.cols();
  if (y_tilde.cols() != n2 || label_weight.size() != n2 || lf.rows() != n2 || lf.cols() != n2) {
    throw InputError("training problem: column counts disagree");
  }
  if (!x_tilde.allFinite()) throw InputError("training problem: non-finite features");
  for (Eigen::Index k = 0; k < n2; ++k) {
    if (label_weight(k) != 0.0 && label_weight(k) != 1.0) throw InputError("training problem: weights must be 0/1");
  }
  if (label_weight.sum() == 0.0) throw InputError("training problem: no labeled samples");
}

ObjectiveTerms objective_terms(const ProjectionStack& stack, const TrainingProblem& prob, const HyperParams& hp) {
  stack.validate();
  if (!stack.p) throw InputError("objective: stack has no regression matrix P");
  if (stack.input_dim() != prob.x_tilde.rows()) throw InputError("objective: input dimension mismatch");
  if (stack.p->rows() != prob.y_tilde.rows()) throw InputError("objective: P row count does not match classes");
  ObjectiveTerms t;
  Matrix x = prob.x_tilde;
  for (const auto& theta : stack.thetas) {
    const Matrix tx = theta * x;
    t.reconstruction += (x - theta.transpose() * tx).squaredNorm();
    t.graph += graph_trace(theta, x, prob.lf);
    x = tx;
  }
  t.prediction = weighted_residual(prob.y_tilde, *stack.p * x, prob.label_weight);
  t.regression = stack.p->squaredNorm();
  t.total = 0.5 * t.reconstruction + 0.5 * hp.alpha * t.prediction + 0.5 * hp.beta * t.graph +
            0.5 * hp.gamma * t.regression;
  return t;
}

double objective_value(const ProjectionStack& stack, const TrainingProblem& prob, const HyperParams& hp) {
  return objective_terms(stack, prob, hp).total;
}

double objective_value(const ProjectionStack& stack, const Matrix& x_tilde, const Matrix& y_tilde,
                       const SparseMatrix& lf, const HyperParams& hp) {
  TrainingProblem prob;
  prob.x_tilde = x_tilde;
  prob.y_tilde = y_tilde;
  prob.label_weight = Vector::Ones(x_tilde.cols());
  prob.lf = lf;
  return objective_value(stack, prob, hp);
}

Matrix update_p(const ProjectionStack& stack, const TrainingProblem& prob, double alpha, double gamma) {
  if (alpha < 0 || gamma < 0) throw InputError("update_p: alpha and gamma must be nonnegative");
  const Matrix v = stack.compose(1, stack.layers()) * prob.x_tilde;
  const Matrix vw = v * prob.label_weight.asDiagonal();
  Matrix lhs = alpha * (vw * v.transpose());
  lhs.diagonal().array() += gamma;
  const Matrix rhs = alpha * (vw * prob.y_tilde.transpose());  // (alpha Y W V^T)^T
  return spd_solve(lhs, rhs, "update_p").transpose();
}

Matrix update_h_finetune(const AdmmState& st, const Matrix& x, const Matrix& p_l, const Matrix& y_tilde,
                         const Vector& label_weight, double alpha) {
  const auto d = st.theta.rows();
  if (p_l.cols() != d) throw InputError("update_h_finetune: P_l has " + std::to_string(p_l.cols()) +
                                        " columns, layer outputs " + std::to_string(d));
  if (y_tilde.rows() != p_l.rows() || y_tilde.cols() != x.cols() || label_weight.size() != x.cols()) {
    throw InputError("update_h_finetune: label matrix shape mismatch");
  }
  Matrix base = st.g * st.g.transpose();
  base.diagonal().array() += st.mu;
  Matrix rhs = st.g * x + st.mu * (st.theta * x) - st.lambda1;

  std::vector<Eigen::Index> labeled, unlabeled;
  for (Eigen::Index k = 0; k < x.cols(); ++k) (label_weight(k) != 0.0 ? labeled : unlabeled).push_back(k);

  Matrix h(d, x.cols());
  if (!labeled.empty()) {
    const Matrix sup = alpha * p_l.transpose();  // d x L
    Matrix lhs = base + sup * p_l;
    Matrix r(d, static_cast<Eigen::Index>(labeled.size()));
    for (std::size_t j = 0; j < labeled.size(); ++j) {
      r.col(static_cast<Eigen::Index>(j)) = rhs.col(labeled[j]) + sup * y_tilde.col(labeled[j]);
    }
    const Matrix sol = spd_solve(lhs, r, "update_h_finetune");
    for (std::size_t j = 0; j < labeled.size(); ++j) h.col(labeled[j]) = sol.col(static_cast<Eigen::Index>(j));
  }
  if (!unlabeled.empty()) {
    Matrix r(d, static_cast<Eigen::Index>(unlabeled.size()));
    for (std::size_t j = 0; j < unlabeled.size(); ++j) r.col(static_cast<Eigen::Index>(j)) = rhs.col(unlabeled[j]);
    const Matrix sol = spd_solve(base, r, "update_h_finetune");
    for (std::size_t j = 0; j < unlabeled.size(); ++j) h.col(unlabeled[j]) = sol.col(static_cast<Eigen::Index>(j));
  }
  return h;
}

Matrix update_h_finetune(const AdmmState& st, const Matrix& x, const Matrix& p_l, const Matrix& y_tilde,
                         double alpha) {
  return update_h_finetune(st, x, p_l, y_tilde, Vector::Ones(x.cols()), alpha);
}

Matrix downstream_operator(const ProjectionStack& stack, int layer) {
  if (!stack.p) throw InputError("downstream_operator: stack has no P");
  if (layer < 0 || layer >= stack.layers()) throw InputError("downstream_operator: layer out of range");
  return *stack.p * stack.compose(layer + 2, stack.layers());
}

Matrix layer_input(const ProjectionStack& stack, const Matrix& x_tilde, int layer) {
  if (layer < 0 || layer >= stack.layers()) throw InputError("layer_input: layer out of range");
  return stack.compose(1, layer) * x_tilde;
}

double layer_objective(const ProjectionStack& stack, int layer, const Matrix& theta, const TrainingProblem& prob,
                       const HyperParams& hp) {
  const Matrix x = layer_input(stack, prob.x_tilde, layer);
  const Matrix p_l = downstream_operator(stack, layer);
  const Matrix tx = theta * x;
  const double recon = (x - theta.transpose() * tx).squaredNorm();
  const double pred = weighted_residual(prob.y_tilde, p_l * tx, prob.label_weight);
  return 0.5 * recon + 0.5 * hp.alpha * pred + 0.5 * hp.beta * graph_trace(theta, x, prob.lf);
}

FinetuneResult finetune_theta(int layer, const ProjectionStack& stack, const TrainingProblem& prob,
                              const HyperParams& hp, const AdmmConfig& cfg) {
  const Matrix x = layer_input(stack, prob.x_tilde, layer);
  const Matrix p_l = downstream_operator(stack, layer);
  const LayerGrams grams = LayerGrams::compute(x, prob.lf);
  const Matrix& current = stack.thetas[layer];

  auto objective = [&](const Matrix& theta) { return layer_objective(stack, layer, theta, prob, hp); };
  auto h_step = [&](const AdmmState& st, const Matrix& xin) {
    return update_h_finetune(st, xin, p_l, prob.y_tilde, prob.label_weight, hp.alpha);
  };
  auto solved = solve_layer_admm(x, grams, current, hp.beta, cfg, h_step, objective);

  FinetuneResult out;
  out.entry_objective = objective(current);
  const double candidate = objective(solved.theta);
  // Block descent: keep the entry point unless the new solve lowers the layer objective.
  if (candidate <= out.entry_objective) {
    out.theta = std::move(solved.theta);
    out.exit_objective = candidate;
    out.improved = true;
  } else {
    out.theta = current;
    out.exit_objective = out.entry_objective;
  }
  out.report = std::move(solved.report);
  return out;
}

std::string FitReport::to_csv() const {
  std::string out = "outer_iter,objective\n";
  for (std::size_t t = 0; t < objective_trace.size(); ++t) {
    out += std::to_string(t) + "," + io::format_real(objective_trace[t]) + "\n";
  }
  return out;
}

FitResult jpsa_fit(const TrainingProblem& prob, const HyperParams& hp, const AdmmConfig& cfg) {
  hp.validate();
  cfg.validate();
  prob.validate();
  FitResult res;
  auto& stack = res.stack;
  auto& rep = res.report;

  // Initialization: LPP seed, AutoRULe refinement, propagate.
  Matrix x = prob.x_tilde;
  for (int l = 0; l < hp.m; ++l) {
    const auto lpp = lpp_fit(x, prob.lf, prob.degree, hp.dims[l]);
    auto fitted = autorule_fit(x, prob.lf, lpp.projection, hp.eta, cfg);
    x = fitted.theta * x;
    stack.thetas.push_back(std::move(fitted.theta));
    rep.init_reports.push_back(std::move(fitted.report));
  }

  // Fine-tuning: alternate P and each layer.
  stack.p = update_p(stack, prob, hp.alpha, hp.gamma);
  double prev = objective_value(stack, prob, hp);
  if (!std::isfinite(prev)) throw NumericalError("jpsa_fit: non-finite objective after initialization");
  rep.objective_trace.push_back(prev);
  for (int t = 0; t < hp.max_outer_iters; ++t) {
    stack.p = update_p(stack, prob, hp.alpha, hp.gamma);
    double current = objective_value(stack, prob, hp);
    for (int l = 0; l < hp.m; ++l) {
      auto ft = finetune_theta(l, stack, prob, hp, cfg);
      if (!ft.improved) continue;
      Matrix saved = stack.thetas[l];
      stack.thetas[l] = std::move(ft.theta);
      const double candidate = objective_value(stack, prob, hp);
      // Deeper layers see a changed input; keep the update only if the full
      // objective did not rise.
      if (candidate <= current) {
        current = candidate;
        ++rep.accepted_layer_updates;
      } else {
        stack.thetas[l] = std::move(saved);
      }
    }
    if (!std::isfinite(current)) {
      throw NumericalError("jpsa_fit: non-finite objective at outer iteration " + std::to_string(t + 1));
    }
    rep.objective_trace.push_back(current);
    rep.outer_iterations = t + 1;
    const double rel = prev != 0.0 ? std::abs((current - prev) / prev) : std::abs(current - prev);
    prev = current;
    if (rel < hp.zeta) {
      rep.stop_reason = StopReason::converged;
      break;
    }
  }
  return res;
}

FitResult jpsa_fit(const FeatureMatrix& pixels, const FeatureMatrix& stream, std::span<const int> labels,
                   std::span<const int> segment_of_column, int n_classes, const HyperParams& hp,
                   const AdmmConfig& cfg) {
  hp.validate();
  const auto graph = build_fused_graph(pixels.values(), stream.values(), segment_of_column, hp.knn_k, hp.sigma);
  return jpsa_fit(TrainingProblem::build(pixels, stream, labels, n_classes, graph), hp, cfg);
}

FeatureMatrix transform(const ProjectionStack& stack, const FeatureMatrix& x_new) {
  stack.validate();
  if (stack.layers() == 0) throw InputError("transform: empty projection stack");
  if (x_new.dim() != stack.input_dim()) {
    throw InputError("transform: input has " + std::to_string(x_new.dim()) + " rows, model expects " +
                     std::to_string(stack.input_dim()));
  }
  Matrix out = x_new.values();
  for (const auto& theta : stack.thetas) out = theta * out;
  return FeatureMatrix(std::move(out), FeatureKind::pixel);
}

}  // namespace jpsa
