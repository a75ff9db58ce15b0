#include <doctest.h>

#include <jpsa/jpsa.hpp>

#include "subproblems.hpp"

#include <cmath>

using namespace jpsa;

namespace {

// Two well separated clusters in 4 dimensions with a trivial stream
// (each pixel its own segment) and a kNN fused graph.
TrainingProblem tiny_problem(std::uint64_t seed, bool with_unlabeled) {
  oracle::Rng rng(seed);
  const int n = 16;
  Matrix x = oracle::uniform(rng, 4, n, 0.0, 0.1);
  for (int k = 0; k < n; ++k) x(k < n / 2 ? 0 : 1, k) += 0.8;
  std::vector<int> labels(n), seg(n);
  for (int k = 0; k < n; ++k) {
    labels[k] = k < n / 2 ? 1 : 2;
    if (with_unlabeled && k % 3 == 0) labels[k] = 0;
    seg[k] = k;
  }
  const FeatureMatrix px(x, FeatureKind::pixel);
  const FeatureMatrix st(x, FeatureKind::superpixel_stream);
  const auto graph = build_fused_graph(x, x, seg, 4, 1.0);
  return TrainingProblem::build(px, st, labels, 2, graph);
}

ProjectionStack random_stack(oracle::Rng& rng, const std::vector<int>& dims, int classes) {
  ProjectionStack s;
  for (std::size_t l = 1; l < dims.size(); ++l) s.thetas.push_back(oracle::uniform(rng, dims[l], dims[l - 1]));
  s.p = oracle::uniform(rng, classes, dims.back());
  return s;
}

}  // namespace

TEST_SUITE("jpsa") {
  TEST_CASE("objective of an identity layer on a fitted P") {
    // X = I (2x2), T = I, P = I, Y = I, no graph: everything is zero but |P|^2.
    const Matrix x = Matrix::Identity(2, 2);
    ProjectionStack s;
    s.thetas = {Matrix::Identity(2, 2)};
    s.p = Matrix::Identity(2, 2);
    HyperParams hp;
    hp.dims = {2};
    hp.gamma = 0.5;
    const SparseMatrix lf(2, 2);
    CHECK(objective_value(s, x, x, lf, hp) == doctest::Approx(0.5 * 0.5 * 2));
    s.thetas = {Matrix::Zero(2, 2)};
    // reconstruction |X|^2 = 2, prediction |Y|^2 = 2
    hp.alpha = 3;
    CHECK(objective_value(s, x, x, lf, hp) == doctest::Approx(0.5 * 2 + 0.5 * 3 * 2 + 0.5 * 0.5 * 2));
  }

  TEST_CASE("objective terms match a direct evaluation") {
    oracle::Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      auto prob = tiny_problem(100 + trial, trial % 2 == 1);
      const auto stack = random_stack(rng, {4, 3, 2}, 2);
      HyperParams hp;
      hp.m = 2;
      hp.dims = {3, 2};
      hp.alpha = oracle::log_uniform(rng, 0.1, 10);
      hp.beta = oracle::log_uniform(rng, 0.01, 1);
      hp.gamma = oracle::log_uniform(rng, 0.01, 1);
      const Matrix wf = Matrix(prob.lf).diagonal().asDiagonal().toDenseMatrix() - Matrix(prob.lf);

      double recon = 0, graph = 0;
      Matrix x = prob.x_tilde;
      for (const auto& t : stack.thetas) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
          recon += (x.col(k) - t.transpose() * (t * x.col(k))).squaredNorm();
        }
        graph += oracle::graph_term(t, x, wf);
        x = t * x;
      }
      double pred = 0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        pred += prob.label_weight(k) * (prob.y_tilde.col(k) - *stack.p * x.col(k)).squaredNorm();
      }
      const auto terms = objective_terms(stack, prob, hp);
      CHECK(terms.reconstruction == doctest::Approx(recon).epsilon(1e-10));
      CHECK(terms.graph == doctest::Approx(graph).epsilon(1e-10));
      CHECK(terms.prediction == doctest::Approx(pred).epsilon(1e-10));
      CHECK(terms.regression == doctest::Approx(stack.p->squaredNorm()).epsilon(1e-12));
      const double total = 0.5 * recon + 0.5 * hp.alpha * pred + 0.5 * hp.beta * graph +
                           0.5 * hp.gamma * stack.p->squaredNorm();
      CHECK(terms.total == doctest::Approx(total).epsilon(1e-10));
    }
  }

  TEST_CASE("objective needs P") {
    const auto prob = tiny_problem(1, false);
    ProjectionStack s;
    s.thetas = {Matrix::Identity(4, 4)};
    CHECK_THROWS_AS(objective_value(s, prob, HyperParams{}), InputError);
  }

  TEST_CASE("update_p examples") {
    ProjectionStack s;
    s.thetas = {Matrix::Identity(2, 2)};
    TrainingProblem prob;
    prob.x_tilde = Matrix::Identity(2, 2);
    prob.y_tilde = Matrix::Identity(2, 2);
    prob.label_weight = Vector::Ones(2);
    prob.lf = SparseMatrix(2, 2);
    CHECK(update_p(s, prob, 0.0, 1.0).isZero());
    // alpha = gamma = 1, V = Y = I: P = I (I + I)^-1
    CHECK(oracle::rel_error(update_p(s, prob, 1.0, 1.0), 0.5 * Matrix::Identity(2, 2)) < 1e-9);
    CHECK_THROWS_AS(update_p(s, prob, -1.0, 1.0), InputError);
  }

  TEST_CASE("update_p matches the numerical minimizer") {
    oracle::Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
      const auto prob = tiny_problem(200 + trial, trial % 2 == 0);
      const auto stack = random_stack(rng, {4, 3}, 2);
      const double alpha = oracle::log_uniform(rng, 0.1, 10), gamma = oracle::log_uniform(rng, 0.01, 1);
      const Matrix v = stack.thetas[0] * prob.x_tilde;
      const Matrix want = oracle::minimize_quadratic(
          [&](const Matrix& p) { return oracle::p_subproblem(p, v, prob.y_tilde, prob.label_weight, alpha, gamma); }, 2,
          3);
      CHECK(oracle::rel_error(update_p(stack, prob, alpha, gamma), want) < 1e-6);
    }
  }

  TEST_CASE("update_h_finetune with alpha 0 is the pre-training step") {
    oracle::Rng rng(23);
    const auto in = oracle::random_instance(rng);
    const auto d = in.st.theta.rows();
    const Matrix p_l = oracle::uniform(rng, 3, d);
    const Matrix y = oracle::uniform(rng, 3, in.x.cols());
    CHECK(oracle::rel_error(update_h_finetune(in.st, in.x, p_l, y, 0.0), update_h_pretrain(in.st, in.x)) < 1e-12);
  }

  TEST_CASE("update_h_finetune matches the numerical minimizer") {
    oracle::Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
      const auto in = oracle::random_instance(rng);
      const auto d = in.st.theta.rows();
      const auto n = in.x.cols();
      const int classes = oracle::uniform_int(rng, 1, 3);
      const Matrix p_l = oracle::uniform(rng, classes, d);
      const Matrix y = oracle::uniform(rng, classes, n);
      const Vector w = oracle::random_label_weights(rng, n);
      const double alpha = oracle::log_uniform(rng, 0.1, 10);
      const Matrix want = oracle::minimize_quadratic(
          [&](const Matrix& h) { return oracle::h_finetune_subproblem(in, h, p_l, y, w, alpha); }, d, n);
      CHECK(oracle::rel_error(update_h_finetune(in.st, in.x, p_l, y, w, alpha), want) < 1e-6);
    }
  }

  TEST_CASE("update_h_finetune shape errors") {
    oracle::Rng rng(25);
    const auto in = oracle::random_instance(rng);
    const Matrix bad = Matrix::Zero(2, in.st.theta.rows() + 1);
    CHECK_THROWS_AS(update_h_finetune(in.st, in.x, bad, Matrix::Zero(2, in.x.cols()), 1.0), InputError);
  }

  TEST_CASE("downstream operator and layer input compose the stack") {
    oracle::Rng rng(26);
    const auto s = random_stack(rng, {5, 4, 3, 2}, 2);
    const Matrix x = oracle::uniform(rng, 5, 7);
    CHECK(oracle::rel_error(downstream_operator(s, 0), *s.p * s.thetas[2] * s.thetas[1]) < 1e-14);
    CHECK(oracle::rel_error(downstream_operator(s, 2), *s.p) < 1e-14);
    CHECK(oracle::rel_error(layer_input(s, x, 0), x) < 1e-14);
    CHECK(oracle::rel_error(layer_input(s, x, 2), s.thetas[1] * s.thetas[0] * x) < 1e-14);
    CHECK_THROWS_AS(layer_input(s, x, 3), InputError);
  }

  TEST_CASE("fine-tuning a layer never raises its objective") {
    oracle::Rng rng(27);
    HyperParams hp;
    hp.m = 2;
    hp.dims = {3, 2};
    for (int trial = 0; trial < 5; ++trial) {
      const auto prob = tiny_problem(300 + trial, trial % 2 == 0);
      auto stack = random_stack(rng, {4, 3, 2}, 2);
      stack.p = update_p(stack, prob, hp.alpha, hp.gamma);
      for (int l = 0; l < 2; ++l) {
        const auto ft = finetune_theta(l, stack, prob, hp, AdmmConfig{});
        CHECK(ft.entry_objective == doctest::Approx(layer_objective(stack, l, stack.thetas[l], prob, hp)));
        CHECK(ft.exit_objective <= ft.entry_objective);
        CHECK(ft.exit_objective == doctest::Approx(layer_objective(stack, l, ft.theta, prob, hp)));
      }
    }
  }

  TEST_CASE("jpsa_fit on a tiny two-class problem") {
    for (bool unl : {false, true}) {
      const auto prob = tiny_problem(400, unl);
      HyperParams hp;
      hp.m = 2;
      hp.dims = {3, 2};
      const auto r = jpsa_fit(prob, hp, AdmmConfig{});
      const auto& tr = r.report.objective_trace;
      CHECK(tr.size() == static_cast<std::size_t>(r.report.outer_iterations) + 1);
      for (std::size_t t = 1; t < tr.size(); ++t) CHECK(tr[t] <= tr[t - 1] + 1e-8 * std::abs(tr[t - 1]));
      CHECK(r.report.outer_iterations <= hp.max_outer_iters);
      CHECK(r.report.init_reports.size() == 2);
      REQUIRE(r.stack.layers() == 2);
      CHECK(r.stack.thetas[0].rows() == 3);
      CHECK(r.stack.thetas[1].rows() == 2);
      CHECK(r.stack.p.has_value());
      CHECK(r.stack.thetas[0].allFinite());
      CHECK(r.stack.thetas[1].allFinite());
      CHECK(tr.back() == doctest::Approx(objective_value(r.stack, prob, hp)));
      CHECK(r.report.to_csv().rfind("outer_iter,objective\n0,", 0) == 0);
    }
  }

  TEST_CASE("jpsa_fit is deterministic") {
    const auto prob = tiny_problem(401, true);
    HyperParams hp;
    hp.dims = {2};
    const auto a = jpsa_fit(prob, hp, AdmmConfig{});
    const auto b = jpsa_fit(prob, hp, AdmmConfig{});
    CHECK(a.stack.thetas[0] == b.stack.thetas[0]);
    CHECK(*a.stack.p == *b.stack.p);
    CHECK(a.report.objective_trace == b.report.objective_trace);
  }

  TEST_CASE("jpsa_fit rejects inconsistent settings") {
    const auto prob = tiny_problem(402, false);
    HyperParams hp;
    hp.m = 2;
    hp.dims = {3};
    CHECK_THROWS_AS(jpsa_fit(prob, hp, AdmmConfig{}), InputError);
    TrainingProblem none = prob;
    none.label_weight.setZero();
    CHECK_THROWS_AS(jpsa_fit(none, HyperParams{}, AdmmConfig{}), InputError);
  }

  TEST_CASE("training problem layout") {
    const Matrix x = (Matrix(1, 3) << 1, 2, 3).finished();
    const Matrix sp = (Matrix(1, 3) << 4, 5, 6).finished();
    const std::vector<int> labels{2, 0, 1}, seg{0, 1, 2};
    const auto g = build_fused_graph(x, sp, seg, 1, 1.0);
    const auto p = TrainingProblem::build(FeatureMatrix(x, FeatureKind::pixel),
                                          FeatureMatrix(sp, FeatureKind::superpixel_stream), labels, 2, g);
    CHECK(p.x_tilde == (Matrix(1, 6) << 1, 2, 3, 4, 5, 6).finished());
    CHECK(p.y_tilde == (Matrix(2, 6) << 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0).finished());
    CHECK(p.label_weight == (Vector(6) << 1, 0, 1, 1, 0, 1).finished());
    CHECK_FALSE(p.fully_labeled());
    const std::vector<int> bad{3, 0, 1};
    CHECK_THROWS_AS(TrainingProblem::build(FeatureMatrix(x, FeatureKind::pixel),
                                           FeatureMatrix(sp, FeatureKind::superpixel_stream), bad, 2, g),
                    InputError);
  }

  TEST_CASE("transform") {
    ProjectionStack s;
    s.thetas = {(Matrix(1, 2) << 1, 1).finished()};
    const auto out = transform(s, FeatureMatrix((Matrix(2, 2) << 1, 2, 3, 4).finished(), FeatureKind::pixel));
    CHECK(out.values() == (Matrix(1, 2) << 4, 6).finished());
    oracle::Rng rng(28);
    const auto deep = random_stack(rng, {5, 3, 2}, 2);
    const Matrix x = oracle::uniform(rng, 5, 4);
    CHECK(oracle::rel_error(transform(deep, FeatureMatrix(x, FeatureKind::pixel)).values(),
                            deep.thetas[1] * deep.thetas[0] * x) < 1e-14);
    CHECK_THROWS_AS(transform(deep, FeatureMatrix(Matrix::Zero(4, 1), FeatureKind::pixel)), InputError);
    CHECK_THROWS_AS(transform(ProjectionStack{}, FeatureMatrix(x, FeatureKind::pixel)), InputError);
  }
}
