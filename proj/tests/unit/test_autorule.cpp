#include <doctest.h>

#include <jpsa/autorule.hpp>
#include <jpsa/init_embed.hpp>

#include "subproblems.hpp"

using namespace jpsa;

namespace {

AdmmState zero_state(int d_out, int d_in, int n, double mu) {
  AdmmState st;
  st.mu = mu;
  st.theta = Matrix::Zero(d_out, d_in);
  st.g = Matrix::Zero(d_out, d_in);
  st.lambda2 = Matrix::Zero(d_out, d_in);
  st.h = st.q = st.s = st.lambda1 = st.lambda3 = st.lambda4 = Matrix::Zero(d_out, n);
  return st;
}

SparseMatrix sparse(const Matrix& m) { return m.sparseView(); }

}  // namespace

TEST_SUITE("autorule") {
  TEST_CASE("prox_nonneg") {
    const Matrix m = (Matrix(2, 2) << 1, -2, 0, 3).finished();
    CHECK(prox_nonneg(m) == (Matrix(2, 2) << 1, 0, 0, 3).finished());
    CHECK(prox_nonneg(-Matrix::Ones(2, 3)).isZero());
    oracle::Rng rng(1);
    const Matrix r = oracle::uniform(rng, 5, 5);
    const Matrix p = prox_nonneg(r);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) CHECK(p(i, j) == (r(i, j) > 0 ? r(i, j) : 0.0));
    }
  }

  TEST_CASE("prox_unit_ball") {
    CHECK((prox_unit_ball((Matrix(2, 1) << 3, 4).finished()) - (Matrix(2, 1) << 0.6, 0.8).finished()).norm() <
          1e-15);
    const Matrix inside = (Matrix(2, 1) << 0.3, 0.4).finished();
    CHECK(prox_unit_ball(inside) == inside);
    oracle::Rng rng(2);
    const Matrix r = oracle::uniform(rng, 4, 9, -2, 2);
    const Matrix p = prox_unit_ball(r);
    for (int j = 0; j < 9; ++j) {
      const double n = r.col(j).norm();
      const Vector want = n > 1 ? Vector(r.col(j) / n) : Vector(r.col(j));
      CHECK((p.col(j) - want).norm() < 1e-15);
      CHECK(p.col(j).norm() <= 1 + 1e-12);
    }
  }

  TEST_CASE("update_theta with zero numerator is zero") {
    oracle::Rng rng(3);
    const Matrix x = oracle::uniform(rng, 3, 5);
    const auto st = zero_state(2, 3, 5, 1.0);
    CHECK(update_theta(st, x, sparse(oracle::random_weights(rng, 5)), 0.5).isZero());
  }

  TEST_CASE("update_theta scalar case") {
    auto st = zero_state(1, 1, 1, 1.0);
    st.h(0, 0) = st.q(0, 0) = st.s(0, 0) = 4;
    const Matrix x = Matrix::Constant(1, 1, 2.0);
    SparseMatrix lf(1, 1);
    CHECK(update_theta(st, x, lf, 0.0)(0, 0) == doctest::Approx(24.0 / 13.0).epsilon(1e-9));
  }

  TEST_CASE("update_theta is linear in the numerator inputs when eta = 0") {
    oracle::Rng rng(4);
    auto in = oracle::random_instance(rng);
    const SparseMatrix lf = laplacian(sparse(in.w));
    const Matrix t1 = update_theta(in.st, in.x, lf, 0.0);
    auto st2 = in.st;
    for (Matrix* m : {&st2.h, &st2.g, &st2.q, &st2.s, &st2.lambda1, &st2.lambda2, &st2.lambda3, &st2.lambda4}) {
      *m *= 2.0;
    }
    CHECK(oracle::rel_error(update_theta(st2, in.x, lf, 0.0), 2.0 * t1) < 1e-12);
  }

  TEST_CASE("closed-form updates match numerical minimizers") {
    oracle::Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const auto in = oracle::random_instance(rng);
      const auto& st = in.st;
      const SparseMatrix lf = laplacian(sparse(in.w));
      const auto d = st.theta.rows();
      const Matrix theta_star = oracle::minimize_quadratic(
          [&](const Matrix& t) { return oracle::theta_subproblem(in, t); }, d, in.x.rows());
      CHECK(oracle::rel_error(update_theta(st, in.x, lf, in.eta), theta_star) < 1e-6);
      const Matrix h_star = oracle::minimize_quadratic(
          [&](const Matrix& h) { return oracle::h_pretrain_subproblem(in, h); }, d, in.x.cols());
      CHECK(oracle::rel_error(update_h_pretrain(st, in.x), h_star) < 1e-6);
      const Matrix g_star = oracle::minimize_quadratic(
          [&](const Matrix& g) { return oracle::g_subproblem(in, g); }, d, in.x.rows());
      CHECK(oracle::rel_error(update_g(st, in.x), g_star) < 1e-6);
      CHECK(oracle::rel_error(update_q(st, in.x), oracle::nonneg_argmin(st.theta * in.x, st.lambda3, st.mu)) < 1e-6);
      CHECK(oracle::rel_error(update_s(st, in.x), oracle::unit_ball_argmin(st.theta * in.x, st.lambda4, st.mu)) <
            1e-6);
    }
  }

  TEST_CASE("update_h_pretrain limits") {
    oracle::Rng rng(6);
    auto in = oracle::random_instance(rng);
    in.st.g.setZero();
    in.st.lambda1.setZero();
    CHECK(oracle::rel_error(update_h_pretrain(in.st, in.x), in.st.theta * in.x) < 1e-8);
    auto big = oracle::random_instance(rng);
    big.st.mu = 1e6;
    CHECK((update_h_pretrain(big.st, big.x) - big.st.theta * big.x).norm() < 1e-4);
  }

  TEST_CASE("update_g limits") {
    oracle::Rng rng(7);
    auto in = oracle::random_instance(rng);
    in.st.h.setZero();
    CHECK(oracle::rel_error(update_g(in.st, in.x), in.st.theta - in.st.lambda2 / in.st.mu) < 1e-8);
    in.st.lambda2.setZero();
    CHECK(oracle::rel_error(update_g(in.st, in.x), in.st.theta) < 1e-8);
  }

  TEST_CASE("update_q and update_s pass feasible points through") {
    auto st = zero_state(2, 2, 3, 1.0);
    st.theta = Matrix::Identity(2, 2) * 0.5;
    const Matrix pos = (Matrix(2, 3) << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6).finished();
    CHECK(update_q(st, pos) == st.theta * pos);
    CHECK(update_q(st, -pos).isZero());
    CHECK(update_s(st, pos) == st.theta * pos);
    Matrix two = Matrix::Zero(2, 3);
    two(0, 1) = 4;  // theta x column of norm 2
    const Matrix s = update_s(st, two);
    CHECK(s(0, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("multiplier updates") {
    oracle::Rng rng(8);
    auto in = oracle::random_instance(rng);
    auto& st = in.st;
    const Matrix tx = st.theta * in.x;
    st.h = st.q = st.s = tx;
    st.g = st.theta;
    auto same = update_multipliers(st, in.x);
    CHECK(same.lambda1 == st.lambda1);
    CHECK(same.lambda2 == st.lambda2);
    CHECK(same.lambda3 == st.lambda3);
    CHECK(same.lambda4 == st.lambda4);

    st.mu = 1.0;
    st.h = tx + Matrix::Ones(tx.rows(), tx.cols());
    const auto m = update_multipliers(st, in.x);
    CHECK(oracle::rel_error(m.lambda1, st.lambda1 + Matrix::Ones(tx.rows(), tx.cols())) < 1e-14);

    auto r = oracle::random_instance(rng);
    const auto u = update_multipliers(r.st, r.x);
    const Matrix rtx = r.st.theta * r.x;
    CHECK(oracle::rel_error(u.lambda1, r.st.lambda1 + r.st.mu * (r.st.h - rtx)) < 1e-14);
    CHECK(oracle::rel_error(u.lambda2, r.st.lambda2 + r.st.mu * (r.st.g - r.st.theta)) < 1e-14);
    CHECK(oracle::rel_error(u.lambda3, r.st.lambda3 + r.st.mu * (r.st.q - rtx)) < 1e-14);
    CHECK(oracle::rel_error(u.lambda4, r.st.lambda4 + r.st.mu * (r.st.s - rtx)) < 1e-14);
  }

  TEST_CASE("shape mismatches are rejected") {
    oracle::Rng rng(9);
    auto in = oracle::random_instance(rng);
    in.st.h = Matrix::Zero(in.st.h.rows() + 1, in.st.h.cols());
    CHECK_THROWS_AS(update_h_pretrain(in.st, in.x), InputError);
  }

  TEST_CASE("identity start ends with consistent auxiliaries") {
    oracle::Rng rng(10);
    Matrix x = oracle::uniform(rng, 4, 20, 0, 1);
    x.colwise().normalize();
    SparseMatrix lf(20, 20);
    const auto r = autorule_fit(x, lf, Matrix::Identity(4, 4), 0.0, AdmmConfig{});
    CHECK(r.report.converged);
    CHECK(r.report.iterations < 500);
    CHECK((r.state.g - r.theta).norm() < 1e-5);
    CHECK((r.state.h - r.theta * x).norm() < 1e-5);
    CHECK(r.theta.allFinite());
  }

  TEST_CASE("random 6x30 input reaches the tolerance with feasible Q and S") {
    oracle::Rng rng(11);
    Matrix x = oracle::uniform(rng, 6, 30, 0, 1);
    x /= x.colwise().norm().maxCoeff();
    const SparseMatrix w = knn_heat_graph(x, 5, 1.0);
    const SparseMatrix lf = laplacian(w);
    const auto theta0 = lpp_fit(x, lf, degrees(w), 3).projection;
    const AdmmConfig cfg;
    const auto r = autorule_fit(x, lf, theta0, 0.1, cfg);
    CHECK(r.report.converged);
    CHECK(r.report.iterations <= 500);
    CHECK(std::max({r.report.r_h, r.report.r_g, r.report.r_q, r.report.r_s}) < cfg.eps);
    CHECK(r.state.q.minCoeff() >= 0);
    CHECK(r.state.s.colwise().norm().maxCoeff() <= 1 + 1e-12);
    // mu never decreases and stays capped
    for (std::size_t t = 1; t < r.report.trace.size(); ++t) {
      CHECK(r.report.trace[t].mu >= r.report.trace[t - 1].mu);
      CHECK(r.report.trace[t].mu <= cfg.mu_max);
    }
    CHECK(r.report.to_csv().rfind("iter,r_H,r_G,r_Q,r_S,mu,objective\n", 0) == 0);
  }

  TEST_CASE("autorule argument errors") {
    SparseMatrix lf(3, 3);
    CHECK_THROWS_AS(autorule_fit(Matrix::Zero(2, 3), lf, Matrix::Zero(1, 3), 0.1, AdmmConfig{}), InputError);
    AdmmConfig bad;
    bad.rho = 0.5;
    CHECK_THROWS_AS(autorule_fit(Matrix::Zero(2, 3), lf, Matrix::Zero(1, 2), 0.1, bad), InputError);
  }
}
