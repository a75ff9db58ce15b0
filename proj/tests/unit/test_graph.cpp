#include <doctest.h>

#include <jpsa/graph.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <numeric>

using namespace jpsa;

namespace {

Matrix dense(const SparseMatrix& s) { return Matrix(s); }

SparseMatrix sparse(const Matrix& m) { return m.sparseView(); }

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("identical points are fully connected") {
    const Matrix x = Matrix::Ones(3, 2);
    const Matrix w = dense(knn_heat_graph(x, 1, 1.0));
    CHECK(w == (Matrix(2, 2) << 0, 1, 1, 0).finished());
  }

  TEST_CASE("heat kernel at distance sigma*sqrt(2) is 1/e") {
    const double sigma = 0.7;
    Matrix x = Matrix::Zero(1, 2);
    x(0, 1) = sigma * std::sqrt(2.0);
    const Matrix w = dense(knn_heat_graph(x, 1, sigma));
    CHECK(w(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(w(0, 1) == doctest::Approx(0.3679).epsilon(1e-4));
  }

  TEST_CASE("kNN graph matches brute force all pairs") {
    oracle::Rng rng(9);
    const Matrix x = oracle::uniform(rng, 3, 20);
    const int k = 4;
    const double sigma = 0.8;
    const Matrix w = dense(knn_heat_graph(x, k, sigma));
    Matrix want = Matrix::Zero(20, 20);
    for (int i = 0; i < 20; ++i) {
      std::vector<std::pair<double, int>> d;
      for (int j = 0; j < 20; ++j) {
        if (j != i) d.push_back({(x.col(i) - x.col(j)).squaredNorm(), j});
      }
      std::sort(d.begin(), d.end());
      for (int t = 0; t < k; ++t) {
        const double v = std::exp(-d[t].first / (2 * sigma * sigma));
        const int j = d[t].second;
        want(i, j) = std::max(want(i, j), v);
        want(j, i) = std::max(want(j, i), v);
      }
    }
    CHECK((w - want).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(w.diagonal().isZero());
    CHECK(((w.array() == 0) || ((w.array() > 0) && (w.array() <= 1))).all());
  }

  TEST_CASE("kNN weights do not increase with distance") {
    oracle::Rng rng(10);
    const Matrix x = oracle::uniform(rng, 2, 15);
    const Matrix w = dense(knn_heat_graph(x, 5, 0.5));
    for (int i = 0; i < 15; ++i) {
      for (int j = 0; j < 15; ++j) {
        for (int l = 0; l < 15; ++l) {
          if (w(i, j) > 0 && w(i, l) > 0 &&
              (x.col(i) - x.col(j)).norm() < (x.col(i) - x.col(l)).norm()) {
            CHECK(w(i, j) >= w(i, l));
          }
        }
      }
    }
  }

  TEST_CASE("kNN argument errors") {
    const Matrix x = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(knn_heat_graph(x, 3, 1.0), InputError);
    CHECK_THROWS_AS(knn_heat_graph(x, 0, 1.0), InputError);
    CHECK_THROWS_AS(knn_heat_graph(x, 1, 0.0), InputError);
  }

  TEST_CASE("alignment graph block structure") {
    const std::vector<int> own{0, 1, 2, 3};
    CHECK(dense(alignment_graph(own)) == Matrix::Identity(4, 4));
    const std::vector<int> one(5, 7);
    CHECK(dense(alignment_graph(one)) == Matrix::Ones(5, 5));

    oracle::Rng rng(12);
    std::vector<int> seg(10);
    for (auto& s : seg) s = oracle::uniform_int(rng, 0, 2);
    const Matrix wa = dense(alignment_graph(seg));
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) CHECK(wa(i, j) == (seg[i] == seg[j] ? 1.0 : 0.0));
    }
    const Matrix sq = wa * wa;
    CHECK(((sq.array() > 0) == (wa.array() > 0)).all());
  }

  TEST_CASE("laplacian small cases") {
    const Matrix w = (Matrix(2, 2) << 0, 1, 1, 0).finished();
    CHECK(dense(laplacian(sparse(w))) == (Matrix(2, 2) << 1, -1, -1, 1).finished());
    SparseMatrix zero(3, 3);
    CHECK(dense(laplacian(zero)).isZero());
    Matrix neg = w;
    neg(0, 1) = neg(1, 0) = -1;
    CHECK_THROWS_AS(laplacian(sparse(neg)), InputError);
  }

  TEST_CASE("random laplacian is PSD with the constant vector in its null space") {
    oracle::Rng rng(13);
    const Matrix w = oracle::random_weights(rng, 7);
    const Matrix l = dense(laplacian(sparse(w)));
    CHECK((l - oracle::dense_laplacian(w)).norm() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    CHECK((l * Vector::Ones(7)).norm() < 1e-12);
  }

  TEST_CASE("fused graph of two disjoint edges") {
    SparseMatrix zero(2, 2);
    const auto g = assemble_fused(zero, zero, sparse(Matrix::Identity(2, 2)));
    const Matrix want = (Matrix(4, 4) << 1, 0, -1, 0, 0, 1, 0, -1, -1, 0, 1, 0, 0, -1, 0, 1).finished();
    CHECK(dense(g.lf) == want);
    const auto z = assemble_fused(zero, zero, zero);
    CHECK(dense(z.lf).isZero());
  }

  TEST_CASE("fused graph blocks and quadratic form") {
    oracle::Rng rng(14);
    const Matrix wp = oracle::random_weights(rng, 6);
    const Matrix wsp = oracle::random_weights(rng, 6);
    Matrix wa = oracle::random_weights(rng, 6);
    const auto g = assemble_fused(sparse(wp), sparse(wsp), sparse(wa));
    const Matrix wf = dense(g.wf);
    CHECK(wf.topLeftCorner(6, 6) == wp);
    CHECK(wf.topRightCorner(6, 6) == wa);
    CHECK(wf.bottomLeftCorner(6, 6) == wa);
    CHECK(wf.bottomRightCorner(6, 6) == wsp);
    CHECK((g.degree - wf.rowwise().sum()).norm() < 1e-14);
    const Matrix lf = dense(g.lf);
    for (int t = 0; t < 100; ++t) {
      const Vector x = oracle::uniform(rng, 12, 1);
      CHECK(x.dot(lf * x) == doctest::Approx(oracle::dirichlet_energy(wf, x)).epsilon(1e-12));
    }
    Matrix bad = wa;
    bad(0, 1) += 0.5;
    CHECK_THROWS_AS(assemble_fused(sparse(wp), sparse(wsp), sparse(bad)), InputError);
  }

  TEST_CASE("build_fused_graph wires the three blocks") {
    oracle::Rng rng(15);
    const Matrix x = oracle::uniform(rng, 3, 8);
    const Matrix s = oracle::uniform(rng, 3, 8);
    const std::vector<int> seg{0, 0, 1, 1, 2, 2, 2, 3};
    const auto g = build_fused_graph(x, s, seg, 3, 1.0);
    CHECK(dense(g.wp) == dense(knn_heat_graph(x, 3, 1.0)));
    CHECK(dense(g.wsp) == dense(knn_heat_graph(s, 3, 1.0)));
    CHECK(dense(g.wa) == dense(alignment_graph(seg)));
    CHECK(g.lf.rows() == 16);
  }

  TEST_CASE("coordinate dump is sorted") {
    const Matrix w = (Matrix(2, 2) << 0, 0.5, 0.5, 0).finished();
    CHECK(dump_coo(sparse(w)) == "0 1 0.5\n1 0 0.5\n");
  }
}
