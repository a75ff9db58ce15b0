#include <doctest.h>

#include <jpsa/classify_metrics.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace jpsa;

TEST_SUITE("classify_metrics") {
  TEST_CASE("nearest neighbor examples") {
    const Matrix train = (Matrix(1, 3) << 0, 10, 20).finished();
    const std::vector<int> labels{1, 2, 3};
    const Matrix test = (Matrix(1, 4) << 1, 9, 16, 5).finished();
    // 5 is equidistant from 0 and 10: lowest training index wins.
    CHECK(nn_classify(train, labels, test) == std::vector<int>{1, 2, 3, 1});
  }

  TEST_CASE("nearest neighbor agrees with a brute-force scan") {
    oracle::Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = oracle::uniform_int(rng, 1, 6), nt = oracle::uniform_int(rng, 1, 15);
      const Matrix train = oracle::uniform(rng, d, nt), test = oracle::uniform(rng, d, 25);
      std::vector<int> labels(nt);
      for (auto& l : labels) l = oracle::uniform_int(rng, 1, 4);
      const auto got = nn_classify(train, labels, test);
      for (Eigen::Index j = 0; j < test.cols(); ++j) {
        int best = 0;
        for (int i = 1; i < nt; ++i) {
          if ((train.col(i) - test.col(j)).squaredNorm() < (train.col(best) - test.col(j)).squaredNorm()) best = i;
        }
        CHECK(got[j] == labels[best]);
      }
    }
  }

  TEST_CASE("nearest neighbor errors") {
    const std::vector<int> one{1};
    CHECK_THROWS_AS(nn_classify(Matrix::Zero(2, 1), one, Matrix::Zero(3, 1)), InputError);
    CHECK_THROWS_AS(nn_classify(Matrix::Zero(2, 2), one, Matrix::Zero(2, 1)), InputError);
    CHECK_THROWS_AS(nn_classify(Matrix::Zero(2, 0), std::vector<int>{}, Matrix::Zero(2, 1)), InputError);
  }

  TEST_CASE("confusion counts") {
    const std::vector<int> t{1, 1, 2, 2, 3}, p{1, 2, 2, 2, 1};
    const auto cm = confusion(t, p, 3);
    CHECK(cm.counts(0, 0) == 1);
    CHECK(cm.counts(0, 1) == 1);
    CHECK(cm.counts(1, 1) == 2);
    CHECK(cm.counts(2, 0) == 1);
    CHECK(cm.total() == 5);
    CHECK_THROWS_AS(confusion(t, std::vector<int>{1}, 3), InputError);
    CHECK_THROWS_AS(confusion(std::vector<int>{4}, std::vector<int>{1}, 3), InputError);
    CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{1}, 3), InputError);
  }

  TEST_CASE("metrics examples") {
    const std::vector<int> t{1, 1, 2, 2}, p{1, 1, 2, 2};
    const auto perfect = metrics(confusion(t, p, 2));
    CHECK(perfect.oa == 1.0);
    CHECK(perfect.aa == 1.0);
    CHECK(perfect.kappa == 1.0);

    // truth 1,1,2,2 vs prediction 1,2,1,2: OA 0.5, Pe 0.5, kappa 0
    const auto chance = metrics(confusion(t, std::vector<int>{1, 2, 1, 2}, 2));
    CHECK(chance.oa == 0.5);
    CHECK(chance.aa == 0.5);
    CHECK(chance.kappa == 0.0);

    // single class everywhere: Pe = 1
    const auto one = metrics(confusion(std::vector<int>{1, 1}, std::vector<int>{1, 1}, 2));
    CHECK(one.oa == 1.0);
    CHECK(one.kappa == 0.0);
    CHECK(one.aa == 1.0);
    CHECK(std::isnan(one.per_class[1]));

    // 3 of 4 right, recalls 1 and 1/2
    const auto m = metrics(confusion(std::vector<int>{1, 1, 2, 2}, std::vector<int>{1, 1, 2, 1}, 2));
    CHECK(m.oa == 0.75);
    CHECK(m.aa == 0.75);
    CHECK(m.per_class[0] == 1.0);
    CHECK(m.per_class[1] == 0.5);
    // Pe = (2*3 + 2*1) / 16 = 0.5
    CHECK(m.kappa == doctest::Approx(0.5));
    CHECK(m.csv_header() == "oa,aa,kappa,class1,class2\n");
  }

  TEST_CASE("metrics agree with the direct formulas") {
    oracle::Rng rng(32);
    for (int trial = 0; trial < 100; ++trial) {
      const int c = oracle::uniform_int(rng, 1, 6);
      const int n = oracle::uniform_int(rng, 1, 60);
      std::vector<int> t(n), p(n);
      for (int i = 0; i < n; ++i) {
        t[i] = oracle::uniform_int(rng, 1, c);
        p[i] = oracle::uniform_int(rng, 0, 2) == 0 ? t[i] : oracle::uniform_int(rng, 1, c);
      }
      const auto got = metrics(confusion(t, p, c));
      const auto want = oracle::direct_metrics(t, p, c);
      CHECK(std::abs(got.oa - want.oa) <= 1e-12);
      CHECK(std::abs(got.aa - want.aa) <= 1e-12);
      CHECK(std::abs(got.kappa - want.kappa) <= 1e-12);
      CHECK(got.kappa <= got.oa + 1e-12);
    }
  }

  TEST_CASE("metrics are invariant to relabeling both sides") {
    oracle::Rng rng(33);
    const int c = 5;
    std::vector<int> perm(c);
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> t(80), p(80), tp(80), pp(80);
    for (int i = 0; i < 80; ++i) {
      t[i] = oracle::uniform_int(rng, 1, c);
      p[i] = oracle::uniform_int(rng, 0, 1) ? t[i] : oracle::uniform_int(rng, 1, c);
      tp[i] = perm[t[i] - 1];
      pp[i] = perm[p[i] - 1];
    }
    const auto a = metrics(confusion(t, p, c)), b = metrics(confusion(tp, pp, c));
    CHECK(a.oa == doctest::Approx(b.oa).epsilon(1e-14));
    CHECK(a.aa == doctest::Approx(b.aa).epsilon(1e-14));
    CHECK(a.kappa == doctest::Approx(b.kappa).epsilon(1e-14));
  }

  TEST_CASE("empty confusion is rejected") {
    ConfusionMatrix cm;
    cm.counts = decltype(cm.counts)::Zero(2, 2);
    CHECK_THROWS_AS(metrics(cm), InputError);
  }
}
