#include <doctest.h>

#include <cmath>
#include <random>

#include "calorie/error.hpp"
#include "calorie/learning.hpp"

using namespace calorie;
using namespace calorie::learning;

namespace {

struct Labelled {
  Matrix x;
  std::vector<int> y;
  std::vector<int> subject;
};

/// Gaussian blobs, one per class, centred on `centres`; subjects cycle 0..subjects-1.
Labelled blobs(std::mt19937_64& rng, const std::vector<std::vector<double>>& centres, int per_class, double sd,
               int subjects = 3) {
  std::normal_distribution<double> n01;
  const auto dim = static_cast<Eigen::Index>(centres.front().size());
  Labelled d;
  d.x.resize(static_cast<Eigen::Index>(centres.size()) * per_class, dim);
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < centres.size(); ++c)
    for (int i = 0; i < per_class; ++i, ++r) {
      for (Eigen::Index k = 0; k < dim; ++k) d.x(r, k) = centres[c][static_cast<std::size_t>(k)] + sd * n01(rng);
      d.y.push_back(static_cast<int>(c));
      d.subject.push_back(i % subjects);
    }
  return d;
}

std::vector<int> predict_all(const SvmClassifier& m, const Matrix& x) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(svm_predict(m, x.row(i).transpose()).label);
  return out;
}

}  // namespace

TEST_CASE("standardizer") {
  Matrix x(4, 3);
  x << 1, 10, 5, 2, 20, 5, 3, 30, 5, 4, 40, 5;
  const Standardizer s = Standardizer::fit(x);
  const Matrix z = s.transform(x);
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(z.col(j).mean() == doctest::Approx(0.0).scale(1.0));
    CHECK(std::sqrt(z.col(j).squaredNorm() / 4.0) == doctest::Approx(1.0));
  }
  CHECK(s.scale()(2) == Standardizer::kStdFloor);
  CHECK(z.col(2).isZero());
  CHECK(s.inverse(z).isApprox(x, 1e-12));
  CHECK_THROWS_AS(s.transform(Vector(Vector::Zero(2))), Error);
}

TEST_CASE("SMO binary solution satisfies KKT") {
  std::mt19937_64 rng(3);
  const Labelled d = blobs(rng, {{0, 0}, {1.5, 1.5}}, 30, 0.8);
  const Eigen::MatrixXd gram = rbf_gram(d.x, 0.5);
  std::vector<std::size_t> subset(d.y.size());
  std::vector<double> y(d.y.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    subset[i] = i;
    y[i] = d.y[i] == 0 ? 1.0 : -1.0;
  }
  for (const double C : {0.1, 1.0, 100.0}) {
    const BinarySolution sol = smo_solve(gram, subset, y, C, 1e-6);
    CHECK(kkt_violation(gram, subset, sol, C) <= 1e-5);
    double balance = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(sol.alpha[i] >= 0.0);
      CHECK(sol.alpha[i] <= C + 1e-12);
      balance += sol.alpha[i] * y[i];
    }
    CHECK(std::abs(balance) < 1e-9);
  }
}

TEST_CASE("SVM classifier") {
  std::mt19937_64 rng(5);

  SUBCASE("separated blobs") {
    const Labelled d = blobs(rng, {{0, 0}, {5, 0}, {0, 5}}, 20, 0.5);
    const SvmClassifier m = svm_train(d.x, d.y, {10.0, 0.5});
    CHECK(m.classes == std::vector<int>{0, 1, 2});
    CHECK(m.pairs.size() == 3);
    CHECK(predict_all(m, d.x) == d.y);
  }

  SUBCASE("XOR needs the kernel") {
    Matrix x(4, 2);
    x << 0, 0, 1, 1, 0, 1, 1, 0;
    const std::vector<int> y{0, 0, 1, 1};
    CHECK(predict_all(svm_train(x, y, {100.0, 2.0}), x) == y);
  }

  SUBCASE("duplicating every sample at C/2 keeps the decision function") {
    const Labelled d = blobs(rng, {{0, 0}, {1, 1}}, 15, 0.7);
    Matrix x2(d.x.rows() * 2, d.x.cols());
    x2 << d.x, d.x;
    std::vector<int> y2 = d.y;
    y2.insert(y2.end(), d.y.begin(), d.y.end());
    const SvmClassifier a = svm_train(d.x, d.y, {4.0, 1.0, 1e-8});
    const SvmClassifier b = svm_train(x2, y2, {2.0, 1.0, 1e-8});
    for (Eigen::Index i = 0; i < 10; ++i) {
      const Vector q = Vector::Random(2) * 2.0;
      CHECK(svm_decision_values(a, q)[0] == doctest::Approx(svm_decision_values(b, q)[0]).epsilon(1e-5));
    }
  }

  SUBCASE("monotone relabelling") {
    const Labelled d = blobs(rng, {{0, 0}, {2, 0}, {1, 2}}, 15, 0.9);
    std::vector<int> relabelled;
    const int map[] = {3, 7, 10};
    for (int y : d.y) relabelled.push_back(map[y]);
    const auto base = predict_all(svm_train(d.x, d.y, {2.0, 0.5}), d.x);
    const auto mapped = predict_all(svm_train(d.x, relabelled, {2.0, 0.5}), d.x);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(mapped[i] == map[base[i]]);
  }

  SUBCASE("affine feature changes vanish after standardization") {
    const Labelled d = blobs(rng, {{0, 0}, {2, 1}}, 20, 0.9);
    Matrix shifted = d.x;
    shifted.col(0) = shifted.col(0) * 250.0 + Vector::Constant(shifted.rows(), 40.0);
    shifted.col(1) = shifted.col(1) * 0.01;
    const Matrix za = Standardizer::fit(d.x).transform(d.x);
    const Matrix zb = Standardizer::fit(shifted).transform(shifted);
    CHECK(za.isApprox(zb, 1e-9));
    CHECK(predict_all(svm_train(za, d.y, {1.0, 1.0}), za) == predict_all(svm_train(zb, d.y, {1.0, 1.0}), zb));
  }

  SUBCASE("three-way tie goes to the lowest class") {
    SvmClassifier m;
    m.classes = {0, 1, 2};
    m.pairs = {{0, 1, {}, {}, 0.0}, {0, 2, {}, {}, 0.0}, {1, 2, {}, {}, 0.0}};
    const SvmPrediction p = svm_vote(m, std::vector<double>{1.0, -1.0, 1.0});
    CHECK(p.votes == std::vector<int>{1, 1, 1});
    CHECK(p.label == 0);
  }

  SUBCASE("bad input") {
    Matrix x(2, 1);
    x << 0, 1;
    CHECK_THROWS_AS(svm_train(x, std::vector<int>{0}, {}), Error);
  }
}

TEST_CASE("linear SVR") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);

  SUBCASE("recovers a line") {
    Matrix x(40, 1);
    std::vector<double> y;
    for (Eigen::Index i = 0; i < 40; ++i) {
      x(i, 0) = u(rng);
      y.push_back(2.0 * x(i, 0) + 1.0);
    }
    SvrReport report;
    const SvrModel m = svr_train(x, y, {1000.0, 0.001, 1e-8, 20000}, &report);
    CHECK(m.weights(0) == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(m.bias == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(report.primal >= report.dual - 1e-9);
  }

  SUBCASE("constant target") {
    Matrix x(30, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    const std::vector<double> y(30, 4.0);
    const SvrModel m = svr_train(x, y, {10.0, 0.01, 1e-8, 20000});
    for (Eigen::Index i = 0; i < 30; ++i) CHECK(m.predict(x.row(i).transpose()) == doctest::Approx(4.0).epsilon(0.01));
  }

  SUBCASE("noise inside the tube is fitted within epsilon") {
    const double eps = 0.2;
    Matrix x(50, 2);
    std::vector<double> y;
    for (Eigen::Index i = 0; i < 50; ++i) {
      x(i, 0) = u(rng);
      x(i, 1) = u(rng);
      y.push_back(x(i, 0) - 0.5 * x(i, 1) + 0.5 * eps * u(rng));
    }
    const SvrModel m = svr_train(x, y, {1000.0, eps, 1e-8, 50000});
    for (Eigen::Index i = 0; i < 50; ++i)
      CHECK(std::abs(m.predict(x.row(i).transpose()) - y[static_cast<std::size_t>(i)]) <= eps + 1e-3);
  }

  SUBCASE("deterministic") {
    Matrix x(20, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    std::vector<double> y;
    for (Eigen::Index i = 0; i < 20; ++i) y.push_back(x(i, 0));
    const SvrModel a = svr_train(x, y, {});
    const SvrModel b = svr_train(x, y, {});
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
  }
}

TEST_CASE("fold assignment") {
  bool by_subject = false;
  const std::vector<int> subjects{5, 3, 5, 9, 3};
  CHECK(assign_folds(subjects, 3, {}, &by_subject) == std::vector<int>{1, 0, 1, 2, 0});
  CHECK(by_subject);

  const std::vector<int> two{1, 1, 2, 2, 2, 1};
  const std::vector<int> strata{0, 1, 0, 1, 0, 1};
  const auto folds = assign_folds(two, 3, strata, &by_subject);
  CHECK_FALSE(by_subject);
  // class 0 rows 0,2,4 then class 1 rows 1,3,5, dealt round-robin
  CHECK(folds == std::vector<int>{0, 0, 1, 1, 2, 2});
}

TEST_CASE("grid search") {
  std::mt19937_64 rng(21);

  SUBCASE("single point skips validation") {
    const Labelled d = blobs(rng, {{0, 0}, {3, 3}}, 10, 0.5);
    const GridSearchSpec spec{{8.0}, {0.25}, {0.1}, 3};
    const GridSearchResult r = grid_search_svm(spec, d.x, d.y, d.subject);
    REQUIRE(r.evaluated.size() == 1);
    CHECK(r.best.C == 8.0);
    CHECK(r.best.gamma == 0.25);
  }

  SUBCASE("kernel width is recovered on clustered XOR") {
    // four tight clusters at the corners, opposite corners share a class
    const Labelled d = blobs(rng, {{0, 0}, {4, 4}, {0, 4}, {4, 0}}, 12, 0.3);
    std::vector<int> y;
    for (int c : d.y) y.push_back(c < 2 ? 0 : 1);
    const GridSearchSpec spec{{10.0}, {1e-6, 0.5}, {0.1}, 3};
    const GridSearchResult r = grid_search_svm(spec, d.x, y, d.subject);
    CHECK(r.subject_folds);
    CHECK(r.evaluated.size() == 2);
    CHECK(r.best.gamma == 0.5);
    CHECK(r.best.score == 1.0);

    const GridSearchResult again = grid_search_svm(spec, d.x, y, d.subject);
    for (std::size_t i = 0; i < r.evaluated.size(); ++i) CHECK(again.evaluated[i].score == r.evaluated[i].score);
  }

  SUBCASE("regression cost is recovered on a noiseless line") {
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix x(36, 1);
    std::vector<double> y;
    std::vector<int> subject;
    for (Eigen::Index i = 0; i < 36; ++i) {
      x(i, 0) = u(rng);
      y.push_back(3.0 * x(i, 0));
      subject.push_back(static_cast<int>(i % 4));
    }
    const GridSearchSpec spec{{1e-6, 100.0}, {}, {0.01, 1.0}, 3};
    const GridSearchResult r = grid_search_svr(spec, x, y, subject);
    CHECK(r.evaluated.size() == 4);
    CHECK(r.best.C == 100.0);
    CHECK(r.best.epsilon == 0.01);
  }

  CHECK(GridSearchSpec::libsvm_default().C.size() == 11);
  CHECK(GridSearchSpec::libsvm_default().gamma.size() == 10);
}

TEST_CASE("recurrent history") {
  const std::vector<double> s{1, 2, 3, 4};
  CHECK(recent_history(s, 2, 3) == std::vector<double>{1, 1, 2});
  CHECK(recent_history(s, 4, 2) == std::vector<double>{3, 4});
  CHECK(recent_history(s, 0, 2) == std::vector<double>{1, 1});
  CHECK(build_recurrent_sample(std::vector<double>{9, 8}, std::vector<double>{1, 2, 3}) ==
        std::vector<double>{9, 8, 1, 2, 3});
}
