#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "calorie/error.hpp"
#include "calorie/learning.hpp"
#include "calorie/log.hpp"

namespace calorie::learning {
namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<double> powers_of_two(int lo, int hi, int step) {
  std::vector<double> out;
  for (int e = lo; e <= hi; e += step) out.push_back(std::ldexp(1.0, e));
  return out;
}

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

std::vector<Split> make_splits(std::span<const int> fold_of, int folds) {
  std::vector<Split> splits(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    for (int f = 0; f < folds; ++f)
      (fold_of[i] == f ? splits[static_cast<std::size_t>(f)].test : splits[static_cast<std::size_t>(f)].train)
          .push_back(static_cast<Eigen::Index>(i));
  std::erase_if(splits, [](const Split& s) { return s.test.empty() || s.train.empty(); });
  return splits;
}

int effective_folds(int requested, std::size_t samples) {
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(requested, 2)), samples));
}

}  // namespace

GridSearchSpec GridSearchSpec::libsvm_default() {
  GridSearchSpec spec;
  spec.C = powers_of_two(-5, 15, 2);
  spec.gamma = powers_of_two(-15, 3, 2);
  spec.epsilon = {0.01, 0.1, 1.0};
  return spec;
}

std::vector<int> assign_folds(std::span<const int> subjects, int folds, std::span<const int> strata, bool* by_subject) {
  require(folds >= 1, "assign_folds: need at least one fold");
  require(strata.empty() || strata.size() == subjects.size(), "assign_folds: strata length mismatch");
  std::vector<int> ids(subjects.begin(), subjects.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<int> out(subjects.size(), 0);
  if (ids.size() >= static_cast<std::size_t>(folds)) {
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      const auto rank = std::lower_bound(ids.begin(), ids.end(), subjects[i]) - ids.begin();
      out[i] = static_cast<int>(rank % folds);
    }
    if (by_subject) *by_subject = true;
    return out;
  }

  log::warn("grid search: " + std::to_string(ids.size()) + " subject(s) for " + std::to_string(folds) +
            " folds; falling back to sample folds");
  if (by_subject) *by_subject = false;
  if (strata.empty()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i % static_cast<std::size_t>(folds));
    return out;
  }
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
  std::size_t counter = 0;
  for (const auto& [label, members] : groups)
    for (const std::size_t i : members) out[i] = static_cast<int>(counter++ % static_cast<std::size_t>(folds));
  return out;
}

GridSearchResult grid_search_svm(const GridSearchSpec& spec, const Matrix& samples, std::span<const int> labels,
                                 std::span<const int> subjects, double tolerance) {
  const std::vector<double> cs = sorted_unique(spec.C);
  const std::vector<double> gammas = sorted_unique(spec.gamma);
  require(!cs.empty() && !gammas.empty(), "grid search: empty C or gamma grid");
  require(labels.size() == static_cast<std::size_t>(samples.rows()) && subjects.size() == labels.size(),
          "grid search: label/subject count mismatch");

  GridSearchResult result;
  if (cs.size() == 1 && gammas.size() == 1) {
    result.best = {cs[0], gammas[0], 0.0, std::numeric_limits<double>::quiet_NaN()};
    result.evaluated.push_back(result.best);
    return result;
  }

  const int folds = effective_folds(spec.folds, labels.size());
  const std::vector<int> fold_of = assign_folds(subjects, folds, labels, &result.subject_folds);
  const std::vector<Split> splits = make_splits(fold_of, folds);

  // score[c][g]
  std::vector<std::vector<double>> score(cs.size(), std::vector<double>(gammas.size(), 0.0));
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const Eigen::MatrixXd gram = rbf_gram(samples, gammas[g]);
    std::vector<std::size_t> correct(cs.size(), 0);
    std::size_t total = 0;
    for (const Split& split : splits) {
      total += split.test.size();
      std::vector<int> train_labels;
      for (const Eigen::Index i : split.train) train_labels.push_back(labels[static_cast<std::size_t>(i)]);
      const bool single_class =
          std::adjacent_find(train_labels.begin(), train_labels.end(), std::not_equal_to<>()) == train_labels.end();
      if (single_class) {
        std::size_t hits = 0;
        for (const Eigen::Index i : split.test) hits += labels[static_cast<std::size_t>(i)] == train_labels.front();
        for (std::size_t c = 0; c < cs.size(); ++c) correct[c] += hits;
        continue;
      }
      const Matrix train_x = samples(split.train, Eigen::all);
      const Eigen::MatrixXd train_gram = gram(split.train, split.train);
      for (std::size_t c = 0; c < cs.size(); ++c) {
        const SvmClassifier model = svm_train(train_x, train_gram, train_labels, {cs[c], gammas[g], tolerance});
        std::vector<Eigen::Index> sv_cols;
        for (const std::size_t r : model.support_rows) sv_cols.push_back(split.train[r]);
        for (const Eigen::Index i : split.test) {
          const Vector k = gram(i, sv_cols).transpose();
          const int label = svm_vote(model, svm_decision_values_from_kernel(model, k)).label;
          correct[c] += label == labels[static_cast<std::size_t>(i)];
        }
      }
    }
    for (std::size_t c = 0; c < cs.size(); ++c)
      score[c][g] = total ? static_cast<double>(correct[c]) / static_cast<double>(total) : 0.0;
  }

  bool first = true;
  for (std::size_t c = 0; c < cs.size(); ++c)
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const GridPoint point{cs[c], gammas[g], 0.0, score[c][g]};
      result.evaluated.push_back(point);
      if (first || point.score > result.best.score) result.best = point;
      first = false;
    }
  return result;
}

GridSearchResult grid_search_svr(const GridSearchSpec& spec, const Matrix& samples, std::span<const double> targets,
                                 std::span<const int> subjects, const SvrParams& base) {
  const std::vector<double> cs = sorted_unique(spec.C);
  const std::vector<double> eps = sorted_unique(spec.epsilon);
  require(!cs.empty() && !eps.empty(), "grid search: empty C or epsilon grid");
  require(targets.size() == static_cast<std::size_t>(samples.rows()) && subjects.size() == targets.size(),
          "grid search: target/subject count mismatch");

  GridSearchResult result;
  if (cs.size() == 1 && eps.size() == 1) {
    result.best = {cs[0], 0.0, eps[0], std::numeric_limits<double>::quiet_NaN()};
    result.evaluated.push_back(result.best);
    return result;
  }

  const int folds = effective_folds(spec.folds, targets.size());
  const std::vector<int> fold_of = assign_folds(subjects, folds, {}, &result.subject_folds);
  const std::vector<Split> splits = make_splits(fold_of, folds);

  bool first = true;
  for (const double C : cs)
    for (const double e : eps) {
      double sse = 0.0;
      std::size_t total = 0;
      for (const Split& split : splits) {
        const Matrix train_x = samples(split.train, Eigen::all);
        std::vector<double> train_y;
        for (const Eigen::Index i : split.train) train_y.push_back(targets[static_cast<std::size_t>(i)]);
        SvrParams params = base;
        params.C = C;
        params.epsilon = e;
        const SvrModel model = svr_train(train_x, train_y, params);
        for (const Eigen::Index i : split.test) {
          const double r = model.predict(samples.row(i).transpose()) - targets[static_cast<std::size_t>(i)];
          sse += r * r;
          ++total;
        }
      }
      const GridPoint point{C, 0.0, e, total ? std::sqrt(sse / static_cast<double>(total)) : 0.0};
      result.evaluated.push_back(point);
      if (first || point.score < result.best.score) result.best = point;
      first = false;
    }
  return result;
}

}  // namespace calorie::learning
