#include <algorithm>
#include <cmath>
#include <limits>

#include "calorie/error.hpp"
#include "calorie/learning.hpp"
#include "calorie/log.hpp"

namespace calorie::learning {
namespace {

constexpr double kTau = 1e-12;

}  // namespace

BinarySolution smo_solve(const Eigen::MatrixXd& gram, std::span<const std::size_t> subset, std::span<const double> y,
                         double C, double tolerance) {
  require(subset.size() == y.size(), "smo_solve: label count mismatch");
  require(C > 0.0, "smo_solve: C must be positive");
  const std::size_t n = subset.size();
  const auto K = [&](std::size_t a, std::size_t b) {
    return gram(static_cast<Eigen::Index>(subset[a]), static_cast<Eigen::Index>(subset[b]));
  };

  BinarySolution sol;
  sol.alpha.assign(n, 0.0);
  sol.y.assign(y.begin(), y.end());
  std::vector<double> grad(n, -1.0);
  std::vector<double>& alpha = sol.alpha;

  const auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  const auto in_low = [&](std::size_t t) { return (y[t] < 0 && alpha[t] < C) || (y[t] > 0 && alpha[t] > 0); };

  const std::size_t max_iter = std::max<std::size_t>(10'000'000, 100 * n);
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double score = -y[t] * grad[t];
      if (in_up(t) && score > m) {
        m = score;
        i = t;
      }
      if (in_low(t) && score < M) {
        M = score;
        j = t;
      }
    }
    if (i == n || j == n || m - M < tolerance) break;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double kij = K(i, j);
    const double qii = K(i, i);
    const double qjj = K(j, j);
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = (alpha[i] - old_i) * y[i];
    const double dj = (alpha[j] - old_j) * y[j];
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (K(t, i) * di + K(t, j) * dj);
  }
  if (iter >= max_iter) log::warn("smo_solve: iteration limit reached before convergence");
  sol.iterations = iter;

  // Offset from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  double rho = 0.0;
  if (free_count > 0) rho = free_sum / static_cast<double>(free_count);
  else if (std::isfinite(ub) && std::isfinite(lb)) rho = 0.5 * (ub + lb);
  else if (std::isfinite(ub)) rho = ub;
  else if (std::isfinite(lb)) rho = lb;
  sol.bias = -rho;
  return sol;
}

double kkt_violation(const Eigen::MatrixXd& gram, std::span<const std::size_t> subset, const BinarySolution& sol,
                     double C) {
  const std::size_t n = subset.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = sol.bias;
    for (std::size_t j = 0; j < n; ++j)
      if (sol.alpha[j] != 0.0)
        f += sol.alpha[j] * sol.y[j] *
             gram(static_cast<Eigen::Index>(subset[i]), static_cast<Eigen::Index>(subset[j]));
    const double yf = sol.y[i] * f;
    double v = 0.0;
    if (sol.alpha[i] <= 0.0) v = std::max(0.0, 1.0 - yf);
    else if (sol.alpha[i] >= C) v = std::max(0.0, yf - 1.0);
    else v = std::abs(yf - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

Eigen::MatrixXd squared_distances(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "squared_distances: dimension mismatch");
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (a * b.transpose());
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd rbf_gram(const Matrix& samples, double gamma) {
  Eigen::MatrixXd d = squared_distances(samples, samples);
  d.diagonal().setZero();
  return (-gamma * d.array()).exp().matrix();
}

SvmClassifier svm_train(const Matrix& samples, std::span<const int> labels, const SvmParams& params) {
  return svm_train(samples, rbf_gram(samples, params.gamma), labels, params);
}

SvmClassifier svm_train(const Matrix& samples, const Eigen::MatrixXd& gram, std::span<const int> labels,
                        const SvmParams& params) {
  const auto n = static_cast<std::size_t>(samples.rows());
  require(labels.size() == n, "svm_train: label count mismatch");
  require(gram.rows() == samples.rows() && gram.cols() == samples.rows(), "svm_train: Gram matrix size mismatch");
  SvmClassifier model;
  model.C = params.C;
  model.gamma = params.gamma;
  model.classes.assign(labels.begin(), labels.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  if (model.classes.size() < 2) throw Error("svm_train: need at least two classes");

  std::vector<std::int64_t> sv_slot(n, -1);
  std::vector<std::size_t> sv_rows;
  struct Raw {
    std::vector<std::size_t> rows;
    std::vector<double> coef;
  };
  std::vector<Raw> raw;
  for (std::size_t a = 0; a < model.classes.size(); ++a)
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<std::size_t> subset;
      std::vector<double> y;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == model.classes[a]) {
          subset.push_back(i);
          y.push_back(1.0);
        } else if (labels[i] == model.classes[b]) {
          subset.push_back(i);
          y.push_back(-1.0);
        }
      }
      const BinarySolution sol = smo_solve(gram, subset, y, params.C, params.tolerance);
      PairModel pair;
      pair.positive = model.classes[a];
      pair.negative = model.classes[b];
      pair.bias = sol.bias;
      Raw r;
      for (std::size_t t = 0; t < subset.size(); ++t) {
        if (sol.alpha[t] <= 0.0) continue;
        r.rows.push_back(subset[t]);
        r.coef.push_back(sol.alpha[t] * y[t]);
        if (sv_slot[subset[t]] < 0) {
          sv_slot[subset[t]] = 0;
          sv_rows.push_back(subset[t]);
        }
      }
      model.pairs.push_back(std::move(pair));
      raw.push_back(std::move(r));
    }

  std::sort(sv_rows.begin(), sv_rows.end());
  model.support_vectors.resize(static_cast<Eigen::Index>(sv_rows.size()), samples.cols());
  for (std::size_t s = 0; s < sv_rows.size(); ++s) {
    sv_slot[sv_rows[s]] = static_cast<std::int64_t>(s);
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = samples.row(static_cast<Eigen::Index>(sv_rows[s]));
  }
  model.support_rows = sv_rows;
  for (std::size_t p = 0; p < model.pairs.size(); ++p) {
    for (std::size_t t = 0; t < raw[p].rows.size(); ++t)
      model.pairs[p].support.push_back(static_cast<std::uint32_t>(sv_slot[raw[p].rows[t]]));
    model.pairs[p].coef = std::move(raw[p].coef);
  }
  return model;
}

std::vector<double> svm_decision_values_from_kernel(const SvmClassifier& model, const Vector& k_sv) {
  require(k_sv.size() == model.support_vectors.rows(), "svm_predict: kernel length mismatch");
  std::vector<double> out;
  out.reserve(model.pairs.size());
  for (const PairModel& pair : model.pairs) {
    double f = pair.bias;
    for (std::size_t t = 0; t < pair.support.size(); ++t) f += pair.coef[t] * k_sv(pair.support[t]);
    out.push_back(f);
  }
  return out;
}

std::vector<double> svm_decision_values(const SvmClassifier& model, const Vector& x) {
  require(static_cast<std::size_t>(x.size()) == model.dim(), "svm_predict: dimension mismatch");
  const Eigen::Index s = model.support_vectors.rows();
  Vector k(s);
  for (Eigen::Index i = 0; i < s; ++i)
    k(i) = std::exp(-model.gamma * (model.support_vectors.row(i).transpose() - x).squaredNorm());
  return svm_decision_values_from_kernel(model, k);
}

SvmPrediction svm_vote(const SvmClassifier& model, std::span<const double> dec) {
  require(dec.size() == model.pairs.size(), "svm_vote: decision count mismatch");
  SvmPrediction pred;
  pred.votes.assign(model.classes.size(), 0);
  const auto slot = [&](int label) {
    return static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), label) -
                                    model.classes.begin());
  };
  for (std::size_t p = 0; p < model.pairs.size(); ++p)
    ++pred.votes[slot(dec[p] > 0.0 ? model.pairs[p].positive : model.pairs[p].negative)];
  // First maximum wins: ties go to the lowest class id.
  std::size_t best = 0;
  for (std::size_t c = 1; c < pred.votes.size(); ++c)
    if (pred.votes[c] > pred.votes[best]) best = c;
  pred.label = model.classes[best];
  return pred;
}

SvmPrediction svm_predict(const SvmClassifier& model, const Vector& x) {
  return svm_vote(model, svm_decision_values(model, x));
}

}  // namespace calorie::learning
