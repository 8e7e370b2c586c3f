#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "calorie/error.hpp"
#include "calorie/learning.hpp"
#include "calorie/log.hpp"

namespace calorie::learning {

double SvrModel::predict(const Vector& x) const {
  require(x.size() == weights.size(), "svr_predict: dimension mismatch");
  return weights.dot(x) + bias;
}

// Dual coordinate descent on
//   min 1/2 b'Qb - y'b + eps |b|_1,  -C <= b_i <= C,  Q = XX'
// with X augmented by a constant bias column and y centred. Stops once the
// summed projected gradient of an epoch falls below tolerance times the first.
SvrModel svr_train(const Matrix& samples, std::span<const double> targets, const SvrParams& params,
                   SvrReport* report) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index dim = samples.cols();
  require(n >= 1, "svr_train: no samples");
  require(static_cast<std::size_t>(n) == targets.size(), "svr_train: target count mismatch");
  require(params.C > 0.0 && params.epsilon >= 0.0, "svr_train: invalid C or epsilon");

  const double y_mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = targets[static_cast<std::size_t>(i)] - y_mean;

  Matrix x(n, dim + 1);
  x.leftCols(dim) = samples;
  x.col(dim).setConstant(params.bias_scale);
  const Vector qd = x.rowwise().squaredNorm();

  Vector beta = Vector::Zero(n);
  Vector w = Vector::Zero(dim + 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(params.seed);

  const double C = params.C;
  const double eps = params.epsilon;
  SvrReport rep;
  double first_violation = -1.0;
  for (rep.epochs = 0; rep.epochs < params.max_epochs;) {
    for (std::size_t k = order.size(); k > 1; --k) {
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      std::swap(order[k - 1], order[pick(rng)]);
    }
    double violation = 0.0;  // summed projected-gradient magnitude
    for (const Eigen::Index i : order) {
      const double q = qd(i);
      if (q <= 0.0) continue;
      const double b = beta(i);
      const double g = x.row(i).dot(w) - y(i);
      const double gp = g + eps;
      const double gn = g - eps;
      if (b == 0.0) violation += gp < 0.0 ? -gp : std::max(gn, 0.0);
      else if (b >= C) violation += std::max(gp, 0.0);
      else if (b <= -C) violation += std::max(-gn, 0.0);
      else violation += std::abs(b > 0.0 ? gp : gn);

      double z;
      if (gp < q * b) z = -gp / q;
      else if (gn > q * b) z = -gn / q;
      else z = -b;
      const double next = std::clamp(b + z, -C, C);
      const double delta = next - b;
      if (delta != 0.0) {
        beta(i) = next;
        w.noalias() += delta * x.row(i).transpose();
      }
    }
    ++rep.epochs;
    if (first_violation < 0.0) first_violation = violation;
    if (violation <= params.tolerance * first_violation) {
      rep.converged = true;
      break;
    }
  }
  const Vector r = x * w - y;
  const double wn = 0.5 * w.squaredNorm();
  rep.primal = wn + C * (r.array().abs() - eps).max(0.0).sum();
  rep.dual = -(wn - y.dot(beta) + eps * beta.cwiseAbs().sum());
  if (!rep.converged) log::warn("svr_train: epoch limit reached before the optimality violation fell below tolerance");
  if (report) *report = rep;

  SvrModel model;
  model.weights = w.head(dim);
  model.bias = w(dim) * params.bias_scale + y_mean;
  model.C = C;
  model.epsilon = eps;
  return model;
}

}  // namespace calorie::learning
