#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace calorie::learning {

/// One sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-8;

  Standardizer() = default;
  Standardizer(Vector mean, Vector scale);

  static Standardizer fit(const Matrix& samples);

  Matrix transform(const Matrix& samples) const;
  void transform_in_place(Matrix& samples) const;
  Vector transform(const Vector& sample) const;
  Matrix inverse(const Matrix& samples) const;

  const Vector& mean() const { return mean_; }
  const Vector& scale() const { return scale_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

 private:
  Vector mean_;
  Vector scale_;
};

// ---------------------------------------------------------------------------
// RBF soft-margin SVM, one-vs-one.

struct SvmParams {
  double C = 1.0;
  double gamma = 1.0;
  double tolerance = 1e-3;
};

/// Dual solution of one binary problem over a subset of a Gram matrix.
struct BinarySolution {
  std::vector<double> alpha;  // aligned with the subset
  std::vector<double> y;      // +1 / -1
  double bias = 0.0;          // f(x) = sum alpha_i y_i K(x_i, x) + bias
  std::size_t iterations = 0;
};

/// SMO with maximal-violating-pair working-set selection. `subset` indexes
/// rows/cols of `gram`; `y` holds +1/-1 labels aligned with `subset`.
BinarySolution smo_solve(const Eigen::MatrixXd& gram, std::span<const std::size_t> subset, std::span<const double> y,
                         double C, double tolerance);

/// Largest KKT violation of a binary solution (0 when every condition holds).
double kkt_violation(const Eigen::MatrixXd& gram, std::span<const std::size_t> subset, const BinarySolution& sol,
                     double C);

struct PairModel {
  int positive = 0;  // decision > 0 votes for this class
  int negative = 0;
  std::vector<std::uint32_t> support;  // rows of SvmClassifier::support_vectors
  std::vector<double> coef;            // alpha_i * y_i
  double bias = 0.0;
};

struct SvmClassifier {
  std::vector<int> classes;  // ascending
  Matrix support_vectors;
  std::vector<PairModel> pairs;  // (classes[a], classes[b]) for a < b, lexicographic
  double C = 1.0;
  double gamma = 1.0;
  std::vector<std::size_t> support_rows;  // training rows behind support_vectors; not persisted

  std::size_t dim() const { return static_cast<std::size_t>(support_vectors.cols()); }
};

Eigen::MatrixXd squared_distances(const Matrix& a, const Matrix& b);
Eigen::MatrixXd rbf_gram(const Matrix& samples, double gamma);

SvmClassifier svm_train(const Matrix& samples, std::span<const int> labels, const SvmParams& params);

/// Trains from a precomputed Gram matrix of `samples` (same gamma as params).
SvmClassifier svm_train(const Matrix& samples, const Eigen::MatrixXd& gram, std::span<const int> labels,
                        const SvmParams& params);

struct SvmPrediction {
  int label = 0;
  std::vector<int> votes;  // aligned with SvmClassifier::classes
};

std::vector<double> svm_decision_values(const SvmClassifier& model, const Vector& x);
SvmPrediction svm_predict(const SvmClassifier& model, const Vector& x);

/// Decision values from kernel values against each support vector.
std::vector<double> svm_decision_values_from_kernel(const SvmClassifier& model, const Vector& k_sv);
SvmPrediction svm_vote(const SvmClassifier& model, std::span<const double> decisions);

// ---------------------------------------------------------------------------
// Linear epsilon-insensitive SVR.

struct SvrParams {
  double C = 1.0;
  double epsilon = 0.1;
  double tolerance = 1e-2;  // relative projected-gradient violation
  int max_epochs = 2000;
  double bias_scale = 1.0;
  std::uint64_t seed = 1;
};

struct SvrModel {
  Vector weights;
  double bias = 0.0;
  double C = 1.0;
  double epsilon = 0.1;

  double predict(const Vector& x) const;
  std::size_t dim() const { return static_cast<std::size_t>(weights.size()); }
};

struct SvrReport {
  int epochs = 0;
  double primal = 0.0;
  double dual = 0.0;
  bool converged = false;
};

SvrModel svr_train(const Matrix& samples, std::span<const double> targets, const SvrParams& params,
                   SvrReport* report = nullptr);

// ---------------------------------------------------------------------------
// Hyper-parameter search with subject-stratified inner folds.

struct GridSearchSpec {
  std::vector<double> C;
  std::vector<double> gamma;
  std::vector<double> epsilon;
  int folds = 3;

  /// 2^-5..2^15 and 2^-15..2^3 in steps of x4, epsilon {0.01, 0.1, 1}.
  static GridSearchSpec libsvm_default();
};

struct GridPoint {
  double C = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double score = 0.0;  // accuracy for classification, RMSE for regression
};

struct GridSearchResult {
  GridPoint best;
  std::vector<GridPoint> evaluated;
  bool subject_folds = true;
};

/// Fold index per sample. Subjects are dealt to folds round-robin in id order;
/// with fewer subjects than folds, samples are dealt instead (class-stratified
/// when `strata` is non-empty) and a warning is logged.
std::vector<int> assign_folds(std::span<const int> subjects, int folds, std::span<const int> strata, bool* by_subject);

GridSearchResult grid_search_svm(const GridSearchSpec& spec, const Matrix& samples, std::span<const int> labels,
                                 std::span<const int> subjects, double tolerance = 1e-3);
/// C and epsilon of `base` are replaced by each grid point.
GridSearchResult grid_search_svr(const GridSearchSpec& spec, const Matrix& samples, std::span<const double> targets,
                                 std::span<const int> subjects, const SvrParams& base = {});

// ---------------------------------------------------------------------------

/// The d values preceding position `tick` of `series`, oldest first; positions
/// before the start repeat series[0].
std::vector<double> recent_history(std::span<const double> series, std::size_t tick, std::size_t d);

/// pooled ++ recent.
std::vector<double> build_recurrent_sample(std::span<const double> pooled, std::span<const double> recent);

}  // namespace calorie::learning
