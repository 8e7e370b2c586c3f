#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calorie/pipeline.hpp"
#include "calorie/session.hpp"

namespace calorie::evaluation {

double rmse(std::span<const double> pred, std::span<const double> gt);

/// rmse / (max(gt) - min(gt)); throws DataError("constant ground truth").
double nrmse(std::span<const double> pred, std::span<const double> gt);

/// 100 * (1 - |pred - gt| / gt), floored at 0.
double session_accuracy(double pred_total, double gt_total);

/// Sample correlation; nullopt when either series is constant.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

struct Fold {
  int held_out = 0;
  std::vector<int> train;
};

struct FoldPlan {
  std::vector<Fold> folds;

  /// One fold per distinct subject, ascending ids.
  static FoldPlan loso(std::span<const int> subjects);
};

/// Flags every fitted component that saw the held-out subject.
class LeakageAudit : public pipeline::TrainingObserver {
 public:
  explicit LeakageAudit(int held_out) : held_out_(held_out) {}

  void on_fit(std::string_view stage, std::span<const int> subjects) override;

  std::size_t events() const { return events_; }
  std::size_t violations() const { return violations_.size(); }
  const std::vector<std::string>& violation_stages() const { return violations_; }
  const std::map<std::string, std::size_t>& stages() const { return stages_; }

 private:
  int held_out_;
  std::size_t events_ = 0;
  std::vector<std::string> violations_;
  std::map<std::string, std::size_t> stages_;
};

struct NamedEstimator {
  std::string name;
  pipeline::EstimatorConfig config;
  bool oracle = false;  // replays the ground truth instead of training
};

struct SequenceResult {
  int subject = 0;
  std::string session_id;
  std::string estimator;
  std::vector<double> pred;
  std::vector<double> gt;
  std::vector<int> gt_labels;  // per tick
  double pred_total = 0.0;
  double gt_total = 0.0;
  double rmse = 0.0;
  std::optional<double> nrmse;
  std::optional<double> accuracy;  // missing when the ground-truth total is zero
  std::optional<double> pearson;
};

struct ActivityError {
  double sse = 0.0;
  std::size_t count = 0;
  double rmse() const;
};

struct FoldResult {
  int held_out = 0;
  std::vector<int> train;
  std::map<std::string, double> rmse;   // by estimator, over the fold's ticks
  std::map<std::string, double> nrmse;  // by estimator, missing for constant ground truth
  std::size_t audit_events = 0;
  std::vector<std::string> violations;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Population standard deviation.
MeanStd mean_std(std::span<const double> values);

struct EstimatorSummary {
  std::string name;
  MeanStd fold_rmse;
  MeanStd fold_nrmse;
  MeanStd session_nrmse;
  MeanStd session_accuracy;
  MeanStd session_pearson;
  double overall_rmse = 0.0;
  std::map<int, ActivityError> per_activity;  // ticks grouped by ground-truth label
};

struct LosoReport {
  std::vector<std::string> estimators;
  std::vector<FoldResult> folds;
  std::vector<SequenceResult> sequences;  // fold, session, estimator order
  std::vector<EstimatorSummary> summaries;
  std::size_t leakage_events = 0;
  std::size_t leakage_violations = 0;

  const EstimatorSummary& summary(std::string_view name) const;
};

struct LosoOptions {
  std::filesystem::path cache_dir;  // raw feature cache, none when empty
  std::vector<int> subjects;        // optional explicit subject list
};

/// Leave-one-subject-out over sessions with imaging features.
LosoReport run_loso(std::span<const Session> corpus, std::span<const NamedEstimator> estimators,
                    const LosoOptions& options = {});

/// Leave-one-subject-out over tracks that already carry descriptors.
LosoReport run_loso(std::span<const pipeline::Track> tracks, std::span<const NamedEstimator> estimators);

/// Default estimator set: AS (given mode), DM, MET.
std::vector<NamedEstimator> standard_estimators(const pipeline::EstimatorConfig& base,
                                                std::span<const std::string> names);

// Reports: aligned text tables and one CSV row per (fold, sequence, estimator, metric).
std::string format_text(const LosoReport& report);
std::string format_csv(const LosoReport& report);
/// Writes report.txt and report.csv into `dir`.
void write_report(const std::filesystem::path& dir, const LosoReport& report);

}  // namespace calorie::evaluation
