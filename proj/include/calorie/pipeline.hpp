#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "calorie/encode.hpp"
#include "calorie/features.hpp"
#include "calorie/learning.hpp"
#include "calorie/pooling.hpp"
#include "calorie/session.hpp"

namespace calorie::pipeline {

enum class EstimatorKind { as, dm, met };
enum class RecurrentMode { baseline, recurrent1, recurrent2 };

std::string_view to_string(EstimatorKind kind);
std::string_view to_string(RecurrentMode mode);
EstimatorKind parse_kind(std::string_view text);
RecurrentMode parse_mode(std::string_view text);

struct WindowSpec {
  std::size_t w_cls = 450;
  std::size_t w_cal = 1800;
  std::size_t stride = 30;        // frames between prediction ticks
  std::size_t train_stride = 30;  // frames between training windows

  void validate() const;
};

/// Window length in seconds at the fixed frame rate.
double window_seconds(std::size_t frames);

/// floor((frames - w_cal) / stride) + 1, or 0 when the session is shorter than w_cal.
std::size_t tick_count(std::size_t frames, std::size_t w_cal, std::size_t stride);

/// Last frame of each prediction window. Sessions shorter than w_cal start at
/// the first full classifier window and pool whatever calorie window exists.
std::vector<std::size_t> tick_frames(std::size_t frames, const WindowSpec& windows);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::as;
  RecurrentMode mode = RecurrentMode::baseline;
  int d = 3;  // recurrent history length
  WindowSpec windows;
  pooling::PoolingConfig pooling;
  encode::FeatureConfig features;
  features::PcaParams pca;
  std::size_t pca_frame_stride = 10;  // every n-th valid training frame feeds PCA
  learning::GridSearchSpec svm_grid = learning::GridSearchSpec::libsvm_default();
  learning::GridSearchSpec svr_grid = learning::GridSearchSpec::libsvm_default();
  double svm_tolerance = 1e-3;
  learning::SvrParams svr;  // C/epsilon are overridden by grid search
  int breath_span = 20;
  double history_weight = 1.0;  // multiplies the standardised history features

  void validate() const;
  nlohmann::json to_json() const;
  static EstimatorConfig from_json(const nlohmann::json& j);
};

/// A session reduced to what the estimators consume.
struct Track {
  std::string id;
  Subject subject;
  encode::DoubleRows descriptors;  // frames x N
  std::vector<int> labels;         // per frame, -1 unlabelled
  std::vector<imaging::BreathSample> smoothed;  // smoothed ground truth

  std::size_t frames() const { return labels.size(); }
  double gt_rate(std::size_t frame) const;
};

Track make_track(const Session& session, encode::DoubleRows descriptors, int breath_span = 20);

/// Receives the subject of every sample row that reaches a fitted component.
class TrainingObserver {
 public:
  virtual ~TrainingObserver() = default;
  virtual void on_fit(std::string_view stage, std::span<const int> subjects) = 0;
};

struct RegressorSet {
  std::map<int, learning::SvrModel> per_activity;
  std::optional<learning::SvrModel> shared;  // DM model, or the AS fallback

  const learning::SvrModel& select(int activity) const;
  bool empty() const { return per_activity.empty() && !shared; }
};

struct TrainedEstimator {
  EstimatorConfig config;
  features::PcaModel pca;
  learning::Standardizer cls_scaler;
  learning::SvmClassifier classifier;
  learning::Standardizer cal_scaler;
  RegressorSet regressors;           // inputs carry history in recurrent modes
  RegressorSet baseline_regressors;  // recurrent modes only
  std::vector<int> fallback_activities;  // classifier classes served by the shared model
  double target_mean = 0.0;
  double target_scale = 1.0;
  std::vector<int> training_subjects;
};

struct Tick {
  std::size_t frame = 0;
  double time_s = 0.0;
  double rate = 0.0;  // kcal/min
  int activity = -1;  // predicted (AS) or ground-truth (MET) label
};

struct PredictionTrace {
  std::string session_id;
  std::vector<Tick> ticks;
  double total_kcal = 0.0;
  std::vector<double> baseline_rates;  // auxiliary baseline trace in recurrent modes
};

/// Trapezoidal integral of the tick rates over time, in kcal.
double trapezoid_kcal(std::span<const Tick> ticks);

struct PredictOptions {
  bool oracle_routing = false;  // AS: route by the ground-truth majority label
  /// Stress test: from this frame on the history-augmented regressor sees a
  /// zero (training-mean) visual input; the baseline path is untouched.
  std::optional<std::size_t> blind_from_frame;
};

/// Descriptor-level training; `tracks` must already be encoded with `pca`.
TrainedEstimator train_on_tracks(const EstimatorConfig& config, std::span<const Track> tracks,
                                 features::PcaModel pca = {}, TrainingObserver* observer = nullptr);

PredictionTrace predict_track(const TrainedEstimator& est, const Track& track, const PredictOptions& options = {});

/// Sessions with precomputed raw features: fits PCA on the training frames,
/// encodes and trains.
struct RawSession {
  const Session* session = nullptr;
  const encode::RawFeatures* raw = nullptr;
};

TrainedEstimator train(const EstimatorConfig& config, std::span<const RawSession> sessions,
                       TrainingObserver* observer = nullptr);
TrainedEstimator train_as(EstimatorConfig config, std::span<const RawSession> sessions,
                          TrainingObserver* observer = nullptr);
TrainedEstimator train_dm(EstimatorConfig config, std::span<const RawSession> sessions,
                          TrainingObserver* observer = nullptr);

Track encode_track(const TrainedEstimator& est, const Session& session, const encode::RawFeatures& raw);
PredictionTrace predict(const TrainedEstimator& est, const Session& session, const encode::RawFeatures& raw,
                        const PredictOptions& options = {});

/// rate = 0.0175 * weight * MET(label) at every tick; labels are the
/// ground-truth activity at each tick frame.
PredictionTrace predict_met(const Subject& subject, std::span<const std::size_t> frames, std::span<const int> labels);

/// MET trace over a track's tick frames.
PredictionTrace predict_met(const Track& track, const WindowSpec& windows);

/// Ground truth sampled at the tick frames.
PredictionTrace ground_truth_trace(const Track& track, const WindowSpec& windows);

}  // namespace calorie::pipeline
