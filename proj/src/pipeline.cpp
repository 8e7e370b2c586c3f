#include "calorie/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "calorie/activity.hpp"
#include "calorie/error.hpp"
#include "calorie/log.hpp"

namespace calorie::pipeline {

using learning::Matrix;
using learning::Vector;
using nlohmann::json;

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::as: return "as";
    case EstimatorKind::dm: return "dm";
    case EstimatorKind::met: return "met";
  }
  return "?";
}

std::string_view to_string(RecurrentMode mode) {
  switch (mode) {
    case RecurrentMode::baseline: return "baseline";
    case RecurrentMode::recurrent1: return "recurrent1";
    case RecurrentMode::recurrent2: return "recurrent2";
  }
  return "?";
}

EstimatorKind parse_kind(std::string_view text) {
  if (text == "as") return EstimatorKind::as;
  if (text == "dm") return EstimatorKind::dm;
  if (text == "met") return EstimatorKind::met;
  throw Error("unknown estimator kind '" + std::string(text) + "'");
}

RecurrentMode parse_mode(std::string_view text) {
  if (text == "baseline") return RecurrentMode::baseline;
  if (text == "recurrent1") return RecurrentMode::recurrent1;
  if (text == "recurrent2") return RecurrentMode::recurrent2;
  throw Error("unknown recurrent mode '" + std::string(text) + "'");
}

void WindowSpec::validate() const {
  require(stride >= 1 && train_stride >= 1, "windows: stride must be positive");
  require(w_cls >= 1 && w_cal >= 1, "windows: empty window");
  require(w_cls >= stride && w_cal >= stride, "windows: window shorter than stride");
  require(w_cls <= w_cal, "windows: classifier window longer than calorie window");
}

double window_seconds(std::size_t frames) { return static_cast<double>(frames) / imaging::kFrameRateHz; }

std::size_t tick_count(std::size_t frames, std::size_t w_cal, std::size_t stride) {
  require(stride >= 1, "tick_count: stride must be positive");
  return frames < w_cal ? 0 : (frames - w_cal) / stride + 1;
}

std::vector<std::size_t> tick_frames(std::size_t frames, const WindowSpec& windows) {
  if (frames < windows.w_cls) throw DataError("session shorter than the classifier window");
  const std::size_t first = std::min(windows.w_cal, frames) - 1;
  std::vector<std::size_t> out;
  for (std::size_t f = first; f < frames; f += windows.stride) out.push_back(f);
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

json grid_to_json(const learning::GridSearchSpec& g) {
  return {{"C", g.C}, {"gamma", g.gamma}, {"epsilon", g.epsilon}, {"folds", g.folds}};
}

learning::GridSearchSpec grid_from_json(const json& j, learning::GridSearchSpec g) {
  g.C = j.value("C", g.C);
  g.gamma = j.value("gamma", g.gamma);
  g.epsilon = j.value("epsilon", g.epsilon);
  g.folds = j.value("folds", g.folds);
  return g;
}

}  // namespace

void EstimatorConfig::validate() const {
  windows.validate();
  pooling.validate();
  features.validate();
  require(d >= 0, "config: negative recurrent depth");
  require(kind != EstimatorKind::dm || mode == RecurrentMode::baseline, "config: DM is non-recurrent");
  require(mode == RecurrentMode::baseline || d >= 1, "config: recurrent modes need d >= 1");
  require(pca_frame_stride >= 1, "config: pca frame stride must be positive");
  require(pca.var_target > 0.0 && pca.var_target <= 1.0, "config: variance target outside (0, 1]");
  require(breath_span >= 1, "config: breath span must be positive");
  require(svm_tolerance > 0.0, "config: svm tolerance must be positive");
  require(!svm_grid.C.empty() && !svm_grid.gamma.empty(), "config: empty classifier grid");
  require(!svr_grid.C.empty() && !svr_grid.epsilon.empty(), "config: empty regressor grid");
  require(history_weight > 0.0, "config: history weight must be positive");
}

json EstimatorConfig::to_json() const {
  return {{"kind", to_string(kind)},
          {"mode", to_string(mode)},
          {"d", d},
          {"windows",
           {{"w_cls", windows.w_cls},
            {"w_cal", windows.w_cal},
            {"stride", windows.stride},
            {"train_stride", windows.train_stride}}},
          {"pooling",
           {{"levels", pooling.levels},
            {"max", pooling.use_max},
            {"sum", pooling.use_sum},
            {"dct", pooling.use_dct},
            {"dct_coefficients", pooling.dct_coefficients}}},
          {"features", features.to_json()},
          {"pca", {{"max_k", pca.max_k}, {"var_target", pca.var_target}, {"frame_stride", pca_frame_stride}}},
          {"svm_grid", grid_to_json(svm_grid)},
          {"svr_grid", grid_to_json(svr_grid)},
          {"svm_tolerance", svm_tolerance},
          {"svr",
           {{"tolerance", svr.tolerance},
            {"max_epochs", svr.max_epochs},
            {"bias_scale", svr.bias_scale},
            {"seed", svr.seed}}},
          {"breath_span", breath_span},
          {"history_weight", history_weight}};
}

EstimatorConfig EstimatorConfig::from_json(const json& j) {
  EstimatorConfig c;
  if (j.contains("kind")) c.kind = parse_kind(j.at("kind").get<std::string>());
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  c.d = j.value("d", c.d);
  if (j.contains("windows")) {
    const json& w = j.at("windows");
    c.windows.w_cls = w.value("w_cls", c.windows.w_cls);
    c.windows.w_cal = w.value("w_cal", c.windows.w_cal);
    c.windows.stride = w.value("stride", c.windows.stride);
    c.windows.train_stride = w.value("train_stride", c.windows.train_stride);
  }
  if (j.contains("pooling")) {
    const json& p = j.at("pooling");
    c.pooling.levels = p.value("levels", c.pooling.levels);
    c.pooling.use_max = p.value("max", c.pooling.use_max);
    c.pooling.use_sum = p.value("sum", c.pooling.use_sum);
    c.pooling.use_dct = p.value("dct", c.pooling.use_dct);
    c.pooling.dct_coefficients = p.value("dct_coefficients", c.pooling.dct_coefficients);
  }
  if (j.contains("features")) c.features = encode::FeatureConfig::from_json(j.at("features"));
  if (j.contains("pca")) {
    const json& p = j.at("pca");
    c.pca.max_k = p.value("max_k", c.pca.max_k);
    c.pca.var_target = p.value("var_target", c.pca.var_target);
    c.pca_frame_stride = p.value("frame_stride", c.pca_frame_stride);
  }
  if (j.contains("svm_grid")) c.svm_grid = grid_from_json(j.at("svm_grid"), c.svm_grid);
  if (j.contains("svr_grid")) c.svr_grid = grid_from_json(j.at("svr_grid"), c.svr_grid);
  c.svm_tolerance = j.value("svm_tolerance", c.svm_tolerance);
  if (j.contains("svr")) {
    const json& s = j.at("svr");
    c.svr.tolerance = s.value("tolerance", c.svr.tolerance);
    c.svr.max_epochs = s.value("max_epochs", c.svr.max_epochs);
    c.svr.bias_scale = s.value("bias_scale", c.svr.bias_scale);
    c.svr.seed = s.value("seed", c.svr.seed);
  }
  c.breath_span = j.value("breath_span", c.breath_span);
  c.history_weight = j.value("history_weight", c.history_weight);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Tracks

double Track::gt_rate(std::size_t frame) const {
  if (smoothed.empty()) throw DataError(id + ": session has no breath readings");
  return imaging::rate_at_frame(smoothed, imaging::frame_time(frame));
}

Track make_track(const Session& session, encode::DoubleRows descriptors, int breath_span) {
  require(static_cast<std::size_t>(descriptors.rows()) == session.frame_count, "make_track: descriptor count mismatch");
  Track t;
  t.id = session.id;
  t.subject = session.subject;
  t.descriptors = std::move(descriptors);
  t.labels = frame_labels(session);
  if (!session.breaths.empty()) t.smoothed = imaging::smooth_breaths(session.breaths, breath_span);
  return t;
}

const learning::SvrModel& RegressorSet::select(int activity) const {
  if (const auto it = per_activity.find(activity); it != per_activity.end()) return it->second;
  if (shared) return *shared;
  throw Error("no regressor for activity " + std::to_string(activity));
}

double trapezoid_kcal(std::span<const Tick> ticks) {
  double total = 0.0;
  for (std::size_t i = 1; i < ticks.size(); ++i)
    total += 0.5 * (ticks[i].rate + ticks[i - 1].rate) * (ticks[i].time_s - ticks[i - 1].time_s) / 60.0;
  return total;
}

namespace {

/// Pools frame ranges of a descriptor matrix.
class WindowPooler {
 public:
  WindowPooler(const pooling::PoolingConfig& cfg, std::size_t dim)
      : pyramid_(cfg), length_(cfg.output_length(dim)) {}

  std::size_t length() const { return length_; }

  /// Frames [first, last] inclusive.
  void pool(const encode::DoubleRows& desc, std::size_t first, std::size_t last, double* out) {
    buffer_ = desc.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(last - first + 1));
    pyramid_.pool_into(buffer_, out);
  }

  Vector pool(const encode::DoubleRows& desc, std::size_t first, std::size_t last) {
    Vector v(static_cast<Eigen::Index>(length_));
    pool(desc, first, last, v.data());
    return v;
  }

 private:
  pooling::TemporalPyramid pyramid_;
  std::size_t length_;
  Eigen::MatrixXd buffer_;
};

std::size_t window_start(std::size_t last, std::size_t w) { return last + 1 >= w ? last + 1 - w : 0; }

struct WindowSamples {
  Matrix x;
  std::vector<int> labels;
  std::vector<int> subjects;
  std::vector<double> targets;
  Matrix history;  // raw ground-truth rates, oldest first
};

struct WindowRef {
  const Track* track;
  std::size_t frame;
  int label;
};

WindowSamples pool_windows(std::span<const WindowRef> refs, std::size_t w, WindowPooler& pooler) {
  WindowSamples s;
  s.x.resize(static_cast<Eigen::Index>(refs.size()), static_cast<Eigen::Index>(pooler.length()));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const WindowRef& r = refs[i];
    pooler.pool(r.track->descriptors, window_start(r.frame, w), r.frame, s.x.row(static_cast<Eigen::Index>(i)).data());
    s.labels.push_back(r.label);
    s.subjects.push_back(r.track->subject.id);
  }
  return s;
}

WindowSamples classifier_samples(const EstimatorConfig& cfg, std::span<const Track> tracks, WindowPooler& pooler) {
  const std::size_t w = cfg.windows.w_cls;
  std::vector<WindowRef> refs;
  for (const Track& t : tracks)
    for (std::size_t f = w - 1; f < t.frames(); f += cfg.windows.train_stride) {
      const int label = majority_label(t.labels, f + 1 - w, f + 1);
      if (label >= 0) refs.push_back({&t, f, label});
    }
  return pool_windows(refs, w, pooler);
}

WindowSamples calorie_samples(const EstimatorConfig& cfg, std::span<const Track> tracks, WindowPooler& pooler) {
  const WindowSpec& ws = cfg.windows;
  std::vector<WindowRef> refs;
  std::vector<std::size_t> first_tick;
  for (const Track& t : tracks) {
    if (t.frames() < ws.w_cls) {
      log::warn(t.id + ": shorter than the classifier window; skipped for training");
      continue;
    }
    const std::size_t f0 = std::min(ws.w_cal, t.frames()) - 1;
    for (std::size_t f = f0; f < t.frames(); f += ws.train_stride) {
      const int label = majority_label(t.labels, window_start(f, ws.w_cal), f + 1);
      if (label < 0) continue;
      refs.push_back({&t, f, label});
      first_tick.push_back(f0);
    }
  }
  WindowSamples s = pool_windows(refs, ws.w_cal, pooler);
  const auto d = static_cast<std::size_t>(cfg.d);
  s.history.resize(static_cast<Eigen::Index>(refs.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const WindowRef& r = refs[i];
    s.targets.push_back(r.track->gt_rate(r.frame));
    // Ground truth at the d preceding ticks; ticks before the first repeat it.
    for (std::size_t m = 0; m < d; ++m) {
      const std::size_t back = (d - m) * ws.stride;
      const std::size_t g = r.frame >= first_tick[i] + back ? r.frame - back : first_tick[i];
      s.history(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = r.track->gt_rate(g);
    }
  }
  return s;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

template <typename T>
std::vector<T> select(std::span<const T> v, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (const std::size_t r : rows) out.push_back(v[r]);
  return out;
}

class Notifier {
 public:
  explicit Notifier(TrainingObserver* observer) : observer_(observer) {}
  void operator()(std::string_view stage, std::span<const int> subjects) const {
    if (observer_) observer_->on_fit(stage, subjects);
  }

 private:
  TrainingObserver* observer_;
};

learning::SvrModel fit_regressor(const EstimatorConfig& cfg, const Matrix& x, std::span<const double> y,
                                 std::span<const int> subjects, const Notifier& notify) {
  notify("grid_search:regressor", subjects);
  const learning::GridSearchResult grid = learning::grid_search_svr(cfg.svr_grid, x, y, subjects, cfg.svr);
  learning::SvrParams params = cfg.svr;
  params.C = grid.best.C;
  params.epsilon = grid.best.epsilon;
  notify("solver:regressor", subjects);
  return learning::svr_train(x, y, params);
}

learning::SvmClassifier fit_classifier(const EstimatorConfig& cfg, const Matrix& x, std::span<const int> labels,
                                       std::span<const int> subjects, const Notifier& notify) {
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() == 1) {
    // A single class needs no solver: every window routes to it.
    learning::SvmClassifier trivial;
    trivial.classes = classes;
    trivial.support_vectors.resize(0, x.cols());
    return trivial;
  }
  notify("grid_search:classifier", subjects);
  const learning::GridSearchResult grid = learning::grid_search_svm(cfg.svm_grid, x, labels, subjects, cfg.svm_tolerance);
  notify("solver:classifier", subjects);
  return learning::svm_train(x, labels, {grid.best.C, grid.best.gamma, cfg.svm_tolerance});
}

int classify(const learning::SvmClassifier& model, const Vector& x) {
  if (model.pairs.empty()) return model.classes.front();
  return learning::svm_predict(model, x).label;
}

/// [x, history_weight * (history - mean) / scale]
Matrix with_history(const Matrix& x, const Matrix& history, double mean, double scale, double weight) {
  Matrix out(x.rows(), x.cols() + history.cols());
  out.leftCols(x.cols()) = x;
  out.rightCols(history.cols()) = ((history.array() - mean) / scale * weight).matrix();
  return out;
}

/// Baseline and (in recurrent modes) history-augmented regressors over the rows in `rows`.
void fit_regressor_pair(const EstimatorConfig& cfg, const WindowSamples& cal, const Matrix& x_hist,
                        std::span<const std::size_t> rows, const Notifier& notify, learning::SvrModel* baseline,
                        learning::SvrModel* recurrent) {
  const std::vector<double> y = select<double>(cal.targets, rows);
  const std::vector<int> subjects = select<int>(cal.subjects, rows);
  if (baseline) *baseline = fit_regressor(cfg, select_rows(cal.x, rows), y, subjects, notify);
  if (recurrent) *recurrent = fit_regressor(cfg, select_rows(x_hist, rows), y, subjects, notify);
}

}  // namespace

TrainedEstimator train_on_tracks(const EstimatorConfig& config, std::span<const Track> tracks, features::PcaModel pca,
                                 TrainingObserver* observer) {
  config.validate();
  require(!tracks.empty(), "train: no training sessions");
  const Notifier notify(observer);

  TrainedEstimator est;
  est.config = config;
  est.pca = std::move(pca);
  for (const Track& t : tracks) est.training_subjects.push_back(t.subject.id);
  std::sort(est.training_subjects.begin(), est.training_subjects.end());
  est.training_subjects.erase(std::unique(est.training_subjects.begin(), est.training_subjects.end()),
                              est.training_subjects.end());
  if (config.kind == EstimatorKind::met) return est;

  const auto dim = static_cast<std::size_t>(tracks.front().descriptors.cols());
  for (const Track& t : tracks)
    require(static_cast<std::size_t>(t.descriptors.cols()) == dim, "train: descriptor dimension differs between sessions");
  WindowPooler pooler(config.pooling, dim);

  WindowSamples cal = calorie_samples(config, tracks, pooler);
  if (cal.targets.size() < 2) throw DataError("train: fewer than two labelled calorie windows");
  notify("standardizer:calorie", cal.subjects);
  est.cal_scaler = learning::Standardizer::fit(cal.x);
  est.cal_scaler.transform_in_place(cal.x);

  const double n = static_cast<double>(cal.targets.size());
  est.target_mean = std::accumulate(cal.targets.begin(), cal.targets.end(), 0.0) / n;
  double var = 0.0;
  for (const double t : cal.targets) var += (t - est.target_mean) * (t - est.target_mean);
  est.target_scale = std::max(std::sqrt(var / n), learning::Standardizer::kStdFloor);

  const bool recurrent = config.mode != RecurrentMode::baseline;
  const Matrix x_hist = recurrent ? with_history(cal.x, cal.history, est.target_mean, est.target_scale,
                                                 config.history_weight)
                                  : Matrix{};
  const auto fit_into = [&](std::span<const std::size_t> rows, RegressorSet& main, RegressorSet& base,
                            std::optional<int> activity) {
    learning::SvrModel plain, augmented;
    fit_regressor_pair(config, cal, x_hist, rows, notify, &plain, recurrent ? &augmented : nullptr);
    learning::SvrModel& slot = activity ? main.per_activity[*activity] : main.shared.emplace();
    slot = recurrent ? augmented : plain;
    if (recurrent) (activity ? base.per_activity[*activity] : base.shared.emplace()) = plain;
  };

  std::vector<std::size_t> all(cal.targets.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  if (config.kind == EstimatorKind::dm) {
    fit_into(all, est.regressors, est.baseline_regressors, std::nullopt);
    return est;
  }

  WindowSamples cls = classifier_samples(config, tracks, pooler);
  if (cls.labels.empty()) throw DataError("train: no labelled classifier windows");
  notify("standardizer:classifier", cls.subjects);
  est.cls_scaler = learning::Standardizer::fit(cls.x);
  est.cls_scaler.transform_in_place(cls.x);
  est.classifier = fit_classifier(config, cls.x, cls.labels, cls.subjects, notify);

  std::map<int, std::vector<std::size_t>> by_activity;
  for (std::size_t i = 0; i < cal.labels.size(); ++i) by_activity[cal.labels[i]].push_back(i);
  for (const auto& [activity, rows] : by_activity) {
    if (rows.size() < 2) continue;
    fit_into(rows, est.regressors, est.baseline_regressors, activity);
  }
  for (const int c : est.classifier.classes)
    if (!est.regressors.per_activity.contains(c)) est.fallback_activities.push_back(c);
  if (!est.fallback_activities.empty()) {
    std::string names;
    for (const int a : est.fallback_activities) names += (names.empty() ? "" : ", ") + std::string(activity(a).name);
    log::warn("no regressor for " + names + "; using the direct-mapping regressor");
    fit_into(all, est.regressors, est.baseline_regressors, std::nullopt);
  }
  return est;
}

PredictionTrace predict_track(const TrainedEstimator& est, const Track& track, const PredictOptions& options) {
  const EstimatorConfig& cfg = est.config;
  if (cfg.kind == EstimatorKind::met) return predict_met(track, cfg.windows);

  const std::vector<std::size_t> frames = tick_frames(track.frames(), cfg.windows);
  const auto dim = static_cast<std::size_t>(track.descriptors.cols());
  require(est.cal_scaler.dim() == cfg.pooling.output_length(dim), "predict: descriptor dimension does not match the model");
  WindowPooler pooler(cfg.pooling, dim);

  const bool as = cfg.kind == EstimatorKind::as;
  const bool recurrent = cfg.mode != RecurrentMode::baseline;
  const auto d = static_cast<std::size_t>(cfg.d);

  PredictionTrace trace;
  trace.session_id = track.id;
  std::vector<double> own;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::size_t f = frames[k];
    int activity = -1;
    if (as) {
      if (options.oracle_routing) activity = majority_label(track.labels, f + 1 - cfg.windows.w_cls, f + 1);
      if (activity < 0) {
        const Vector x = est.cls_scaler.transform(pooler.pool(track.descriptors, f + 1 - cfg.windows.w_cls, f));
        activity = classify(est.classifier, x);
      }
    }
    const Vector x = est.cal_scaler.transform(pooler.pool(track.descriptors, window_start(f, cfg.windows.w_cal), f));
    double rate;
    if (!recurrent) {
      rate = std::max(0.0, est.regressors.select(activity).predict(x));
    } else {
      const double base = std::max(0.0, est.baseline_regressors.select(activity).predict(x));
      trace.baseline_rates.push_back(base);
      // Recurrent1 feeds back baseline predictions, Recurrent2 its own outputs;
      // before the first own output the baseline value stands in.
      const std::vector<double>& series = cfg.mode == RecurrentMode::recurrent1 ? trace.baseline_rates : own;
      const std::vector<double> recent =
          series.empty() ? std::vector<double>(d, base) : learning::recent_history(series, k, d);
      Vector xa(x.size() + static_cast<Eigen::Index>(d));
      if (options.blind_from_frame && f >= *options.blind_from_frame) xa.head(x.size()).setZero();
      else xa.head(x.size()) = x;
      for (std::size_t m = 0; m < d; ++m)
        xa(x.size() + static_cast<Eigen::Index>(m)) = (recent[m] - est.target_mean) / est.target_scale * cfg.history_weight;
      rate = std::max(0.0, est.regressors.select(activity).predict(xa));
      own.push_back(rate);
    }
    trace.ticks.push_back({f, imaging::frame_time(f), rate, activity});
  }
  trace.total_kcal = trapezoid_kcal(trace.ticks);
  return trace;
}

// ---------------------------------------------------------------------------

TrainedEstimator train(const EstimatorConfig& config, std::span<const RawSession> sessions, TrainingObserver* observer) {
  config.validate();
  require(!sessions.empty(), "train: no training sessions");
  const Notifier notify(observer);
  features::PcaModel pca;
  if (config.kind != EstimatorKind::met) {
    std::vector<const encode::RawFeatures*> raws;
    std::vector<int> subjects;
    for (const RawSession& s : sessions) {
      raws.push_back(s.raw);
      for (std::size_t i = 0; i < s.raw->frames(); i += config.pca_frame_stride)
        if (s.raw->valid[i]) subjects.push_back(s.session->subject.id);
    }
    notify("pca", subjects);
    pca = encode::fit_depth_pca(raws, config.pca, config.pca_frame_stride);
  }
  std::vector<Track> tracks;
  for (const RawSession& s : sessions) {
    encode::DoubleRows desc = config.kind == EstimatorKind::met
                                  ? encode::DoubleRows(static_cast<Eigen::Index>(s.session->frame_count), 0)
                                  : encode::descriptors(*s.raw, pca);
    tracks.push_back(make_track(*s.session, std::move(desc), config.breath_span));
  }
  return train_on_tracks(config, tracks, std::move(pca), observer);
}

TrainedEstimator train_as(EstimatorConfig config, std::span<const RawSession> sessions, TrainingObserver* observer) {
  config.kind = EstimatorKind::as;
  return train(config, sessions, observer);
}

TrainedEstimator train_dm(EstimatorConfig config, std::span<const RawSession> sessions, TrainingObserver* observer) {
  config.kind = EstimatorKind::dm;
  return train(config, sessions, observer);
}

Track encode_track(const TrainedEstimator& est, const Session& session, const encode::RawFeatures& raw) {
  require(raw.frames() == session.frame_count, "encode: feature count does not match the session");
  encode::DoubleRows desc = est.config.kind == EstimatorKind::met
                                ? encode::DoubleRows(static_cast<Eigen::Index>(session.frame_count), 0)
                                : encode::descriptors(raw, est.pca);
  return make_track(session, std::move(desc), est.config.breath_span);
}

PredictionTrace predict(const TrainedEstimator& est, const Session& session, const encode::RawFeatures& raw,
                        const PredictOptions& options) {
  return predict_track(est, encode_track(est, session, raw), options);
}

PredictionTrace predict_met(const Subject& subject, std::span<const std::size_t> frames, std::span<const int> labels) {
  require(frames.size() == labels.size(), "predict_met: one label per tick required");
  require(subject.weight_kg > 0.0, "predict_met: weight must be positive");
  PredictionTrace trace;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (!valid_activity(labels[k])) throw DataError("predict_met: unknown activity id " + std::to_string(labels[k]));
    trace.ticks.push_back(
        {frames[k], imaging::frame_time(frames[k]), met_rate(subject.weight_kg, activity(labels[k]).met), labels[k]});
  }
  trace.total_kcal = trapezoid_kcal(trace.ticks);
  return trace;
}

PredictionTrace predict_met(const Track& track, const WindowSpec& windows) {
  const std::vector<std::size_t> frames = tick_frames(track.frames(), windows);
  std::vector<int> labels;
  for (const std::size_t f : frames) labels.push_back(track.labels[f]);
  PredictionTrace trace = predict_met(track.subject, frames, labels);
  trace.session_id = track.id;
  return trace;
}

PredictionTrace ground_truth_trace(const Track& track, const WindowSpec& windows) {
  PredictionTrace trace;
  trace.session_id = track.id;
  for (const std::size_t f : tick_frames(track.frames(), windows))
    trace.ticks.push_back({f, imaging::frame_time(f), track.gt_rate(f), track.labels[f]});
  trace.total_kcal = trapezoid_kcal(trace.ticks);
  return trace;
}

}  // namespace calorie::pipeline
