#include "calorie/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <tuple>

#include "calorie/encode.hpp"
#include "calorie/error.hpp"
#include "calorie/log.hpp"

namespace calorie::evaluation {

double rmse(std::span<const double> pred, std::span<const double> gt) {
  require(pred.size() == gt.size(), "rmse: length mismatch");
  if (gt.empty()) throw Error("rmse: empty series");
  double sse = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) sse += (pred[i] - gt[i]) * (pred[i] - gt[i]);
  return std::sqrt(sse / static_cast<double>(gt.size()));
}

double nrmse(std::span<const double> pred, std::span<const double> gt) {
  const double r = rmse(pred, gt);
  const auto [lo, hi] = std::minmax_element(gt.begin(), gt.end());
  if (!(*hi > *lo)) throw DataError("constant ground truth");
  return r / (*hi - *lo);
}

double session_accuracy(double pred_total, double gt_total) {
  require(gt_total > 0.0, "session_accuracy: ground-truth total must be positive");
  return std::max(0.0, 100.0 * (1.0 - std::abs(pred_total - gt_total) / gt_total));
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "pearson: length mismatch");
  if (a.size() < 2) return std::nullopt;
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

FoldPlan FoldPlan::loso(std::span<const int> subjects) {
  std::set<int> ids(subjects.begin(), subjects.end());
  require(ids.size() >= 2, "loso: need at least two subjects");
  FoldPlan plan;
  for (const int held : ids) {
    Fold f{held, {}};
    for (const int s : ids)
      if (s != held) f.train.push_back(s);
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

void LeakageAudit::on_fit(std::string_view stage, std::span<const int> subjects) {
  ++events_;
  ++stages_[std::string(stage)];
  if (std::find(subjects.begin(), subjects.end(), held_out_) != subjects.end())
    violations_.push_back(std::string(stage));
}

double ActivityError::rmse() const { return count ? std::sqrt(sse / static_cast<double>(count)) : 0.0; }

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  m.n = values.size();
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (const double v : values) var += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(var / n);
  return m;
}

const EstimatorSummary& LosoReport::summary(std::string_view name) const {
  for (const EstimatorSummary& s : summaries)
    if (s.name == name) return s;
  throw Error("no estimator named '" + std::string(name) + "' in report");
}

std::vector<NamedEstimator> standard_estimators(const pipeline::EstimatorConfig& base,
                                                std::span<const std::string> names) {
  std::vector<NamedEstimator> out;
  for (const std::string& name : names) {
    NamedEstimator e{name, base, false};
    if (name == "oracle") {
      e.oracle = true;
    } else if (name == "met") {
      e.config.kind = pipeline::EstimatorKind::met;
    } else if (name == "dm") {
      e.config.kind = pipeline::EstimatorKind::dm;
      e.config.mode = pipeline::RecurrentMode::baseline;
    } else if (name == "as") {
      e.config.kind = pipeline::EstimatorKind::as;
    } else if (name.starts_with("as-")) {
      e.config.kind = pipeline::EstimatorKind::as;
      e.config.mode = pipeline::parse_mode(std::string_view(name).substr(3));
    } else {
      throw Error("unknown estimator '" + name + "' (expected as, as-<mode>, dm, met or oracle)");
    }
    e.config.validate();
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

struct FoldData {
  std::vector<pipeline::Track> train;
  std::vector<pipeline::Track> test;
  features::PcaModel pca;
};

/// Builds the encoded train/test tracks of one fold for one estimator configuration.
using FoldEncoder = std::function<std::shared_ptr<const FoldData>(const Fold&, const pipeline::EstimatorConfig&, bool,
                                                                   pipeline::TrainingObserver&)>;

struct Accumulator {
  std::vector<double> fold_rmse, fold_nrmse, session_nrmse, session_accuracy, session_pearson;
  double sse = 0.0;
  std::size_t count = 0;
  std::map<int, ActivityError> per_activity;
};

LosoReport run_folds(const FoldPlan& plan, std::span<const NamedEstimator> estimators, const FoldEncoder& encoder) {
  require(!estimators.empty(), "loso: no estimators");
  LosoReport report;
  std::map<std::string, Accumulator> acc;
  for (const NamedEstimator& e : estimators) {
    require(!acc.contains(e.name), "loso: duplicate estimator name " + e.name);
    report.estimators.push_back(e.name);
    acc[e.name];
  }

  for (const Fold& fold : plan.folds) {
    LeakageAudit audit(fold.held_out);
    FoldResult fr{fold.held_out, fold.train, {}, {}, 0, {}};
    for (const NamedEstimator& e : estimators) {
      const std::shared_ptr<const FoldData> data = encoder(fold, e.config, e.oracle, audit);
      if (data->test.empty()) continue;
      std::optional<pipeline::TrainedEstimator> est;
      if (!e.oracle) est = pipeline::train_on_tracks(e.config, data->train, data->pca, &audit);

      Accumulator& a = acc[e.name];
      std::vector<double> fold_pred, fold_gt;
      for (const pipeline::Track& track : data->test) {
        const pipeline::PredictionTrace gt = pipeline::ground_truth_trace(track, e.config.windows);
        const pipeline::PredictionTrace pred = e.oracle ? gt : pipeline::predict_track(*est, track);
        SequenceResult s;
        s.subject = track.subject.id;
        s.session_id = track.id;
        s.estimator = e.name;
        for (std::size_t k = 0; k < gt.ticks.size(); ++k) {
          s.pred.push_back(pred.ticks[k].rate);
          s.gt.push_back(gt.ticks[k].rate);
          s.gt_labels.push_back(gt.ticks[k].activity);
          const double r = s.pred.back() - s.gt.back();
          ActivityError& ae = a.per_activity[s.gt_labels.back()];
          ae.sse += r * r;
          ++ae.count;
          a.sse += r * r;
          ++a.count;
        }
        s.pred_total = pred.total_kcal;
        s.gt_total = gt.total_kcal;
        s.rmse = rmse(s.pred, s.gt);
        try {
          s.nrmse = nrmse(s.pred, s.gt);
          a.session_nrmse.push_back(*s.nrmse);
        } catch (const DataError&) {
          log::warn(s.session_id + ": constant ground truth; no NRMSE");
        }
        if (s.gt_total > 0.0) {
          s.accuracy = session_accuracy(s.pred_total, s.gt_total);
          a.session_accuracy.push_back(*s.accuracy);
        } else {
          log::warn(s.session_id + ": zero ground-truth total; no accuracy");
        }
        s.pearson = pearson(s.pred, s.gt);
        if (s.pearson) a.session_pearson.push_back(*s.pearson);
        fold_pred.insert(fold_pred.end(), s.pred.begin(), s.pred.end());
        fold_gt.insert(fold_gt.end(), s.gt.begin(), s.gt.end());
        report.sequences.push_back(std::move(s));
      }
      fr.rmse[e.name] = rmse(fold_pred, fold_gt);
      a.fold_rmse.push_back(fr.rmse[e.name]);
      try {
        fr.nrmse[e.name] = nrmse(fold_pred, fold_gt);
        a.fold_nrmse.push_back(fr.nrmse[e.name]);
      } catch (const DataError&) {
      }
    }
    fr.audit_events = audit.events();
    fr.violations = audit.violation_stages();
    report.leakage_events += audit.events();
    report.leakage_violations += audit.violations();
    report.folds.push_back(std::move(fr));
  }

  for (const NamedEstimator& e : estimators) {
    const Accumulator& a = acc[e.name];
    EstimatorSummary s;
    s.name = e.name;
    s.fold_rmse = mean_std(a.fold_rmse);
    s.fold_nrmse = mean_std(a.fold_nrmse);
    s.session_nrmse = mean_std(a.session_nrmse);
    s.session_accuracy = mean_std(a.session_accuracy);
    s.session_pearson = mean_std(a.session_pearson);
    s.overall_rmse = a.count ? std::sqrt(a.sse / static_cast<double>(a.count)) : 0.0;
    s.per_activity = a.per_activity;
    report.summaries.push_back(std::move(s));
  }
  return report;
}

std::string encoder_key(const pipeline::EstimatorConfig& c, bool oracle) {
  if (oracle || c.kind == pipeline::EstimatorKind::met) return "labels:" + std::to_string(c.breath_span);
  return std::to_string(c.features.hash()) + ":" + std::to_string(c.pca.max_k) + ":" + std::to_string(c.pca.var_target) +
         ":" + std::to_string(c.pca_frame_stride) + ":" + std::to_string(c.breath_span);
}

}  // namespace

LosoReport run_loso(std::span<const Session> corpus, std::span<const NamedEstimator> estimators,
                    const LosoOptions& options) {
  require(!corpus.empty(), "loso: empty corpus");
  // Stable order regardless of how the corpus was enumerated.
  std::vector<const Session*> sessions;
  for (const Session& s : corpus) sessions.push_back(&s);
  std::sort(sessions.begin(), sessions.end(), [](const Session* a, const Session* b) {
    return std::tie(a->subject.id, a->id) < std::tie(b->subject.id, b->id);
  });

  std::set<int> present;
  for (const Session* s : sessions) present.insert(s->subject.id);
  std::vector<int> subjects(present.begin(), present.end());
  if (!options.subjects.empty()) {
    subjects.clear();
    for (const int id : std::set<int>(options.subjects.begin(), options.subjects.end())) {
      if (present.contains(id))
        subjects.push_back(id);
      else
        log::warn("subject " + std::to_string(id) + " has no sessions; skipped");
    }
  }
  const FoldPlan plan = FoldPlan::loso(subjects);

  // Raw per-frame features do not depend on the fold.
  std::map<std::uint64_t, std::vector<encode::RawFeatures>> raw;
  for (const NamedEstimator& e : estimators) {
    if (e.oracle || e.config.kind == pipeline::EstimatorKind::met) continue;
    auto& list = raw[e.config.features.hash()];
    if (!list.empty()) continue;
    for (const Session* s : sessions) list.push_back(encode::cached_raw(*s, e.config.features, options.cache_dir));
  }

  int current_fold = -1;
  std::map<std::string, std::shared_ptr<const FoldData>> fold_cache;
  const FoldEncoder encoder = [&](const Fold& fold, const pipeline::EstimatorConfig& cfg, bool oracle,
                                  pipeline::TrainingObserver& observer) {
    if (fold.held_out != current_fold) {
      fold_cache.clear();
      current_fold = fold.held_out;
    }
    const std::string key = encoder_key(cfg, oracle);
    if (const auto it = fold_cache.find(key); it != fold_cache.end()) return it->second;

    auto data = std::make_shared<FoldData>();
    const bool labels_only = oracle || cfg.kind == pipeline::EstimatorKind::met;
    const std::vector<encode::RawFeatures>* raws = labels_only ? nullptr : &raw.at(cfg.features.hash());
    const auto in_train = [&](int id) { return std::find(fold.train.begin(), fold.train.end(), id) != fold.train.end(); };
    if (!labels_only) {
      std::vector<const encode::RawFeatures*> train_raw;
      std::vector<int> rows;
      for (std::size_t i = 0; i < sessions.size(); ++i) {
        if (!in_train(sessions[i]->subject.id)) continue;
        const encode::RawFeatures& r = (*raws)[i];
        train_raw.push_back(&r);
        for (std::size_t f = 0; f < r.frames(); f += cfg.pca_frame_stride)
          if (r.valid[f]) rows.push_back(sessions[i]->subject.id);
      }
      observer.on_fit("pca", rows);
      data->pca = encode::fit_depth_pca(train_raw, cfg.pca, cfg.pca_frame_stride);
    }
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      const Session& s = *sessions[i];
      const bool train = in_train(s.subject.id);
      if (!train && s.subject.id != fold.held_out) continue;
      encode::DoubleRows desc = labels_only ? encode::DoubleRows(static_cast<Eigen::Index>(s.frame_count), 0)
                                            : encode::descriptors((*raws)[i], data->pca);
      (train ? data->train : data->test).push_back(pipeline::make_track(s, std::move(desc), cfg.breath_span));
    }
    fold_cache[key] = data;
    return std::shared_ptr<const FoldData>(data);
  };
  return run_folds(plan, estimators, encoder);
}

LosoReport run_loso(std::span<const pipeline::Track> tracks, std::span<const NamedEstimator> estimators) {
  require(!tracks.empty(), "loso: no tracks");
  std::vector<const pipeline::Track*> sorted;
  for (const pipeline::Track& t : tracks) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(), [](const pipeline::Track* a, const pipeline::Track* b) {
    return std::tie(a->subject.id, a->id) < std::tie(b->subject.id, b->id);
  });
  std::vector<int> subjects;
  for (const pipeline::Track* t : sorted) subjects.push_back(t->subject.id);
  const FoldPlan plan = FoldPlan::loso(subjects);

  int current_fold = -1;
  std::shared_ptr<const FoldData> cached;
  const FoldEncoder encoder = [&](const Fold& fold, const pipeline::EstimatorConfig&, bool, pipeline::TrainingObserver&) {
    if (fold.held_out == current_fold) return cached;
    auto data = std::make_shared<FoldData>();
    for (const pipeline::Track* t : sorted)
      (t->subject.id == fold.held_out ? data->test : data->train).push_back(*t);
    current_fold = fold.held_out;
    cached = data;
    return cached;
  };
  return run_folds(plan, estimators, encoder);
}

}  // namespace calorie::evaluation
