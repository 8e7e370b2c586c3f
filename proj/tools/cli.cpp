#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <iostream>

#include "calorie/binary.hpp"
#include "calorie/bundle.hpp"
#include "calorie/encode.hpp"
#include "calorie/error.hpp"
#include "calorie/evaluation.hpp"
#include "calorie/log.hpp"
#include "calorie/pipeline.hpp"
#include "calorie/synth.hpp"

namespace calorie::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Thrown for bad flag values discovered after parsing.
struct UsageError : Error {
  using Error::Error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(sep, start), text.size());
    if (end > start) out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<synth::ScriptStep> parse_script(const std::string& text) {
  std::vector<synth::ScriptStep> steps;
  for (const std::string& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("script item '" + item + "' is not activity:seconds");
    synth::ScriptStep step;
    try {
      step.activity = activity_id(item.substr(0, colon));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const std::string secs = item.substr(colon + 1);
    const auto res = std::from_chars(secs.data(), secs.data() + secs.size(), step.duration_s);
    if (res.ec != std::errc() || res.ptr != secs.data() + secs.size())
      throw UsageError("script item '" + item + "' has a bad duration");
    steps.push_back(step);
  }
  if (steps.empty()) throw UsageError("empty script");
  return steps;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

struct ConfigFlags {
  std::string config_path;
  std::string mode;
  int d = -1;
  std::size_t w_cls = 0;
  std::size_t w_cal = 0;
  std::size_t stride = 0;
  std::size_t train_stride = 0;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "Estimator configuration (JSON)");
    app.add_option("--mode", mode, "Recurrency: baseline, recurrent1 or recurrent2");
    app.add_option("--d", d, "Recurrent history length");
    app.add_option("--wcls", w_cls, "Classifier window (frames)");
    app.add_option("--wcal", w_cal, "Calorie window (frames)");
    app.add_option("--stride", stride, "Frames between prediction ticks");
    app.add_option("--train-stride", train_stride, "Frames between training windows");
  }

  pipeline::EstimatorConfig resolve() const {
    pipeline::EstimatorConfig cfg;
    if (!config_path.empty()) cfg = pipeline::EstimatorConfig::from_json(read_json(config_path));
    if (!mode.empty()) cfg.mode = pipeline::parse_mode(mode);
    if (d >= 0) cfg.d = d;
    if (w_cls) cfg.windows.w_cls = w_cls;
    if (w_cal) cfg.windows.w_cal = w_cal;
    if (stride) cfg.windows.stride = stride;
    if (train_stride) cfg.windows.train_stride = train_stride;
    return cfg;
  }
};

void log_config(const std::string& command, const json& resolved) {
  log::info(command + " configuration: " + resolved.dump());
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const pipeline::PredictionTrace& trace) {
  std::string out = "frame,time_s,kcal_per_min,activity\n";
  for (const pipeline::Tick& t : trace.ticks)
    out += std::to_string(t.frame) + "," + number(t.time_s) + "," + number(t.rate) + "," +
           (valid_activity(t.activity) ? std::string(activity(t.activity).name) : "") + "\n";
  return out;
}

std::vector<pipeline::RawSession> with_features(const std::vector<Session>& corpus,
                                                std::vector<encode::RawFeatures>& storage,
                                                const encode::FeatureConfig& features, const fs::path& cache) {
  storage.clear();
  storage.reserve(corpus.size());
  std::vector<pipeline::RawSession> out;
  for (const Session& s : corpus) {
    log::info("features: " + s.id);
    storage.push_back(encode::cached_raw(s, features, cache));
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) out.push_back({&corpus[i], &storage[i]});
  return out;
}

// ---------------------------------------------------------------------------

struct SynthCommand {
  std::uint64_t seed = 1;
  int subjects = 6;
  int sessions = 2;
  int activities = 6;
  double seconds = 60.0;
  std::string script;
  std::string out;
  bool no_flow = false;

  void add_to(CLI::App& app) {
    app.add_option("--seed", seed, "Corpus seed");
    app.add_option("--subjects", subjects, "Number of subjects")->check(CLI::PositiveNumber);
    app.add_option("--sessions", sessions, "Sessions per subject")->check(CLI::PositiveNumber);
    app.add_option("--activities", activities, "Activities per random script")->check(CLI::PositiveNumber);
    app.add_option("--seconds", seconds, "Seconds per activity in random scripts");
    app.add_option("--script", script, "Fixed script for every session, e.g. walk:60,sit:90");
    app.add_option("--out", out, "Output corpus directory")->required();
    app.add_flag("--no-flow", no_flow, "Do not write flow files");
  }

  int run() const {
    synth::CorpusSpec spec;
    spec.seed = seed;
    spec.subjects = subjects;
    spec.sessions_per_subject = sessions;
    spec.activities_per_script = activities;
    spec.seconds_per_activity = seconds;
    if (!script.empty()) spec.script = parse_script(script);
    log_config("synth", {{"seed", seed},
                         {"subjects", subjects},
                         {"sessions", sessions},
                         {"activities", activities},
                         {"seconds", seconds},
                         {"script", script},
                         {"flow", !no_flow},
                         {"out", out}});
    for (const Session& session : synth::synth_corpus(spec)) {
      log::info("writing " + session.id);
      write_session(session, fs::path(out) / session.id, !no_flow);
    }
    return 0;
  }
};

struct TrainCommand {
  std::string corpus;
  std::string model = "as";
  std::string out;
  std::string cache;
  ConfigFlags flags;

  void add_to(CLI::App& app) {
    app.add_option("--corpus", corpus, "Corpus directory")->required();
    app.add_option("--model", model, "as, dm or met");
    app.add_option("--out", out, "Bundle path")->required();
    app.add_option("--cache", cache, "Feature cache directory");
    flags.add_to(app);
  }

  int run() const {
    pipeline::EstimatorConfig cfg = flags.resolve();
    cfg.kind = pipeline::parse_kind(model);
    cfg.validate();
    log_config("train", cfg.to_json());
    const std::vector<Session> sessions = load_corpus(corpus);
    if (sessions.empty()) throw DataError(corpus + ": no sessions");
    std::vector<encode::RawFeatures> storage;
    const auto raw = with_features(sessions, storage, cfg.features, cache);
    const pipeline::TrainedEstimator est = pipeline::train(cfg, raw);
    bundle::save(out, est);
    log::info("wrote " + out);
    return 0;
  }
};

struct PredictCommand {
  std::string bundle_path;
  std::string session_dir;
  std::string out_trace;
  std::string cache;

  void add_to(CLI::App& app) {
    app.add_option("--bundle", bundle_path, "Trained estimator bundle")->required();
    app.add_option("--session", session_dir, "Session directory")->required();
    app.add_option("--out-trace", out_trace, "Output trace CSV")->required();
    app.add_option("--cache", cache, "Feature cache directory");
  }

  int run(std::ostream& out) const {
    const pipeline::TrainedEstimator est = bundle::load(bundle_path);
    log_config("predict", {{"bundle", bundle_path}, {"session", session_dir}, {"estimator", est.config.to_json()}});
    const Session session = load_session(session_dir);
    pipeline::PredictionTrace trace;
    if (est.config.kind == pipeline::EstimatorKind::met) {
      trace = pipeline::predict_track(est, pipeline::make_track(session, encode::DoubleRows(
                                                                            static_cast<Eigen::Index>(session.frame_count), 0),
                                                                est.config.breath_span));
    } else {
      trace = pipeline::predict(est, session, encode::cached_raw(session, est.config.features, cache));
    }
    binary::write_file_atomic(out_trace, trace_csv(trace));
    out << session.id << " total_kcal " << number(trace.total_kcal) << "\n";
    return 0;
  }
};

struct EvaluateCommand {
  std::string corpus;
  std::string models = "as,dm,met";
  std::string report;
  std::string cache;
  bool loso = true;
  ConfigFlags flags;

  void add_to(CLI::App& app) {
    app.add_option("--corpus", corpus, "Corpus directory")->required();
    app.add_option("--models", models, "Comma list of as, as-<mode>, dm, met, oracle");
    app.add_flag("--loso", loso, "Leave-one-subject-out protocol (the only protocol)");
    app.add_option("--report", report, "Report directory (report.txt, report.csv)")->required();
    app.add_option("--cache", cache, "Feature cache directory");
    flags.add_to(app);
  }

  int run(std::ostream& out) const {
    const pipeline::EstimatorConfig base = flags.resolve();
    const std::vector<std::string> names = split(models, ',');
    const std::vector<evaluation::NamedEstimator> estimators = evaluation::standard_estimators(base, names);
    json resolved = {{"corpus", corpus}, {"protocol", "loso"}, {"estimators", json::array()}};
    for (const auto& e : estimators)
      resolved["estimators"].push_back({{"name", e.name}, {"oracle", e.oracle}, {"config", e.config.to_json()}});
    log_config("evaluate", resolved);
    const std::vector<Session> sessions = load_corpus(corpus);
    evaluation::LosoOptions options;
    options.cache_dir = cache;
    const evaluation::LosoReport result = evaluation::run_loso(sessions, estimators, options);
    evaluation::write_report(report, result);
    out << evaluation::format_text(result);
    return 0;
  }
};

struct MetCommand {
  std::string corpus;
  std::string report;
  std::size_t w_cls = 0;
  std::size_t w_cal = 0;
  std::size_t stride = 0;

  void add_to(CLI::App& app) {
    app.add_option("--corpus", corpus, "Corpus directory")->required();
    app.add_option("--report", report, "Report directory (report.txt, report.csv)")->required();
    app.add_option("--wcls", w_cls, "Classifier window (frames); sets the first tick");
    app.add_option("--wcal", w_cal, "Calorie window (frames)");
    app.add_option("--stride", stride, "Frames between ticks");
  }

  int run(std::ostream& out) const {
    pipeline::WindowSpec windows;
    if (w_cls) windows.w_cls = w_cls;
    if (w_cal) windows.w_cal = w_cal;
    if (stride) windows.stride = stride;
    windows.validate();
    log_config("met", {{"corpus", corpus},
                       {"windows", {{"w_cls", windows.w_cls}, {"w_cal", windows.w_cal}, {"stride", windows.stride}}}});
    const std::vector<Session> sessions = load_corpus(corpus);
    if (sessions.empty()) throw DataError(corpus + ": no sessions");
    evaluation::LosoReport result;
    result.estimators = {"met"};
    evaluation::EstimatorSummary summary;
    summary.name = "met";
    std::vector<double> acc, corr, nr;
    double sse = 0.0;
    std::size_t count = 0;
    for (const Session& s : sessions) {
      const pipeline::Track track =
          pipeline::make_track(s, encode::DoubleRows(static_cast<Eigen::Index>(s.frame_count), 0));
      const pipeline::PredictionTrace gt = pipeline::ground_truth_trace(track, windows);
      const pipeline::PredictionTrace met = pipeline::predict_met(track, windows);
      evaluation::SequenceResult r;
      r.subject = s.subject.id;
      r.session_id = s.id;
      r.estimator = "met";
      for (std::size_t k = 0; k < gt.ticks.size(); ++k) {
        r.pred.push_back(met.ticks[k].rate);
        r.gt.push_back(gt.ticks[k].rate);
        r.gt_labels.push_back(gt.ticks[k].activity);
        const double e = r.pred.back() - r.gt.back();
        auto& ae = summary.per_activity[r.gt_labels.back()];
        ae.sse += e * e;
        ++ae.count;
        sse += e * e;
        ++count;
      }
      r.pred_total = met.total_kcal;
      r.gt_total = gt.total_kcal;
      r.rmse = evaluation::rmse(r.pred, r.gt);
      try {
        r.nrmse = evaluation::nrmse(r.pred, r.gt);
        nr.push_back(*r.nrmse);
      } catch (const DataError&) {
      }
      if (r.gt_total > 0.0) {
        r.accuracy = evaluation::session_accuracy(r.pred_total, r.gt_total);
        acc.push_back(*r.accuracy);
      }
      r.pearson = evaluation::pearson(r.pred, r.gt);
      if (r.pearson) corr.push_back(*r.pearson);
      result.sequences.push_back(std::move(r));
    }
    summary.session_accuracy = evaluation::mean_std(acc);
    summary.session_pearson = evaluation::mean_std(corr);
    summary.session_nrmse = evaluation::mean_std(nr);
    summary.overall_rmse = count ? std::sqrt(sse / static_cast<double>(count)) : 0.0;
    result.summaries.push_back(std::move(summary));
    evaluation::write_report(report, result);
    out << evaluation::format_text(result);
    return 0;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calorie expenditure estimation from RGB-D sessions", "calorie"};
  app.require_subcommand(1);
  SynthCommand synth_cmd;
  TrainCommand train_cmd;
  PredictCommand predict_cmd;
  EvaluateCommand evaluate_cmd;
  MetCommand met_cmd;
  synth_cmd.add_to(*app.add_subcommand("synth", "Write a synthetic corpus"));
  train_cmd.add_to(*app.add_subcommand("train", "Train an estimator bundle"));
  predict_cmd.add_to(*app.add_subcommand("predict", "Predict a session's calorie trace"));
  evaluate_cmd.add_to(*app.add_subcommand("evaluate", "Leave-one-subject-out evaluation"));
  met_cmd.add_to(*app.add_subcommand("met", "MET lookup estimate against ground truth"));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  log::Sink previous = log::set_sink([&err](log::Level level, const std::string& message) {
    err << (level == log::Level::warning ? "warning: " : "") << message << "\n";
  });
  int code = 0;
  try {
    if (app.got_subcommand("synth")) code = synth_cmd.run();
    if (app.got_subcommand("train")) code = train_cmd.run();
    if (app.got_subcommand("predict")) code = predict_cmd.run(out);
    if (app.got_subcommand("evaluate")) code = evaluate_cmd.run(out);
    if (app.got_subcommand("met")) code = met_cmd.run(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    code = 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    code = 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 2;
  }
  log::set_sink(std::move(previous));
  return code;
}

}  // namespace calorie::cli
