// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calorie/activity.hpp"
#include "calorie/encode.hpp"
#include "calorie/evaluation.hpp"
#include "calorie/features.hpp"
#include "calorie/optflow.hpp"
#include "calorie/pipeline.hpp"
#include "calorie/pooling.hpp"
#include "calorie/synth.hpp"
#include "cli.hpp"
#include "feature_oracles.hpp"
#include "pooling_oracle.hpp"

using namespace calorie;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// 1 ---------------------------------------------------------------------------
Outcome met_formula() {
  const auto t0 = Clock::now();
  std::vector<std::size_t> frames;
  for (std::size_t f = 0; f <= 10 * 60 * 30; f += 30) frames.push_back(f);
  const std::vector<int> labels(frames.size(), activity_id("sit"));
  const double total = pipeline::predict_met({1, 70.0}, frames, labels).total_kcal;
  const double ms = seconds_since(t0) * 1e3;
  const double err = std::abs(total - 15.925);
  return {err <= 1e-12 && ms < 1.0, "total " + fmt(total, 12) + " kcal, |err| " + fmt(err) + ", " + fmt(ms, 3) + " ms"};
}

// 2 ---------------------------------------------------------------------------
Outcome pooling_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  double worst_pool = 0.0, worst_parseval = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    pooling::PoolingConfig cfg;
    cfg.levels = 1 + static_cast<int>(rng() % 3);
    const std::size_t min_t = std::size_t{1} << (cfg.levels - 1);
    const std::size_t T = min_t + rng() % (64 - min_t + 1);
    const std::size_t N = 1 + rng() % 8;
    cfg.dct_coefficients = 1 + static_cast<int>(rng() % 8);
    do {
      cfg.use_max = rng() % 2;
      cfg.use_sum = rng() % 2;
      cfg.use_dct = rng() % 2;
    } while (!cfg.use_max && !cfg.use_sum && !cfg.use_dct);
    Eigen::MatrixXd frames(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(N));
    for (Eigen::Index i = 0; i < frames.size(); ++i) frames.data()[i] = n01(rng);
    worst_pool = std::max(worst_pool, max_abs_diff(pooling::pool_window(frames, cfg), testing::brute_pool(frames, cfg)));
    for (Eigen::Index n = 0; n < frames.cols(); ++n) {
      const Eigen::VectorXd col = frames.col(n);
      const std::vector<double> series(col.data(), col.data() + col.size());
      double coeff = 0.0;
      for (double c : pooling::pool_dct(series, static_cast<int>(T))) coeff += c * c;
      worst_parseval = std::max(worst_parseval, std::abs(coeff - col.squaredNorm()));
    }
  }
  const double s = seconds_since(t0);
  return {worst_pool <= 1e-9 && worst_parseval <= 1e-9 && s < 10.0,
          "max |pool - loop| " + fmt(worst_pool) + ", max Parseval gap " + fmt(worst_parseval) + ", " + fmt(s, 3) + " s"};
}

// 3 ---------------------------------------------------------------------------
Outcome segment_layout() {
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{1, 8}, {1, 4}, {5, 8}, {1, 2},
                                                                  {3, 4}, {5, 6}, {7, 8}};
  std::vector<std::pair<std::size_t, std::size_t>> got;
  std::string text;
  for (const pooling::Segment& s : pooling::segment_bounds(8, 3)) {
    got.emplace_back(s.begin + 1, s.end);
    text += "[" + std::to_string(s.begin + 1) + ".." + std::to_string(s.end) + "]";
  }
  return {got == expected, text};
}

// 4 ---------------------------------------------------------------------------
Outcome solvers() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  std::normal_distribution<double> n01;
  double worst_kkt = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng() % 31), dim = 1 + static_cast<Eigen::Index>(rng() % 5);
    learning::Matrix x(n, dim);
    std::vector<double> y(static_cast<std::size_t>(n));
    std::vector<std::size_t> subset(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sign = i % 2 ? 1.0 : -1.0;
      for (Eigen::Index k = 0; k < dim; ++k) x(i, k) = n01(rng) + 0.8 * sign;
      y[static_cast<std::size_t>(i)] = sign;
      subset[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    }
    const double C = std::pow(10.0, -1.0 + 3.0 * static_cast<double>(rng() % 1000) / 999.0);
    const double gamma = std::pow(2.0, -4.0 + static_cast<double>(rng() % 6));
    const Eigen::MatrixXd gram = learning::rbf_gram(x, gamma);
    const learning::BinarySolution sol = learning::smo_solve(gram, subset, y, C, 1e-3);
    worst_kkt = std::max(worst_kkt, learning::kkt_violation(gram, subset, sol, C));
  }

  learning::Matrix xor_x(4, 2);
  xor_x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> xor_y{0, 0, 1, 1};
  const learning::SvmClassifier xor_model = learning::svm_train(xor_x, xor_y, {100.0, 2.0});
  int xor_hits = 0;
  for (Eigen::Index i = 0; i < 4; ++i)
    xor_hits += learning::svm_predict(xor_model, xor_x.row(i).transpose()).label == xor_y[static_cast<std::size_t>(i)];

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  learning::Matrix lx(60, 1);
  std::vector<double> ly;
  for (Eigen::Index i = 0; i < 60; ++i) {
    lx(i, 0) = u(rng);
    ly.push_back(2.0 * lx(i, 0) + 1.0);
  }
  const learning::SvrModel line = learning::svr_train(lx, ly, {1000.0, 0.001, 1e-6, 20000});
  const double slope_err = std::abs(line.weights(0) - 2.0), bias_err = std::abs(line.bias - 1.0);

  const double s = seconds_since(t0);
  return {worst_kkt <= 1e-3 && xor_hits == 4 && slope_err <= 0.05 && bias_err <= 0.05 && s < 60.0,
          "max KKT violation " + fmt(worst_kkt) + ", XOR " + std::to_string(xor_hits) + "/4, line w " +
              fmt(line.weights(0), 6) + " b " + fmt(line.bias, 6) + ", " + fmt(s, 3) + " s"};
}

// 5 ---------------------------------------------------------------------------
Outcome feature_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> flow_dist(-2.0, 2.0);
  const features::SpatialPyramidConfig pyramid;
  const features::HogConfig hog;
  double worst_flow = 0.0, worst_hog = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ScalarGrid u(60, 60), v(60, 60), depth(60, 60);
    for (double& x : u.values()) x = flow_dist(rng);
    for (double& x : v.values()) x = flow_dist(rng);
    for (double& x : depth.values()) x = static_cast<double>(800 + rng() % 3000);
    worst_flow = std::max(worst_flow, max_abs_diff(features::flow_pyramid_histogram(u, v, pyramid),
                                                   testing::naive_flow_hist(u, v, pyramid)));
    worst_hog = std::max(worst_hog, max_abs_diff(features::depth_hog(depth, hog), testing::naive_hog(depth, hog)));
  }

  ScalarGrid depth(60, 60);
  for (double& x : depth.values()) x = static_cast<double>(800 + rng() % 3000);
  const std::vector<double> before = features::depth_hog(depth, hog);
  for (double& x : depth.values()) x += 250.0;
  const bool offset_exact = features::depth_hog(depth, hog) == before;

  std::uniform_real_distribution<double> strong(0.5, 2.0);
  ScalarGrid u(60, 60), v(60, 60);
  for (double& x : u.values()) x = strong(rng);
  for (double& x : v.values()) x = flow_dist(rng);
  const std::vector<double> base = features::flow_pyramid_histogram(u, v, pyramid);
  for (double& x : u.values()) x *= 3.0;
  for (double& x : v.values()) x *= 3.0;
  const double scale_gap = max_abs_diff(features::flow_pyramid_histogram(u, v, pyramid), base);

  const double s = seconds_since(t0);
  return {worst_flow <= 1e-9 && worst_hog <= 1e-9 && offset_exact && scale_gap <= 1e-9 && s < 30.0,
          "flow " + fmt(worst_flow) + ", hog " + fmt(worst_hog) + ", offset " + (offset_exact ? "exact" : "changed") +
              ", scaling gap " + fmt(scale_gap) + ", " + fmt(s, 3) + " s"};
}

// 6 ---------------------------------------------------------------------------
ScalarGrid texture(std::size_t n, double dx) {
  ScalarGrid g(n, n);
  const double w = 2.0 * M_PI / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double x = static_cast<double>(c) - dx, y = static_cast<double>(r);
      g(r, c) = 128.0 + 40.0 * std::sin(3 * w * x) * std::cos(2 * w * y) + 30.0 * std::sin(5 * w * x + 4 * w * y) +
                20.0 * std::cos(7 * w * y - 2 * w * x);
    }
  return g;
}

Outcome flow_sanity() {
  const auto t0 = Clock::now();
  const ScalarGrid a = texture(64, 0.0), b = texture(64, 1.0);
  const optflow::FlowField still = optflow::dense_flow(a, a);
  double worst_still = 0.0;
  for (double x : still.u.values()) worst_still = std::max(worst_still, std::abs(x));
  for (double x : still.v.values()) worst_still = std::max(worst_still, std::abs(x));
  const optflow::FlowField moved = optflow::dense_flow(a, b);
  std::vector<double> interior;
  for (std::size_t r = 8; r + 8 < 64; ++r)
    for (std::size_t c = 8; c + 8 < 64; ++c) interior.push_back(moved.u(r, c));
  std::nth_element(interior.begin(), interior.begin() + static_cast<std::ptrdiff_t>(interior.size() / 2), interior.end());
  const double median_u = interior[interior.size() / 2];
  const double s = seconds_since(t0);
  return {worst_still <= 1e-6 && median_u >= 0.7 && median_u <= 1.3 && s < 30.0,
          "identical max |flow| " + fmt(worst_still) + ", translation median u " + fmt(median_u) + ", " + fmt(s, 3) +
              " s"};
}

// 7 ---------------------------------------------------------------------------
Outcome window_seconds() {
  const double a = pipeline::window_seconds(450), b = pipeline::window_seconds(900), c = pipeline::window_seconds(1800);
  return {a == 15.0 && b == 30.0 && c == 60.0, "450 -> " + fmt(a) + " s, 900 -> " + fmt(b) + " s, 1800 -> " + fmt(c) + " s"};
}

// 8 ---------------------------------------------------------------------------
pipeline::EstimatorConfig hygiene_config() {
  pipeline::EstimatorConfig c;
  c.windows = {150, 300, 30, 60};
  c.pooling.levels = 2;
  c.pooling.dct_coefficients = 2;
  c.pca.max_k = 8;
  c.svm_grid = {{1.0, 8.0}, {1e-3}, {0.1}, 2};
  c.svr_grid = {{1e-2, 1e-1}, {}, {0.1}, 2};
  return c;
}

Outcome loso_hygiene() {
  const auto t0 = Clock::now();
  synth::CorpusSpec spec;
  spec.seed = 8;
  spec.subjects = 3;
  spec.sessions_per_subject = 1;
  spec.activities_per_script = 3;
  spec.seconds_per_activity = 30.0;
  const std::vector<Session> corpus = synth::synth_corpus(spec);
  const pipeline::EstimatorConfig base = hygiene_config();

  const std::vector<std::string> names{"as-recurrent1", "as-recurrent2", "dm"};
  const evaluation::LosoReport report = evaluation::run_loso(corpus, evaluation::standard_estimators(base, names));

  std::vector<encode::RawFeatures> raws;
  for (const Session& s : corpus) raws.push_back(encode::extract_raw(s, base.features));
  const std::set<std::string> required{"pca",           "standardizer:calorie",  "standardizer:classifier",
                                       "grid_search:classifier", "grid_search:regressor", "solver:classifier",
                                       "solver:regressor"};
  std::set<std::string> seen;
  std::size_t direct_violations = 0, leaked_violations = 0;
  std::set<std::string> leaked_stages;
  for (int held = 1; held <= spec.subjects; ++held) {
    std::vector<pipeline::RawSession> train, all;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      all.push_back({&corpus[i], &raws[i]});
      if (corpus[i].subject.id != held) train.push_back({&corpus[i], &raws[i]});
    }
    pipeline::EstimatorConfig cfg = base;
    cfg.mode = pipeline::RecurrentMode::recurrent1;
    evaluation::LeakageAudit audit(held);
    pipeline::train(cfg, train, &audit);
    direct_violations += audit.violations();
    for (const auto& [stage, count] : audit.stages()) seen.insert(stage);
    // positive control: training on every subject must be caught
    evaluation::LeakageAudit control(held);
    pipeline::train(cfg, all, &control);
    leaked_violations += control.violations();
    leaked_stages.insert(control.violation_stages().begin(), control.violation_stages().end());
  }
  const bool covered = std::includes(seen.begin(), seen.end(), required.begin(), required.end());
  const bool control_caught = std::includes(leaked_stages.begin(), leaked_stages.end(), required.begin(), required.end());
  const double s = seconds_since(t0);
  return {report.leakage_events > 0 && report.leakage_violations == 0 && direct_violations == 0 && covered &&
              control_caught,
          std::to_string(report.leakage_events) + " LOSO fit events, " + std::to_string(report.leakage_violations) +
              " violations; " + std::to_string(seen.size()) + " stages audited" + (covered ? "" : " (incomplete)") +
              "; leaked control flagged " + std::to_string(leaked_violations) + " fits, " + fmt(s, 3) + " s"};
}

// 9 ---------------------------------------------------------------------------
constexpr double kOrderingSecondsPerActivity = 60.0;

Outcome end_to_end_ordering(const fs::path& cache) {
  const auto t0 = Clock::now();
  synth::CorpusSpec spec;
  spec.seed = 7;
  spec.subjects = 6;
  spec.sessions_per_subject = 2;
  spec.activities_per_script = 6;
  spec.seconds_per_activity = kOrderingSecondsPerActivity;
  spec.eta_range = 0.5;
  const std::vector<Session> corpus = synth::synth_corpus(spec);

  pipeline::EstimatorConfig base;
  base.pca.max_k = 20;
  base.windows.train_stride = 60;
  base.svm_grid.C = {1.0, 8.0, 64.0};
  base.svm_grid.gamma = {std::pow(2.0, -15), std::pow(2.0, -13), std::pow(2.0, -11)};
  base.svr_grid.C = {1e-4, 1e-3, 1e-2};
  base.svr_grid.epsilon = {0.1};
  const std::vector<std::string> names{"as-recurrent1", "dm", "met"};
  evaluation::LosoOptions options;
  options.cache_dir = cache;
  const evaluation::LosoReport r = evaluation::run_loso(corpus, evaluation::standard_estimators(base, names), options);

  const auto& as = r.summary("as-recurrent1");
  const auto& dm = r.summary("dm");
  const auto& met = r.summary("met");
  const double s = seconds_since(t0);
  const bool ordered = as.session_accuracy.mean > met.session_accuracy.mean &&
                       as.session_nrmse.mean < met.session_nrmse.mean &&
                       as.session_nrmse.mean <= 1.05 * dm.session_nrmse.mean;
  return {ordered && r.leakage_violations == 0 && s < 15 * 60,
          "accuracy AS " + fmt(as.session_accuracy.mean) + " DM " + fmt(dm.session_accuracy.mean) + " MET " +
              fmt(met.session_accuracy.mean) + "; NRMSE AS " + fmt(as.session_nrmse.mean) + " DM " +
              fmt(dm.session_nrmse.mean) + " MET " + fmt(met.session_nrmse.mean) + "; " + fmt(s, 4) + " s"};
}

// 10 --------------------------------------------------------------------------
double rms(double sse, std::size_t n) { return std::sqrt(sse / static_cast<double>(n)); }

Outcome recurrency() {
  const auto t0 = Clock::now();
  synth::CorpusSpec spec;
  spec.seed = 5;
  spec.subjects = 6;
  spec.sessions_per_subject = 2;
  spec.activities_per_script = 6;
  spec.seconds_per_activity = 90.0;
  spec.eta_range = 0.5;
  constexpr std::size_t kWindow = 90;  // one tick per window, no overlap

  // The visual input is the target rate plus noise held for one window, so
  // consecutive windows give independent, weak readings of a slow target.
  std::vector<pipeline::Track> tracks;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n01;
  for (const Session& s : synth::synth_corpus(spec)) {
    pipeline::Track t = pipeline::make_track(s, encode::DoubleRows::Zero(static_cast<Eigen::Index>(s.frame_count), 2));
    double held = 0.0;
    for (std::size_t f = 0; f < t.frames(); ++f) {
      if (f % kWindow == 0) held = n01(rng);
      t.descriptors(static_cast<Eigen::Index>(f), 0) = t.gt_rate(f) / 3.0 + 0.3 * held;
      t.descriptors(static_cast<Eigen::Index>(f), 1) = n01(rng);
    }
    tracks.push_back(std::move(t));
  }

  pipeline::EstimatorConfig base;
  base.windows = {kWindow, kWindow, kWindow, kWindow};
  base.pooling = {1, true, true, false, 1};
  base.d = 3;
  base.svm_grid = {{1.0}, {1.0}, {0.1}, 3};
  base.svr_grid = {{0.1}, {}, {0.05}, 3};

  const pipeline::RecurrentMode modes[3] = {pipeline::RecurrentMode::baseline, pipeline::RecurrentMode::recurrent1,
                                            pipeline::RecurrentMode::recurrent2};
  double all[3] = {}, open[3] = {}, blind[3] = {};
  std::size_t n_all = 0, n_post = 0;
  for (int held = 1; held <= spec.subjects; ++held) {
    std::vector<pipeline::Track> train, test;
    for (const pipeline::Track& t : tracks) (t.subject.id == held ? test : train).push_back(t);
    pipeline::TrainedEstimator est[3];
    for (int m = 0; m < 3; ++m) {
      pipeline::EstimatorConfig c = base;
      c.mode = modes[m];
      est[m] = pipeline::train_on_tracks(c, train);
    }
    for (const pipeline::Track& t : test) {
      const pipeline::PredictionTrace gt = pipeline::ground_truth_trace(t, base.windows);
      const std::size_t cut = t.frames() / 2;
      for (int m = 0; m < 3; ++m) {
        const pipeline::PredictionTrace p = pipeline::predict_track(est[m], t, {.oracle_routing = true, .blind_from_frame = {}});
        const pipeline::PredictionTrace q = pipeline::predict_track(est[m], t, {.oracle_routing = true, .blind_from_frame = cut});
        for (std::size_t k = 0; k < gt.ticks.size(); ++k) {
          const double e = p.ticks[k].rate - gt.ticks[k].rate, eb = q.ticks[k].rate - gt.ticks[k].rate;
          all[m] += e * e;
          if (gt.ticks[k].frame >= cut) {
            open[m] += e * e;
            blind[m] += eb * eb;
          }
        }
      }
      for (const pipeline::Tick& k : gt.ticks) {
        ++n_all;
        n_post += k.frame >= cut;
      }
    }
  }
  const double base_rmse = rms(all[0], n_all), r1_rmse = rms(all[1], n_all), r2_rmse = rms(all[2], n_all);
  const double r1_open = rms(open[1], n_post), r1_blind = rms(blind[1], n_post);
  const double r2_open = rms(open[2], n_post), r2_blind = rms(blind[2], n_post);
  const double s = seconds_since(t0);
  const bool pass = r1_rmse < base_rmse && r2_blind >= 1.2 * r1_blind && r1_blind <= 1.1 * r1_open &&
                    r2_blind > r2_open && s < 600.0;
  return {pass, "RMSE baseline " + fmt(base_rmse) + " recurrent1 " + fmt(r1_rmse) + " recurrent2 " + fmt(r2_rmse) +
                    "; after blinding recurrent1 " + fmt(r1_open) + " -> " + fmt(r1_blind) + ", recurrent2 " +
                    fmt(r2_open) + " -> " + fmt(r2_blind) + "; " + fmt(s, 3) + " s"};
}

// 11 --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool run_cli(const std::vector<std::string>& args, std::string* err_text) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) *err_text = err.str();
  return code == 0;
}

Outcome determinism(const fs::path& scratch) {
  const auto t0 = Clock::now();
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  pipeline::EstimatorConfig cfg = hygiene_config();
  {
    std::ofstream(scratch / "config.json") << cfg.to_json().dump(2);
  }
  std::string err;
  for (const std::string run : {"a", "b"}) {
    const fs::path dir = scratch / run;
    const std::string corpus = (dir / "corpus").string(), config = (scratch / "config.json").string();
    if (!run_cli({"synth", "--seed", "31", "--subjects", "3", "--sessions", "1", "--activities", "3", "--seconds", "30",
                  "--out", corpus},
                 &err) ||
        !run_cli({"train", "--corpus", corpus, "--model", "as", "--mode", "recurrent1", "--config", config, "--out",
                  (dir / "as.bundle").string()},
                 &err) ||
        !run_cli({"evaluate", "--corpus", corpus, "--models", "as-recurrent1,dm,met", "--loso", "--config", config,
                  "--report", (dir / "report").string()},
                 &err))
      return {false, "command failed: " + err};
  }
  const std::vector<std::string> files{"as.bundle", "report/report.txt", "report/report.csv"};
  std::string detail;
  bool same = true;
  for (const std::string& f : files) {
    const std::string a = slurp(scratch / "a" / f), b = slurp(scratch / "b" / f);
    const bool eq = !a.empty() && a == b;
    same = same && eq;
    detail += f + (eq ? " identical (" + std::to_string(a.size()) + " B), " : " DIFFERS, ");
  }
  return {same, detail + fmt(seconds_since(t0), 3) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string cache, scratch = (fs::temp_directory_path() / "calorie_acceptance").string();
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--cache", cache, "Feature cache for the end-to-end corpus");
  app.add_option("--scratch", scratch, "Scratch directory for the determinism runs");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"MET formula", met_formula},
      {"pooling oracle", pooling_oracle},
      {"segment layout", segment_layout},
      {"solver correctness", solvers},
      {"feature oracles", feature_oracles},
      {"flow sanity", flow_sanity},
      {"window seconds", window_seconds},
      {"LOSO hygiene", loso_hygiene},
      {"end-to-end ordering", [&] { return end_to_end_ordering(cache); }},
      {"recurrency", recurrency},
      {"determinism", [&] { return determinism(scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
