#include <charconv>
#include <cstdio>
#include <set>

#include "calorie/activity.hpp"
#include "calorie/binary.hpp"
#include "calorie/evaluation.hpp"

namespace calorie::evaluation {
namespace {

std::string fixed(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string optional_fixed(const std::optional<double>& v, int precision = 3) {
  return v ? fixed(*v, precision) : std::string("n/a");
}

/// Shortest round-trip representation.
std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string mean_std_text(const MeanStd& m, int precision = 3) {
  if (m.n == 0) return "n/a";
  return fixed(m.mean, precision) + " +/- " + fixed(m.std, precision);
}

const SequenceResult* find_sequence(const LosoReport& r, const std::string& session, const std::string& estimator) {
  for (const SequenceResult& s : r.sequences)
    if (s.session_id == session && s.estimator == estimator) return &s;
  return nullptr;
}

}  // namespace

std::string format_text(const LosoReport& report) {
  std::string out;
  out += "Leave-one-subject-out evaluation\n";
  out += "folds: " + std::to_string(report.folds.size()) + ", leakage checks: " + std::to_string(report.leakage_events) +
         " fits, " + std::to_string(report.leakage_violations) + " violations\n\n";

  out += "Summary (mean +/- std; RMSE in kcal/min)\n";
  out += pad("estimator", 16) + pad("fold RMSE", 20) + pad("fold NRMSE", 20) + pad("session NRMSE", 20) +
         pad("accuracy %", 20) + "correlation\n";
  for (const EstimatorSummary& s : report.summaries)
    out += pad(s.name, 16) + pad(mean_std_text(s.fold_rmse), 20) + pad(mean_std_text(s.fold_nrmse), 20) +
           pad(mean_std_text(s.session_nrmse), 20) + pad(mean_std_text(s.session_accuracy, 1), 20) +
           mean_std_text(s.session_pearson) + "\n";

  out += "\nPer-activity RMSE (kcal/min, ticks grouped by ground-truth label)\n";
  out += pad("activity", 12);
  for (const std::string& e : report.estimators) out += pad(e, 14);
  out += "ticks\n";
  std::set<int> activities;
  for (const EstimatorSummary& s : report.summaries)
    for (const auto& [a, err] : s.per_activity) activities.insert(a);
  for (const int a : activities) {
    out += pad(valid_activity(a) ? std::string(activity(a).name) : "unlabelled", 12);
    std::size_t ticks = 0;
    for (const EstimatorSummary& s : report.summaries) {
      const auto it = s.per_activity.find(a);
      out += pad(it == s.per_activity.end() ? "n/a" : fixed(it->second.rmse()), 14);
      if (it != s.per_activity.end()) ticks = std::max(ticks, it->second.count);
    }
    out += std::to_string(ticks) + "\n";
  }
  out += pad("overall", 12);
  for (const EstimatorSummary& s : report.summaries) out += pad(fixed(s.overall_rmse), 14);
  out += "\n";

  out += "\nPer-sequence totals (kcal), accuracy (%) and correlation\n";
  out += pad("sequence", 14) + pad("subject", 9) + pad("GT", 10);
  for (const std::string& e : report.estimators) out += pad(e, 10) + pad("acc", 8) + pad("r", 8);
  out += "\n";
  std::vector<std::pair<int, std::string>> seen;
  for (const SequenceResult& s : report.sequences)
    if (std::find(seen.begin(), seen.end(), std::pair{s.subject, s.session_id}) == seen.end())
      seen.emplace_back(s.subject, s.session_id);
  for (const auto& [subject, session] : seen) {
    const SequenceResult* first = nullptr;
    std::string row;
    for (const std::string& e : report.estimators) {
      const SequenceResult* s = find_sequence(report, session, e);
      if (!s) {
        row += pad("-", 10) + pad("-", 8) + pad("-", 8);
        continue;
      }
      if (!first) first = s;
      row += pad(fixed(s->pred_total, 1), 10) + pad(optional_fixed(s->accuracy, 1), 8) + pad(optional_fixed(s->pearson, 2), 8);
    }
    out += pad(session, 14) + pad(std::to_string(subject), 9) + pad(first ? fixed(first->gt_total, 1) : "-", 10) + row +
           "\n";
  }

  for (const FoldResult& f : report.folds)
    for (const std::string& v : f.violations)
      out += "LEAKAGE: fold " + std::to_string(f.held_out) + " stage " + v + "\n";
  return out;
}

std::string format_csv(const LosoReport& report) {
  std::string out = "fold,sequence,estimator,metric,value\n";
  const auto row = [&](const std::string& fold, const std::string& seq, const std::string& est, const std::string& metric,
                       const std::string& value) { out += fold + "," + seq + "," + est + "," + metric + "," + value + "\n"; };
  for (const SequenceResult& s : report.sequences) {
    const std::string fold = std::to_string(s.subject);
    row(fold, s.session_id, s.estimator, "rmse", exact(s.rmse));
    row(fold, s.session_id, s.estimator, "nrmse", s.nrmse ? exact(*s.nrmse) : "nan");
    row(fold, s.session_id, s.estimator, "accuracy_pct", s.accuracy ? exact(*s.accuracy) : "nan");
    row(fold, s.session_id, s.estimator, "pearson_r", s.pearson ? exact(*s.pearson) : "nan");
    row(fold, s.session_id, s.estimator, "pred_total_kcal", exact(s.pred_total));
    row(fold, s.session_id, s.estimator, "gt_total_kcal", exact(s.gt_total));
  }
  for (const FoldResult& f : report.folds) {
    const std::string fold = std::to_string(f.held_out);
    for (const auto& [e, v] : f.rmse) row(fold, "all", e, "rmse", exact(v));
    for (const auto& [e, v] : f.nrmse) row(fold, "all", e, "nrmse", exact(v));
    row(fold, "all", "all", "leakage_violations", std::to_string(f.violations.size()));
  }
  for (const EstimatorSummary& s : report.summaries) {
    for (const auto& [a, err] : s.per_activity) {
      const std::string name = valid_activity(a) ? std::string(activity(a).name) : "unlabelled";
      row("all", "all", s.name, "rmse_" + name, exact(err.rmse()));
    }
    row("all", "all", s.name, "rmse", exact(s.overall_rmse));
    row("all", "all", s.name, "fold_rmse_mean", exact(s.fold_rmse.mean));
    row("all", "all", s.name, "fold_rmse_std", exact(s.fold_rmse.std));
    row("all", "all", s.name, "fold_nrmse_mean", exact(s.fold_nrmse.mean));
    row("all", "all", s.name, "fold_nrmse_std", exact(s.fold_nrmse.std));
    row("all", "all", s.name, "session_nrmse_mean", exact(s.session_nrmse.mean));
    row("all", "all", s.name, "accuracy_pct_mean", exact(s.session_accuracy.mean));
    row("all", "all", s.name, "accuracy_pct_std", exact(s.session_accuracy.std));
    row("all", "all", s.name, "pearson_r_mean", exact(s.session_pearson.mean));
  }
  return out;
}

void write_report(const std::filesystem::path& dir, const LosoReport& report) {
  std::filesystem::create_directories(dir);
  binary::write_file_atomic(dir / "report.txt", format_text(report));
  binary::write_file_atomic(dir / "report.csv", format_csv(report));
}

}  // namespace calorie::evaluation
