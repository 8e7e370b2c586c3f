#include "calorie/bundle.hpp"

#include <map>

#include "calorie/activity.hpp"
#include "calorie/binary.hpp"
#include "calorie/error.hpp"

namespace calorie::bundle {
namespace {

using learning::Matrix;
using nlohmann::json;

constexpr std::string_view kMagic{"CALBNDL\0", 8};

struct Block {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<double> data;
};

class BlockWriter {
 public:
  template <typename Derived>
  void add(const std::string& name, const Eigen::DenseBase<Derived>& m) {
    Block b{static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()), {}};
    b.data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) b.data.push_back(m(r, c));
    blocks_.emplace_back(name, std::move(b));
  }

  void write(binary::Writer& w) const {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(blocks_.size()));
    for (const auto& [name, b] : blocks_) {
      w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
      w.put_bytes(name);
      w.put<std::uint64_t>(b.rows);
      w.put<std::uint64_t>(b.cols);
      for (const double v : b.data) w.put<double>(v);
    }
  }

 private:
  std::vector<std::pair<std::string, Block>> blocks_;
};

class BlockReader {
 public:
  BlockReader(binary::Reader& r, const std::string& source) : source_(source) {
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::string name = r.get_string(r.get<std::uint32_t>());
      Block b;
      b.rows = r.get<std::uint64_t>();
      b.cols = r.get<std::uint64_t>();
      if (b.cols != 0 && b.rows > r.remaining() / 8 / b.cols) throw DataError(source + ": truncated block " + name);
      b.data.resize(b.rows * b.cols);
      for (double& v : b.data) v = r.get<double>();
      if (!blocks_.emplace(name, std::move(b)).second) throw DataError(source + ": duplicate block " + name);
    }
  }

  Matrix matrix(const std::string& name) const {
    const Block& b = find(name);
    Matrix m(static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
    for (std::size_t i = 0; i < b.data.size(); ++i) m.data()[i] = b.data[i];
    return m;
  }

  Eigen::VectorXd vector(const std::string& name) const {
    const Block& b = find(name);
    if (b.cols != 1) throw DataError(source_ + ": block " + name + " is not a vector");
    return Eigen::Map<const Eigen::VectorXd>(b.data.data(), static_cast<Eigen::Index>(b.rows));
  }

 private:
  const Block& find(const std::string& name) const {
    const auto it = blocks_.find(name);
    if (it == blocks_.end()) throw DataError(source_ + ": missing block " + name);
    return it->second;
  }

  std::map<std::string, Block> blocks_;
  std::string source_;
};

json write_svr(const learning::SvrModel& m, const std::string& name, BlockWriter& blocks) {
  blocks.add(name, m.weights);
  return {{"block", name}, {"bias", m.bias}, {"C", m.C}, {"epsilon", m.epsilon}};
}

learning::SvrModel read_svr(const json& j, const BlockReader& blocks) {
  learning::SvrModel m;
  m.weights = blocks.vector(j.at("block").get<std::string>());
  m.bias = j.at("bias").get<double>();
  m.C = j.at("C").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  return m;
}

json write_set(const pipeline::RegressorSet& set, const std::string& prefix, BlockWriter& blocks) {
  json j = {{"per_activity", json::object()}};
  for (const auto& [a, m] : set.per_activity)
    j["per_activity"][std::to_string(a)] = write_svr(m, prefix + "." + std::to_string(a), blocks);
  if (set.shared) j["shared"] = write_svr(*set.shared, prefix + ".shared", blocks);
  return j;
}

pipeline::RegressorSet read_set(const json& j, const BlockReader& blocks) {
  pipeline::RegressorSet set;
  for (const auto& [key, value] : j.at("per_activity").items()) set.per_activity[std::stoi(key)] = read_svr(value, blocks);
  if (j.contains("shared")) set.shared = read_svr(j.at("shared"), blocks);
  return set;
}

}  // namespace

std::vector<std::uint8_t> serialize(const pipeline::TrainedEstimator& est) {
  BlockWriter blocks;
  json h;
  h["kind"] = pipeline::to_string(est.config.kind);
  h["mode"] = pipeline::to_string(est.config.mode);
  h["config"] = est.config.to_json();
  json table = json::array();
  for (const ActivityInfo& a : kActivities) table.push_back({{"id", a.id}, {"name", a.name}, {"met", a.met}});
  h["activities"] = table;
  h["training_subjects"] = est.training_subjects;
  h["target"] = {{"mean", est.target_mean}, {"scale", est.target_scale}};

  h["pca"] = {{"total_variance", est.pca.total_variance}, {"degenerate", est.pca.degenerate}};
  blocks.add("pca.mean", est.pca.mean);
  blocks.add("pca.basis", est.pca.basis);
  blocks.add("pca.explained_variance", est.pca.explained_variance);
  blocks.add("cal_scaler.mean", est.cal_scaler.mean());
  blocks.add("cal_scaler.scale", est.cal_scaler.scale());
  blocks.add("cls_scaler.mean", est.cls_scaler.mean());
  blocks.add("cls_scaler.scale", est.cls_scaler.scale());

  const learning::SvmClassifier& svm = est.classifier;
  json pairs = json::array();
  for (std::size_t p = 0; p < svm.pairs.size(); ++p) {
    const learning::PairModel& pm = svm.pairs[p];
    const std::string name = "svm.coef." + std::to_string(p);
    blocks.add(name, Eigen::Map<const Eigen::VectorXd>(pm.coef.data(), static_cast<Eigen::Index>(pm.coef.size())));
    pairs.push_back(
        {{"positive", pm.positive}, {"negative", pm.negative}, {"support", pm.support}, {"bias", pm.bias}, {"coef", name}});
  }
  h["classifier"] = {{"classes", svm.classes}, {"C", svm.C}, {"gamma", svm.gamma}, {"pairs", pairs}};
  blocks.add("svm.support_vectors", svm.support_vectors);

  h["regressors"] = write_set(est.regressors, "svr", blocks);
  h["baseline_regressors"] = write_set(est.baseline_regressors, "svr_baseline", blocks);
  h["fallback_activities"] = est.fallback_activities;

  binary::Writer w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(kVersion);
  const std::string header = h.dump();
  w.put<std::uint64_t>(header.size());
  w.put_bytes(header);
  blocks.write(w);
  return w.take();
}

pipeline::TrainedEstimator deserialize(std::span<const std::uint8_t> bytes, const std::string& source) {
  binary::Reader r(bytes, source);
  if (r.get_string(kMagic.size()) != kMagic) throw DataError(source + ": not an estimator bundle");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion)
    throw DataError(source + ": bundle version " + std::to_string(version) + " (expected " + std::to_string(kVersion) + ")");
  const auto header_size = r.get<std::uint64_t>();
  if (header_size > r.remaining()) throw DataError(source + ": truncated header");
  json h;
  try {
    h = json::parse(r.get_string(static_cast<std::size_t>(header_size)));
  } catch (const json::exception& e) {
    throw DataError(source + ": bad header: " + e.what());
  }
  const BlockReader blocks(r, source);
  if (!r.done()) throw DataError(source + ": trailing bytes");

  try {
    for (const json& a : h.at("activities")) {
      const int id = a.at("id").get<int>();
      if (!valid_activity(id) || activity(id).met != a.at("met").get<double>())
        throw DataError(source + ": activity table differs from this build");
    }
    pipeline::TrainedEstimator est;
    est.config = pipeline::EstimatorConfig::from_json(h.at("config"));
    est.training_subjects = h.at("training_subjects").get<std::vector<int>>();
    est.target_mean = h.at("target").at("mean").get<double>();
    est.target_scale = h.at("target").at("scale").get<double>();

    est.pca.mean = blocks.vector("pca.mean");
    est.pca.basis = blocks.matrix("pca.basis");
    est.pca.explained_variance = blocks.vector("pca.explained_variance");
    est.pca.total_variance = h.at("pca").at("total_variance").get<double>();
    est.pca.degenerate = h.at("pca").at("degenerate").get<bool>();
    est.cal_scaler = learning::Standardizer(blocks.vector("cal_scaler.mean"), blocks.vector("cal_scaler.scale"));
    est.cls_scaler = learning::Standardizer(blocks.vector("cls_scaler.mean"), blocks.vector("cls_scaler.scale"));

    const json& c = h.at("classifier");
    learning::SvmClassifier& svm = est.classifier;
    svm.classes = c.at("classes").get<std::vector<int>>();
    svm.C = c.at("C").get<double>();
    svm.gamma = c.at("gamma").get<double>();
    svm.support_vectors = blocks.matrix("svm.support_vectors");
    for (const json& p : c.at("pairs")) {
      learning::PairModel pm;
      pm.positive = p.at("positive").get<int>();
      pm.negative = p.at("negative").get<int>();
      pm.support = p.at("support").get<std::vector<std::uint32_t>>();
      pm.bias = p.at("bias").get<double>();
      const Eigen::VectorXd coef = blocks.vector(p.at("coef").get<std::string>());
      pm.coef.assign(coef.data(), coef.data() + coef.size());
      if (pm.coef.size() != pm.support.size()) throw DataError(source + ": classifier pair size mismatch");
      for (const std::uint32_t s : pm.support)
        if (s >= svm.support_vectors.rows()) throw DataError(source + ": support index out of range");
      svm.pairs.push_back(std::move(pm));
    }
    est.regressors = read_set(h.at("regressors"), blocks);
    est.baseline_regressors = read_set(h.at("baseline_regressors"), blocks);
    est.fallback_activities = h.at("fallback_activities").get<std::vector<int>>();
    return est;
  } catch (const json::exception& e) {
    throw DataError(source + ": bad header: " + e.what());
  }
}

void save(const std::filesystem::path& path, const pipeline::TrainedEstimator& est) {
  binary::write_file_atomic(path, serialize(est));
}

pipeline::TrainedEstimator load(const std::filesystem::path& path) {
  return deserialize(binary::read_file(path), path.string());
}

}  // namespace calorie::bundle
