#include "calorie/encode.hpp"

#include <algorithm>

#include "calorie/binary.hpp"
#include "calorie/error.hpp"

namespace calorie::encode {

using nlohmann::json;

void FeatureConfig::validate() const {
  require(patch_side >= 8, "features: patch side too small");
  require(median_kernel >= 1 && median_kernel % 2 == 1, "features: median kernel must be odd");
  require(flow.alpha > 0.0 && flow.iterations >= 1, "features: invalid flow parameters");
  require(flow_margin >= 0, "features: negative flow margin");
  require(background_frames >= 1, "features: need background frames");
  pyramid.validate();
  hog.validate(patch_side);
}

json FeatureConfig::to_json() const {
  return {{"patch_side", patch_side},
          {"median_kernel", median_kernel},
          {"flow", {{"alpha", flow.alpha}, {"iterations", flow.iterations}, {"presmooth_sigma", flow.presmooth_sigma}}},
          {"pyramid",
           {{"bins", pyramid.bins},
            {"levels", pyramid.levels},
            {"min_magnitude", pyramid.min_magnitude},
            {"epsilon", pyramid.epsilon}}},
          {"hog",
           {{"cell", hog.cell},
            {"bins", hog.bins},
            {"block", hog.block},
            {"block_stride", hog.block_stride},
            {"epsilon", hog.epsilon}}},
          {"flow_margin", flow_margin},
          {"use_source_flow", use_source_flow},
          {"detector",
           {{"near_mm", detector.near_mm},
            {"far_mm", detector.far_mm},
            {"foreground_margin_mm", detector.foreground_margin_mm},
            {"min_area", detector.min_area}}},
          {"background_frames", background_frames}};
}

FeatureConfig FeatureConfig::from_json(const json& j) {
  FeatureConfig c;
  c.patch_side = j.value("patch_side", c.patch_side);
  c.median_kernel = j.value("median_kernel", c.median_kernel);
  if (j.contains("flow")) {
    const json& f = j.at("flow");
    c.flow.alpha = f.value("alpha", c.flow.alpha);
    c.flow.iterations = f.value("iterations", c.flow.iterations);
    c.flow.presmooth_sigma = f.value("presmooth_sigma", c.flow.presmooth_sigma);
  }
  if (j.contains("pyramid")) {
    const json& p = j.at("pyramid");
    c.pyramid.bins = p.value("bins", c.pyramid.bins);
    c.pyramid.levels = p.value("levels", c.pyramid.levels);
    c.pyramid.min_magnitude = p.value("min_magnitude", c.pyramid.min_magnitude);
    c.pyramid.epsilon = p.value("epsilon", c.pyramid.epsilon);
  }
  if (j.contains("hog")) {
    const json& h = j.at("hog");
    c.hog.cell = h.value("cell", c.hog.cell);
    c.hog.bins = h.value("bins", c.hog.bins);
    c.hog.block = h.value("block", c.hog.block);
    c.hog.block_stride = h.value("block_stride", c.hog.block_stride);
    c.hog.epsilon = h.value("epsilon", c.hog.epsilon);
  }
  c.flow_margin = j.value("flow_margin", c.flow_margin);
  c.use_source_flow = j.value("use_source_flow", c.use_source_flow);
  if (j.contains("detector")) {
    const json& d = j.at("detector");
    c.detector.near_mm = d.value("near_mm", c.detector.near_mm);
    c.detector.far_mm = d.value("far_mm", c.detector.far_mm);
    c.detector.foreground_margin_mm = d.value("foreground_margin_mm", c.detector.foreground_margin_mm);
    c.detector.min_area = d.value("min_area", c.detector.min_area);
  }
  c.background_frames = j.value("background_frames", c.background_frames);
  c.validate();
  return c;
}

std::uint64_t FeatureConfig::hash() const { return binary::fnv1a(to_json().dump()); }

namespace {

ScalarGrid crop(const ScalarGrid& image, const imaging::BoundingBox& box) {
  ScalarGrid out(static_cast<std::size_t>(box.h), static_cast<std::size_t>(box.w));
  for (int r = 0; r < box.h; ++r)
    for (int c = 0; c < box.w; ++c)
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          image(static_cast<std::size_t>(box.y + r), static_cast<std::size_t>(box.x + c));
  return out;
}

imaging::BoundingBox merge(const imaging::BoundingBox& a, const imaging::BoundingBox& b) {
  const int x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  const int x1 = std::max(a.x + a.w, b.x + b.w), y1 = std::max(a.y + a.h, b.y + b.h);
  return {x0, y0, x1 - x0, y1 - y0};
}

/// Depth as scalars with missing (zero) readings replaced by the farthest
/// reading inside the box; that value also pads the normalised patch.
std::vector<double> depth_hog_for(const DepthImage& depth, const imaging::BoundingBox& box, const FeatureConfig& cfg) {
  const auto clamped = imaging::clamp_box(box, depth.rows(), depth.cols());
  if (!clamped) throw Error("empty person region");
  double pad = 0.0;
  for (int r = clamped->y; r < clamped->y + clamped->h; ++r)
    for (int c = clamped->x; c < clamped->x + clamped->w; ++c)
      pad = std::max(pad, static_cast<double>(depth(static_cast<std::size_t>(r), static_cast<std::size_t>(c))));
  ScalarGrid scalar = imaging::depth_to_scalar(depth);
  for (double& v : scalar.values())
    if (v <= 0.0) v = pad;
  const imaging::NormalizedPatch patch = imaging::normalize_bbox_patch(scalar, *clamped, cfg.patch_side, pad);
  return features::depth_hog(patch.data, cfg.hog);
}

std::vector<double> flow_hist_for(const optflow::FlowField& field, const imaging::BoundingBox& box,
                                  const FeatureConfig& cfg) {
  const optflow::FlowPatch patch = optflow::resample_flow(field, box, cfg.patch_side, cfg.median_kernel);
  return features::flow_pyramid_histogram(patch.u.data, patch.v.data, cfg.pyramid);
}

}  // namespace

RawFeatures extract_raw(const Session& session, const FeatureConfig& cfg) {
  cfg.validate();
  require(session.frames != nullptr, "extract_raw: session has no frame source");
  const std::size_t T = session.frame_count;
  require(session.frames->frame_count() == T, "extract_raw: frame count mismatch");
  require(session.boxes.empty() || session.boxes.size() == T, "extract_raw: box count mismatch");

  RawFeatures raw;
  raw.flow = DoubleRows::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(cfg.flow_dim()));
  raw.hog = FloatRows::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(cfg.hog_dim()));
  raw.valid.assign(T, 0);

  std::vector<std::optional<imaging::BoundingBox>> boxes = session.boxes;
  if (boxes.empty()) {
    const imaging::FrameBundle first = session.frames->frame(0);
    imaging::DepthBackground background(first.depth.rows(), first.depth.cols());
    const std::size_t samples = std::min<std::size_t>(T, static_cast<std::size_t>(cfg.background_frames));
    for (std::size_t k = 0; k < samples; ++k) background.add(session.frames->frame(k * T / samples).depth);
    const DepthImage mode = background.mode();
    for (std::size_t i = 0; i < T; ++i)
      boxes.push_back(imaging::detect_person(session.frames->frame(i).depth, mode, cfg.detector));
  }

  const bool source_flow = cfg.use_source_flow && session.frames->has_flow();
  ScalarGrid prev_gray;
  for (std::size_t i = 0; i < T; ++i) {
    const imaging::FrameBundle frame = session.frames->frame(i);
    const auto box = boxes[i] ? imaging::clamp_box(*boxes[i], frame.depth.rows(), frame.depth.cols()) : std::nullopt;
    const auto row = static_cast<Eigen::Index>(i);
    if (box) {
      const std::vector<double> hog = depth_hog_for(frame.depth, *box, cfg);
      for (std::size_t k = 0; k < hog.size(); ++k) raw.hog(row, static_cast<Eigen::Index>(k)) = static_cast<float>(hog[k]);
      raw.valid[i] = 1;
    }

    ScalarGrid gray;
    if (!source_flow) gray = imaging::to_grayscale(frame.rgb);
    const auto prev_box = i > 0 && boxes[i - 1]
                              ? imaging::clamp_box(*boxes[i - 1], frame.depth.rows(), frame.depth.cols())
                              : std::nullopt;
    const auto flow_box = prev_box ? prev_box : box;
    if (i > 0 && box && flow_box) {
      std::vector<double> hist;
      if (source_flow) {
        hist = flow_hist_for(session.frames->flow(i), *flow_box, cfg);
      } else {
        imaging::BoundingBox region = merge(*flow_box, *box);
        region = {region.x - cfg.flow_margin, region.y - cfg.flow_margin, region.w + 2 * cfg.flow_margin,
                  region.h + 2 * cfg.flow_margin};
        region = *imaging::clamp_box(region, gray.rows(), gray.cols());
        const optflow::FlowField field = optflow::dense_flow(crop(prev_gray, region), crop(gray, region), cfg.flow);
        const imaging::BoundingBox local{flow_box->x - region.x, flow_box->y - region.y, flow_box->w, flow_box->h};
        hist = flow_hist_for(field, local, cfg);
      }
      for (std::size_t k = 0; k < hist.size(); ++k) raw.flow(row, static_cast<Eigen::Index>(k)) = hist[k];
    }
    if (!source_flow) prev_gray = std::move(gray);
  }
  return raw;
}

features::PcaModel fit_depth_pca(std::span<const RawFeatures* const> sessions, const features::PcaParams& params,
                                 std::size_t frame_stride) {
  require(frame_stride >= 1, "fit_depth_pca: stride must be positive");
  require(!sessions.empty(), "fit_depth_pca: no sessions");
  std::size_t rows = 0;
  const Eigen::Index dim = sessions.front()->hog.cols();
  for (const RawFeatures* raw : sessions) {
    require(raw->hog.cols() == dim, "fit_depth_pca: dimension mismatch");
    for (std::size_t i = 0; i < raw->frames(); i += frame_stride) rows += raw->valid[i];
  }
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(rows), dim);
  Eigen::Index r = 0;
  for (const RawFeatures* raw : sessions)
    for (std::size_t i = 0; i < raw->frames(); i += frame_stride)
      if (raw->valid[i]) samples.row(r++) = raw->hog.row(static_cast<Eigen::Index>(i)).cast<double>();
  return features::pca_fit(samples, params);
}

DoubleRows descriptors(const RawFeatures& raw, const features::PcaModel& pca) {
  const Eigen::Index T = static_cast<Eigen::Index>(raw.frames());
  const Eigen::Index fd = raw.flow.cols();
  const Eigen::Index k = static_cast<Eigen::Index>(pca.k());
  require(pca.degenerate || static_cast<Eigen::Index>(pca.dim()) == raw.hog.cols(), "descriptors: PCA dimension mismatch");
  DoubleRows out = DoubleRows::Zero(T, fd + k);
  out.leftCols(fd) = raw.flow;
  if (k > 0) {
    const Eigen::MatrixXd centered = raw.hog.cast<double>().rowwise() - pca.mean.transpose();
    out.rightCols(k).noalias() = centered * pca.basis.transpose();
  }
  for (Eigen::Index i = 0; i < T; ++i)
    if (!raw.valid[static_cast<std::size_t>(i)]) out.row(i).setZero();
  return out;
}

}  // namespace calorie::encode
