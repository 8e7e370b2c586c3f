#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calorie/activity.hpp"
#include "calorie/imaging.hpp"
#include "calorie/optflow.hpp"

namespace calorie {

/// Frames start_frame..end_frame inclusive carry `activity`.
struct LabelSpan {
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  int activity = 0;
  friend bool operator==(const LabelSpan&, const LabelSpan&) = default;
};

/// Random-access frame provider. Implementations are immutable and may be
/// shared across threads.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t frame_count() const = 0;
  /// rgb + depth of one frame; bbox is left empty (boxes live on the session).
  virtual imaging::FrameBundle frame(std::size_t index) const = 0;
  virtual bool has_flow() const { return false; }
  /// Flow from frame index-1 to frame index (index >= 1).
  virtual optflow::FlowField flow(std::size_t index) const;
};

struct Session {
  std::string id;
  Subject subject;
  std::size_t frame_count = 0;
  std::vector<std::optional<imaging::BoundingBox>> boxes;  // empty: run the person detector
  std::vector<LabelSpan> labels;
  std::vector<imaging::BreathSample> breaths;  // raw readings
  std::shared_ptr<const FrameSource> frames;
};

/// Activity id per frame, -1 where no span covers the frame.
std::vector<int> frame_labels(const Session& session);

/// Most frequent label in labels[begin, end); ties go to the lowest id, -1 entries
/// are ignored, -1 when nothing is labelled.
int majority_label(std::span<const int> labels, std::size_t begin, std::size_t end);

/// Checks spans are ordered, non-overlapping, in range and use known ids.
void validate_labels(std::span<const LabelSpan> labels, std::size_t frame_count);

// ---------------------------------------------------------------------------
// On-disk layout: manifest.json, rgb/NNNNNN.ppm, depth/NNNNNN.pgm, boxes.csv,
// labels.csv, breaths.csv and optionally flow/NNNNNN.flo.

Session load_session(const std::filesystem::path& dir);

/// Sessions in every immediate subdirectory holding a manifest.json, sorted by
/// session id.
std::vector<Session> load_corpus(const std::filesystem::path& dir);

void write_session(const Session& session, const std::filesystem::path& dir, bool write_flow = false);

std::string frame_file_name(std::size_t index, std::string_view extension);

// Netpbm codecs.
std::vector<std::uint8_t> encode_ppm(const RgbImage& image);
RgbImage decode_ppm(std::span<const std::uint8_t> bytes, const std::string& source);
std::vector<std::uint8_t> encode_pgm16(const DepthImage& image);
DepthImage decode_pgm16(std::span<const std::uint8_t> bytes, const std::string& source);

}  // namespace calorie
