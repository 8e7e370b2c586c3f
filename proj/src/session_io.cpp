#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "calorie/binary.hpp"
#include "calorie/error.hpp"
#include "calorie/session.hpp"

namespace calorie {

namespace fs = std::filesystem;
using nlohmann::json;

optflow::FlowField FrameSource::flow(std::size_t) const { throw Error("frame source provides no flow"); }

std::vector<int> frame_labels(const Session& session) {
  std::vector<int> out(session.frame_count, -1);
  for (const LabelSpan& s : session.labels)
    for (std::size_t f = s.start_frame; f <= s.end_frame && f < out.size(); ++f) out[f] = s.activity;
  return out;
}

int majority_label(std::span<const int> labels, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= labels.size(), "majority_label: range out of bounds");
  std::array<std::size_t, kActivityCount> counts{};
  for (std::size_t i = begin; i < end; ++i)
    if (valid_activity(labels[i])) ++counts[static_cast<std::size_t>(labels[i])];
  std::size_t best = 0;
  for (std::size_t a = 1; a < counts.size(); ++a)
    if (counts[a] > counts[best]) best = a;
  return counts[best] == 0 ? -1 : static_cast<int>(best);
}

void validate_labels(std::span<const LabelSpan> labels, std::size_t frame_count) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const LabelSpan& s = labels[i];
    if (s.start_frame > s.end_frame || s.end_frame >= frame_count)
      throw DataError("label span " + std::to_string(i) + " out of range");
    if (!valid_activity(s.activity)) throw DataError("label span " + std::to_string(i) + ": unknown activity id");
    if (i > 0 && s.start_frame <= labels[i - 1].end_frame)
      throw DataError("label spans " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap or are unordered");
  }
}

std::string frame_file_name(std::size_t index, std::string_view extension) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return std::string(buf) + std::string(extension);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvReader {
 public:
  CsvReader(const fs::path& path, std::string_view expected_header) : path_(path.string()) {
    std::ifstream in(path);
    if (!in) throw DataError(path_ + ": cannot open file");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(line);
    }
    if (lines_.empty() || lines_[0] != expected_header)
      throw DataError(path_ + ":1: expected header '" + std::string(expected_header) + "'");
  }

  /// Calls fn(fields, line_number) for every non-empty data row.
  template <typename Fn>
  void rows(std::size_t field_count, Fn fn) const {
    for (std::size_t i = 1; i < lines_.size(); ++i) {
      if (lines_[i].empty()) continue;
      std::vector<std::string_view> fields;
      std::string_view rest = lines_[i];
      while (true) {
        const auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (fields.size() != field_count)
        fail(i + 1, "expected " + std::to_string(field_count) + " fields, got " + std::to_string(fields.size()));
      fn(fields, i + 1);
    }
  }

  template <typename T>
  T parse(std::string_view field, std::size_t line) const {
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
      fail(line, "malformed value '" + std::string(field) + "'");
    return value;
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw DataError(path_ + ":" + std::to_string(line) + ": " + what);
  }

 private:
  std::string path_;
  std::vector<std::string> lines_;
};

std::size_t count_files(const fs::path& dir, std::string_view extension) {
  if (!fs::is_directory(dir)) return 0;
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension) ++n;
  return n;
}

class DirectorySource final : public FrameSource {
 public:
  DirectorySource(fs::path rgb, fs::path depth, std::optional<fs::path> flow, std::size_t frames)
      : rgb_(std::move(rgb)), depth_(std::move(depth)), flow_(std::move(flow)), frames_(frames) {}

  std::size_t frame_count() const override { return frames_; }

  imaging::FrameBundle frame(std::size_t index) const override {
    require(index < frames_, "frame index out of range");
    imaging::FrameBundle f;
    f.index = index;
    f.time_s = imaging::frame_time(index);
    const fs::path rp = rgb_ / frame_file_name(index, ".ppm");
    const fs::path dp = depth_ / frame_file_name(index, ".pgm");
    f.rgb = decode_ppm(binary::read_file(rp), rp.string());
    f.depth = decode_pgm16(binary::read_file(dp), dp.string());
    if (!f.rgb.same_shape(f.depth)) throw DataError(dp.string() + ": depth and rgb sizes differ");
    return f;
  }

  bool has_flow() const override { return flow_.has_value(); }

  optflow::FlowField flow(std::size_t index) const override {
    require(flow_.has_value(), "session has no flow directory");
    require(index >= 1 && index < frames_, "flow index out of range");
    return optflow::read_flo(*flow_ / frame_file_name(index, ".flo"));
  }

 private:
  fs::path rgb_;
  fs::path depth_;
  std::optional<fs::path> flow_;
  std::size_t frames_;
};

template <typename T>
T manifest_field(const json& m, const char* key, const fs::path& path) {
  if (!m.contains(key)) throw DataError(path.string() + ": missing field '" + key + "'");
  try {
    return m.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(path.string() + ": field '" + std::string(key) + "' has the wrong type");
  }
}

}  // namespace

Session load_session(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const auto bytes = binary::read_file(manifest_path);
  json m;
  try {
    m = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }

  Session s;
  s.id = manifest_field<std::string>(m, "session_id", manifest_path);
  s.subject.id = manifest_field<int>(m, "subject_id", manifest_path);
  s.subject.weight_kg = manifest_field<double>(m, "weight_kg", manifest_path);
  s.frame_count = manifest_field<std::size_t>(m, "frame_count", manifest_path);
  const double rate = m.value("frame_rate", imaging::kFrameRateHz);
  if (rate != imaging::kFrameRateHz) throw DataError(manifest_path.string() + ": only 30 Hz sessions are supported");
  if (!(s.subject.weight_kg > 0.0)) throw DataError(manifest_path.string() + ": weight_kg must be positive");
  if (s.frame_count == 0) throw DataError(manifest_path.string() + ": frame_count must be positive");

  const fs::path rgb = dir / m.value("rgb", std::string("rgb"));
  const fs::path depth = dir / m.value("depth", std::string("depth"));
  if (const std::size_t n = count_files(rgb, ".ppm"); n != s.frame_count)
    throw DataError(rgb.string() + ": rgb frame count mismatch (manifest " + std::to_string(s.frame_count) +
                    ", found " + std::to_string(n) + ")");
  if (const std::size_t n = count_files(depth, ".pgm"); n != s.frame_count)
    throw DataError(depth.string() + ": depth frame count mismatch (manifest " + std::to_string(s.frame_count) +
                    ", found " + std::to_string(n) + ")");
  std::optional<fs::path> flow;
  if (m.contains("flow")) {
    flow = dir / manifest_field<std::string>(m, "flow", manifest_path);
    if (const std::size_t n = count_files(*flow, ".flo"); n + 1 != s.frame_count)
      throw DataError(flow->string() + ": flow frame count mismatch (expected " + std::to_string(s.frame_count - 1) +
                      ", found " + std::to_string(n) + ")");
  }

  if (m.contains("boxes")) {
    s.boxes.assign(s.frame_count, std::nullopt);
    const CsvReader csv(dir / manifest_field<std::string>(m, "boxes", manifest_path), "frame,x,y,w,h");
    csv.rows(5, [&](const std::vector<std::string_view>& f, std::size_t line) {
      const auto frame = csv.parse<std::size_t>(f[0], line);
      if (frame >= s.frame_count) csv.fail(line, "frame index out of range");
      if (s.boxes[frame]) csv.fail(line, "duplicate frame");
      imaging::BoundingBox b{csv.parse<int>(f[1], line), csv.parse<int>(f[2], line), csv.parse<int>(f[3], line),
                             csv.parse<int>(f[4], line)};
      if (b.w <= 0 || b.h <= 0) csv.fail(line, "box must have positive size");
      s.boxes[frame] = b;
    });
  }

  {
    const CsvReader csv(dir / m.value("labels", std::string("labels.csv")), "start_frame,end_frame,activity_id");
    csv.rows(3, [&](const std::vector<std::string_view>& f, std::size_t line) {
      LabelSpan span{csv.parse<std::size_t>(f[0], line), csv.parse<std::size_t>(f[1], line),
                     csv.parse<int>(f[2], line)};
      if (!valid_activity(span.activity)) csv.fail(line, "unknown activity id");
      if (span.start_frame > span.end_frame || span.end_frame >= s.frame_count) csv.fail(line, "span out of range");
      if (!s.labels.empty() && span.start_frame <= s.labels.back().end_frame)
        csv.fail(line, "span overlaps the previous one");
      s.labels.push_back(span);
    });
  }
  {
    const CsvReader csv(dir / m.value("breaths", std::string("breaths.csv")), "time_s,kcal_per_min");
    csv.rows(2, [&](const std::vector<std::string_view>& f, std::size_t line) {
      imaging::BreathSample b{csv.parse<double>(f[0], line), csv.parse<double>(f[1], line)};
      if (!std::isfinite(b.time_s) || !std::isfinite(b.kcal_per_min) || b.kcal_per_min < 0.0)
        csv.fail(line, "invalid breath sample");
      if (!s.breaths.empty() && b.time_s <= s.breaths.back().time_s) csv.fail(line, "breath times must increase");
      s.breaths.push_back(b);
    });
    if (s.breaths.empty()) throw DataError((dir / "breaths.csv").string() + ": no breath samples");
  }

  s.frames = std::make_shared<DirectorySource>(rgb, depth, flow, s.frame_count);
  return s;
}

std::vector<Session> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": corpus directory not found");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
  std::vector<Session> sessions;
  for (const fs::path& d : dirs) sessions.push_back(load_session(d));
  std::sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sessions.size(); ++i)
    if (sessions[i].id == sessions[i - 1].id) throw DataError(dir.string() + ": duplicate session id " + sessions[i].id);
  return sessions;
}

void write_session(const Session& session, const fs::path& dir, bool write_flow) {
  require(session.frames != nullptr, "write_session: session has no frames");
  require(session.frames->frame_count() == session.frame_count, "write_session: frame count mismatch");
  require(!write_flow || session.frames->has_flow(), "write_session: source has no flow");
  validate_labels(session.labels, session.frame_count);

  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "depth");
  if (write_flow) fs::create_directories(dir / "flow");
  for (std::size_t i = 0; i < session.frame_count; ++i) {
    const imaging::FrameBundle f = session.frames->frame(i);
    binary::write_file_atomic(dir / "rgb" / frame_file_name(i, ".ppm"), encode_ppm(f.rgb));
    binary::write_file_atomic(dir / "depth" / frame_file_name(i, ".pgm"), encode_pgm16(f.depth));
    if (write_flow && i > 0) optflow::write_flo(dir / "flow" / frame_file_name(i, ".flo"), session.frames->flow(i));
  }

  std::ostringstream labels;
  labels << "start_frame,end_frame,activity_id\n";
  for (const LabelSpan& s : session.labels) labels << s.start_frame << ',' << s.end_frame << ',' << s.activity << '\n';
  binary::write_file_atomic(dir / "labels.csv", labels.str());

  std::ostringstream breaths;
  breaths << "time_s,kcal_per_min\n";
  for (const imaging::BreathSample& b : session.breaths)
    breaths << format_double(b.time_s) << ',' << format_double(b.kcal_per_min) << '\n';
  binary::write_file_atomic(dir / "breaths.csv", breaths.str());

  json m = {{"session_id", session.id},
            {"subject_id", session.subject.id},
            {"weight_kg", session.subject.weight_kg},
            {"frame_count", session.frame_count},
            {"frame_rate", imaging::kFrameRateHz},
            {"rgb", "rgb"},
            {"depth", "depth"},
            {"labels", "labels.csv"},
            {"breaths", "breaths.csv"}};
  if (!session.boxes.empty()) {
    std::ostringstream boxes;
    boxes << "frame,x,y,w,h\n";
    for (std::size_t i = 0; i < session.boxes.size(); ++i)
      if (const auto& b = session.boxes[i]) boxes << i << ',' << b->x << ',' << b->y << ',' << b->w << ',' << b->h << '\n';
    binary::write_file_atomic(dir / "boxes.csv", boxes.str());
    m["boxes"] = "boxes.csv";
  }
  if (write_flow) m["flow"] = "flow";
  binary::write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace calorie
