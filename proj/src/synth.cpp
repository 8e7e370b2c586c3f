#include "calorie/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "calorie/error.hpp"

namespace calorie::synth {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBlendSeconds = 1.0;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

Vec2 rotate(Vec2 v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

struct Pose {
  Vec2 hip;
  double tilt = 0.0;  // torso angle from vertical
  std::array<double, 2> arm{};  // relative to the body's down direction
  std::array<double, 2> leg{};
};

Pose lerp(const Pose& a, const Pose& b, double s) {
  Pose p;
  p.hip = a.hip + s * (b.hip - a.hip);
  p.tilt = a.tilt + s * (b.tilt - a.tilt);
  for (int k = 0; k < 2; ++k) {
    p.arm[k] = a.arm[k] + s * (b.arm[k] - a.arm[k]);
    p.leg[k] = a.leg[k] + s * (b.leg[k] - a.leg[k]);
  }
  return p;
}

struct Build {
  double torso_len = 15.0;
  double torso_half = 4.0;
  double head_r = 4.0;
  double arm_len = 13.0;
  double arm_half = 1.6;
  double leg_len = 17.0;
  double leg_half = 2.1;
};

Build build_for(double weight_kg) {
  const double k = std::clamp((weight_kg - 50.0) / 50.0, -0.5, 1.5);
  Build b;
  b.torso_half = 3.0 + 2.6 * k;
  b.arm_half = 1.4 + 0.7 * k;
  b.leg_half = 1.8 + 0.9 * k;
  return b;
}

struct Motion {
  double tempo = 1.0;
  double amp = 1.0;
  double cx = 40.0;
};

double tri(double x) {
  const double f = x - std::floor(x);
  return f < 0.5 ? 4.0 * f - 1.0 : 3.0 - 4.0 * f;
}

Pose program(int activity, double T, const Motion& m) {
  const double f = m.tempo, A = m.amp;
  const auto wave = [&](double hz, double phase = 0.0) { return std::sin(2.0 * kPi * hz * f * T + phase); };
  Pose p;
  p.hip = {m.cx, 42.0};
  switch (activity) {
    case 0:  // stand
      p.hip.x += 0.6 * std::sin(2.0 * kPi * 0.1 * T);
      p.tilt = 0.02 * std::sin(2.0 * kPi * 0.13 * T);
      p.arm = {0.12, -0.12};
      p.leg = {0.06, -0.06};
      break;
    case 1:  // sit
      p.hip.y = 47.0;
      p.tilt = 0.05 + 0.01 * std::sin(2.0 * kPi * 0.2 * T);
      p.arm = {0.25, 0.35};
      p.leg = {1.35, 1.35};
      break;
    case 2: {  // walk
      p.hip.x += 18.0 * tri(T / 12.0);
      const double s = wave(0.9);
      p.hip.y -= 0.8 * std::abs(s);
      p.arm = {-0.35 * A * s, 0.35 * A * s};
      p.leg = {0.45 * A * s, -0.45 * A * s};
      break;
    }
    case 3:  // wipe
      p.tilt = 0.1;
      p.hip.x += 0.8 * A * wave(0.7, 1.0);
      p.arm = {1.3 + 0.35 * A * wave(0.7), -0.15};
      p.leg = {0.08, -0.08};
      break;
    case 4: {  // vacuum
      const double s = wave(0.45);
      p.tilt = 0.22;
      p.hip.x += 4.0 * A * s;
      p.arm = {0.8 + 0.3 * A * s, 0.8 + 0.3 * A * s};
      p.leg = {0.25 + 0.1 * A * s, -0.15};
      break;
    }
    case 5: {  // sweep
      const double s = wave(0.6);
      p.tilt = 0.3 + 0.05 * s;
      p.hip.x += 3.0 * std::sin(2.0 * kPi * 0.05 * T);
      p.arm = {0.45 + 0.5 * A * s, 0.45 + 0.5 * A * s};
      p.leg = {0.15, -0.15};
      break;
    }
    case 6:  // lying
      p.hip = {m.cx - 8.0, 55.0};
      p.tilt = kPi / 2.0 + 0.01 * std::sin(2.0 * kPi * 0.25 * T);
      p.arm = {0.15, 0.1};
      p.leg = {0.03, -0.03};
      break;
    case 7: {  // exercise: jumping jacks
      const double s = 0.5 - 0.5 * std::cos(2.0 * kPi * 0.9 * f * T);
      p.hip.y -= 2.5 * A * std::abs(wave(0.9));
      p.arm = {0.25 + 2.3 * A * s, -(0.25 + 2.3 * A * s)};
      p.leg = {0.05 + 0.35 * A * s, -(0.05 + 0.35 * A * s)};
      break;
    }
    case 8: {  // stretch
      const double s = 0.5 - 0.5 * std::cos(2.0 * kPi * 0.12 * f * T);
      p.tilt = 0.35 * A * wave(0.06);
      p.arm = {0.2 + 2.6 * A * s, -(0.2 + 2.6 * A * s)};
      p.leg = {0.2, -0.2};
      break;
    }
    case 9: {  // clean
      const double s = wave(0.5);
      p.tilt = 0.15 * std::sin(2.0 * kPi * 0.1 * T);
      p.hip.x += 6.0 * std::sin(2.0 * kPi * 0.04 * T);
      p.arm = {1.6 + 0.6 * A * s, -(0.6 + 0.3 * A * wave(0.5, 1.0))};
      p.leg = {0.1, -0.1};
      break;
    }
    case 10: {  // read
      const double turn = std::pow(std::max(0.0, wave(0.1)), 6.0);
      p.hip.y = 47.0;
      p.tilt = 0.08;
      p.arm = {1.1, 1.0 + 0.35 * A * turn};
      p.leg = {1.35, 1.35};
      break;
    }
    default:
      throw Error("synth: unknown activity");
  }
  return p;
}

struct Part {
  Vec2 a;
  Vec2 b;
  double r = 1.0;
  double depth_offset = 0.0;
  double albedo = 128.0;
  double phase = 0.0;
};

constexpr int kParts = 6;

std::array<Part, kParts> parts_for(const Pose& p, const Build& b, double phase) {
  const Vec2 up{std::sin(p.tilt), -std::cos(p.tilt)};
  const Vec2 down{-up.x, -up.y};
  const Vec2 shoulder = p.hip + b.torso_len * up;
  const Vec2 head = shoulder + (b.head_r + 1.0) * up;
  std::array<Part, kParts> parts;
  // Arms first: they are nearest to the camera.
  for (int k = 0; k < 2; ++k) {
    const Vec2 dir = rotate(down, p.arm[k]);
    parts[k] = {shoulder, shoulder + b.arm_len * dir, b.arm_half, -60.0, 150.0 + 20.0 * k, phase + k};
  }
  parts[2] = {p.hip, shoulder, b.torso_half, 0.0, 120.0, phase + 2.0};
  parts[3] = {head, head, b.head_r, -10.0, 170.0, phase + 3.0};
  for (int k = 0; k < 2; ++k) {
    const Vec2 dir = rotate(down, p.leg[k]);
    parts[4 + k] = {p.hip, p.hip + b.leg_len * dir, b.leg_half, 20.0, 95.0 + 15.0 * k, phase + 4.0 + k};
  }
  return parts;
}

/// Local (along, perp) coordinates of q relative to a part, and whether q is inside.
struct Local {
  double along = 0.0;
  double perp = 0.0;
  bool inside = false;
};

Local locate(const Part& part, Vec2 q) {
  const Vec2 ab = part.b - part.a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  const Vec2 aq = q - part.a;
  Local out;
  if (len2 < 1e-12) {
    out.along = aq.x;
    out.perp = aq.y;
    out.inside = aq.x * aq.x + aq.y * aq.y <= part.r * part.r;
    return out;
  }
  const double len = std::sqrt(len2);
  const Vec2 dir = (1.0 / len) * ab;
  out.along = aq.x * dir.x + aq.y * dir.y;
  out.perp = aq.x * -dir.y + aq.y * dir.x;
  const double t = std::clamp(out.along, 0.0, len);
  const Vec2 closest = part.a + t * dir;
  const Vec2 d = q - closest;
  out.inside = d.x * d.x + d.y * d.y <= part.r * part.r;
  return out;
}

Vec2 place(const Part& part, const Local& local) {
  const Vec2 ab = part.b - part.a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 < 1e-12) return part.a + Vec2{local.along, local.perp};
  const double len = std::sqrt(len2);
  const Vec2 dir = (1.0 / len) * ab;
  return part.a + local.along * dir + local.perp * Vec2{-dir.y, dir.x};
}

/// Index of the nearest part covering q, or -1.
int cover(const std::array<Part, kParts>& parts, Vec2 q, Local* local) {
  int best = -1;
  double best_depth = 0.0;
  for (int k = 0; k < kParts; ++k) {
    const Local l = locate(parts[k], q);
    if (!l.inside) continue;
    if (best < 0 || parts[k].depth_offset < best_depth) {
      best = k;
      best_depth = parts[k].depth_offset;
      if (local) *local = l;
    }
  }
  return best;
}

/// Pixel rectangle that contains every part, clipped to the frame.
struct Extent {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  bool contains(std::size_t c, std::size_t r) const {
    const int ci = static_cast<int>(c), ri = static_cast<int>(r);
    return ci >= x0 && ci <= x1 && ri >= y0 && ri <= y1;
  }
};

Extent extent(const std::array<Part, kParts>& parts, int width, int height) {
  double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
  for (const Part& p : parts)
    for (const Vec2 v : {p.a, p.b}) {
      x0 = std::min(x0, v.x - p.r);
      x1 = std::max(x1, v.x + p.r);
      y0 = std::min(y0, v.y - p.r);
      y1 = std::max(y1, v.y + p.r);
    }
  return {std::max(0, static_cast<int>(std::floor(x0))), std::max(0, static_cast<int>(std::floor(y0))),
          std::min(width - 1, static_cast<int>(std::ceil(x1))), std::min(height - 1, static_cast<int>(std::ceil(y1)))};
}

/// Zero-mean, unit-variance noise from 64 hash bits (sum of four uniforms).
double unit_noise(std::uint64_t h) {
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) sum += static_cast<double>((h >> (16 * k)) & 0xffff) / 65535.0;
  return (sum - 2.0) * std::sqrt(3.0);
}

class SyntheticSource final : public FrameSource {
 public:
  SyntheticSource(std::uint64_t seed, std::vector<ScriptStep> script, SynthSubject subject, SynthParams params)
      : seed_(seed), script_(std::move(script)), subject_(subject), params_(params) {
    std::mt19937_64 rng(mix(seed_ ^ 0x5e551011ULL));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    motion_.tempo = 1.0 + params_.tempo_gain * subject_.eta;
    motion_.amp = 1.0 + params_.amplitude_gain * subject_.eta;
    motion_.cx = params_.width / 2.0 + (u(rng) - 0.5) * 10.0;
    person_depth_ = 2300.0 + 400.0 * u(rng);
    phase_ = 2.0 * kPi * u(rng);
    build_ = build_for(subject_.subject.weight_kg);
    double t = 0.0;
    for (const ScriptStep& s : script_) {
      starts_.push_back(t);
      t += s.duration_s;
    }
    duration_ = t;
    frames_ = static_cast<std::size_t>(std::llround(duration_ * imaging::kFrameRateHz));
    for (int r = 0; r < params_.height; ++r)
      for (int c = 0; c < params_.width; ++c) {
        background_intensity_.push_back(90.0 + 30.0 * std::sin(2.0 * kPi * c / 13.0) * std::sin(2.0 * kPi * r / 11.0));
        background_depth_.push_back(4000.0 + 4.0 * (r - params_.height / 2.0));
      }
  }

  std::size_t frame_count() const override { return frames_; }

  imaging::FrameBundle frame(std::size_t index) const override {
    require(index < frames_, "synth: frame index out of range");
    const std::size_t rows = static_cast<std::size_t>(params_.height);
    const std::size_t cols = static_cast<std::size_t>(params_.width);
    const auto parts = parts_for(pose_at(imaging::frame_time(index)), build_, phase_);
    const Extent ext = extent(parts, params_.width, params_.height);
    const std::uint64_t frame_key = mix(seed_ ^ mix(index + 1));

    imaging::FrameBundle f;
    f.index = index;
    f.time_s = imaging::frame_time(index);
    f.rgb = RgbImage(rows, cols);
    f.depth = DepthImage(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t px = r * cols + c;
        const Vec2 q{static_cast<double>(c), static_cast<double>(r)};
        Local local;
        const int k = ext.contains(c, r) ? cover(parts, q, &local) : -1;
        double intensity, depth;
        int tint = -1;
        if (k < 0) {
          intensity = background_intensity_[px];
          depth = background_depth_[px];
        } else {
          const Part& p = parts[static_cast<std::size_t>(k)];
          intensity = p.albedo + 45.0 * std::sin(2.0 * kPi * local.along / 5.0 + p.phase) *
                                     std::cos(2.0 * kPi * local.perp / 4.0);
          depth = person_depth_ + p.depth_offset;
          tint = k % 3;
        }
        const std::uint64_t h = mix(frame_key ^ px);
        intensity += params_.intensity_noise * unit_noise(h);
        depth += params_.depth_noise_mm * unit_noise(mix(h));
        const auto channel = [&](int which) {
          return static_cast<std::uint8_t>(std::clamp(std::lround(intensity + (which == tint ? 12.0 : 0.0)), 0L, 255L));
        };
        f.rgb(r, c) = {channel(0), channel(1), channel(2)};
        f.depth(r, c) = static_cast<std::uint16_t>(std::clamp(std::lround(depth), 1L, 65535L));
      }
    return f;
  }

  bool has_flow() const override { return true; }

  optflow::FlowField flow(std::size_t index) const override {
    require(index >= 1 && index < frames_, "synth: flow index out of range");
    const std::size_t rows = static_cast<std::size_t>(params_.height);
    const std::size_t cols = static_cast<std::size_t>(params_.width);
    const auto before = parts_for(pose_at(imaging::frame_time(index - 1)), build_, phase_);
    const auto after = parts_for(pose_at(imaging::frame_time(index)), build_, phase_);
    const Extent ext = extent(before, params_.width, params_.height);
    optflow::FlowField flow;
    flow.u = ScalarGrid(rows, cols);
    flow.v = ScalarGrid(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        if (!ext.contains(c, r)) continue;
        const Vec2 q{static_cast<double>(c), static_cast<double>(r)};
        Local local;
        const int k = cover(before, q, &local);
        if (k < 0) continue;
        const Vec2 moved = place(after[static_cast<std::size_t>(k)], local);
        flow.u(r, c) = moved.x - q.x;
        flow.v(r, c) = moved.y - q.y;
      }
    return flow;
  }

  /// Tight box of the covered pixels.
  std::optional<imaging::BoundingBox> box(std::size_t index) const {
    const auto parts = parts_for(pose_at(imaging::frame_time(index)), build_, phase_);
    const Extent ext = extent(parts, params_.width, params_.height);
    int x0 = params_.width, y0 = params_.height, x1 = -1, y1 = -1;
    for (int r = ext.y0; r <= ext.y1; ++r)
      for (int c = ext.x0; c <= ext.x1; ++c)
        if (cover(parts, {static_cast<double>(c), static_cast<double>(r)}, nullptr) >= 0) {
          x0 = std::min(x0, c);
          x1 = std::max(x1, c);
          y0 = std::min(y0, r);
          y1 = std::max(y1, r);
        }
    if (x1 < 0) return std::nullopt;
    return imaging::BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  }

  const std::vector<double>& starts() const { return starts_; }

 private:
  Pose pose_at(double t) const {
    std::size_t k = static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), t) - starts_.begin());
    k = k == 0 ? 0 : k - 1;
    const Pose current = program(script_[k].activity, t, motion_);
    const double since = t - starts_[k];
    if (k == 0 || since >= kBlendSeconds) return current;
    const double s = since / kBlendSeconds;
    return lerp(program(script_[k - 1].activity, t, motion_), current, s * s * (3.0 - 2.0 * s));
  }

  std::uint64_t seed_;
  std::vector<ScriptStep> script_;
  SynthSubject subject_;
  SynthParams params_;
  Motion motion_;
  Build build_;
  double person_depth_ = 2500.0;
  double phase_ = 0.0;
  std::vector<double> starts_;
  std::vector<double> background_intensity_;
  std::vector<double> background_depth_;
  double duration_ = 0.0;
  std::size_t frames_ = 0;
};

}  // namespace

double plateau_rate(const SynthSubject& subject, int activity_id) {
  return met_rate(subject.subject.weight_kg, activity(activity_id).met) * (1.0 + subject.eta);
}

double ground_truth_rate(const SynthSubject& subject, std::span<const ScriptStep> script, double t,
                         const SynthParams& params) {
  require(!script.empty(), "synth: empty script");
  double rate = met_rate(subject.subject.weight_kg, params.rest_met);
  double start = 0.0;
  for (const ScriptStep& step : script) {
    const double target = plateau_rate(subject, step.activity);
    const double end = start + step.duration_s;
    const double dt = std::min(t, end) - start;
    rate = target + (rate - target) * std::exp(-dt / params.tau_s);
    if (t <= end) return rate;
    start = end;
  }
  return rate;
}

Session synth_session(std::uint64_t seed, std::span<const ScriptStep> script, const SynthSubject& subject,
                      const SynthParams& params, std::string id) {
  if (script.empty()) throw Error("synth: empty script");
  for (const ScriptStep& s : script) {
    if (!valid_activity(s.activity)) throw Error("synth: unknown activity id " + std::to_string(s.activity));
    if (!(s.duration_s >= 30.0)) throw Error("synth: script steps must last at least 30 s");
  }
  require(subject.subject.weight_kg > 0.0, "synth: weight must be positive");
  require(params.width >= 32 && params.height >= 32, "synth: frame too small");

  auto source = std::make_shared<SyntheticSource>(seed, std::vector<ScriptStep>(script.begin(), script.end()),
                                                  subject, params);
  Session s;
  s.id = id.empty() ? "synth_" + std::to_string(seed) : std::move(id);
  s.subject = subject.subject;
  s.frame_count = source->frame_count();

  s.boxes.reserve(s.frame_count);
  for (std::size_t i = 0; i < s.frame_count; ++i) s.boxes.push_back(source->box(i));

  std::size_t begin = 0;
  for (std::size_t k = 0; k < script.size(); ++k) {
    const std::size_t end = k + 1 == script.size()
                                ? s.frame_count
                                : static_cast<std::size_t>(std::llround(source->starts()[k + 1] * imaging::kFrameRateHz));
    if (end > begin) s.labels.push_back({begin, end - 1, script[k].activity});
    begin = end;
  }

  std::mt19937_64 rng(mix(seed ^ 0xb4ea7115ULL));
  std::normal_distribution<double> noise(0.0, params.breath_noise);
  const double duration = static_cast<double>(s.frame_count) / imaging::kFrameRateHz;
  for (double t = 0.0; t <= duration + 1e-9; t += params.breath_interval_s) {
    const double rate = ground_truth_rate(subject, script, t, params);
    s.breaths.push_back({t, std::max(0.0, rate * (1.0 + noise(rng)))});
  }
  s.frames = std::move(source);
  return s;
}

std::vector<SynthSubject> corpus_subjects(const CorpusSpec& spec) {
  require(spec.subjects >= 1, "synth: need at least one subject");
  std::mt19937_64 rng(mix(spec.seed ^ 0x50b1ec75ULL));
  std::uniform_real_distribution<double> weight(spec.min_weight_kg, spec.max_weight_kg);
  std::uniform_real_distribution<double> eta(-spec.eta_range, spec.eta_range);
  std::vector<SynthSubject> out;
  for (int i = 0; i < spec.subjects; ++i) {
    SynthSubject s;
    s.subject.id = i + 1;
    s.subject.weight_kg = std::round(weight(rng) * 10.0) / 10.0;
    s.eta = eta(rng);
    out.push_back(s);
  }
  return out;
}

std::vector<ScriptStep> corpus_script(const CorpusSpec& spec, int subject_index, int session_index) {
  require(spec.activities_per_script >= 1 && spec.activities_per_script <= kActivityCount,
          "synth: activities per script out of range");
  std::mt19937_64 rng(mix(spec.seed ^ mix(static_cast<std::uint64_t>(subject_index) * 131 +
                                          static_cast<std::uint64_t>(session_index) + 7)));
  std::vector<int> ids(kActivityCount);
  for (int a = 0; a < kActivityCount; ++a) ids[static_cast<std::size_t>(a)] = a;
  for (std::size_t k = ids.size(); k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(ids[k - 1], ids[pick(rng)]);
  }
  std::vector<ScriptStep> script;
  for (int k = 0; k < spec.activities_per_script; ++k)
    script.push_back({ids[static_cast<std::size_t>(k)], spec.seconds_per_activity});
  return script;
}

std::vector<Session> synth_corpus(const CorpusSpec& spec) {
  require(spec.sessions_per_subject >= 1, "synth: need at least one session per subject");
  const std::vector<SynthSubject> subjects = corpus_subjects(spec);
  std::vector<Session> sessions;
  for (int i = 0; i < spec.subjects; ++i)
    for (int j = 0; j < spec.sessions_per_subject; ++j) {
      char id[32];
      std::snprintf(id, sizeof id, "s%02d_r%d", subjects[static_cast<std::size_t>(i)].subject.id, j + 1);
      const std::uint64_t seed = mix(spec.seed ^ mix(static_cast<std::uint64_t>(i) * 977 + static_cast<std::uint64_t>(j)));
      sessions.push_back(synth_session(seed, spec.script.empty() ? corpus_script(spec, i, j) : spec.script, subjects[static_cast<std::size_t>(i)],
                                       spec.params, id));
    }
  return sessions;
}

}  // namespace calorie::synth
