#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "calorie/binary.hpp"
#include "calorie/encode.hpp"
#include "calorie/error.hpp"
#include "calorie/log.hpp"

namespace calorie::encode {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kMagic = "CALCACHE";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kRawKind = 1;
constexpr std::uint32_t kMatrixKind = 2;

/// Exclusive advisory lock on `<path>.lock` for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const std::string lock = path.string() + ".lock";
    fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ >= 0) ::flock(fd_, LOCK_EX);
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

void put_header(binary::Writer& w, std::uint32_t kind, std::uint64_t hash, std::uint64_t rows, std::uint64_t cols_a,
                std::uint64_t cols_b) {
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(kind);
  w.put<std::uint64_t>(hash);
  w.put<std::uint64_t>(rows);
  w.put<std::uint64_t>(cols_a);
  w.put<std::uint64_t>(cols_b);
}

struct Header {
  std::uint64_t rows = 0;
  std::uint64_t cols_a = 0;
  std::uint64_t cols_b = 0;
};

/// nullopt on hash or kind mismatch; throws on corruption.
std::optional<Header> get_header(binary::Reader& r, std::uint32_t kind, std::uint64_t hash, const fs::path& path) {
  if (r.get_string(kMagic.size()) != kMagic) throw DataError(path.string() + ": not a feature cache");
  if (r.get<std::uint32_t>() != kVersion) return std::nullopt;
  if (r.get<std::uint32_t>() != kind) return std::nullopt;
  if (r.get<std::uint64_t>() != hash) return std::nullopt;
  Header h{r.get<std::uint64_t>(), r.get<std::uint64_t>(), r.get<std::uint64_t>()};
  const std::uint64_t cells = h.rows * (h.cols_a + h.cols_b);
  if (h.rows > (1ULL << 32) || cells * 8 + h.rows > r.remaining()) throw DataError(path.string() + ": truncated cache");
  return h;
}

}  // namespace

void save_raw_cache(const fs::path& path, const RawFeatures& raw, std::uint64_t hash) {
  binary::Writer w;
  put_header(w, kRawKind, hash, raw.frames(), static_cast<std::uint64_t>(raw.flow.cols()),
             static_cast<std::uint64_t>(raw.hog.cols()));
  for (const std::uint8_t v : raw.valid) w.put<std::uint8_t>(v);
  for (Eigen::Index i = 0; i < raw.flow.size(); ++i) w.put<double>(raw.flow.data()[i]);
  for (Eigen::Index i = 0; i < raw.hog.size(); ++i) w.put<double>(raw.hog.data()[i]);
  FileLock lock(path);
  binary::write_file_atomic(path, w.bytes());
}

std::optional<RawFeatures> load_raw_cache(const fs::path& path, std::uint64_t hash) {
  if (!fs::exists(path)) return std::nullopt;
  const auto bytes = binary::read_file(path);
  binary::Reader r(bytes, path.string());
  const auto h = get_header(r, kRawKind, hash, path);
  if (!h) return std::nullopt;
  RawFeatures raw;
  const auto rows = static_cast<Eigen::Index>(h->rows);
  raw.valid.resize(h->rows);
  for (std::uint8_t& v : raw.valid) v = r.get<std::uint8_t>();
  raw.flow.resize(rows, static_cast<Eigen::Index>(h->cols_a));
  raw.hog.resize(rows, static_cast<Eigen::Index>(h->cols_b));
  for (Eigen::Index i = 0; i < raw.flow.size(); ++i) raw.flow.data()[i] = r.get<double>();
  for (Eigen::Index i = 0; i < raw.hog.size(); ++i) raw.hog.data()[i] = static_cast<float>(r.get<double>());
  if (!r.done()) throw DataError(path.string() + ": trailing bytes in cache");
  return raw;
}

void save_matrix_cache(const fs::path& path, const DoubleRows& m, std::span<const std::uint8_t> valid,
                       std::uint64_t hash) {
  require(valid.size() == static_cast<std::size_t>(m.rows()), "save_matrix_cache: valid flag count mismatch");
  binary::Writer w;
  put_header(w, kMatrixKind, hash, static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()), 0);
  for (const std::uint8_t v : valid) w.put<std::uint8_t>(v);
  for (Eigen::Index i = 0; i < m.size(); ++i) w.put<double>(m.data()[i]);
  FileLock lock(path);
  binary::write_file_atomic(path, w.bytes());
}

std::optional<DoubleRows> load_matrix_cache(const fs::path& path, std::uint64_t hash, std::vector<std::uint8_t>* valid) {
  if (!fs::exists(path)) return std::nullopt;
  const auto bytes = binary::read_file(path);
  binary::Reader r(bytes, path.string());
  const auto h = get_header(r, kMatrixKind, hash, path);
  if (!h) return std::nullopt;
  std::vector<std::uint8_t> flags(h->rows);
  for (std::uint8_t& v : flags) v = r.get<std::uint8_t>();
  DoubleRows m(static_cast<Eigen::Index>(h->rows), static_cast<Eigen::Index>(h->cols_a));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.get<double>();
  if (!r.done()) throw DataError(path.string() + ": trailing bytes in cache");
  if (valid) *valid = std::move(flags);
  return m;
}

RawFeatures cached_raw(const Session& session, const FeatureConfig& cfg, const fs::path& cache_dir) {
  if (cache_dir.empty()) return extract_raw(session, cfg);
  const std::uint64_t hash = cfg.hash();
  const fs::path path = cache_dir / (session.id + ".raw");
  if (auto hit = load_raw_cache(path, hash)) {
    if (hit->frames() == session.frame_count) return std::move(*hit);
    log::warn(path.string() + ": cached frame count differs; rebuilding");
  }
  RawFeatures raw = extract_raw(session, cfg);
  save_raw_cache(path, raw, hash);
  return raw;
}

std::uint64_t pca_hash(const features::PcaModel& pca) {
  binary::Writer w;
  w.put<std::uint64_t>(pca.dim());
  w.put<std::uint64_t>(pca.k());
  w.put<std::uint8_t>(pca.degenerate);
  for (Eigen::Index i = 0; i < pca.mean.size(); ++i) w.put<double>(pca.mean(i));
  for (Eigen::Index r = 0; r < pca.basis.rows(); ++r)
    for (Eigen::Index c = 0; c < pca.basis.cols(); ++c) w.put<double>(pca.basis(r, c));
  return binary::fnv1a(w.bytes());
}

DoubleRows extract_features(const Session& session, const FeatureConfig& cfg, const features::PcaModel& pca,
                            const fs::path& cache_dir, std::vector<std::uint8_t>* valid) {
  const std::uint64_t hash = binary::fnv1a(std::to_string(pca_hash(pca)), cfg.hash());
  const fs::path path = cache_dir.empty() ? fs::path{} : cache_dir / (session.id + ".desc");
  if (!cache_dir.empty())
    if (auto hit = load_matrix_cache(path, hash, valid); hit && static_cast<std::size_t>(hit->rows()) == session.frame_count)
      return std::move(*hit);
  const RawFeatures raw = cached_raw(session, cfg, cache_dir);
  DoubleRows out = descriptors(raw, pca);
  if (!cache_dir.empty()) save_matrix_cache(path, out, raw.valid, hash);
  if (valid) *valid = raw.valid;
  return out;
}

}  // namespace calorie::encode
