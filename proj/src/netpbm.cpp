#include <cctype>
#include <string>

#include "calorie/error.hpp"
#include "calorie/session.hpp"

namespace calorie {
namespace {

class HeaderParser {
 public:
  HeaderParser(std::span<const std::uint8_t> bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::string magic() {
    if (bytes_.size() < 2) fail("truncated header");
    pos_ = 2;
    return std::string(bytes_.begin(), bytes_.begin() + 2);
  }

  std::size_t number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_++] - '0');
      if (++digits > 9) fail("header number too large");
    }
    if (digits == 0) fail("malformed header");
    return value;
  }

  std::size_t data_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("malformed header");
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& what) const { throw DataError(source_ + ": " + what); }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> header(const char* magic, std::size_t cols, std::size_t rows, int maxval) {
  const std::string h = std::string(magic) + "\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n" +
                        std::to_string(maxval) + "\n";
  return {h.begin(), h.end()};
}

}  // namespace

std::vector<std::uint8_t> encode_ppm(const RgbImage& image) {
  std::vector<std::uint8_t> out = header("P6", image.cols(), image.rows(), 255);
  out.reserve(out.size() + image.size() * 3);
  for (const Rgb& p : image.values()) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

RgbImage decode_ppm(std::span<const std::uint8_t> bytes, const std::string& source) {
  HeaderParser parser(bytes, source);
  if (parser.magic() != "P6") parser.fail("not a binary PPM (P6)");
  const std::size_t cols = parser.number();
  const std::size_t rows = parser.number();
  const std::size_t maxval = parser.number();
  if (maxval != 255) parser.fail("unsupported maxval " + std::to_string(maxval));
  const std::size_t offset = parser.data_offset();
  if (bytes.size() - offset != rows * cols * 3) parser.fail("pixel data size mismatch");
  RgbImage image(rows, cols);
  std::size_t k = offset;
  for (Rgb& p : image.values()) {
    p.r = bytes[k++];
    p.g = bytes[k++];
    p.b = bytes[k++];
  }
  return image;
}

std::vector<std::uint8_t> encode_pgm16(const DepthImage& image) {
  std::vector<std::uint8_t> out = header("P5", image.cols(), image.rows(), 65535);
  out.reserve(out.size() + image.size() * 2);
  for (const std::uint16_t v : image.values()) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

DepthImage decode_pgm16(std::span<const std::uint8_t> bytes, const std::string& source) {
  HeaderParser parser(bytes, source);
  if (parser.magic() != "P5") parser.fail("not a binary PGM (P5)");
  const std::size_t cols = parser.number();
  const std::size_t rows = parser.number();
  const std::size_t maxval = parser.number();
  if (maxval != 65535) parser.fail("expected 16-bit PGM (maxval 65535), got " + std::to_string(maxval));
  const std::size_t offset = parser.data_offset();
  if (bytes.size() - offset != rows * cols * 2) parser.fail("pixel data size mismatch");
  DepthImage image(rows, cols);
  std::size_t k = offset;
  for (std::uint16_t& v : image.values()) {
    v = static_cast<std::uint16_t>((bytes[k] << 8) | bytes[k + 1]);
    k += 2;
  }
  return image;
}

}  // namespace calorie
