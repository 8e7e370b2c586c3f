#include <cmath>

#include "calorie/binary.hpp"
#include "calorie/optflow.hpp"

namespace calorie::optflow {

std::vector<std::uint8_t> encode_flo(const FlowField& flow) {
  binary::Writer w;
  w.put(kFloMagic);
  w.put(static_cast<std::int32_t>(flow.cols()));
  w.put(static_cast<std::int32_t>(flow.rows()));
  for (std::size_t r = 0; r < flow.rows(); ++r)
    for (std::size_t c = 0; c < flow.cols(); ++c) {
      w.put(static_cast<float>(flow.u(r, c)));
      w.put(static_cast<float>(flow.v(r, c)));
    }
  return w.take();
}

FlowField decode_flo(const std::vector<std::uint8_t>& bytes) {
  binary::Reader in(bytes, ".flo");
  if (in.get<float>() != kFloMagic) throw DataError(".flo: bad magic number");
  const auto width = in.get<std::int32_t>();
  const auto height = in.get<std::int32_t>();
  if (width <= 0 || height <= 0) throw DataError(".flo: invalid dimensions");
  if (in.remaining() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 8)
    throw DataError(".flo: payload size does not match dimensions");
  FlowField flow(static_cast<std::size_t>(height), static_cast<std::size_t>(width));
  for (std::size_t r = 0; r < flow.rows(); ++r)
    for (std::size_t c = 0; c < flow.cols(); ++c) {
      const float u = in.get<float>();
      const float v = in.get<float>();
      if (!std::isfinite(u) || !std::isfinite(v)) throw DataError(".flo: non-finite flow value");
      flow.u(r, c) = u;
      flow.v(r, c) = v;
    }
  return flow;
}

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
  binary::write_file_atomic(path, encode_flo(flow));
}

FlowField read_flo(const std::filesystem::path& path) {
  try {
    return decode_flo(binary::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace calorie::optflow
