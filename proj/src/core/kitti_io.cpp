#include "linext/core/kitti_io.hpp"

#include <cmath>

#include "linext/core/error.hpp"
#include "linext/core/file_util.hpp"

namespace linext {

namespace {
constexpr std::size_t kRecordBytes = 4 * sizeof(float);
}

PointCloud read_kitti_bin(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() % kRecordBytes != 0) {
    throw FormatError(path + ": size " + std::to_string(bytes.size()) +
                      " is not a multiple of 16 bytes");
  }
  const std::size_t n = bytes.size() / kRecordBytes;
  std::vector<Point3> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const char* rec = bytes.data() + i * kRecordBytes;
    const float x = load_le<float>(rec);
    const float y = load_le<float>(rec + 4);
    const float z = load_le<float>(rec + 8);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw ValidationError(path + ": record " + std::to_string(i) + " has a non-finite coordinate");
    }
    pts[i] = {x, y, z};
  }
  return PointCloud(std::move(pts));
}

void write_kitti_bin(const PointCloud& cloud, const std::string& path) {
  cloud.validate();
  std::string out;
  out.reserve(cloud.size() * kRecordBytes);
  for (const auto& p : cloud) {
    append_le(out, static_cast<float>(p.x));
    append_le(out, static_cast<float>(p.y));
    append_le(out, static_cast<float>(p.z));
    append_le(out, 0.0f);
  }
  write_file_atomic(path, out);
}

}  // namespace linext
