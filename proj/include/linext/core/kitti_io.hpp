#pragma once

#include <string>

#include "linext/core/types.hpp"

namespace linext {

/// Reads a Velodyne scan stored as packed little-endian float32 (x, y, z, intensity)
/// records. Intensity is dropped; point order follows the file.
PointCloud read_kitti_bin(const std::string& path);

/// Writes the inverse format with intensity 0. The file is replaced atomically.
void write_kitti_bin(const PointCloud& cloud, const std::string& path);

}  // namespace linext
