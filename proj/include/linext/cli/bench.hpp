#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "linext/core/checkpoint.hpp"
#include "linext/core/types.hpp"

namespace linext::cli {

struct BenchReport {
  std::size_t warmup = 0;
  std::size_t timed = 0;
  std::vector<double> latencies;  // seconds, one per timed frame
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t parameter_count = 0;
  std::vector<std::string> timed_frames;
};

void to_json(nlohmann::json& j, const BenchReport& r);

using FrameModel = std::function<PointCloud(const PointCloud&)>;

/// `.bin` scans of `dir` in lexicographic filename order.
std::vector<std::string> list_frames(const std::string& dir);

/// Runs `model` on the first `warmup` frames untimed, then times each of the
/// next `timed` frames on a monotonic clock. A frame is read from disk before
/// its timer starts.
BenchReport bench_runtime(const std::string& dir, const FrameModel& model, std::size_t warmup, std::size_t timed,
                          std::size_t parameter_count);

/// Same, with `complete` under the checkpoint as the model.
BenchReport bench_runtime(const std::string& dir, const Checkpoint& ckpt, const RunConfig& cfg, bool refine,
                          std::uint64_t seed, std::size_t warmup, std::size_t timed);

}  // namespace linext::cli
