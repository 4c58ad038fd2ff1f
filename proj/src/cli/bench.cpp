#include "linext/cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "linext/core/error.hpp"
#include "linext/core/kitti_io.hpp"
#include "linext/pipeline/complete.hpp"

namespace linext::cli {

namespace fs = std::filesystem;

void to_json(nlohmann::json& j, const BenchReport& r) {
  j = nlohmann::json{{"warmup", r.warmup},
                     {"timed", r.timed},
                     {"latencies", r.latencies},
                     {"mean", r.mean},
                     {"std", r.stddev},
                     {"parameter_count", r.parameter_count},
                     {"timed_frames", r.timed_frames}};
}

std::vector<std::string> list_frames(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".bin") out.push_back(e.path().string());
  }
  if (ec) throw IoError("cannot list " + dir + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

BenchReport bench_runtime(const std::string& dir, const FrameModel& model, std::size_t warmup, std::size_t timed,
                          std::size_t parameter_count) {
  if (timed == 0) throw ValidationError("bench: at least one timed frame is required");
  const auto frames = list_frames(dir);
  if (frames.size() < warmup + timed) {
    throw ValidationError("bench: " + dir + " holds " + std::to_string(frames.size()) + " frames, " +
                          std::to_string(warmup + timed) + " needed");
  }
  BenchReport r;
  r.warmup = warmup;
  r.timed = timed;
  r.parameter_count = parameter_count;
  for (std::size_t i = 0; i < warmup; ++i) model(read_kitti_bin(frames[i]));
  for (std::size_t i = warmup; i < warmup + timed; ++i) {
    const PointCloud scan = read_kitti_bin(frames[i]);
    const auto start = std::chrono::steady_clock::now();
    model(scan);
    r.latencies.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    r.timed_frames.push_back(fs::path(frames[i]).filename().string());
  }
  double sum = 0.0;
  for (double t : r.latencies) sum += t;
  r.mean = sum / static_cast<double>(timed);
  double var = 0.0;
  for (double t : r.latencies) var += (t - r.mean) * (t - r.mean);
  r.stddev = std::sqrt(var / static_cast<double>(timed));
  return r;
}

BenchReport bench_runtime(const std::string& dir, const Checkpoint& ckpt, const RunConfig& cfg, bool refine,
                          std::uint64_t seed, std::size_t warmup, std::size_t timed) {
  const auto model = pipeline::Model::from_checkpoint(ckpt, cfg);
  pipeline::CompleteOptions opts;
  opts.refine = refine;
  opts.seed = seed;
  return bench_runtime(
      dir, [&](const PointCloud& scan) { return pipeline::complete(scan, model, opts); }, warmup, timed,
      parameter_count(ckpt.params));
}

}  // namespace linext::cli
