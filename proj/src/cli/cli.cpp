#include "linext/cli/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "linext/cli/bench.hpp"
#include "linext/core/checkpoint.hpp"
#include "linext/core/downsample.hpp"
#include "linext/core/error.hpp"
#include "linext/core/file_util.hpp"
#include "linext/core/kitti_io.hpp"
#include "linext/core/synth.hpp"
#include "linext/dsr/dsr.hpp"
#include "linext/metrics/metrics.hpp"
#include "linext/pipeline/complete.hpp"
#include "linext/pipeline/train.hpp"
#include "linext/spatial/serialize.hpp"

namespace linext::cli {

namespace {

namespace fs = std::filesystem;

struct Args {
  std::string input, gt, output, checkpoint, config, report, csv, log;
  std::optional<std::uint64_t> seed;
  std::string curve = "z";
  std::optional<double> sigma;
  bool refine = false;
  bool merge = false;
  std::size_t warmup = 5;
  std::size_t timed = 100;
};

nlohmann::json read_json(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

RunConfig base_config(const Args& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

/// The checkpoint's own config unless --config names another one, which must
/// then describe the same architecture.
RunConfig checkpoint_config(const Args& a, const Checkpoint& ckpt) {
  RunConfig cfg = a.config.empty() ? ckpt.config : load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

bool inside(const Point3& p, const Bounds& b) {
  return p.x >= b.min.x && p.x <= b.max.x && p.y >= b.min.y && p.y <= b.max.y && p.z >= b.min.z && p.z <= b.max.z;
}

/// A single scan pair, or two directories whose .bin files pair up by name.
std::vector<pipeline::Scene> load_scenes(const Args& a, const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (fs::is_directory(a.input)) {
    if (!fs::is_directory(a.gt)) throw ValidationError("--gt must be a directory when --input is one");
    for (const auto& f : list_frames(a.input)) {
      const auto g = (fs::path(a.gt) / fs::path(f).filename()).string();
      if (!fs::exists(g)) throw IoError("missing ground truth " + g);
      pairs.emplace_back(f, g);
    }
  } else {
    pairs.emplace_back(a.input, a.gt);
  }
  std::vector<pipeline::Scene> scenes;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pipeline::Scene s{read_kitti_bin(pairs[i].first), read_kitti_bin(pairs[i].second)};
    // crop to the scene bounds first, downsample last
    PointCloud kept;
    for (const auto& p : s.gt) {
      if (inside(p, cfg.scene_bounds)) kept.push_back(p);
    }
    if (kept.empty()) throw ValidationError(pairs[i].second + ": no ground-truth point inside the scene bounds");
    s.gt = voxel_downsample(kept, cfg.gt_target, derive_seed(cfg.seed, i));
    scenes.push_back(std::move(s));
  }
  return scenes;
}

int cmd_synth(const Args& a) {
  SceneSpec spec = SceneSpec::default_street();
  if (!a.input.empty()) {
    try {
      spec = read_json(a.input).get<SceneSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed scene description: ") + e.what());
    }
  }
  spec.validate();
  const auto scene = synth_scene(spec, a.seed.value_or(0));
  write_kitti_bin(scene.input, a.output);
  if (!a.gt.empty()) write_kitti_bin(scene.gt, a.gt);
  return 0;
}

int cmd_dsr(const Args& a) {
  const RunConfig cfg = base_config(a);
  const double sigma = a.sigma.value_or(cfg.noise_sigma);
  if (!(sigma >= 0.0)) throw ValidationError("--sigma must be >= 0");
  const PointCloud in = read_kitti_bin(a.input);
  const auto plan = dsr::dsr_plan(in, cfg.repeat_counts);
  write_kitti_bin(dsr::dsr_apply(in, plan, sigma, cfg.seed), a.output);
  return 0;
}

int cmd_serialize(const Args& a) {
  const RunConfig cfg = base_config(a);
  const auto curve = spatial::parse_curve(a.curve);
  const PointCloud in = read_kitti_bin(a.input);
  if (in.empty()) throw ValidationError("serialize: empty cloud");
  const auto code = spatial::serialize(in, curve, cfg.serial_bits, spatial::serial_bounds(in), cfg.seed);
  write_json(a.output, {{"curve", spatial::to_string(code.curve)},
                        {"bits", code.bits},
                        {"order", code.order},
                        {"codes", code.codes}});
  return 0;
}

int cmd_train(const Args& a, pipeline::Stage stage, std::ostream& err) {
  std::optional<Checkpoint> ckpt;
  RunConfig cfg;
  if (stage == pipeline::Stage::Refine) {
    ckpt = load_checkpoint(a.checkpoint);
    cfg = checkpoint_config(a, *ckpt);
  } else {
    cfg = base_config(a);
  }
  const auto scenes = load_scenes(a, cfg);
  pipeline::Model model = ckpt ? pipeline::Model::from_checkpoint(*ckpt, cfg) : pipeline::Model(cfg, cfg.seed);

  std::ofstream log_file;
  pipeline::TrainOptions opts;
  opts.checkpoint_path = stage == pipeline::Stage::Refine && !a.output.empty() ? a.output : a.checkpoint;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::trunc);
    if (!log_file) throw IoError("cannot open log " + a.log);
    opts.log = &log_file;
  } else {
    opts.log = &err;
  }
  const auto result = pipeline::train_stage(model, stage, scenes, opts);
  if (result.losses.empty()) save_checkpoint(model.params().to_table(), cfg, opts.checkpoint_path);
  return 0;
}

int cmd_complete(const Args& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const RunConfig cfg = checkpoint_config(a, ckpt);
  const PointCloud in = read_kitti_bin(a.input);
  const auto model = pipeline::Model::from_checkpoint(ckpt, cfg);
  pipeline::CompleteOptions opts;
  opts.refine = a.refine;
  opts.merge_input = a.merge;
  opts.seed = cfg.seed;
  write_kitti_bin(pipeline::complete(in, model, opts), a.output);
  return 0;
}

int cmd_eval(const Args& a) {
  const RunConfig cfg = base_config(a);
  const PointCloud pred = read_kitti_bin(a.input);
  const PointCloud gt = read_kitti_bin(a.gt);
  const auto report = metrics::evaluate(pred, gt, cfg.scene_bounds);
  write_json(a.report, report);
  if (!a.csv.empty()) write_file_atomic(a.csv, metrics::csv_header() + "\n" + metrics::csv_row(report) + "\n");
  return 0;
}

int cmd_bench(const Args& a, std::ostream& err) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const RunConfig cfg = checkpoint_config(a, ckpt);
  const auto report = bench_runtime(a.input, ckpt, cfg, a.refine, cfg.seed, a.warmup, a.timed);
  if (!a.report.empty()) write_json(a.report, report);
  err << "bench: " << report.timed << " frames, mean " << report.mean << " s, std " << report.stddev << " s, "
      << report.parameter_count << " parameters\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LiDAR scene completion toolkit", "linext"};
  app.require_subcommand(1);
  Args a;

  auto* synth = app.add_subcommand("synth", "generate a synthetic scan and its dense ground truth");
  synth->add_option("--input", a.input, "scene description (JSON); default street scene if omitted");
  synth->add_option("--output", a.output, "scan output (.bin)")->required();
  synth->add_option("--gt", a.gt, "ground-truth output (.bin)");
  synth->add_option("--seed", a.seed, "random seed");

  auto* dsr = app.add_subcommand("dsr", "distance-aware replication with Gaussian noise");
  dsr->add_option("--input", a.input, "scan (.bin)")->required();
  dsr->add_option("--output", a.output, "noisy cloud (.bin)")->required();
  dsr->add_option("--sigma", a.sigma, "noise standard deviation in meters");
  dsr->add_option("--seed", a.seed, "random seed");
  dsr->add_option("--config", a.config, "run config (JSON)");

  auto* ser = app.add_subcommand("serialize", "space-filling-curve codes and order of a scan");
  ser->add_option("--input", a.input, "scan (.bin)")->required();
  ser->add_option("--output", a.output, "codes and order (JSON)")->required();
  ser->add_option("--curve", a.curve, "z, hilbert or random")->check(CLI::IsMember({"z", "hilbert", "random"}, CLI::ignore_case));
  ser->add_option("--seed", a.seed, "seed for the random curve choice");
  ser->add_option("--config", a.config, "run config (JSON)");

  auto* tn = app.add_subcommand("train-n2c", "train the noise-to-coarse stage");
  auto* tr = app.add_subcommand("train-refine", "train the refinement stage with noise-to-coarse frozen");
  for (auto* sub : {tn, tr}) {
    sub->add_option("--input", a.input, "scan (.bin) or directory of scans")->required();
    sub->add_option("--gt", a.gt, "ground truth (.bin) or directory with matching names")->required();
    sub->add_option("--config", a.config, "run config (JSON)");
    sub->add_option("--seed", a.seed, "overrides the config seed");
    sub->add_option("--log", a.log, "JSONL loss log; stderr if omitted");
  }
  tn->add_option("--checkpoint", a.checkpoint, "checkpoint to write")->required();
  tr->add_option("--checkpoint", a.checkpoint, "checkpoint with trained noise-to-coarse weights")->required();
  tr->add_option("--output", a.output, "checkpoint to write; defaults to --checkpoint");

  auto* comp = app.add_subcommand("complete", "complete a scan with a trained checkpoint");
  comp->add_option("--input", a.input, "scan (.bin)")->required();
  comp->add_option("--checkpoint", a.checkpoint, "checkpoint")->required();
  comp->add_option("--output", a.output, "completed cloud (.bin)")->required();
  comp->add_option("--config", a.config, "run config (JSON); defaults to the checkpoint's");
  comp->add_option("--seed", a.seed, "noise seed");
  comp->add_flag("--refine", a.refine, "run the refinement stage");
  comp->add_flag("--merge", a.merge, "append the input scan to the output");

  auto* ev = app.add_subcommand("eval", "compare a completed cloud with ground truth");
  ev->add_option("--input", a.input, "prediction (.bin)")->required();
  ev->add_option("--gt", a.gt, "ground truth (.bin)")->required();
  ev->add_option("--report", a.report, "metrics report (JSON)")->required();
  ev->add_option("--csv", a.csv, "one-row CSV in table column order");
  ev->add_option("--config", a.config, "run config (JSON) supplying the scene bounds");

  auto* bench = app.add_subcommand("bench", "time completion over a directory of scans");
  bench->add_option("--input", a.input, "directory of scans (.bin)")->required();
  bench->add_option("--checkpoint", a.checkpoint, "checkpoint")->required();
  bench->add_option("--warmup", a.warmup, "untimed leading frames")->default_val(5);
  bench->add_option("--timed", a.timed, "timed frames")->default_val(100);
  bench->add_option("--report", a.report, "bench report (JSON)");
  bench->add_option("--config", a.config, "run config (JSON); defaults to the checkpoint's");
  bench->add_option("--seed", a.seed, "noise seed");
  bench->add_flag("--refine", a.refine, "include the refinement stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(a);
    if (dsr->parsed()) return cmd_dsr(a);
    if (ser->parsed()) return cmd_serialize(a);
    if (tn->parsed()) return cmd_train(a, pipeline::Stage::N2C, err);
    if (tr->parsed()) return cmd_train(a, pipeline::Stage::Refine, err);
    if (comp->parsed()) return cmd_complete(a);
    if (ev->parsed()) return cmd_eval(a);
    if (bench->parsed()) return cmd_bench(a, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace linext::cli
