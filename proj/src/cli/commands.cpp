#include "svs/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "svs/imagecore/io.hpp"
#include "svs/imagecore/ops.hpp"
#include "svs/mpi/reconstruct.hpp"
#include "svs/tinynet/train_utils.hpp"

namespace svs::cli {

namespace fs = std::filesystem;
using imagecore::Image;

namespace {

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw ValidationError(what + " not found: " + p.string());
}

/// Refuses a non-empty directory unless forced, in which case it is emptied.
void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) throw ValidationError(dir.string() + " exists and is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw ValidationError("output directory " + dir.string() + " is not empty (use --force)");
    for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
  }
  fs::create_directories(dir);
}

struct Networks {
  tinynet::FlowNet f_w, f_b;
};

Networks load_networks(const fs::path& dir) {
  const fs::path w = dir / "f_w.ckpt", b = dir / "f_b.ckpt";
  require_file(w, "checkpoint");
  require_file(b, "checkpoint");
  return {tinynet::load_checkpoint(w), tinynet::load_checkpoint(b)};
}

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Image load_input(const fs::path& p, const std::string& what) {
  require_file(p, what);
  try {
    return imagecore::load_image(p);
  } catch (const imagecore::ImageIoError& e) {
    throw ValidationError(e.what());
  }
}

void check_input_size(const Image& img) {
  const int f = tinynet::FlowNet::kDownsampleFactor;
  if (img.height() % f || img.width() % f)
    throw ValidationError("input size " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                          " is not a multiple of " + std::to_string(f));
  if (img.channels() != 3) throw ValidationError("input must be RGB");
}

}  // namespace

RunConfig apply_overrides(RunConfig cfg, const GlobalOptions& opts) {
  if (opts.jobs < 1) throw ValidationError("--jobs must be >= 1");
  if (opts.seed) {
    cfg.corpus_seed = *opts.seed;
    cfg.train.seed = *opts.seed;
  }
  cfg.validate();
  return cfg;
}

void cmd_generate(const RunConfig& cfg, const GlobalOptions& opts, std::ostream& log) {
  prepare_output_dir(cfg.corpus_path, opts.force);
  const auto plan = scenegen::write_corpus(cfg.corpus_spec(), cfg.corpus_path, opts.jobs);
  std::map<scenegen::Difficulty, int> histogram;
  for (const auto& e : plan) ++histogram[e.difficulty];
  log << "wrote " << plan.size() << " scenes to " << cfg.corpus_path.string() << "\n";
  for (const auto& [d, n] : histogram) log << "  " << scenegen::to_string(d) << ": " << n << "\n";
}

void cmd_train(const RunConfig& cfg, const GlobalOptions& opts, std::ostream& log) {
  require_file(cfg.corpus_path / "manifest.txt", "corpus manifest");
  const auto corpus = scenegen::read_corpus(cfg.corpus_path);
  const fs::path dir = cfg.train.checkpoint_dir;
  prepare_output_dir(dir, opts.force);

  std::ostringstream entries;
  entries << "network epoch step sigma loss\n";
  auto sink = [&](const stereosynth::TrainLogEntry& e) {
    entries << e.network << ' ' << e.epoch << ' ' << e.step << ' ' << number(e.sigma) << ' ' << number(e.loss) << '\n';
    if (e.step == 0) log << e.network << " epoch " << e.epoch << " sigma " << number(e.sigma) << "\n";
  };
  const auto result = stereosynth::train_pair_networks(corpus, cfg.rectifier, cfg.train_config(), sink);
  write_text(dir / "train_log.txt", entries.str());

  std::map<std::string, std::string> summary{
      {"scenes", std::to_string(corpus.size())},
      {"f_w.initial_loss", number(result.w_initial)},
      {"f_w.first_epoch_loss", number(result.w_after_first_epoch)},
      {"f_b.initial_loss", number(result.b_initial)},
      {"f_b.first_epoch_loss", number(result.b_after_first_epoch)},
      {"rectified_l1", number(result.rectified_l1)},
  };
  scenegen::write_key_values(summary, dir / "summary.txt");
  log << "checkpoints in " << dir.string() << "\n";
}

void cmd_synthesize(const RunConfig& cfg, const GlobalOptions& opts, const SynthesizeArgs& args, std::ostream& log) {
  const Image left = load_input(args.input, "input image");
  check_input_size(left);
  std::optional<Image> truth;
  if (args.ground_truth) {
    truth = load_input(*args.ground_truth, "ground truth");
    if (truth->height() != left.height() || truth->width() != left.width() || truth->channels() != left.channels())
      throw ValidationError("ground truth size differs from the input");
  }
  const auto nets = load_networks(cfg.train.checkpoint_dir);
  prepare_output_dir(args.out, opts.force);

  const auto r = stereosynth::synthesize(left, nets.f_w, nets.f_b, cfg.rectifier, args.variant);
  imagecore::save_image(r.warped, args.out / "right_warped.png");
  imagecore::save_image(r.pruned, args.out / "right_pruned.png");
  imagecore::save_map(r.delta_p, args.out / "delta_p.pgm");
  imagecore::save_map(r.delta_b, args.out / "delta_b.pgm");
  imagecore::save_mask(r.mask, args.out / "mask.pgm");
  imagecore::save_image(r.final, args.out / "right_final.png");
  if (r.inpaint.degraded) log << "warning: inpainting mask covers " << number(100 * r.inpaint.masked_fraction) << "% of the image\n";

  if (truth) {
    const Image a = imagecore::crop_border(r.final, cfg.evaluate.crop);
    const Image b = imagecore::crop_border(*truth, cfg.evaluate.crop);
    std::map<std::string, std::string> metrics{{"variant", stereosynth::to_string(args.variant)},
                                               {"crop", number(cfg.evaluate.crop)},
                                               {"masked_fraction", number(r.inpaint.masked_fraction)}};
    for (const auto& m : cfg.evaluate.metrics)
      metrics[m] = number(m == "psnr" ? imagecore::psnr(a, b) : imagecore::ssim(a, b));
    scenegen::write_key_values(metrics, args.out / "metrics.txt");
  }
  log << "wrote " << args.out.string() << "\n";
}

void cmd_reconstruct(const RunConfig& cfg, const GlobalOptions& opts, const ReconstructArgs& args, std::ostream& log) {
  const Image left = load_input(args.left, "left image");
  const auto rig = cfg.rig(left.width(), left.height());
  Image right;
  if (args.right) {
    right = load_input(*args.right, "right image");
    if (right.height() != left.height() || right.width() != left.width())
      throw ValidationError("left and right sizes differ");
  } else {
    check_input_size(left);
    const auto nets = load_networks(cfg.train.checkpoint_dir);
    right = stereosynth::synthesize(left, nets.f_w, nets.f_b, cfg.rectifier).final;
  }
  prepare_output_dir(args.out, opts.force);
  const auto r = mpi::reconstruct_from_pair(left, right, rig, cfg.mpi, {});
  mpi::save_mpi(r.mpi, args.out / "mpi");
  imagecore::save_image(r.right, args.out / "right.png");
  log << "wrote " << r.mpi.planes() << "-plane MPI to " << (args.out / "mpi").string() << "\n";
}

void cmd_render(const RunConfig&, const GlobalOptions& opts, const RenderArgs& args, std::ostream& log) {
  require_file(args.mpi_dir / "manifest.txt", "MPI manifest");
  const auto m = mpi::load_mpi(args.mpi_dir);
  std::vector<mpi::CameraPose> poses;
  if (args.poses) {
    require_file(*args.poses, "pose file");
    poses = mpi::load_poses(*args.poses);
  } else {
    poses = scenegen::default_novel_poses(m.rig);
  }
  if (poses.empty()) throw ValidationError("no poses to render");
  std::vector<Image> frames(poses.size());
  std::vector<std::string> errors(poses.size());
#pragma omp parallel for schedule(dynamic) num_threads(opts.jobs)
  for (int i = 0; i < static_cast<int>(poses.size()); ++i) {
    try {
      frames[i] = mpi::render_view(m, poses[i]);
    } catch (const std::invalid_argument& e) {
      errors[i] = "pose " + std::to_string(i) + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ValidationError(e);
  prepare_output_dir(args.out, opts.force);
  mpi::save_sequence(frames, poses, args.out);
  log << "rendered " << frames.size() << " views to " << args.out.string() << "\n";
}

std::vector<fs::path> list_images(const fs::path& p) {
  if (fs::is_regular_file(p)) return {p};
  if (!fs::is_directory(p)) throw ValidationError("not found: " + p.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(p)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".ppm" || ext == ".pgm")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Evaluation evaluate_images(const std::vector<fs::path>& predictions, const std::vector<fs::path>& ground_truth,
                           double crop, int jobs) {
  if (predictions.size() != ground_truth.size()) {
    std::set<std::string> pred_names, gt_names;
    for (const auto& p : predictions) pred_names.insert(p.filename().string());
    for (const auto& p : ground_truth) gt_names.insert(p.filename().string());
    std::ostringstream os;
    os << "prediction count " << predictions.size() << " != ground-truth count " << ground_truth.size()
       << "; unmatched:";
    for (const auto& p : predictions)
      if (!gt_names.count(p.filename().string())) os << ' ' << p.string();
    for (const auto& p : ground_truth)
      if (!pred_names.count(p.filename().string())) os << ' ' << p.string();
    throw ValidationError(os.str());
  }
  if (predictions.empty()) throw ValidationError("no images to evaluate");

  Evaluation e;
  e.images.resize(predictions.size());
  std::vector<std::string> errors(predictions.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (int i = 0; i < static_cast<int>(predictions.size()); ++i) {
    try {
      const Image a = imagecore::load_image(predictions[i]), b = imagecore::load_image(ground_truth[i]);
      if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels())
        throw std::invalid_argument("size mismatch between " + predictions[i].string() + " and " +
                                    ground_truth[i].string());
      const Image ca = imagecore::crop_border(a, crop), cb = imagecore::crop_border(b, crop);
      e.images[i] = {predictions[i].filename().string(), imagecore::psnr(ca, cb), imagecore::ssim(ca, cb)};
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (const auto& err : errors)
    if (!err.empty()) throw ValidationError(err);
  for (const auto& s : e.images) e.mean_psnr += s.psnr, e.mean_ssim += s.ssim;
  e.mean_psnr /= double(e.images.size());
  e.mean_ssim /= double(e.images.size());
  return e;
}

std::string format_evaluation(const Evaluation& e, double crop, const std::vector<std::string>& metrics) {
  const bool want_psnr = std::find(metrics.begin(), metrics.end(), "psnr") != metrics.end();
  const bool want_ssim = std::find(metrics.begin(), metrics.end(), "ssim") != metrics.end();
  std::ostringstream os;
  os << "count=" << e.images.size() << "\ncrop=" << number(crop) << "\n";
  for (const auto& s : e.images) {
    if (want_psnr) os << s.name << ".psnr=" << number(s.psnr) << "\n";
    if (want_ssim) os << s.name << ".ssim=" << number(s.ssim) << "\n";
  }
  if (want_psnr) os << "mean.psnr=" << number(e.mean_psnr) << "\n";
  if (want_ssim) os << "mean.ssim=" << number(e.mean_ssim) << "\n";
  return os.str();
}

void cmd_evaluate(const RunConfig& cfg, const GlobalOptions& opts, const fs::path& predictions,
                  const fs::path& ground_truth, const std::optional<fs::path>& out, std::ostream& log) {
  const auto e = evaluate_images(list_images(predictions), list_images(ground_truth), cfg.evaluate.crop, opts.jobs);
  const std::string text = format_evaluation(e, cfg.evaluate.crop, cfg.evaluate.metrics);
  if (out) {
    if (fs::exists(*out) && !opts.force) throw ValidationError(out->string() + " exists (use --force)");
    write_text(*out, text);
  }
  log << text;
}

stereosynth::AblationReport cmd_ablate(const RunConfig& cfg, const GlobalOptions& opts,
                                       const std::optional<fs::path>& out, std::ostream& log) {
  const auto nets = load_networks(cfg.train.checkpoint_dir);
  require_file(cfg.corpus_path / "manifest.txt", "corpus manifest");
  if (out && fs::exists(*out) && !opts.force) throw ValidationError(out->string() + " exists (use --force)");
  const auto scenes = scenegen::read_corpus(cfg.corpus_path);
  const auto report = stereosynth::run_ablation(scenes, nets.f_w, nets.f_b, cfg.rectifier, cfg.evaluate.crop,
                                                stereosynth::kSweepFractions, opts.jobs);
  const std::string table = stereosynth::format_ablation(report);
  if (out) write_text(*out, table);
  log << table;
  if (report.peak_at_edge) log << "warning: the pruning sweep peaks at the edge of the range\n";
  if (!report.ordering_holds) {
    std::string msg = "ablation ordering violated:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw OrderingFailure(msg);
  }
  return report;
}

}  // namespace svs::cli
