#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "svs/cli/config.hpp"
#include "svs/stereosynth/pipeline.hpp"

namespace svs::cli {

/// The ablation ordering did not hold (exit code 3).
class OrderingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode { kSuccess = 0, kRuntimeError = 1, kValidationFailure = 2, kOrderingFailure = 3 };

struct GlobalOptions {
  /// Overrides both corpus.seed and train.seed.
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool force = false;
};

RunConfig apply_overrides(RunConfig cfg, const GlobalOptions& opts);

/// Writes the corpus to cfg.corpus_path.
void cmd_generate(const RunConfig& cfg, const GlobalOptions& opts, std::ostream& log);

/// Trains on the corpus at cfg.corpus_path; writes f_w.ckpt, f_b.ckpt,
/// train_log.txt and summary.txt into train.checkpoint_dir.
void cmd_train(const RunConfig& cfg, const GlobalOptions& opts, std::ostream& log);

struct SynthesizeArgs {
  std::filesystem::path input;
  std::filesystem::path out;
  std::optional<std::filesystem::path> ground_truth;
  stereosynth::Variant variant = stereosynth::Variant::complete;
};
void cmd_synthesize(const RunConfig& cfg, const GlobalOptions& opts, const SynthesizeArgs& args, std::ostream& log);

struct ReconstructArgs {
  std::filesystem::path left;
  /// Used instead of synthesizing the right view when given.
  std::optional<std::filesystem::path> right;
  std::filesystem::path out;
};
/// Writes the MPI (manifest + planes) and the right view it was built from.
void cmd_reconstruct(const RunConfig& cfg, const GlobalOptions& opts, const ReconstructArgs& args, std::ostream& log);

struct RenderArgs {
  std::filesystem::path mpi_dir;
  /// poses.txt-style file; the corpus novel poses when absent.
  std::optional<std::filesystem::path> poses;
  std::filesystem::path out;
};
void cmd_render(const RunConfig& cfg, const GlobalOptions& opts, const RenderArgs& args, std::ostream& log);

struct ImageScore {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct Evaluation {
  std::vector<ImageScore> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

/// Files of a directory (sorted .png/.ppm/.pgm) or a single file.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& p);

/// Pairs predictions with ground truth in sorted order and scores each pair
/// after cropping. Rejects a count mismatch, naming the files without a
/// same-named partner.
Evaluation evaluate_images(const std::vector<std::filesystem::path>& predictions,
                           const std::vector<std::filesystem::path>& ground_truth, double crop, int jobs = 1);

/// key=value lines: count, crop, per-image <name>.psnr / <name>.ssim, then
/// mean.psnr / mean.ssim, restricted to `metrics`.
std::string format_evaluation(const Evaluation& e, double crop, const std::vector<std::string>& metrics);

void cmd_evaluate(const RunConfig& cfg, const GlobalOptions& opts, const std::filesystem::path& predictions,
                  const std::filesystem::path& ground_truth, const std::optional<std::filesystem::path>& out,
                  std::ostream& log);

/// Runs the ablation on the corpus at cfg.corpus_path with the checkpoints
/// in train.checkpoint_dir. Throws OrderingFailure after writing the table
/// when the ordering does not hold.
stereosynth::AblationReport cmd_ablate(const RunConfig& cfg, const GlobalOptions& opts,
                                       const std::optional<std::filesystem::path>& out, std::ostream& log);

}  // namespace svs::cli
