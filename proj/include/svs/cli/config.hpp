#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "svs/mpi/mpi.hpp"
#include "svs/scenegen/corpus.hpp"
#include "svs/stereosynth/rectify.hpp"
#include "svs/stereosynth/train.hpp"

namespace svs::cli {

/// Bad configuration, missing inputs or refused overwrites (exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingSettings {
  std::string arch = tinynet::Architecture{}.describe();
  double lr = 1e-4;
  int epochs_w = 60;
  int epochs_b = 60;
  /// Only 1 is supported (one sample per optimiser step).
  int batch_size = 1;
  double blur_start = 0.0;
  int blur_epochs = 0;
  std::uint64_t seed = 7;
  std::filesystem::path checkpoint_dir = "checkpoints";

  friend bool operator==(const TrainingSettings&, const TrainingSettings&) = default;
};

struct EvaluationSettings {
  double crop = 0.05;
  std::vector<std::string> metrics{"psnr", "ssim"};

  friend bool operator==(const EvaluationSettings&, const EvaluationSettings&) = default;
};

/// Sections [corpus], [rectifier], [mpi], [train], [evaluate] of a
/// line-oriented `key = value` file. Unknown sections or keys are errors.
struct RunConfig {
  std::filesystem::path corpus_path;
  int n_scenes = 20;
  std::uint64_t corpus_seed = 1;
  int width = 256;
  int height = 96;
  scenegen::DifficultyMix mix;
  double baseline = 0.5;
  double focal = 120.0;

  stereosynth::RectifierConfig rectifier;
  mpi::MpiConfig mpi;
  TrainingSettings train;
  EvaluationSettings evaluate;

  /// Range checks against the owning modules. Paths are checked by the
  /// commands that read them.
  void validate() const;

  scenegen::CorpusSpec corpus_spec() const;
  mpi::CameraRig rig(int width, int height) const;
  stereosynth::TrainConfig train_config() const;

  std::string serialize() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Defaults with corpus_path taken from SVS_CORPUS_ROOT (or "corpus").
RunConfig default_config();

/// Parses on top of default_config(). Throws ValidationError with the line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace svs::cli
