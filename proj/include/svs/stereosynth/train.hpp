#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "svs/scenegen/scene.hpp"
#include "svs/stereosynth/rectify.hpp"
#include "svs/tinynet/flow_network.hpp"

namespace svs::stereosynth {

struct TrainConfig {
  tinynet::Architecture arch;
  int epochs_w = 60;
  int epochs_b = 60;
  double lr = 1e-4;
  std::uint64_t seed = 7;
  /// Both images in the photometric loss are Gaussian-blurred with a sigma
  /// that falls linearly from blur_start to 0 over the first blur_epochs
  /// epochs, which widens the basin of the loss around large flows.
  double blur_start = 0.0;
  int blur_epochs = 0;
  /// When non-empty, f_w.ckpt / f_b.ckpt are written here at initialisation
  /// and rewritten after every epoch.
  std::filesystem::path checkpoint_dir;

  void validate() const;
};

struct TrainLogEntry {
  std::string network;  // "f_w" or "f_b"
  int epoch = 0;
  int step = 0;
  double sigma = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  tinynet::FlowNet f_w;
  tinynet::FlowNet f_b;
  std::vector<TrainLogEntry> log;
  /// Corpus loss (at the first epoch's blur) before training and after the
  /// first epoch, per network.
  double w_initial = 0.0, w_after_first_epoch = 0.0;
  double b_initial = 0.0, b_after_first_epoch = 0.0;
  /// Mean |I_r - inpainted output| over the corpus with the trained pair;
  /// logged only, nothing trains against it.
  double rectified_l1 = 0.0;
};

/// Raised when a loss or gradient turns non-finite. The last checkpoint
/// written (if any) is left in place.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, std::filesystem::path last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const std::filesystem::path& last_good() const { return last_good_; }

 private:
  std::filesystem::path last_good_;
};

using LogSink = std::function<void(const TrainLogEntry&)>;

/// Trains f_W on mean |I_r - warp(I_l, f_W(I_l))|, then f_B on
/// mean |I_l - warp(R, f_B(R))| with R = warp(I_l, f_W(I_l)) from the frozen
/// f_W. One sample per Adam step, a shuffled pass over the corpus per epoch.
/// Deterministic for a fixed corpus and config.
TrainResult train_pair_networks(const std::vector<scenegen::StereoSample>& corpus, const RectifierConfig& cfg,
                                 const TrainConfig& tc, const LogSink& sink = {});

/// Separable Gaussian blur with a radius of ceil(3 sigma) and clamped borders;
/// sigma <= 0 returns the input.
imagecore::Image gaussian_blur(const imagecore::Image& img, double sigma);

}  // namespace svs::stereosynth
