#include "svs/stereosynth/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svs/imagecore/ops.hpp"
#include "svs/stereosynth/pipeline.hpp"
#include "svs/tinynet/ops.hpp"
#include "svs/tinynet/train_utils.hpp"
#include "svs/util/rng.hpp"

namespace svs::stereosynth {

using imagecore::Image;
using tinynet::FlowNet;
using Tensor = tinynet::Tensor<float>;

void TrainConfig::validate() const {
  if (epochs_w < 1 || epochs_b < 1) throw std::invalid_argument("training needs at least one epoch per network");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("learning rate must be positive");
  if (blur_start < 0.0 || blur_epochs < 0) throw std::invalid_argument("blur schedule must be non-negative");
}

Image gaussian_blur(const Image& img, double sigma) {
  if (!(sigma > 0.0)) return img;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  for (int i = -r; i <= r; ++i) k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double norm = std::accumulate(k.begin(), k.end(), 0.0);
  for (auto& v : k) v /= norm;
  const int h = img.height(), w = img.width(), ch = img.channels();
  std::vector<float> tmp(img.size()), out(img.size());
  const auto src = img.values();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * src[img.index(y, std::clamp(x + i, 0, w - 1), c)];
        tmp[img.index(y, x, c)] = float(s);
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * tmp[img.index(std::clamp(y + i, 0, h - 1), x, c)];
        out[img.index(y, x, c)] = float(s);
      }
  return Image::from_values(h, w, ch, std::move(out));
}

namespace {

/// One training pair for a flow network: the network input, the image it
/// warps, and the image the warp should reproduce.
struct Pair {
  Image input;
  Image source;
  Image target;
};

double sigma_at(const TrainConfig& tc, int epoch) {
  if (tc.blur_epochs <= 0 || epoch >= tc.blur_epochs) return 0.0;
  return tc.blur_start * (1.0 - double(epoch) / double(tc.blur_epochs));
}

struct BlurredPair {
  Tensor input, source, target;
};

std::vector<BlurredPair> prepare(const std::vector<Pair>& pairs, double sigma) {
  std::vector<BlurredPair> out(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[i].input = tinynet::image_to_tensor<float>(pairs[i].input, true);
    out[i].source = tinynet::image_to_tensor<float>(gaussian_blur(pairs[i].source, sigma));
    out[i].target = tinynet::image_to_tensor<float>(gaussian_blur(pairs[i].target, sigma));
  }
  return out;
}

Tensor pair_loss(const FlowNet& net, const BlurredPair& p, double weight) {
  const auto warped = tinynet::warp(p.source, net.forward(p.input));
  return tinynet::scale(tinynet::l1_loss(warped, p.target), float(weight));
}

double corpus_loss(const FlowNet& net, const std::vector<BlurredPair>& pairs, double weight) {
  double total = 0.0;
  for (const auto& p : pairs) total += double(pair_loss(net, p, weight).item());
  return total / double(pairs.size());
}

struct NetworkRun {
  FlowNet net;
  double initial = 0.0;
  double after_first = 0.0;
};

NetworkRun train_one(const std::string& name, const std::vector<Pair>& pairs, const RectifierConfig& cfg,
                     const TrainConfig& tc, int epochs, std::uint64_t seed, std::vector<TrainLogEntry>& log,
                     const LogSink& sink) {
  NetworkRun run{FlowNet::initialize(tc.arch, seed)};
  tinynet::Adam<float> adam({tc.lr});
  util::Rng rng(util::mix64(seed ^ 0x7a11));
  const std::filesystem::path ckpt = tc.checkpoint_dir.empty() ? std::filesystem::path{}
                                                               : tc.checkpoint_dir / (name + ".ckpt");
  std::filesystem::path last_good;
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  int step = 0;
  double cached_sigma = -1.0;
  std::vector<BlurredPair> blurred;
  if (!ckpt.empty()) {
    tinynet::save_checkpoint(run.net, ckpt);
    last_good = ckpt;
  }
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double sigma = sigma_at(tc, epoch);
    if (sigma != cached_sigma) {
      blurred = prepare(pairs, sigma);
      cached_sigma = sigma;
    }
    if (epoch == 0) run.initial = corpus_loss(run.net, blurred, cfg.lambda_rec);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[std::size_t(rng.integer(0, int(i) - 1))]);
    for (const auto idx : order) {
      run.net.zero_grad();
      const auto loss = pair_loss(run.net, blurred[idx], cfg.lambda_rec);
      const double value = loss.item();
      if (!std::isfinite(value))
        throw TrainingAborted(name + ": non-finite loss at step " + std::to_string(step), last_good);
      tinynet::backward(loss);
      try {
        adam.step(run.net.parameters());
      } catch (const tinynet::NonFiniteGradient& e) {
        throw TrainingAborted(name + ": " + e.what() + " at step " + std::to_string(step), last_good);
      }
      TrainLogEntry entry{name, epoch, step, sigma, value};
      log.push_back(entry);
      if (sink) sink(entry);
      ++step;
    }
    if (epoch == 0) run.after_first = corpus_loss(run.net, blurred, cfg.lambda_rec);
    if (!ckpt.empty()) {
      tinynet::save_checkpoint(run.net, ckpt);
      last_good = ckpt;
    }
  }
  return run;
}

}  // namespace

TrainResult train_pair_networks(const std::vector<scenegen::StereoSample>& corpus, const RectifierConfig& cfg,
                                const TrainConfig& tc, const LogSink& sink) {
  cfg.validate();
  tc.validate();
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  const int h = corpus.front().left.height(), w = corpus.front().left.width();
  for (const auto& s : corpus) {
    imagecore::require_same_size(s.left, corpus.front().left, "training corpus resolution");
    imagecore::require_same_size(s.right, s.left, "training pair");
  }
  tinynet::require_divisible(h, w, FlowNet::kDownsampleFactor);
  if (!tc.checkpoint_dir.empty()) std::filesystem::create_directories(tc.checkpoint_dir);

  TrainResult result;
  std::vector<Pair> forward_pairs;
  for (const auto& s : corpus) forward_pairs.push_back({s.left, s.left, s.right});
  auto w_run = train_one("f_w", forward_pairs, cfg, tc, tc.epochs_w, tc.seed, result.log, sink);

  std::vector<Pair> backward_pairs(corpus.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto warped = imagecore::warp_horizontal(corpus[i].left, w_run.net.forward(corpus[i].left));
    backward_pairs[i] = {warped, warped, corpus[i].left};
  }
  auto b_run = train_one("f_b", backward_pairs, cfg, tc, tc.epochs_b, util::mix64(tc.seed + 1), result.log, sink);

  result.f_w = std::move(w_run.net);
  result.f_b = std::move(b_run.net);
  result.w_initial = w_run.initial;
  result.w_after_first_epoch = w_run.after_first;
  result.b_initial = b_run.initial;
  result.b_after_first_epoch = b_run.after_first;

  double rectified = 0.0;
  for (const auto& s : corpus) {
    const auto r = synthesize(s.left, result.f_w, result.f_b, cfg);
    const auto a = r.final.values(), b = s.right.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(double(a[i]) - double(b[i]));
    rectified += acc / double(a.size());
  }
  result.rectified_l1 = rectified / double(corpus.size());
  return result;
}

}  // namespace svs::stereosynth
