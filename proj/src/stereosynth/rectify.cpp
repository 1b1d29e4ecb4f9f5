#include "svs/stereosynth/rectify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "svs/imagecore/ops.hpp"
#include "svs/tinynet/train_utils.hpp"

namespace svs::stereosynth {

using imagecore::BinaryMask;
using imagecore::ConfidenceMap;
using imagecore::FlowField;
using imagecore::Image;

std::string to_string(InpaintMethod m) {
  switch (m) {
    case InpaintMethod::diffusion: return "diffusion";
  }
  throw std::invalid_argument("unknown inpaint method");
}

InpaintMethod parse_inpaint_method(const std::string& s) {
  if (s == "diffusion") return InpaintMethod::diffusion;
  throw std::invalid_argument("unknown inpaint method '" + s + "' (expected diffusion)");
}

void RectifierConfig::validate() const {
  if (!(prune_fraction >= 0.0 && prune_fraction <= 1.0))
    throw std::invalid_argument("prune_fraction must lie in [0, 1], got " + std::to_string(prune_fraction));
  if (!(fusion_threshold > 0.0) || !std::isfinite(fusion_threshold))
    throw std::invalid_argument("fusion_threshold must be positive, got " + std::to_string(fusion_threshold));
  if (!std::isfinite(lambda_rec) || lambda_rec < 0.0)
    throw std::invalid_argument("lambda_rec must be a non-negative number");
  if (!std::isfinite(lambda_adv) || lambda_adv < 0.0)
    throw std::invalid_argument("lambda_adv must be a non-negative number");
}

PruningResult pruning_confidence(const tinynet::FlowNet& f_w, const Image& left, double fraction, bool per_layer) {
  PruningResult r;
  r.flow = f_w.forward(left);
  r.warped = imagecore::warp_horizontal(left, r.flow);
  if (fraction == 0.0) {
    // Nothing is pruned, so the pruned network is f_W itself.
    r.pruned = r.warped;
    r.delta_p = ConfidenceMap(left.height(), left.width(), 0.0f);
    return r;
  }
  const auto pruned = tinynet::prune(f_w, {fraction, per_layer});
  r.pruned = imagecore::warp_horizontal(left, pruned.forward(left));
  r.delta_p = imagecore::pixel_difference(r.pruned, r.warped);
  return r;
}

ConfidenceMap trace_back(const ConfidenceMap& left_map, const FlowField& b) {
  imagecore::require_same_size(left_map, b, "trace_back");
  const int h = left_map.height(), w = left_map.width();
  std::vector<float> value(left_map.size(), 0.0f), weight(left_map.size(), 0.0f);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double target = x + double(b(y, x));
      if (!std::isfinite(target)) continue;
      const double lo = std::floor(target);
      const double frac = target - lo;
      const float v = left_map(y, x);
      const auto deposit = [&](double col, double wt) {
        if (wt <= 0.0 || col < 0.0 || col > w - 1) return;
        const std::size_t i = left_map.index(y, int(col));
        weight[i] += float(wt);
        if (wt > 0.25) value[i] = std::max(value[i], v);
      };
      deposit(lo, 1.0 - frac);
      deposit(lo + 1.0, frac);
    }
  }
  for (std::size_t i = 0; i < value.size(); ++i)
    if (weight[i] < 0.5f) value[i] = 1.0f;
  return ConfidenceMap::from_values(h, w, std::move(value));
}

BidirectionalResult bidirectional_confidence(const FlowField& b, const Image& warped_right, const Image& left) {
  imagecore::require_same_size(warped_right, left, "bidirectional_confidence");
  imagecore::require_same_size(b, left, "bidirectional_confidence flow");
  BidirectionalResult r;
  r.flow = b;
  r.backwarped_left = imagecore::warp_horizontal(warped_right, b);
  r.left_difference = imagecore::pixel_difference(r.backwarped_left, left);
  r.delta_b = trace_back(r.left_difference, b);
  return r;
}

BidirectionalResult bidirectional_confidence(const tinynet::FlowNet& f_b, const Image& warped_right, const Image& left) {
  return bidirectional_confidence(f_b.forward(warped_right), warped_right, left);
}

BinaryMask fuse_masks(const ConfidenceMap& delta_p, const ConfidenceMap& delta_b, double threshold) {
  imagecore::require_same_size(delta_p, delta_b, "fuse_masks");
  std::vector<std::uint8_t> m(delta_p.size());
  const auto p = delta_p.values();
  const auto q = delta_b.values();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = double(p[i]) + double(q[i]) > threshold ? 1 : 0;
  return BinaryMask::from_values(delta_p.height(), delta_p.width(), std::move(m));
}

namespace {

BinaryMask morph(const BinaryMask& in, bool dilate) {
  const int h = in.height(), w = in.width();
  BinaryMask out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool any = false, all = true;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          const bool v = (yy < 0 || yy >= h || xx < 0 || xx >= w) ? !dilate : in(yy, xx) != 0;
          any = any || v;
          all = all && v;
        }
      out.set(y, x, dilate ? any : all);
    }
  return out;
}

}  // namespace

BinaryMask close_mask(const BinaryMask& mask) { return morph(morph(mask, true), false); }

}  // namespace svs::stereosynth
