#pragma once

#include <string>

#include "svs/imagecore/image.hpp"
#include "svs/tinynet/flow_network.hpp"

namespace svs::stereosynth {

enum class InpaintMethod { diffusion };

std::string to_string(InpaintMethod m);
InpaintMethod parse_inpaint_method(const std::string& s);

struct RectifierConfig {
  double prune_fraction = 0.5;
  double fusion_threshold = 0.9;
  InpaintMethod inpaint = InpaintMethod::diffusion;
  double lambda_rec = 1.0;
  /// Accepted for configuration compatibility; there is no adversarial term.
  double lambda_adv = 0.1;
  /// 3x3 morphological closing of the fused mask.
  bool close_mask = true;
  /// Rank weights within each tensor instead of across the network.
  bool per_layer_pruning = false;

  void validate() const;
  friend bool operator==(const RectifierConfig&, const RectifierConfig&) = default;
};

struct PruningResult {
  imagecore::FlowField flow;
  imagecore::Image warped;
  imagecore::Image pruned;
  imagecore::ConfidenceMap delta_p;
};

/// Warps `left` with f_W and with a pruned copy of f_W and scores where they
/// disagree. `f_w` is not modified. fraction 0 gives an all-zero map.
PruningResult pruning_confidence(const tinynet::FlowNet& f_w, const imagecore::Image& left, double fraction,
                                 bool per_layer = false);

/// Moves a left-frame map into the right frame: left pixel (x, y) is splatted
/// to (x + b(x, y), y) with linear weights over the two nearest columns.
/// A right pixel takes the maximum of the values splatted onto it with
/// weight above 1/4; pixels whose total received weight is below 1/2 have
/// no left-frame correspondence and get 1.
imagecore::ConfidenceMap trace_back(const imagecore::ConfidenceMap& left_map, const imagecore::FlowField& b);

struct BidirectionalResult {
  imagecore::FlowField flow;
  imagecore::Image backwarped_left;
  imagecore::ConfidenceMap left_difference;
  imagecore::ConfidenceMap delta_b;
};

/// Warps the synthesized right view back to the left frame with the
/// backward flow b, compares with `left`, and traces the difference back.
BidirectionalResult bidirectional_confidence(const imagecore::FlowField& b, const imagecore::Image& warped_right,
                                             const imagecore::Image& left);
/// Same with b = f_B(warped_right).
BidirectionalResult bidirectional_confidence(const tinynet::FlowNet& f_b, const imagecore::Image& warped_right,
                                             const imagecore::Image& left);

/// 1 where delta_p + delta_b > threshold (strict), else 0.
imagecore::BinaryMask fuse_masks(const imagecore::ConfidenceMap& delta_p, const imagecore::ConfidenceMap& delta_b,
                                 double threshold);

/// 3x3 closing (dilation then erosion; outside the image counts as set for
/// the erosion). Never clears a set pixel.
imagecore::BinaryMask close_mask(const imagecore::BinaryMask& mask);

}  // namespace svs::stereosynth
