#pragma once

#include <string>
#include <vector>

#include "svs/scenegen/scene.hpp"
#include "svs/stereosynth/inpaint.hpp"
#include "svs/stereosynth/rectify.hpp"

namespace svs::stereosynth {

/// Which rectification stages run. Disabled stages contribute a zero map.
enum class Variant { baseline, pruning_only, bidirectional_only, complete };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct StereoResult {
  imagecore::Image warped;
  imagecore::Image pruned;
  imagecore::Image backwarped_left;
  imagecore::ConfidenceMap delta_p;
  imagecore::ConfidenceMap delta_b;
  imagecore::BinaryMask mask;
  imagecore::Image final;
  imagecore::FlowField flow_w;
  imagecore::FlowField flow_b;
  InpaintReport inpaint;
};

/// Warp, score, fuse, inpaint. In baseline mode (and whenever the fused mask
/// is empty) `final` is `warped` exactly; stages a variant skips leave their
/// images equal to `warped` / `left` and their maps at zero.
StereoResult synthesize(const imagecore::Image& left, const tinynet::FlowNet& f_w, const tinynet::FlowNet& f_b,
                        const RectifierConfig& cfg, Variant variant = Variant::complete);

/// Mean PSNR / SSIM of one configuration over a set of scenes, after the border crop.
struct AblationRow {
  std::string name;
  Variant variant = Variant::complete;
  double prune_fraction = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct AblationReport {
  /// Four variant rows (baseline, pruning-only, bidirectional-only,
  /// complete) followed by the complete model at each sweep fraction.
  std::vector<AblationRow> rows;
  /// complete > baseline and complete >= each single-stage variant, in PSNR.
  bool ordering_holds = false;
  std::vector<std::string> violations;
  /// The sweep's best PSNR is at its first or last fraction.
  bool peak_at_edge = false;

  const AblationRow& row(const std::string& name) const;
};

inline const std::vector<double> kSweepFractions{0.1, 0.3, 0.5, 0.7, 0.9};

AblationReport run_ablation(const std::vector<scenegen::StereoSample>& scenes, const tinynet::FlowNet& f_w,
                            const tinynet::FlowNet& f_b, const RectifierConfig& cfg, double crop = 0.05,
                            const std::vector<double>& fractions = kSweepFractions, int jobs = 1);

/// Aligned-column text table with a header line.
std::string format_ablation(const AblationReport& report);

}  // namespace svs::stereosynth
