#pragma once

#include "svs/imagecore/image.hpp"

namespace svs::stereosynth {

struct InpaintOptions {
  /// Width of the blend band around the hole, in pixels (Chebyshev distance).
  int band = 2;
  /// SOR stops once no pixel moves by more than this.
  double tolerance = 1e-4;
  double relaxation = 1.9;
  int max_sweeps = 20000;
};

struct InpaintReport {
  int sweeps = 0;
  double last_change = 0.0;
  double masked_fraction = 0.0;
  /// The mask covers half the image or more; the fill has little to anchor on.
  bool degraded = false;
};

/// Fills pixels with mask = 1 by harmonic (heat-equation steady state)
/// interpolation. The harmonic field is solved over the hole plus a `band`
/// ring of known pixels, with the pixels just outside the ring as Dirichlet
/// data and reflecting image borders. Inside the hole the field is used
/// directly; ring pixels at distance k blend it with the input with weight
/// (band + 1 - k) / (band + 1). Everything farther away is copied unchanged.
/// Throws std::invalid_argument for an all-ones mask or a size mismatch.
imagecore::Image inpaint(const imagecore::Image& image, const imagecore::BinaryMask& mask,
                         const InpaintOptions& options = {}, InpaintReport* report = nullptr);

/// Chebyshev distance to the nearest set pixel, capped at cap + 1.
std::vector<int> mask_distance(const imagecore::BinaryMask& mask, int cap);

}  // namespace svs::stereosynth
