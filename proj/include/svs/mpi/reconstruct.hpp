#pragma once

#include <optional>
#include <vector>

#include "svs/mpi/mpi.hpp"
#include "svs/stereosynth/pipeline.hpp"

namespace svs::mpi {

struct Reconstruction {
  /// The right view the volume was built from (pseudo or ground truth).
  imagecore::Image right;
  Mpi mpi;
  std::vector<imagecore::Image> views;
};

/// MPI from a stereo pair and renders at `poses`.
Reconstruction reconstruct_from_pair(const imagecore::Image& left, const imagecore::Image& right,
                                     const CameraRig& rig, const MpiConfig& cfg,
                                     const std::vector<CameraPose>& poses);

/// Synthesizes the right view from `left` with the trained pair, then
/// reconstructs and renders. When `ideal_right` is given it replaces the
/// synthesized view (the networks are not run).
Reconstruction reconstruct_and_render(const imagecore::Image& left, const tinynet::FlowNet& f_w,
                                      const tinynet::FlowNet& f_b, const stereosynth::RectifierConfig& rcfg,
                                      const CameraRig& rig, const MpiConfig& cfg,
                                      const std::vector<CameraPose>& poses,
                                      const std::optional<imagecore::Image>& ideal_right = std::nullopt);

}  // namespace svs::mpi
