#include "svs/mpi/reconstruct.hpp"

namespace svs::mpi {

using imagecore::Image;

Reconstruction reconstruct_from_pair(const Image& left, const Image& right, const CameraRig& rig,
                                     const MpiConfig& cfg, const std::vector<CameraPose>& poses) {
  cfg.validate();
  const auto depths = plane_depths(cfg.d_near, cfg.d_far, cfg.planes);
  Reconstruction r;
  r.right = right;
  r.mpi = estimate_mpi(build_psv(left, right, rig, depths), rig, depths, cfg.temperature, cfg.cost_radius);
  for (const auto& pose : poses) r.views.push_back(render_view(r.mpi, pose));
  return r;
}

Reconstruction reconstruct_and_render(const Image& left, const tinynet::FlowNet& f_w, const tinynet::FlowNet& f_b,
                                      const stereosynth::RectifierConfig& rcfg, const CameraRig& rig,
                                      const MpiConfig& cfg, const std::vector<CameraPose>& poses,
                                      const std::optional<Image>& ideal_right) {
  const Image right = ideal_right ? *ideal_right : stereosynth::synthesize(left, f_w, f_b, rcfg).final;
  return reconstruct_from_pair(left, right, rig, cfg, poses);
}

}  // namespace svs::mpi
