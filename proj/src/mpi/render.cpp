#include <cmath>
#include <stdexcept>
#include <string>

#include "svs/kernels/kernels.hpp"
#include "svs/mpi/mpi.hpp"

namespace svs::mpi {

using imagecore::Image;

namespace {

Image composite_planes(const std::vector<float>& colors, const std::vector<float>& alphas, int planes, int h, int w) {
  const auto L = kernels::Layout::interleaved(h, w, 3);
  std::vector<float> out(L.count());
  kernels::composite_over<float>(colors, alphas, planes, L, out);
  return Image::from_values(h, w, 3, std::move(out));
}

}  // namespace

Image composite(const Mpi& mpi) {
  mpi.validate();
  const int h = mpi.height(), w = mpi.width(), n = mpi.planes();
  const std::size_t hw = std::size_t(h) * w;
  std::vector<float> colors(hw * 3 * n), alphas(hw * n);
  for (int d = 0; d < n; ++d) {
    std::copy(mpi.colors[d].values().begin(), mpi.colors[d].values().end(), colors.begin() + d * hw * 3);
    std::copy(mpi.alphas[d].values().begin(), mpi.alphas[d].values().end(), alphas.begin() + d * hw);
  }
  return composite_planes(colors, alphas, n, h, w);
}

Image render_view(const Mpi& mpi, const CameraPose& pose, const Eigen::Matrix3d& target_intrinsics) {
  mpi.validate();
  pose.validate();
  const int h = mpi.height(), w = mpi.width(), n = mpi.planes();
  const std::size_t hw = std::size_t(h) * w;
  const Eigen::Matrix3d k_ref = mpi.rig.intrinsics();
  const auto color_layout = kernels::Layout::interleaved(h, w, 3);
  const auto alpha_layout = kernels::Layout::planar(1, h, w);
  std::vector<float> colors(hw * 3 * n), alphas(hw * n);
  for (int d = 0; d < n; ++d) {
    // The plane must lie strictly in front of the target camera at every
    // reference pixel: Z_target = r3 . X + t_z with X on Z_ref = depth.
    const Eigen::Matrix3d k_inv = k_ref.inverse();
    double min_z = INFINITY;
    for (const auto& [px, py] : {std::pair{0.0, 0.0}, {w - 1.0, 0.0}, {0.0, h - 1.0}, {w - 1.0, h - 1.0}}) {
      const Eigen::Vector3d ray = k_inv * Eigen::Vector3d(px, py, 1.0);
      const Eigen::Vector3d X = ray * (mpi.depths[d] / ray.z());
      min_z = std::min(min_z, (pose.rotation * X + pose.translation).z());
    }
    const Eigen::Matrix3d H = plane_homography(k_ref, target_intrinsics, pose, mpi.depths[d]);
    const double det = H.determinant();
    const auto fail = [&](const std::string& why) {
      return std::invalid_argument("MPI plane " + std::to_string(d) + " (depth " + std::to_string(mpi.depths[d]) +
                                   ") is degenerate for the target pose: " + why);
    };
    if (!(min_z > 1e-9)) throw fail("it reaches the target camera's image plane or lies behind it");
    if (!std::isfinite(det) || std::abs(det) < 1e-12) throw fail("singular homography");
    const auto inv = to_array(H.inverse());
    const auto cs = std::span<const float>(mpi.colors[d].values());
    const auto as = std::span<const float>(mpi.alphas[d].values());
    if (!kernels::warp_homography<float>(cs, color_layout, inv, std::span<float>(colors).subspan(d * hw * 3, hw * 3)) ||
        !kernels::warp_homography<float>(as, alpha_layout, inv, std::span<float>(alphas).subspan(d * hw, hw)))
      throw fail("a target pixel maps to the plane's horizon");
  }
  return composite_planes(colors, alphas, n, h, w);
}

Image render_view(const Mpi& mpi, const CameraPose& pose) { return render_view(mpi, pose, mpi.rig.intrinsics()); }

}  // namespace svs::mpi
