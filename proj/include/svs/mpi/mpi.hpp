#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "svs/imagecore/image.hpp"
#include "svs/mpi/camera.hpp"

namespace svs::mpi {

/// Dense float volume with shape [C, H, W, D], stored row-major (D fastest).
struct Volume {
  std::array<int, 4> shape{0, 0, 0, 0};
  std::vector<float> data;

  Volume() = default;
  explicit Volume(std::array<int, 4> s);

  int channels() const { return shape[0]; }
  int height() const { return shape[1]; }
  int width() const { return shape[2]; }
  int planes() const { return shape[3]; }

  std::size_t index(int c, int y, int x, int d) const {
    return ((std::size_t(c) * shape[1] + y) * shape[2] + x) * shape[3] + d;
  }
  float operator()(int c, int y, int x, int d) const { return data[index(c, y, x, d)]; }
  float& operator()(int c, int y, int x, int d) { return data[index(c, y, x, d)]; }
};

/// [6, H, W, D]: channels 0-2 the left image, 3-5 the right image
/// re-projected onto each reference-frame plane.
using PlaneSweepVolume = Volume;

/// D fronto-parallel RGBA planes in the reference (left) camera, index 0 farthest.
struct Mpi {
  std::vector<double> depths;
  std::vector<imagecore::Image> colors;
  std::vector<imagecore::ConfidenceMap> alphas;
  CameraRig rig;

  int planes() const { return int(depths.size()); }
  int height() const { return colors.empty() ? 0 : colors.front().height(); }
  int width() const { return colors.empty() ? 0 : colors.front().width(); }

  /// Throws unless depths are positive and strictly decreasing, every plane
  /// is RGB of one size, and every alpha lies in [0, 1].
  void validate() const;
  /// [4, H, W, D]: RGB then alpha.
  Volume to_volume() const;
  static Mpi from_volume(const Volume& v, std::vector<double> depths, const CameraRig& rig);
};

struct MpiConfig {
  int planes = 32;
  double d_near = 10.0;
  double d_far = 60.0;
  /// Softmin temperature on mean-absolute-difference costs.
  double temperature = 0.05;
  /// Box-filter radius of the matching cost.
  int cost_radius = 1;

  void validate() const;
  friend bool operator==(const MpiConfig&, const MpiConfig&) = default;
};

/// D depths spaced uniformly in 1/depth, far to near. Both ends included.
std::vector<double> plane_depths(double d_near, double d_far, int count);

/// Slice d warps the right image by the disparity fx * baseline / depths[d].
PlaneSweepVolume build_psv(const imagecore::Image& left, const imagecore::Image& right, const CameraRig& rig,
                           const std::vector<double>& depths);

/// Per pixel: cost c_d (box-filtered mean |left - warped right|), weights
/// w = softmin(c / temperature), and alphas chosen so the back-to-front
/// compositing weights equal w. Plane colour is the left image.
/// Equal costs give uniform weights.
Mpi estimate_mpi(const PlaneSweepVolume& psv, const CameraRig& rig, const std::vector<double>& depths,
                 double temperature, int cost_radius = 1);

/// Per-pixel depth weights implied by the alphas: alpha_i * prod_{j>i} (1 - alpha_j).
std::vector<imagecore::ConfidenceMap> compositing_weights(const Mpi& mpi);

/// Inverse homography warp of every plane into the target camera followed by
/// back-to-front over-compositing. The target shares the MPI's size.
/// Throws std::invalid_argument naming the plane if one is degenerate
/// (at or behind the target camera) for `pose`.
imagecore::Image render_view(const Mpi& mpi, const CameraPose& pose, const Eigen::Matrix3d& target_intrinsics);
imagecore::Image render_view(const Mpi& mpi, const CameraPose& pose);

/// Composite in the reference camera without warping.
imagecore::Image composite(const Mpi& mpi);

/// manifest.txt plus plane_000.png (farthest) .. as 16-bit RGBA.
void save_mpi(const Mpi& mpi, const std::filesystem::path& dir);
Mpi load_mpi(const std::filesystem::path& dir);

/// frame_000.png .. plus poses.txt (one pose per line: row-major R then t).
void save_sequence(const std::vector<imagecore::Image>& frames, const std::vector<CameraPose>& poses,
                   const std::filesystem::path& dir);
std::vector<CameraPose> load_poses(const std::filesystem::path& path);

}  // namespace svs::mpi
