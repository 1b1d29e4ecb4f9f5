#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

namespace svs::mpi {

/// Rectified pinhole stereo rig. The reference (left) camera sits at the
/// origin; the right camera is displaced by `baseline` along +X.
struct CameraRig {
  double fx = 120.0;
  double fy = 120.0;
  double cx = 127.5;
  double cy = 47.5;
  double baseline = 0.5;

  /// Throws std::invalid_argument on non-positive focal lengths or negative baseline.
  void validate() const;
  Eigen::Matrix3d intrinsics() const;
  /// Disparity in pixels of a fronto-parallel point at `depth`.
  double disparity(double depth) const { return fx * baseline / depth; }

  /// Default rig for a width x height image: f = 120 px, principal point at the centre, baseline 0.5.
  static CameraRig centered(int width, int height, double focal = 120.0, double baseline = 0.5);

  friend bool operator==(const CameraRig&, const CameraRig&) = default;
};

/// Rigid transform mapping reference-camera coordinates to target-camera
/// coordinates: X_target = R * X_ref + t.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static CameraPose identity() { return {}; }
  static CameraPose translated(double tx, double ty, double tz);
  /// Pose of the right camera of `rig` (translation -baseline along X).
  static CameraPose right_of(const CameraRig& rig) { return translated(-rig.baseline, 0.0, 0.0); }

  /// Throws unless R^T R = I within 1e-6 and det R = +1.
  void validate() const;

  /// "r00 r01 r02 r10 ... r22 tx ty tz" with round-trip precision.
  std::string to_line() const;
  static CameraPose from_line(const std::string& line);
};

/// Homography taking reference pixels on the fronto-parallel plane Z = depth
/// to target pixels: K_t (R + t n^T / depth) K_ref^-1 with n = [0, 0, 1]^T.
Eigen::Matrix3d plane_homography(const Eigen::Matrix3d& k_ref, const Eigen::Matrix3d& k_target,
                                 const CameraPose& pose, double depth);

/// Row-major copy for the pixel kernels.
std::array<double, 9> to_array(const Eigen::Matrix3d& m);

}  // namespace svs::mpi
