#include "svs/mpi/camera.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace svs::mpi {

void CameraRig::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw std::invalid_argument("degenerate rig: focal lengths must be positive (fx=" + std::to_string(fx) +
                                ", fy=" + std::to_string(fy) + ")");
  if (!(baseline >= 0.0)) throw std::invalid_argument("rig baseline must be non-negative");
}

Eigen::Matrix3d CameraRig::intrinsics() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

CameraRig CameraRig::centered(int width, int height, double focal, double baseline) {
  return {focal, focal, (width - 1) / 2.0, (height - 1) / 2.0, baseline};
}

CameraPose CameraPose::translated(double tx, double ty, double tz) {
  CameraPose p;
  p.translation = Eigen::Vector3d(tx, ty, tz);
  return p;
}

void CameraPose::validate() const {
  const double err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-6)) throw std::invalid_argument("pose rotation is not orthonormal (max |R^T R - I| = " +
                                                  std::to_string(err) + ")");
  if (!(rotation.determinant() > 0.0)) throw std::invalid_argument("pose rotation has negative determinant");
  if (!translation.allFinite()) throw std::invalid_argument("pose translation is not finite");
}

std::string CameraPose::to_line() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) os << rotation(r, c) << ' ';
  os << translation.x() << ' ' << translation.y() << ' ' << translation.z();
  return os.str();
}

CameraPose CameraPose::from_line(const std::string& line) {
  std::istringstream is(line);
  std::vector<double> v;
  double x;
  while (is >> x) v.push_back(x);
  if (v.size() != 12) throw std::invalid_argument("pose line needs 12 numbers, got " + std::to_string(v.size()));
  CameraPose p;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = v[r * 3 + c];
  p.translation = Eigen::Vector3d(v[9], v[10], v[11]);
  p.validate();
  return p;
}

Eigen::Matrix3d plane_homography(const Eigen::Matrix3d& k_ref, const Eigen::Matrix3d& k_target,
                                 const CameraPose& pose, double depth) {
  if (!(depth > 0.0)) throw std::invalid_argument("plane depth must be positive");
  const Eigen::RowVector3d normal(0.0, 0.0, 1.0);
  return k_target * (pose.rotation + pose.translation * normal / depth) * k_ref.inverse();
}

std::array<double, 9> to_array(const Eigen::Matrix3d& m) {
  std::array<double, 9> a{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a[r * 3 + c] = m(r, c);
  return a;
}

}  // namespace svs::mpi
