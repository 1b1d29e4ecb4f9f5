#include <cmath>
#include <stdexcept>

#include "svs/scenegen/scene.hpp"

namespace svs::scenegen {

namespace {

using Eigen::Vector3d;

// Lattice coordinates that only miss an integer through round-off are
// snapped so integer shifts sample textures exactly.
double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

struct Ray {
  Vector3d dir_ref;  // R^T r
  Vector3d origin;   // camera centre in reference coordinates, -R^T t
};

// Intersection of the ray with Z = depth, in reference pixel coordinates.
bool hit_plane(const Ray& ray, double depth, const mpi::CameraRig& rig, double& xr, double& yr) {
  if (!(ray.dir_ref.z() > 1e-12)) return false;
  const double s = (depth - ray.origin.z()) / ray.dir_ref.z();
  if (!(s > 0.0)) return false;
  const Vector3d p = ray.origin + s * ray.dir_ref;
  xr = snap(rig.fx * p.x() / depth + rig.cx);
  yr = snap(rig.fy * p.y() / depth + rig.cy);
  return true;
}

void check_frustum(const LayeredScene& scene, const mpi::CameraRig& rig, const mpi::CameraPose& pose) {
  for (std::size_t i = 0; i < scene.layers.size(); ++i) {
    const Layer& l = scene.layers[i];
    // Corners of the layer (the whole reference frustum for the background).
    const double xs[2] = {l.background ? -0.5 : l.x0 - 0.5, l.background ? scene.width - 0.5 : l.x1 - 0.5};
    const double ys[2] = {l.background ? -0.5 : l.y0 - 0.5, l.background ? scene.height - 0.5 : l.y1 - 0.5};
    for (double x : xs)
      for (double y : ys) {
        const Vector3d p((x - rig.cx) / rig.fx * l.depth, (y - rig.cy) / rig.fy * l.depth, l.depth);
        const double z = (pose.rotation * p + pose.translation).z();
        if (!(z > 0.05 * l.depth))
          throw std::invalid_argument("pose puts layer " + std::to_string(i) + " (depth " + std::to_string(l.depth) +
                                      ") at or behind the target camera");
      }
  }
}

template <class Visit>
void cast(const LayeredScene& scene, const mpi::CameraRig& rig, const mpi::CameraPose& pose, Visit&& visit) {
  rig.validate();
  pose.validate();
  if (scene.layers.empty() || !scene.layers[0].background)
    throw std::invalid_argument("scene must start with a background layer");
  check_frustum(scene, rig, pose);
  const Eigen::Matrix3d rt = pose.rotation.transpose();
  const Vector3d origin = -rt * pose.translation;
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x) {
      const Vector3d r((x - rig.cx) / rig.fx, (y - rig.cy) / rig.fy, 1.0);
      const Ray ray{rt * r, origin};
      // Painter's order: far to near, later layers overwrite.
      int hit = -1;
      double hx = 0, hy = 0;
      for (std::size_t i = 0; i < scene.layers.size(); ++i) {
        double xr, yr;
        if (hit_plane(ray, scene.layers[i].depth, rig, xr, yr) && scene.layers[i].covers(xr, yr)) {
          hit = static_cast<int>(i);
          hx = xr;
          hy = yr;
        }
      }
      visit(y, x, hit, hx, hy);
    }
}

}  // namespace

imagecore::Image render_view(const LayeredScene& scene, const mpi::CameraRig& rig, const mpi::CameraPose& pose) {
  std::vector<float> values(static_cast<std::size_t>(scene.width) * scene.height * 3, 0.0f);
  cast(scene, rig, pose, [&](int y, int x, int hit, double xr, double yr) {
    if (hit < 0) return;
    const auto c = scene.layers[hit].texture.color(xr, yr);
    const std::size_t i = (static_cast<std::size_t>(y) * scene.width + x) * 3;
    values[i] = c[0];
    values[i + 1] = c[1];
    values[i + 2] = c[2];
  });
  return imagecore::Image::from_values(scene.height, scene.width, 3, std::move(values));
}

std::vector<int> visible_layers(const LayeredScene& scene, const mpi::CameraRig& rig, const mpi::CameraPose& pose) {
  std::vector<int> ids(static_cast<std::size_t>(scene.width) * scene.height, -1);
  cast(scene, rig, pose,
       [&](int y, int x, int hit, double, double) { ids[static_cast<std::size_t>(y) * scene.width + x] = hit; });
  return ids;
}

std::vector<mpi::CameraPose> default_novel_poses(const mpi::CameraRig& rig) {
  const double b = rig.baseline;
  return {
      mpi::CameraPose::translated(-0.5 * b, 0.0, 0.0),
      mpi::CameraPose::translated(0.5 * b, 0.0, 0.0),
      mpi::CameraPose::translated(-0.25 * b, 0.0, -1.0),
  };
}

StereoSample render_stereo(const LayeredScene& scene, const mpi::CameraRig& rig,
                           const std::vector<mpi::CameraPose>& novel_poses) {
  rig.validate();
  StereoSample s;
  s.rig = rig;
  s.scene = scene;
  s.seed = scene.seed;
  s.difficulty = scene.difficulty;
  const auto right_pose = mpi::CameraPose::right_of(rig);
  s.left = render_view(scene, rig, mpi::CameraPose::identity());
  s.right = render_view(scene, rig, right_pose);

  const int w = scene.width, h = scene.height;
  const auto left_ids = visible_layers(scene, rig, mpi::CameraPose::identity());
  const auto right_ids = visible_layers(scene, rig, right_pose);
  s.gt_disparity_left = imagecore::FlowField(h, w);
  s.gt_disparity_right = imagecore::FlowField(h, w);
  s.gt_occlusion_right = imagecore::BinaryMask(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      s.gt_disparity_left.set(y, x, static_cast<float>(rig.disparity(scene.layers[left_ids[p]].depth)));
      const double d = rig.disparity(scene.layers[right_ids[p]].depth);
      s.gt_disparity_right.set(y, x, static_cast<float>(d));
      // A right pixel is matched iff the left view sees the same layer at x + d.
      const double xl = snap(x + d);
      const long xi = std::lround(xl);
      const bool inside = xl <= w - 1 && xi >= 0 && xi < w;
      const bool matched = inside && left_ids[static_cast<std::size_t>(y) * w + xi] == right_ids[p];
      s.gt_occlusion_right.set(y, x, matched ? 0 : 1);
    }
  for (const auto& pose : novel_poses) s.novel_views.push_back({pose, render_view(scene, rig, pose)});
  return s;
}

}  // namespace svs::scenegen
