#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svs/imagecore/image.hpp"
#include "svs/mpi/camera.hpp"

namespace svs::scenegen {

enum class Difficulty { flat, layered, thin_structures };

std::string to_string(Difficulty d);
Difficulty parse_difficulty(const std::string& s);

enum class TextureKind { checker, ramp, noise };

/// Procedural texture pinned to reference-view pixel coordinates. Pattern
/// values live on the integer lattice and are bilinearly interpolated, so
/// integer-pixel shifts reproduce lattice values exactly. The pattern
/// modulates brightness only: every channel moves by the same amount.
struct Texture {
  TextureKind kind = TextureKind::noise;
  std::array<double, 3> base{0.5, 0.5, 0.5};
  double amplitude = 0.15;
  int period = 6;
  std::uint64_t seed = 0;

  /// Pattern value in [0, 1] at integer lattice point (i, j).
  double lattice(long i, long j) const;
  /// Colour at continuous reference coordinates.
  std::array<float, 3> color(double u, double v) const;
};

/// Fronto-parallel textured rectangle. Bounds are half-open pixel ranges in
/// the reference view: the layer covers reference coordinates with
/// x0 - 0.5 <= x < x1 - 0.5 (likewise for y). The background covers everything.
struct Layer {
  double depth = 1.0;
  int level = 1;  // appearance class; equals the disparity in pixels under the default rig
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool background = false;
  Texture texture;

  int width() const { return x1 - x0; }
  bool covers(double x, double y) const;
};

struct SceneConfig {
  int width = 256;
  int height = 96;
  /// Product fx * baseline of the rig the appearance levels are calibrated
  /// for: a level-k layer sits at depth focal_baseline / k.
  double focal_baseline = 60.0;
  int max_level = 6;
};

/// Layers sorted far to near; layers[0] is the background.
struct LayeredScene {
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::flat;
  std::vector<Layer> layers;

  double nearest_depth() const;
  double farthest_depth() const;
};

/// Colour of appearance level k (1-based); levels are separated in chroma.
std::array<double, 3> level_color(int level);

/// Deterministic for a fixed (seed, difficulty, config).
LayeredScene generate_scene(std::uint64_t seed, Difficulty difficulty, const SceneConfig& cfg = {});

/// Moves every layer to the nearest depth in `depths` (used to build scenes
/// that an MPI with those plane depths can represent exactly).
LayeredScene snap_to_depths(LayeredScene scene, const std::vector<double>& depths);

// --- rendering ---------------------------------------------------------------

struct NovelView {
  mpi::CameraPose pose;
  imagecore::Image image;
};

struct StereoSample {
  imagecore::Image left;
  imagecore::Image right;
  imagecore::FlowField gt_disparity_left;
  /// Disparity of the surface seen by each right pixel; the backward flow
  /// that warps the left image onto the right one.
  imagecore::FlowField gt_disparity_right;
  imagecore::BinaryMask gt_occlusion_right;
  mpi::CameraRig rig;
  std::vector<NovelView> novel_views;
  std::optional<LayeredScene> scene;
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::flat;
};

/// Analytic painter's-algorithm render. Throws std::invalid_argument naming
/// the layer if any part of it would lie at or behind the target camera.
imagecore::Image render_view(const LayeredScene& scene, const mpi::CameraRig& rig, const mpi::CameraPose& pose);

/// Index (into scene.layers) of the visible layer at each target pixel, row-major.
std::vector<int> visible_layers(const LayeredScene& scene, const mpi::CameraRig& rig, const mpi::CameraPose& pose);

/// Poses of the ground-truth novel views stored with each sample.
std::vector<mpi::CameraPose> default_novel_poses(const mpi::CameraRig& rig);

/// Left/right views, analytic disparity and occlusion, and novel views.
StereoSample render_stereo(const LayeredScene& scene, const mpi::CameraRig& rig,
                           const std::vector<mpi::CameraPose>& novel_poses = {});

}  // namespace svs::scenegen
