#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "svs/imagecore/ops.hpp"
#include "svs/scenegen/corpus.hpp"

using namespace svs;
using namespace svs::scenegen;
namespace fs = std::filesystem;

namespace {

Layer rect_layer(double depth, int level, int x0, int y0, int x1, int y1) {
  Layer l;
  l.depth = depth;
  l.level = level;
  l.x0 = x0;
  l.y0 = y0;
  l.x1 = x1;
  l.y1 = y1;
  l.texture.base = level_color(level);
  l.texture.seed = 100 + level;
  return l;
}

LayeredScene single_plane(double depth, int w = 64, int h = 24) {
  LayeredScene s;
  s.width = w;
  s.height = h;
  Layer bg = rect_layer(depth, 1, 0, 0, w, h);
  bg.background = true;
  s.layers.push_back(bg);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// Every file under `dir`, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_SUITE("scenegen") {
  TEST_CASE("generation is deterministic and honours difficulty") {
    for (auto d : {Difficulty::flat, Difficulty::layered, Difficulty::thin_structures}) {
      const auto a = generate_scene(42, d), b = generate_scene(42, d);
      const mpi::CameraRig rig;
      CHECK(render_view(a, rig, mpi::CameraPose::identity()) == render_view(b, rig, mpi::CameraPose::identity()));
      REQUIRE(a.layers.size() == b.layers.size());
      for (std::size_t i = 1; i < a.layers.size(); ++i) CHECK(a.layers[i].depth <= a.layers[i - 1].depth);
      for (const auto& l : a.layers) CHECK(l.depth > 0);
      CHECK(a.layers[0].background);
    }
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      CHECK(generate_scene(seed, Difficulty::flat).layers.size() == 1);
      const auto thin = generate_scene(seed, Difficulty::thin_structures);
      int thin_layers = 0;
      for (const auto& l : thin.layers)
        if (!l.background && l.width() <= 3) ++thin_layers;
      CHECK(thin_layers >= 3);
    }
    CHECK(parse_difficulty("thin-structures") == Difficulty::thin_structures);
    CHECK_THROWS_AS(parse_difficulty("hard"), std::invalid_argument);
  }

  TEST_CASE("flat scene has constant disparity f*b/d") {
    const auto sample = render_stereo(generate_scene(3, Difficulty::flat), mpi::CameraRig{});
    const float d0 = sample.gt_disparity_left(0, 0);
    for (float v : sample.gt_disparity_left.values()) CHECK(v == d0);

    const auto plane = render_stereo(single_plane(40.0), mpi::CameraRig::centered(64, 24, 100.0, 0.8));
    for (float v : plane.gt_disparity_left.values()) CHECK(v == doctest::Approx(100.0 * 0.8 / 40.0));
  }

  TEST_CASE("zero baseline gives identical views") {
    const auto rig = mpi::CameraRig::centered(256, 96, 120.0, 0.0);
    const auto s = render_stereo(generate_scene(5, Difficulty::layered), rig);
    CHECK(s.left == s.right);
    for (float v : s.gt_disparity_left.values()) CHECK(v == 0.0f);
    for (auto v : s.gt_occlusion_right.values()) CHECK(v == 0);
  }

  TEST_CASE("degenerate rigs are rejected") {
    mpi::CameraRig rig;
    rig.fx = 0.0;
    CHECK_THROWS_AS(render_stereo(generate_scene(1, Difficulty::flat), rig), std::invalid_argument);
  }

  TEST_CASE("occlusion band width equals the disparity difference") {
    // Background at disparity 1, a block at disparity 4: right pixels just
    // right of the block see background the left camera cannot see.
    LayeredScene s = single_plane(60.0);
    s.layers.push_back(rect_layer(15.0, 4, 20, 4, 36, 20));
    const auto sample = render_stereo(s, mpi::CameraRig::centered(64, 24));
    for (int y = 4; y < 20; ++y) {
      int band = 0;
      for (int x = 0; x < 60; ++x) band += sample.gt_occlusion_right(y, x);
      CHECK(band == 3);
      // The band sits directly right of the block as seen by the right camera (x in [16, 32)).
      for (int x = 32; x < 35; ++x) CHECK(sample.gt_occlusion_right(y, x) == 1);
    }
    for (int x = 0; x < 60; ++x) CHECK(sample.gt_occlusion_right(0, x) == 0);
  }

  TEST_CASE("render_view agrees with the stereo pair and pinhole shifts") {
    const auto scene = generate_scene(11, Difficulty::layered);
    const mpi::CameraRig rig;
    const auto s = render_stereo(scene, rig, default_novel_poses(rig));
    CHECK(render_view(scene, rig, mpi::CameraPose::identity()) == s.left);
    CHECK(render_view(scene, rig, mpi::CameraPose::right_of(rig)) == s.right);
    CHECK(s.novel_views.size() == 3);

    // Half-baseline translation on a single plane at disparity 4: shift by 2 px.
    const auto plane = single_plane(15.0);
    const auto r = mpi::CameraRig::centered(64, 24);
    const auto left = render_view(plane, r, mpi::CameraPose::identity());
    const auto half = render_view(plane, r, mpi::CameraPose::translated(-0.5 * r.baseline, 0, 0));
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x + 2 < 64; ++x)
        for (int c = 0; c < 3; ++c) CHECK(half(y, x, c) == left(y, x + 2, c));
  }

  TEST_CASE("layers outside the frustum are named") {
    const auto scene = generate_scene(2, Difficulty::layered);
    try {
      render_view(scene, mpi::CameraRig{}, mpi::CameraPose::translated(0, 0, -100.0));
      FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("layer") != std::string::npos);
    }
  }

  TEST_CASE("warping left by ground-truth disparity reproduces right on matched pixels") {
    CorpusSpec spec;
    spec.n_scenes = 12;
    spec.seed = 77;
    for (const auto& s : build_corpus(spec, 2)) {
      const auto warped = imagecore::warp_horizontal(s.left, s.gt_disparity_right);
      double worst = 0.0;
      for (int y = 0; y < s.left.height(); ++y)
        for (int x = 0; x < s.left.width(); ++x) {
          if (s.gt_occlusion_right(y, x)) continue;
          for (int c = 0; c < 3; ++c) worst = std::max(worst, double(std::abs(warped(y, x, c) - s.right(y, x, c))));
        }
      CHECK(worst <= 1e-6);
    }
  }

  TEST_CASE("occluded iff no left pixel lands on the right pixel") {
    const auto s = render_stereo(generate_scene(9, Difficulty::layered), mpi::CameraRig{});
    const int w = s.left.width(), h = s.left.height();
    for (int y = 0; y < h; ++y) {
      std::vector<int> hits(w, 0);
      // A left pixel x lands on right pixel x - d; it is the visible one there
      // only if the right camera sees the same depth.
      for (int x = 0; x < w; ++x) {
        const int xr = x - static_cast<int>(std::lround(s.gt_disparity_left(y, x)));
        if (xr >= 0 && xr < w && s.gt_disparity_right(y, xr) == s.gt_disparity_left(y, x)) ++hits[xr];
      }
      for (int x = 0; x < w; ++x) CHECK(s.gt_occlusion_right(y, x) == (hits[x] == 1 ? 0 : 1));
    }
  }

  TEST_CASE("corpus plan follows the difficulty mix") {
    CorpusSpec spec;
    spec.n_scenes = 20;
    spec.mix = DifficultyMix::parse("flat:1,layered:2,thin-structures:1");
    const auto plan = plan_corpus(spec);
    REQUIRE(plan.size() == 20);
    std::map<Difficulty, int> counts;
    for (const auto& e : plan) ++counts[e.difficulty];
    CHECK(counts[Difficulty::flat] == 5);
    CHECK(counts[Difficulty::layered] == 10);
    CHECK(counts[Difficulty::thin_structures] == 5);
    CHECK(DifficultyMix::parse(spec.mix.to_string()) == spec.mix);
    CHECK_THROWS_AS(DifficultyMix::parse("flat:0"), std::invalid_argument);
  }

  TEST_CASE("corpus files round trip and are byte-identical across runs") {
    const fs::path root = fs::temp_directory_path() / "svs_test_corpus";
    fs::remove_all(root);
    CorpusSpec spec;
    spec.n_scenes = 3;
    spec.seed = 5;
    write_corpus(spec, root / "a", 2);
    write_corpus(spec, root / "b", 1);
    CHECK(tree(root / "a") == tree(root / "b"));
    CHECK_THROWS_AS(write_corpus(spec, root / "a"), std::invalid_argument);

    const auto manifest = read_manifest(root / "a");
    REQUIRE(manifest.size() == 3);
    const auto samples = read_corpus(root / "a");
    const auto expected = build_corpus(spec);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(samples[i].seed == expected[i].seed);
      CHECK(samples[i].gt_disparity_left == expected[i].gt_disparity_left);
      CHECK(samples[i].gt_occlusion_right == expected[i].gt_occlusion_right);
      CHECK(samples[i].rig == expected[i].rig);
      CHECK(samples[i].novel_views.size() == 3);
      CHECK(imagecore::psnr(samples[i].left, expected[i].left) > 50.0);
    }
    const auto cams = read_key_values(root / "a" / manifest[0].directory / "cameras.txt");
    for (const char* key : {"fx", "fy", "cx", "cy", "baseline"}) CHECK(cams.count(key) == 1);
  }
}
