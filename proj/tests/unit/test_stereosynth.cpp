#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "svs/imagecore/ops.hpp"
#include "svs/scenegen/corpus.hpp"
#include "svs/stereosynth/pipeline.hpp"
#include "svs/stereosynth/train.hpp"
#include "svs/tinynet/train_utils.hpp"
#include "svs/util/rng.hpp"

using namespace svs;
using namespace svs::stereosynth;
using imagecore::BinaryMask;
using imagecore::ConfidenceMap;
using imagecore::FlowField;
using imagecore::Image;
namespace fs = std::filesystem;

namespace {

ConfidenceMap random_map(int h, int w, std::uint64_t seed) {
  util::Rng rng(seed);
  ConfidenceMap m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(y, x, float(rng.uniform()));
  return m;
}

Image random_image(int h, int w, std::uint64_t seed) {
  util::Rng rng(seed);
  Image img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.set(y, x, c, float(rng.uniform()));
  return img;
}

BinaryMask square_mask(int h, int w, int y0, int x0, int size) {
  BinaryMask m(h, w);
  for (int y = y0; y < y0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x) m.set(y, x, 1);
  return m;
}

scenegen::StereoSample flat_sample(int level, int w, int h, std::uint64_t seed, double baseline = 0.5) {
  scenegen::SceneConfig sc;
  sc.width = w;
  sc.height = h;
  auto scene = scenegen::generate_scene(seed, scenegen::Difficulty::flat, sc);
  scene = scenegen::snap_to_depths(scene, {sc.focal_baseline / level});
  return scenegen::render_stereo(scene, mpi::CameraRig::centered(w, h, 120.0, baseline));
}

tinynet::Architecture small_arch() { return tinynet::Architecture::parse("widths=6,8,8,8"); }

}  // namespace

TEST_SUITE("stereosynth") {
  TEST_CASE("config validation") {
    RectifierConfig cfg;
    CHECK(cfg.prune_fraction == 0.5);
    CHECK(cfg.fusion_threshold == 0.9);
    CHECK(cfg.lambda_rec == 1.0);
    CHECK(cfg.lambda_adv == 0.1);
    CHECK_NOTHROW(cfg.validate());
    cfg.prune_fraction = 1.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.fusion_threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(parse_inpaint_method("diffusion") == InpaintMethod::diffusion);
    CHECK_THROWS_AS(parse_inpaint_method("gan"), std::invalid_argument);
    CHECK(parse_variant(to_string(Variant::bidirectional_only)) == Variant::bidirectional_only);
  }

  TEST_CASE("fusion threshold is strict") {
    CHECK(fuse_masks(ConfidenceMap(4, 5, 0.5f), ConfidenceMap(4, 5, 0.5f), 0.9) == BinaryMask(4, 5, 1));
    CHECK(fuse_masks(ConfidenceMap(4, 5, 0.45f), ConfidenceMap(4, 5, 0.45f), 0.9) == BinaryMask(4, 5, 0));
    CHECK(fuse_masks(ConfidenceMap(4, 5, 0.0f), ConfidenceMap(4, 5, 0.0f), 0.9) == BinaryMask(4, 5, 0));
    CHECK_THROWS_AS(fuse_masks(ConfidenceMap(4, 5), ConfidenceMap(5, 4), 0.9), std::invalid_argument);
  }

  TEST_CASE("fusion is monotone over a 16x16 grid") {
    // Every (dp, db) pair on the grid; raising either value never clears the mask.
    const int n = 16;
    ConfidenceMap p(n, n), b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        p.set(i, j, float(i) / (n - 1));
        b.set(i, j, float(j) / (n - 1));
      }
    const auto m = fuse_masks(p, b, 0.9);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        CHECK(m(i, j) == (double(p(i, j)) + double(b(i, j)) > 0.9 ? 1 : 0));
        if (i + 1 < n) CHECK(m(i + 1, j) >= m(i, j));
        if (j + 1 < n) CHECK(m(i, j + 1) >= m(i, j));
      }
  }

  TEST_CASE("closing fills pinholes and never clears") {
    BinaryMask m = square_mask(10, 10, 2, 2, 5);
    m.set(4, 4, 0);
    m.set(9, 0, 1);
    const auto c = close_mask(m);
    CHECK(c(4, 4) == 1);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m.values()[i]) CHECK(c.values()[i] == 1);
    CHECK(c(0, 9) == 0);
    CHECK(close_mask(BinaryMask(6, 6, 0)) == BinaryMask(6, 6, 0));
  }

  TEST_CASE("trace-back transport") {
    const auto left = random_map(6, 12, 3);
    CHECK(trace_back(left, FlowField(6, 12, 0.0f)) == left);

    const auto shifted = trace_back(left, FlowField(6, 12, 3.0f));
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 3; ++x) CHECK(shifted(y, x) == 1.0f);  // no left pixel lands here
      for (int x = 3; x < 12; ++x) CHECK(shifted(y, x) == left(y, x - 3));
    }

    // Half-pixel flow: each right pixel receives two half-weight deposits.
    const auto half = trace_back(left, FlowField(6, 12, 0.5f));
    for (int y = 0; y < 6; ++y)
      for (int x = 1; x < 12; ++x) CHECK(half(y, x) == std::max(left(y, x - 1), left(y, x)));

    // Collisions keep the maximum.
    ConfidenceMap one(1, 4, 0.0f);
    one.set(0, 1, 0.3f);
    one.set(0, 2, 0.8f);
    auto flow = FlowField::from_values(1, 4, {0.0f, 1.0f, 0.0f, 0.0f});
    const auto col = trace_back(one, flow);
    CHECK(col(0, 2) == 0.8f);
    CHECK(col(0, 1) == 1.0f);
  }

  TEST_CASE("bidirectional confidence with oracle flows localizes occlusions") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      const auto s = scenegen::render_stereo(scenegen::generate_scene(seed, scenegen::Difficulty::layered),
                                             mpi::CameraRig::centered(256, 96));
      FlowField b(96, 256);
      for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 256; ++x) b.set(y, x, -s.gt_disparity_left(y, x));
      const auto r = bidirectional_confidence(b, s.right, s.left);
      double occ = 0, vis = 0;
      long n_occ = 0, n_vis = 0;
      for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 256; ++x) {
          if (s.gt_occlusion_right(y, x))
            occ += r.delta_b(y, x), ++n_occ;
          else
            vis += r.delta_b(y, x), ++n_vis;
        }
      REQUIRE(n_occ > 0);
      CHECK(vis / n_vis < 0.02);
      CHECK(occ / n_occ >= 5.0 * vis / n_vis);
    }
  }

  TEST_CASE("pruning confidence") {
    const auto net = tinynet::FlowNet::initialize(small_arch(), 4);
    const auto before = net.clone();
    const auto img = random_image(16, 32, 9);
    const auto zero = pruning_confidence(net, img, 0.0);
    CHECK(zero.delta_p == ConfidenceMap(16, 32, 0.0f));
    CHECK(zero.pruned == zero.warped);
    const auto half = pruning_confidence(net, img, 0.5);
    CHECK(half.warped == zero.warped);
    for (float v : half.delta_p.values()) CHECK((v >= 0.0f && v <= 1.0f));
    for (std::size_t i = 0; i < net.parameters().size(); ++i)
      CHECK(std::ranges::equal(net.parameters()[i].tensor.values(), before.parameters()[i].tensor.values()));
  }

  TEST_CASE("inpainting contract") {
    const auto img = random_image(20, 30, 5);
    CHECK(inpaint(img, BinaryMask(20, 30, 0)) == img);
    CHECK_THROWS_AS(inpaint(img, BinaryMask(20, 30, 1)), std::invalid_argument);
    CHECK_THROWS_AS(inpaint(img, BinaryMask(20, 31, 0)), std::invalid_argument);

    const Image flat(20, 30, 3, 0.37f);
    CHECK(inpaint(flat, square_mask(20, 30, 3, 4, 9)) == flat);

    // Harmonic fill of a linear boundary is linear.
    Image ramp(40, 60, 1);
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 60; ++x) ramp.set(y, x, 0, float(0.1 + 0.8 * x / 59.0));
    const auto mask = square_mask(40, 60, 12, 22, 16);
    InpaintReport rep;
    const auto filled = inpaint(ramp, mask, {}, &rep);
    CHECK_FALSE(rep.degraded);
    CHECK(rep.last_change < 1e-4);
    double worst = 0;
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 60; ++x) worst = std::max(worst, double(std::abs(filled(y, x) - ramp(y, x))));
    CHECK(worst < 0.05);

    // Known pixels farther than the band from the hole are untouched.
    const auto noisy = inpaint(img, square_mask(20, 30, 5, 5, 6));
    const auto dist = mask_distance(square_mask(20, 30, 5, 5, 6), 2);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 30; ++x)
        if (dist[std::size_t(y) * 30 + x] > 2)
          for (int c = 0; c < 3; ++c) CHECK(noisy(y, x, c) == img(y, x, c));

    inpaint(img, square_mask(20, 30, 0, 0, 20), {}, &rep);
    CHECK(rep.degraded);
  }

  TEST_CASE("synthesize keeps confident pixels") {
    const auto f_w = tinynet::FlowNet::initialize(small_arch(), 1);
    const auto f_b = tinynet::FlowNet::initialize(small_arch(), 2);
    const auto left = random_image(16, 32, 8);
    RectifierConfig cfg;
    const auto base = synthesize(left, f_w, f_b, cfg, Variant::baseline);
    CHECK(base.final == base.warped);
    CHECK(base.mask == BinaryMask(16, 32, 0));

    cfg.fusion_threshold = 5.0;  // above any possible sum
    const auto confident = synthesize(left, f_w, f_b, cfg);
    CHECK(confident.final == confident.warped);

    cfg = {};
    cfg.fusion_threshold = 0.3;
    const auto full = synthesize(left, f_w, f_b, cfg);
    CHECK(full.warped == base.warped);
    const auto dist = mask_distance(full.mask, 2);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 32; ++x)
        if (dist[std::size_t(y) * 32 + x] > 2)
          for (int c = 0; c < 3; ++c) CHECK(full.final(y, x, c) == full.warped(y, x, c));
  }

  TEST_CASE("training on a flat scene recovers its disparity") {
    const auto s = flat_sample(3, 64, 32, 21);
    TrainConfig tc;
    tc.arch = small_arch();
    tc.lr = 3e-3;
    tc.epochs_w = 300;
    tc.epochs_b = 1;
    tc.blur_start = 3.0;
    tc.blur_epochs = 100;
    const auto r = train_pair_networks({s}, {}, tc);
    const auto flow = r.f_w.forward(s.left);
    long good = 0, total = 0;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 64; ++x)
        if (!s.gt_occlusion_right(y, x)) good += std::abs(flow(y, x) - 3.0f) <= 0.25f, ++total;
    CHECK(double(good) / double(total) >= 0.95);
  }

  TEST_CASE("zero baseline trains towards zero flow") {
    const auto s = flat_sample(3, 64, 32, 22, 0.0);
    TrainConfig tc;
    tc.arch = small_arch();
    tc.lr = 3e-3;
    tc.epochs_w = 100;
    tc.epochs_b = 1;
    const auto r = train_pair_networks({s}, {}, tc);
    double mean = 0;
    const auto flow = r.f_w.forward(s.left);
    for (float v : flow.values()) mean += std::abs(v);
    CHECK(mean / (64 * 32) < 0.1);
  }

  TEST_CASE("losses fall on a layered corpus") {
    scenegen::CorpusSpec spec;
    spec.n_scenes = 4;
    spec.scene.width = 64;
    spec.scene.height = 32;
    spec.mix = scenegen::DifficultyMix::parse("layered:1");
    const auto corpus = scenegen::build_corpus(spec);
    TrainConfig tc;
    tc.arch = small_arch();
    tc.lr = 1e-3;
    tc.epochs_w = 50;  // 200 steps
    tc.epochs_b = 50;
    std::vector<TrainLogEntry> seen;
    const auto r = train_pair_networks(corpus, {}, tc, [&](const TrainLogEntry& e) { seen.push_back(e); });
    CHECK(seen.size() == 400);
    CHECK(r.log.size() == 400);
    CHECK(r.w_after_first_epoch < r.w_initial);
    CHECK(r.b_after_first_epoch < r.b_initial);
    double first = 0, last = 0;
    for (int i = 0; i < 4; ++i) first += r.log[i].loss, last += r.log[196 + i].loss;
    CHECK(last < first);
    CHECK(std::isfinite(r.rectified_l1));
  }

  TEST_CASE("training is deterministic and aborts on NaN with a checkpoint kept") {
    const auto s = flat_sample(2, 32, 16, 5);
    TrainConfig tc;
    tc.arch = small_arch();
    tc.epochs_w = 3;
    tc.epochs_b = 2;
    tc.lr = 1e-3;
    const auto a = train_pair_networks({s}, {}, tc);
    const auto b = train_pair_networks({s}, {}, tc);
    for (std::size_t i = 0; i < a.f_b.parameters().size(); ++i)
      CHECK(std::ranges::equal(a.f_b.parameters()[i].tensor.values(), b.f_b.parameters()[i].tensor.values()));

    auto bad = s;
    std::vector<float> v(bad.right.values().begin(), bad.right.values().end());
    v[7] = NAN;
    bad.right = Image::from_values(16, 32, 3, v);
    const fs::path dir = fs::temp_directory_path() / "svs_train_nan";
    fs::remove_all(dir);
    tc.checkpoint_dir = dir;
    try {
      train_pair_networks({s, bad}, {}, tc);
      FAIL("expected TrainingAborted");
    } catch (const TrainingAborted& e) {
      REQUIRE(!e.last_good().empty());
      CHECK(fs::exists(e.last_good()));
      CHECK_NOTHROW(tinynet::load_checkpoint(e.last_good()));
    }
    fs::remove_all(dir);

    CHECK_THROWS_AS(train_pair_networks({}, {}, tc), std::invalid_argument);
  }

  TEST_CASE("ablation report layout") {
    scenegen::CorpusSpec spec;
    spec.n_scenes = 2;
    spec.scene.width = 32;
    spec.scene.height = 16;
    const auto corpus = scenegen::build_corpus(spec);
    const auto f_w = tinynet::FlowNet::initialize(small_arch(), 1);
    const auto f_b = tinynet::FlowNet::initialize(small_arch(), 2);
    const auto rep = run_ablation(corpus, f_w, f_b, {});
    REQUIRE(rep.rows.size() == 9);
    CHECK(rep.rows[0].name == "baseline");
    CHECK(rep.rows[3].name == "complete");
    CHECK(rep.rows[8].prune_fraction == doctest::Approx(0.9));
    CHECK(format_ablation(rep).find("complete@p=0.5") != std::string::npos);
  }
}
