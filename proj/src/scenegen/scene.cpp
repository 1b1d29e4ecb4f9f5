#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "svs/scenegen/scene.hpp"
#include "svs/util/rng.hpp"

namespace svs::scenegen {

namespace {

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long floor_mod(long a, long b) { return a - floor_div(a, b) * b; }

// Up to six appearance classes, pairwise separated in (r - g, g - b).
constexpr std::array<std::array<double, 3>, 6> kPalette{{
    {0.40, 0.55, 0.80},
    {0.40, 0.70, 0.35},
    {0.80, 0.55, 0.25},
    {0.70, 0.30, 0.70},
    {0.30, 0.65, 0.65},
    {0.80, 0.30, 0.30},
}};

Texture random_texture(util::Rng& rng, int level) {
  Texture t;
  t.kind = static_cast<TextureKind>(rng.integer(0, 2));
  t.base = level_color(level);
  t.amplitude = 0.15;
  t.period = rng.integer(4, 8);
  t.seed = rng.next();
  return t;
}

Layer make_background(util::Rng& rng, const SceneConfig& cfg) {
  Layer bg;
  bg.background = true;
  bg.level = rng.integer(1, 2);
  bg.depth = cfg.focal_baseline / bg.level;
  bg.x0 = 0;
  bg.y0 = 0;
  bg.x1 = cfg.width;
  bg.y1 = cfg.height;
  bg.texture = random_texture(rng, bg.level);
  return bg;
}

// `count` distinct levels drawn from (lo, max_level], ascending.
std::vector<int> distinct_levels(util::Rng& rng, int lo, int max_level, int count) {
  std::vector<int> pool;
  for (int k = lo + 1; k <= max_level; ++k) pool.push_back(k);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.next() % i]);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(count)));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Layer make_rect(util::Rng& rng, const SceneConfig& cfg, int level, int w, int h) {
  Layer l;
  l.level = level;
  l.depth = cfg.focal_baseline / level;
  w = std::min(w, cfg.width);
  h = std::min(h, cfg.height);
  l.x0 = rng.integer(0, cfg.width - w);
  l.y0 = rng.integer(0, cfg.height - h);
  l.x1 = l.x0 + w;
  l.y1 = l.y0 + h;
  l.texture = random_texture(rng, level);
  return l;
}

}  // namespace

std::string to_string(Difficulty d) {
  switch (d) {
    case Difficulty::flat: return "flat";
    case Difficulty::layered: return "layered";
    case Difficulty::thin_structures: return "thin-structures";
  }
  return "?";
}

Difficulty parse_difficulty(const std::string& s) {
  if (s == "flat") return Difficulty::flat;
  if (s == "layered") return Difficulty::layered;
  if (s == "thin-structures" || s == "thin_structures" || s == "thin") return Difficulty::thin_structures;
  throw std::invalid_argument("unknown difficulty '" + s + "' (expected flat, layered or thin-structures)");
}

std::array<double, 3> level_color(int level) {
  if (level < 1) throw std::invalid_argument("appearance level must be >= 1");
  return kPalette[static_cast<std::size_t>(level - 1) % kPalette.size()];
}

double Texture::lattice(long i, long j) const {
  const std::uint64_t h =
      util::mix64(seed ^ util::mix64(static_cast<std::uint64_t>(i) * 0x9E3779B1ULL + static_cast<std::uint64_t>(j)));
  const double noise = util::unit_interval(h);
  switch (kind) {
    case TextureKind::noise: return noise;
    case TextureKind::checker: {
      const long cell = floor_div(i, period) + floor_div(j, period);
      return 0.5 * static_cast<double>(floor_mod(cell, 2)) + 0.5 * noise;
    }
    case TextureKind::ramp:
      return 0.5 * static_cast<double>(floor_mod(i, period)) / static_cast<double>(period - 1) + 0.5 * noise;
  }
  return noise;
}

std::array<float, 3> Texture::color(double u, double v) const {
  const double fu = std::floor(u), fv = std::floor(v);
  const long i = static_cast<long>(fu), j = static_cast<long>(fv);
  const double a = u - fu, b = v - fv;
  double p = (1 - a) * (1 - b) * lattice(i, j);
  if (a > 0) p += a * (1 - b) * lattice(i + 1, j);
  if (b > 0) p += (1 - a) * b * lattice(i, j + 1);
  if (a > 0 && b > 0) p += a * b * lattice(i + 1, j + 1);
  std::array<float, 3> out{};
  for (int c = 0; c < 3; ++c)
    out[c] = static_cast<float>(std::clamp(base[c] + amplitude * (2.0 * p - 1.0), 0.0, 1.0));
  return out;
}

bool Layer::covers(double x, double y) const {
  if (background) return true;
  return x >= x0 - 0.5 && x < x1 - 0.5 && y >= y0 - 0.5 && y < y1 - 0.5;
}

double LayeredScene::nearest_depth() const {
  double d = layers.at(0).depth;
  for (const auto& l : layers) d = std::min(d, l.depth);
  return d;
}

double LayeredScene::farthest_depth() const {
  double d = layers.at(0).depth;
  for (const auto& l : layers) d = std::max(d, l.depth);
  return d;
}

LayeredScene generate_scene(std::uint64_t seed, Difficulty difficulty, const SceneConfig& cfg) {
  if (cfg.width < 8 || cfg.height < 8) throw std::invalid_argument("scene must be at least 8x8");
  if (cfg.max_level < 3) throw std::invalid_argument("scene needs at least three appearance levels");
  util::Rng rng(util::mix64(seed) ^ (static_cast<std::uint64_t>(difficulty) + 1));
  LayeredScene scene;
  scene.width = cfg.width;
  scene.height = cfg.height;
  scene.seed = seed;
  scene.difficulty = difficulty;
  scene.layers.push_back(make_background(rng, cfg));
  const int bg_level = scene.layers[0].level;

  switch (difficulty) {
    case Difficulty::flat: break;
    case Difficulty::layered: {
      const auto levels = distinct_levels(rng, bg_level, cfg.max_level, rng.integer(2, 3));
      for (int level : levels)
        scene.layers.push_back(make_rect(rng, cfg, level, rng.integer(cfg.width / 8, cfg.width / 4),
                                         rng.integer(cfg.height / 5, cfg.height / 2)));
      break;
    }
    case Difficulty::thin_structures: {
      // Optional mid-ground block, then 3-4 bars 1-3 px wide in separate horizontal slots.
      const auto levels = distinct_levels(rng, bg_level, cfg.max_level, 4);
      std::vector<Layer> layers;
      const int bars = std::min<int>(rng.integer(3, 4), static_cast<int>(levels.size()));
      const int slot = cfg.width / bars;
      for (int b = 0; b < bars; ++b) {
        Layer bar;
        bar.level = levels[levels.size() - 1 - b];
        bar.depth = cfg.focal_baseline / bar.level;
        const int w = rng.integer(1, 3);
        const int h = rng.integer(cfg.height / 3, cfg.height * 5 / 6);
        bar.x0 = b * slot + rng.integer(slot / 4, std::max(slot / 4, slot * 3 / 4 - w));
        bar.x1 = bar.x0 + w;
        bar.y0 = rng.integer(0, cfg.height - h);
        bar.y1 = bar.y0 + h;
        bar.texture = random_texture(rng, bar.level);
        layers.push_back(bar);
      }
      if (rng.uniform() < 0.5 && levels.size() > static_cast<std::size_t>(bars)) {
        layers.push_back(make_rect(rng, cfg, levels.front(), rng.integer(cfg.width / 8, cfg.width / 5),
                                   rng.integer(cfg.height / 5, cfg.height / 3)));
      }
      std::stable_sort(layers.begin(), layers.end(), [](const Layer& a, const Layer& b) { return a.depth > b.depth; });
      scene.layers.insert(scene.layers.end(), layers.begin(), layers.end());
      break;
    }
  }
  return scene;
}

LayeredScene snap_to_depths(LayeredScene scene, const std::vector<double>& depths) {
  if (depths.empty()) throw std::invalid_argument("snap_to_depths: no depths");
  for (auto& l : scene.layers) {
    double best = depths.front();
    for (double d : depths)
      if (std::abs(1.0 / d - 1.0 / l.depth) < std::abs(1.0 / best - 1.0 / l.depth)) best = d;
    l.depth = best;
  }
  std::stable_sort(scene.layers.begin() + 1, scene.layers.end(),
                   [](const Layer& a, const Layer& b) { return a.depth > b.depth; });
  return scene;
}

}  // namespace svs::scenegen
