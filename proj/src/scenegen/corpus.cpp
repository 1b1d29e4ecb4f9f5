#include "svs/scenegen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "svs/imagecore/io.hpp"
#include "svs/util/rng.hpp"

namespace svs::scenegen {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double get_double(const std::map<std::string, std::string>& kv, const std::string& key, const fs::path& file) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error(file.string() + ": missing key '" + key + "'");
  return std::stod(it->second);
}

}  // namespace

std::string DifficultyMix::to_string() const {
  std::ostringstream os;
  os << "flat:" << flat << ",layered:" << layered << ",thin-structures:" << thin_structures;
  return os.str();
}

DifficultyMix DifficultyMix::parse(const std::string& text) {
  DifficultyMix m{0.0, 0.0, 0.0};
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("difficulty mix entry '" + part + "' needs name:weight");
    const double w = std::stod(part.substr(colon + 1));
    if (!(w >= 0.0)) throw std::invalid_argument("difficulty weights must be non-negative");
    switch (parse_difficulty(part.substr(0, colon))) {
      case Difficulty::flat: m.flat = w; break;
      case Difficulty::layered: m.layered = w; break;
      case Difficulty::thin_structures: m.thin_structures = w; break;
    }
  }
  if (!(m.flat + m.layered + m.thin_structures > 0.0)) throw std::invalid_argument("difficulty mix is all zero");
  return m;
}

std::vector<ManifestEntry> plan_corpus(const CorpusSpec& spec) {
  if (spec.n_scenes < 0) throw std::invalid_argument("scene count must be non-negative");
  const double weights[3] = {spec.mix.flat, spec.mix.layered, spec.mix.thin_structures};
  const double total = weights[0] + weights[1] + weights[2];
  if (!(total > 0.0)) throw std::invalid_argument("difficulty mix is all zero");
  int counts[3];
  double rema[3];
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = spec.n_scenes * weights[i] / total;
    counts[i] = static_cast<int>(std::floor(exact));
    rema[i] = exact - counts[i];
    assigned += counts[i];
  }
  while (assigned < spec.n_scenes) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (rema[i] > rema[best]) best = i;
    ++counts[best];
    rema[best] = -1.0;
    ++assigned;
  }
  std::vector<Difficulty> order;
  for (int i = 0; i < 3; ++i) order.insert(order.end(), counts[i], static_cast<Difficulty>(i));
  util::Rng rng(util::mix64(spec.seed ^ 0x5eedc0de));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next() % i]);

  std::vector<ManifestEntry> entries;
  for (int i = 0; i < spec.n_scenes; ++i) {
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(i);
    entries.push_back({"scene_" + std::to_string(seed), seed, order[i]});
  }
  return entries;
}

mpi::CameraRig corpus_rig(const CorpusSpec& spec) {
  return mpi::CameraRig::centered(spec.scene.width, spec.scene.height, spec.focal, spec.baseline);
}

StereoSample make_sample(const ManifestEntry& entry, const CorpusSpec& spec) {
  SceneConfig sc = spec.scene;
  const auto rig = corpus_rig(spec);
  sc.focal_baseline = rig.fx * rig.baseline > 0.0 ? rig.fx * rig.baseline : sc.focal_baseline;
  const LayeredScene scene = generate_scene(entry.seed, entry.difficulty, sc);
  return render_stereo(scene, rig, default_novel_poses(rig));
}

std::vector<StereoSample> build_corpus(const CorpusSpec& spec, int jobs) {
  const auto plan = plan_corpus(spec);
  std::vector<StereoSample> samples(plan.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (int i = 0; i < static_cast<int>(plan.size()); ++i) samples[i] = make_sample(plan[i], spec);
  return samples;
}

std::vector<ManifestEntry> write_corpus(const CorpusSpec& spec, const fs::path& dir, int jobs) {
  if (fs::exists(dir) && !fs::is_empty(dir))
    throw std::invalid_argument("output directory " + dir.string() + " is not empty");
  fs::create_directories(dir);
  const auto plan = plan_corpus(spec);
  std::vector<std::string> errors(plan.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (int i = 0; i < static_cast<int>(plan.size()); ++i) {
    try {
      write_sample(make_sample(plan[i], spec), dir / plan[i].directory);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  std::ofstream manifest(dir / "manifest.txt");
  manifest << "# scene directory, seed, difficulty\n";
  manifest << "count=" << plan.size() << '\n';
  for (const auto& e : plan)
    manifest << e.directory << " seed=" << e.seed << " difficulty=" << to_string(e.difficulty) << '\n';
  if (!manifest) throw std::runtime_error("failed writing manifest in " + dir.string());
  return plan;
}

void write_sample(const StereoSample& s, const fs::path& dir) {
  fs::create_directories(dir);
  imagecore::save_image(s.left, dir / "left.png");
  imagecore::save_image(s.right, dir / "right.png");
  imagecore::save_disparity(s.gt_disparity_left, dir / "disp.pgm");
  imagecore::save_disparity(s.gt_disparity_right, dir / "disp_right.pgm");
  imagecore::save_mask(s.gt_occlusion_right, dir / "occ.pgm");
  std::map<std::string, std::string> cams{
      {"fx", format_double(s.rig.fx)},
      {"fy", format_double(s.rig.fy)},
      {"cx", format_double(s.rig.cx)},
      {"cy", format_double(s.rig.cy)},
      {"baseline", format_double(s.rig.baseline)},
      {"width", std::to_string(s.left.width())},
      {"height", std::to_string(s.left.height())},
      {"seed", std::to_string(s.seed)},
      {"difficulty", to_string(s.difficulty)},
  };
  if (s.scene) {
    cams["d_near"] = format_double(s.scene->nearest_depth());
    cams["d_far"] = format_double(s.scene->farthest_depth());
  }
  write_key_values(cams, dir / "cameras.txt");
  for (std::size_t k = 0; k < s.novel_views.size(); ++k) {
    const std::string stem = "novel_" + std::to_string(k);
    imagecore::save_image(s.novel_views[k].image, dir / (stem + ".png"));
    std::ofstream pose(dir / (stem + "_pose.txt"));
    pose << s.novel_views[k].pose.to_line() << '\n';
  }
}

StereoSample read_sample(const fs::path& dir) {
  StereoSample s;
  const auto cams = read_key_values(dir / "cameras.txt");
  const fs::path cam_file = dir / "cameras.txt";
  s.rig = {get_double(cams, "fx", cam_file), get_double(cams, "fy", cam_file), get_double(cams, "cx", cam_file),
           get_double(cams, "cy", cam_file), get_double(cams, "baseline", cam_file)};
  s.rig.validate();
  if (auto it = cams.find("seed"); it != cams.end()) s.seed = std::stoull(it->second);
  if (auto it = cams.find("difficulty"); it != cams.end()) s.difficulty = parse_difficulty(it->second);
  s.left = imagecore::load_image(dir / "left.png");
  s.right = imagecore::load_image(dir / "right.png");
  s.gt_disparity_left = imagecore::load_disparity(dir / "disp.pgm");
  if (fs::exists(dir / "disp_right.pgm")) s.gt_disparity_right = imagecore::load_disparity(dir / "disp_right.pgm");
  s.gt_occlusion_right = imagecore::load_mask(dir / "occ.pgm");
  for (int k = 0;; ++k) {
    const std::string stem = "novel_" + std::to_string(k);
    if (!fs::exists(dir / (stem + ".png"))) break;
    std::ifstream pose_file(dir / (stem + "_pose.txt"));
    std::string line;
    if (!std::getline(pose_file, line)) throw std::runtime_error("missing pose for " + (dir / stem).string());
    s.novel_views.push_back({mpi::CameraPose::from_line(line), imagecore::load_image(dir / (stem + ".png"))});
  }
  return s;
}

std::vector<ManifestEntry> read_manifest(const fs::path& corpus_dir) {
  std::ifstream in(corpus_dir / "manifest.txt");
  if (!in) throw std::runtime_error("no manifest.txt in " + corpus_dir.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("count=", 0) == 0) continue;
    std::istringstream is(line);
    ManifestEntry e;
    std::string tok;
    is >> e.directory;
    while (is >> tok) {
      if (tok.rfind("seed=", 0) == 0) e.seed = std::stoull(tok.substr(5));
      if (tok.rfind("difficulty=", 0) == 0) e.difficulty = parse_difficulty(tok.substr(11));
    }
    entries.push_back(e);
  }
  return entries;
}

std::vector<StereoSample> read_corpus(const fs::path& corpus_dir) {
  std::vector<StereoSample> out;
  for (const auto& e : read_manifest(corpus_dir)) out.push_back(read_sample(corpus_dir / e.directory));
  return out;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error(path.string() + ": expected key=value, got '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void write_key_values(const std::map<std::string, std::string>& kv, const fs::path& path) {
  std::ofstream out(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace svs::scenegen
