#include "svs/cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace svs::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

template <class I>
I to_integer(const std::string& s) {
  I v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true/false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::string mix_string(const scenegen::DifficultyMix& m) {
  return "flat:" + fmt(m.flat) + ",layered:" + fmt(m.layered) + ",thin-structures:" + fmt(m.thin_structures);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"corpus.path", [](RunConfig& c, const std::string& v) { c.corpus_path = v; }},
      {"corpus.n_scenes", [](RunConfig& c, const std::string& v) { c.n_scenes = to_integer<int>(v); }},
      {"corpus.seed", [](RunConfig& c, const std::string& v) { c.corpus_seed = to_integer<std::uint64_t>(v); }},
      {"corpus.width", [](RunConfig& c, const std::string& v) { c.width = to_integer<int>(v); }},
      {"corpus.height", [](RunConfig& c, const std::string& v) { c.height = to_integer<int>(v); }},
      {"corpus.mix", [](RunConfig& c, const std::string& v) { c.mix = scenegen::DifficultyMix::parse(v); }},
      {"corpus.baseline", [](RunConfig& c, const std::string& v) { c.baseline = to_double(v); }},
      {"corpus.focal", [](RunConfig& c, const std::string& v) { c.focal = to_double(v); }},

      {"rectifier.prune_fraction", [](RunConfig& c, const std::string& v) { c.rectifier.prune_fraction = to_double(v); }},
      {"rectifier.fusion_threshold",
       [](RunConfig& c, const std::string& v) { c.rectifier.fusion_threshold = to_double(v); }},
      {"rectifier.inpaint",
       [](RunConfig& c, const std::string& v) { c.rectifier.inpaint = stereosynth::parse_inpaint_method(v); }},
      {"rectifier.lambda_rec", [](RunConfig& c, const std::string& v) { c.rectifier.lambda_rec = to_double(v); }},
      {"rectifier.lambda_adv", [](RunConfig& c, const std::string& v) { c.rectifier.lambda_adv = to_double(v); }},
      {"rectifier.close_mask", [](RunConfig& c, const std::string& v) { c.rectifier.close_mask = to_bool(v); }},
      {"rectifier.per_layer_pruning",
       [](RunConfig& c, const std::string& v) { c.rectifier.per_layer_pruning = to_bool(v); }},

      {"mpi.planes", [](RunConfig& c, const std::string& v) { c.mpi.planes = to_integer<int>(v); }},
      {"mpi.d_near", [](RunConfig& c, const std::string& v) { c.mpi.d_near = to_double(v); }},
      {"mpi.d_far", [](RunConfig& c, const std::string& v) { c.mpi.d_far = to_double(v); }},
      {"mpi.temperature", [](RunConfig& c, const std::string& v) { c.mpi.temperature = to_double(v); }},
      {"mpi.cost_radius", [](RunConfig& c, const std::string& v) { c.mpi.cost_radius = to_integer<int>(v); }},

      {"train.arch", [](RunConfig& c, const std::string& v) { c.train.arch = tinynet::Architecture::parse(v).describe(); }},
      {"train.lr", [](RunConfig& c, const std::string& v) { c.train.lr = to_double(v); }},
      {"train.epochs_w", [](RunConfig& c, const std::string& v) { c.train.epochs_w = to_integer<int>(v); }},
      {"train.epochs_b", [](RunConfig& c, const std::string& v) { c.train.epochs_b = to_integer<int>(v); }},
      {"train.batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = to_integer<int>(v); }},
      {"train.blur_start", [](RunConfig& c, const std::string& v) { c.train.blur_start = to_double(v); }},
      {"train.blur_epochs", [](RunConfig& c, const std::string& v) { c.train.blur_epochs = to_integer<int>(v); }},
      {"train.seed", [](RunConfig& c, const std::string& v) { c.train.seed = to_integer<std::uint64_t>(v); }},
      {"train.checkpoint_dir", [](RunConfig& c, const std::string& v) { c.train.checkpoint_dir = v; }},

      {"evaluate.crop", [](RunConfig& c, const std::string& v) { c.evaluate.crop = to_double(v); }},
      {"evaluate.metrics", [](RunConfig& c, const std::string& v) { c.evaluate.metrics = split_list(v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  try {
    if (n_scenes < 1) throw std::invalid_argument("corpus.n_scenes must be >= 1");
    if (width < 8 || height < 8) throw std::invalid_argument("corpus.width and corpus.height must be >= 8");
    if (width % tinynet::FlowNet::kDownsampleFactor || height % tinynet::FlowNet::kDownsampleFactor)
      throw std::invalid_argument("corpus.width and corpus.height must be multiples of " +
                                  std::to_string(tinynet::FlowNet::kDownsampleFactor));
    if (!(mix.flat >= 0 && mix.layered >= 0 && mix.thin_structures >= 0) ||
        mix.flat + mix.layered + mix.thin_structures <= 0)
      throw std::invalid_argument("corpus.mix needs non-negative weights with a positive sum");
    rig(width, height).validate();
    rectifier.validate();
    mpi.validate();
    if (train.batch_size != 1) throw std::invalid_argument("train.batch_size must be 1");
    train_config().validate();
    if (!(evaluate.crop >= 0.0 && evaluate.crop < 0.5)) throw std::invalid_argument("evaluate.crop must be in [0, 0.5)");
    if (evaluate.metrics.empty()) throw std::invalid_argument("evaluate.metrics is empty");
    for (const auto& m : evaluate.metrics)
      if (m != "psnr" && m != "ssim") throw std::invalid_argument("unknown metric '" + m + "'");
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

scenegen::CorpusSpec RunConfig::corpus_spec() const {
  scenegen::CorpusSpec spec;
  spec.n_scenes = n_scenes;
  spec.seed = corpus_seed;
  spec.mix = mix;
  spec.scene.width = width;
  spec.scene.height = height;
  spec.baseline = baseline;
  spec.focal = focal;
  return spec;
}

mpi::CameraRig RunConfig::rig(int w, int h) const { return mpi::CameraRig::centered(w, h, focal, baseline); }

stereosynth::TrainConfig RunConfig::train_config() const {
  stereosynth::TrainConfig tc;
  tc.arch = tinynet::Architecture::parse(train.arch);
  tc.epochs_w = train.epochs_w;
  tc.epochs_b = train.epochs_b;
  tc.lr = train.lr;
  tc.seed = train.seed;
  tc.blur_start = train.blur_start;
  tc.blur_epochs = train.blur_epochs;
  tc.checkpoint_dir = train.checkpoint_dir;
  return tc;
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  auto metrics = std::string{};
  for (std::size_t i = 0; i < evaluate.metrics.size(); ++i) metrics += (i ? "," : "") + evaluate.metrics[i];
  os << "[corpus]\n"
     << "path = " << corpus_path.string() << "\n"
     << "n_scenes = " << n_scenes << "\n"
     << "seed = " << corpus_seed << "\n"
     << "width = " << width << "\n"
     << "height = " << height << "\n"
     << "mix = " << mix_string(mix) << "\n"
     << "baseline = " << fmt(baseline) << "\n"
     << "focal = " << fmt(focal) << "\n\n"
     << "[rectifier]\n"
     << "prune_fraction = " << fmt(rectifier.prune_fraction) << "\n"
     << "fusion_threshold = " << fmt(rectifier.fusion_threshold) << "\n"
     << "inpaint = " << stereosynth::to_string(rectifier.inpaint) << "\n"
     << "lambda_rec = " << fmt(rectifier.lambda_rec) << "\n"
     << "lambda_adv = " << fmt(rectifier.lambda_adv) << "\n"
     << "close_mask = " << (rectifier.close_mask ? "true" : "false") << "\n"
     << "per_layer_pruning = " << (rectifier.per_layer_pruning ? "true" : "false") << "\n\n"
     << "[mpi]\n"
     << "planes = " << mpi.planes << "\n"
     << "d_near = " << fmt(mpi.d_near) << "\n"
     << "d_far = " << fmt(mpi.d_far) << "\n"
     << "temperature = " << fmt(mpi.temperature) << "\n"
     << "cost_radius = " << mpi.cost_radius << "\n\n"
     << "[train]\n"
     << "arch = " << train.arch << "\n"
     << "lr = " << fmt(train.lr) << "\n"
     << "epochs_w = " << train.epochs_w << "\n"
     << "epochs_b = " << train.epochs_b << "\n"
     << "batch_size = " << train.batch_size << "\n"
     << "blur_start = " << fmt(train.blur_start) << "\n"
     << "blur_epochs = " << train.blur_epochs << "\n"
     << "seed = " << train.seed << "\n"
     << "checkpoint_dir = " << train.checkpoint_dir.string() << "\n\n"
     << "[evaluate]\n"
     << "crop = " << fmt(evaluate.crop) << "\n"
     << "metrics = " << metrics << "\n";
  return os.str();
}

RunConfig default_config() {
  RunConfig c;
  const char* root = std::getenv("SVS_CORPUS_ROOT");
  c.corpus_path = root && *root ? std::filesystem::path(root) : std::filesystem::path("corpus");
  return c;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg = default_config();
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError(where + "unknown key '" + key + "'");
    try {
      it->second(cfg, trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw ValidationError(where + key + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << cfg.serialize();
}

}  // namespace svs::cli
