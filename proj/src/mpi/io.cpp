#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "svs/imagecore/io.hpp"
#include "svs/mpi/mpi.hpp"
#include "svs/scenegen/corpus.hpp"

namespace svs::mpi {

namespace fs = std::filesystem;

namespace {

std::string exact(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string plane_name(int d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "plane_%03d.png", d);
  return buf;
}

double need(const std::map<std::string, std::string>& kv, const std::string& key, const fs::path& file) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error(file.string() + ": missing key '" + key + "'");
  return std::stod(it->second);
}

}  // namespace

void save_mpi(const Mpi& mpi, const fs::path& dir) {
  mpi.validate();
  fs::create_directories(dir);
  std::map<std::string, std::string> kv{
      {"format", "svs-mpi 1"},
      {"planes", std::to_string(mpi.planes())},
      {"width", std::to_string(mpi.width())},
      {"height", std::to_string(mpi.height())},
      {"fx", exact(mpi.rig.fx)},
      {"fy", exact(mpi.rig.fy)},
      {"cx", exact(mpi.rig.cx)},
      {"cy", exact(mpi.rig.cy)},
      {"baseline", exact(mpi.rig.baseline)},
  };
  std::string depths;
  for (std::size_t i = 0; i < mpi.depths.size(); ++i) depths += (i ? "," : "") + exact(mpi.depths[i]);
  kv["depths"] = depths;
  scenegen::write_key_values(kv, dir / "manifest.txt");
  for (int d = 0; d < mpi.planes(); ++d) imagecore::save_rgba_png(mpi.colors[d], mpi.alphas[d], dir / plane_name(d), 16);
}

Mpi load_mpi(const fs::path& dir) {
  const fs::path file = dir / "manifest.txt";
  const auto kv = scenegen::read_key_values(file);
  if (auto it = kv.find("format"); it == kv.end() || it->second != "svs-mpi 1")
    throw std::runtime_error(file.string() + " is not an MPI manifest");
  Mpi m;
  m.rig = {need(kv, "fx", file), need(kv, "fy", file), need(kv, "cx", file), need(kv, "cy", file),
           need(kv, "baseline", file)};
  const int planes = int(need(kv, "planes", file));
  std::istringstream ds(kv.at("depths"));
  for (std::string part; std::getline(ds, part, ',');) m.depths.push_back(std::stod(part));
  if (int(m.depths.size()) != planes) throw std::runtime_error(file.string() + ": depth count does not match planes");
  for (int d = 0; d < planes; ++d) {
    auto [rgb, alpha] = imagecore::load_rgba_png(dir / plane_name(d));
    m.colors.push_back(std::move(rgb));
    m.alphas.push_back(std::move(alpha));
  }
  m.validate();
  return m;
}

void save_sequence(const std::vector<imagecore::Image>& frames, const std::vector<CameraPose>& poses,
                   const fs::path& dir) {
  if (frames.size() != poses.size()) throw std::invalid_argument("save_sequence: frame and pose counts differ");
  fs::create_directories(dir);
  std::ofstream out(dir / "poses.txt");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.png", k);
    imagecore::save_image(frames[k], dir / name);
    out << poses[k].to_line() << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + (dir / "poses.txt").string());
}

std::vector<CameraPose> load_poses(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<CameraPose> poses;
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    poses.push_back(CameraPose::from_line(line));
  }
  return poses;
}

}  // namespace svs::mpi
