#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "svs/tinynet/train_utils.hpp"

namespace svs::tinynet {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "svs-checkpoint 1";

fs::path data_path(const fs::path& manifest) { return fs::path(manifest.string() + ".bin"); }

Shape parse_shape(const std::string& s) {
  Shape shape;
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, 'x')) shape.push_back(std::stoi(part));
  return shape;
}

std::string format_shape(const Shape& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

}  // namespace

void save_checkpoint(const FlowNet& net, const fs::path& path) {
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");
  std::ofstream manifest(path);
  std::ofstream data(data_path(path), std::ios::binary);
  if (!manifest || !data) throw std::runtime_error("cannot write checkpoint " + path.string());
  manifest << kMagic << '\n';
  manifest << "architecture " << net.architecture().describe() << '\n';
  std::size_t offset = 0;
  for (const auto& p : net.parameters()) {
    const auto values = p.tensor.values();
    manifest << "param " << p.name << ' ' << format_shape(p.tensor.shape()) << " float32 " << offset << '\n';
    data.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
    offset += values.size_bytes();
  }
  manifest << "bytes " << offset << '\n';
  if (!manifest || !data) throw std::runtime_error("failed writing checkpoint " + path.string());
}

FlowNet load_checkpoint(const fs::path& path) {
  std::ifstream manifest(path);
  if (!manifest) throw std::runtime_error("missing checkpoint " + path.string());
  std::string line;
  if (!std::getline(manifest, line) || line != kMagic)
    throw std::runtime_error(path.string() + " is not a checkpoint manifest");
  if (!std::getline(manifest, line) || line.rfind("architecture ", 0) != 0)
    throw std::runtime_error(path.string() + ": missing architecture line");
  FlowNet net = FlowNet::zeros(Architecture::parse(line.substr(13)));

  std::ifstream data(data_path(path), std::ios::binary);
  if (!data) throw std::runtime_error("missing checkpoint data " + data_path(path).string());
  std::vector<char> blob((std::istreambuf_iterator<char>(data)), std::istreambuf_iterator<char>());

  std::size_t seen = 0;
  while (std::getline(manifest, line)) {
    std::istringstream is(line);
    std::string kind;
    is >> kind;
    if (kind == "bytes") {
      std::size_t total = 0;
      is >> total;
      if (total != blob.size()) throw std::runtime_error(path.string() + ": data size does not match manifest");
      continue;
    }
    if (kind != "param") throw std::runtime_error(path.string() + ": unexpected manifest line '" + line + "'");
    std::string name, shape_text, dtype;
    std::size_t offset = 0;
    is >> name >> shape_text >> dtype >> offset;
    if (dtype != "float32") throw std::runtime_error(path.string() + ": unsupported dtype " + dtype);
    auto& tensor = net.parameter(name);
    if (parse_shape(shape_text) != tensor.shape())
      throw std::runtime_error(path.string() + ": shape of '" + name + "' does not match the architecture");
    auto values = tensor.mutable_values();
    if (offset + values.size_bytes() > blob.size()) throw std::runtime_error(path.string() + ": truncated data");
    std::memcpy(values.data(), blob.data() + offset, values.size_bytes());
    ++seen;
  }
  if (seen != net.parameters().size()) throw std::runtime_error(path.string() + ": manifest is missing parameters");
  return net;
}

}  // namespace svs::tinynet
