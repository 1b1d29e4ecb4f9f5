#include "svs/imagecore/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace svs::imagecore {

namespace fs = std::filesystem;

namespace {

// Interleaved samples at a given bit depth, before mapping to [0, 1].
struct RawImage {
  int height = 0;
  int width = 0;
  int channels = 0;
  int max_value = 255;
  std::vector<std::uint16_t> samples;
};

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return e;
}

std::uint16_t quantize(float v, int max_value) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * max_value));
}

void check_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw std::invalid_argument("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw ImageIoError("cannot open " + path.string());
  return f;
}

// --- PNG -------------------------------------------------------------------

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}
void png_warning_fn(png_structp, png_const_charp) {}

RawImage read_png(const fs::path& path) {
  auto file = open_file(path, "rb");
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!png) throw ImageIoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  RawImage raw;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("corrupt or truncated PNG " + path.string() + ": " + err);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.max_value = depth == 16 ? 65535 : 255;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    raw.samples[i] = depth == 16 ? static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]) : buffer[i];
  return raw;
}

void write_png(const RawImage& raw, const fs::path& path) {
  const int depth = raw.max_value > 255 ? 16 : 8;
  int color = PNG_COLOR_TYPE_GRAY;
  switch (raw.channels) {
    case 1: color = PNG_COLOR_TYPE_GRAY; break;
    case 2: color = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color = PNG_COLOR_TYPE_RGB; break;
    case 4: color = PNG_COLOR_TYPE_RGB_ALPHA; break;
    default: throw std::invalid_argument("unsupported PNG channel count");
  }
  const std::size_t rowbytes = static_cast<std::size_t>(raw.width) * raw.channels * (depth / 8);
  std::vector<unsigned char> buffer(rowbytes * raw.height);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    if (depth == 16) {
      buffer[2 * i] = static_cast<unsigned char>(raw.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<unsigned char>(raw.samples[i] & 0xff);
    } else {
      buffer[i] = static_cast<unsigned char>(raw.samples[i]);
    }
  }
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;

  auto file = open_file(path, "wb");
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!png) throw ImageIoError("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError("failed writing PNG " + path.string() + ": " + err);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, raw.width, raw.height, depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// --- Netpbm ----------------------------------------------------------------

std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

RawImage read_netpbm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open " + path.string());
  const std::string magic = next_token(in);
  RawImage raw;
  if (magic == "P6")
    raw.channels = 3;
  else if (magic == "P5")
    raw.channels = 1;
  else
    throw ImageIoError("unsupported netpbm format '" + magic + "' in " + path.string() + " (expected P5 or P6)");
  try {
    raw.width = std::stoi(next_token(in));
    raw.height = std::stoi(next_token(in));
    raw.max_value = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw ImageIoError("malformed netpbm header in " + path.string());
  }
  if (raw.width <= 0 || raw.height <= 0 || raw.max_value <= 0 || raw.max_value > 65535)
    throw ImageIoError("invalid netpbm header values in " + path.string());
  // The single whitespace byte after maxval was consumed by next_token.
  const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  const std::size_t bytes = raw.max_value > 255 ? 2 : 1;
  std::vector<unsigned char> buffer(count * bytes);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::size_t>(in.gcount()) != buffer.size())
    throw ImageIoError("truncated netpbm data in " + path.string() + ": expected " + std::to_string(buffer.size()) +
                       " bytes, got " + std::to_string(in.gcount()));
  raw.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    raw.samples[i] =
        bytes == 2 ? static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]) : buffer[i];
  return raw;
}

void write_netpbm(const RawImage& raw, const fs::path& path) {
  if (raw.channels != 1 && raw.channels != 3) throw std::invalid_argument("netpbm supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot open " + path.string() + " for writing");
  out << (raw.channels == 3 ? "P6" : "P5") << '\n' << raw.width << ' ' << raw.height << '\n' << raw.max_value << '\n';
  for (auto s : raw.samples) {
    if (raw.max_value > 255) out.put(static_cast<char>(s >> 8));
    out.put(static_cast<char>(s & 0xff));
  }
  if (!out) throw ImageIoError("failed writing " + path.string());
}

RawImage read_raw(const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_netpbm(path);
  throw ImageIoError("unsupported image format '" + ext + "' for " + path.string());
}

void write_raw(const RawImage& raw, const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return write_png(raw, path);
  if (ext == ".ppm" || ext == ".pgm") {
    if ((ext == ".ppm") != (raw.channels == 3))
      throw std::invalid_argument(path.string() + ": .ppm needs 3 channels and .pgm needs 1");
    return write_netpbm(raw, path);
  }
  throw ImageIoError("unsupported image format '" + ext + "' for " + path.string());
}

RawImage single_channel(const RawImage& raw, const fs::path& path) {
  if (raw.channels == 1) return raw;
  if (raw.channels == 2) {
    RawImage g = raw;
    g.channels = 1;
    g.samples.resize(static_cast<std::size_t>(raw.width) * raw.height);
    for (std::size_t i = 0; i < g.samples.size(); ++i) g.samples[i] = raw.samples[2 * i];
    return g;
  }
  throw ImageIoError(path.string() + ": expected a single-channel map");
}

}  // namespace

Image load_image(const fs::path& path) {
  const RawImage raw = read_raw(path);
  const int out_channels = raw.channels >= 3 ? 3 : 1;
  std::vector<float> values(static_cast<std::size_t>(raw.width) * raw.height * out_channels);
  const float scale = 1.0f / static_cast<float>(raw.max_value);
  for (std::size_t p = 0; p < static_cast<std::size_t>(raw.width) * raw.height; ++p)
    for (int c = 0; c < out_channels; ++c)
      values[p * out_channels + c] = static_cast<float>(raw.samples[p * raw.channels + c]) * scale;
  return Image::from_values(raw.height, raw.width, out_channels, std::move(values));
}

void save_image(const Image& img, const fs::path& path, int bit_depth) {
  check_depth(bit_depth);
  RawImage raw{img.height(), img.width(), img.channels(), bit_depth == 16 ? 65535 : 255, {}};
  raw.samples.reserve(img.size());
  for (float v : img.values()) raw.samples.push_back(quantize(v, raw.max_value));
  write_raw(raw, path);
}

void save_rgba_png(const Image& rgb, const ConfidenceMap& alpha, const fs::path& path, int bit_depth) {
  check_depth(bit_depth);
  require_same_size(rgb, alpha, "save_rgba_png");
  const Image color = to_rgb(rgb);
  RawImage raw{rgb.height(), rgb.width(), 4, bit_depth == 16 ? 65535 : 255, {}};
  raw.samples.reserve(alpha.size() * 4);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) {
      for (int c = 0; c < 3; ++c) raw.samples.push_back(quantize(color(y, x, c), raw.max_value));
      raw.samples.push_back(quantize(alpha(y, x), raw.max_value));
    }
  write_png(raw, path);
}

std::pair<Image, ConfidenceMap> load_rgba_png(const fs::path& path) {
  const RawImage raw = read_png(path);
  if (raw.channels != 3 && raw.channels != 4) throw ImageIoError(path.string() + ": expected an RGB or RGBA PNG");
  const float scale = 1.0f / static_cast<float>(raw.max_value);
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  std::vector<float> color(n * 3), alpha(n, 1.0f);
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) color[p * 3 + c] = raw.samples[p * raw.channels + c] * scale;
    if (raw.channels == 4) alpha[p] = raw.samples[p * 4 + 3] * scale;
  }
  return {Image::from_values(raw.height, raw.width, 3, std::move(color)),
          ConfidenceMap::from_values(raw.height, raw.width, std::move(alpha))};
}

void save_map(const ConfidenceMap& map, const fs::path& path, int bit_depth) {
  check_depth(bit_depth);
  RawImage raw{map.height(), map.width(), 1, bit_depth == 16 ? 65535 : 255, {}};
  raw.samples.reserve(map.size());
  for (float v : map.values()) raw.samples.push_back(quantize(v, raw.max_value));
  write_raw(raw, path);
}

void save_mask(const BinaryMask& mask, const fs::path& path) {
  RawImage raw{mask.height(), mask.width(), 1, 255, {}};
  raw.samples.reserve(mask.size());
  for (auto v : mask.values()) raw.samples.push_back(v ? 255 : 0);
  write_raw(raw, path);
}

ConfidenceMap load_map(const fs::path& path) {
  const RawImage raw = single_channel(read_raw(path), path);
  std::vector<float> values(raw.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = static_cast<float>(raw.samples[i]) / static_cast<float>(raw.max_value);
  return ConfidenceMap::from_values(raw.height, raw.width, std::move(values));
}

BinaryMask load_mask(const fs::path& path) {
  const RawImage raw = single_channel(read_raw(path), path);
  std::vector<std::uint8_t> values(raw.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = 2 * raw.samples[i] >= raw.max_value ? 1 : 0;
  return BinaryMask::from_values(raw.height, raw.width, std::move(values));
}

void save_disparity(const FlowField& disparity, const fs::path& path) {
  RawImage raw{disparity.height(), disparity.width(), 1, 65535, {}};
  raw.samples.reserve(disparity.size());
  for (float v : disparity.values()) {
    const long q = std::lround(static_cast<double>(v) * 256.0);
    if (q < 0 || q > 65535)
      throw std::invalid_argument("disparity " + std::to_string(v) + " outside the 16-bit fixed-point range");
    raw.samples.push_back(static_cast<std::uint16_t>(q));
  }
  write_raw(raw, path);
}

FlowField load_disparity(const fs::path& path) {
  const RawImage raw = single_channel(read_raw(path), path);
  std::vector<float> values(raw.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(raw.samples[i]) / 256.0f;
  return FlowField::from_values(raw.height, raw.width, std::move(values));
}

}  // namespace svs::imagecore
