#include "svs/imagecore/image.hpp"

namespace svs::imagecore {

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0) throw std::invalid_argument("negative image dimensions");
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("image channels must be 1 or 3, got " + std::to_string(channels));
  data_.assign(static_cast<std::size_t>(height) * width * channels, std::clamp(fill, 0.0f, 1.0f));
}

Image Image::from_values(int height, int width, int channels, std::vector<float> values) {
  Image img(height, width, channels);
  if (values.size() != img.size())
    throw std::invalid_argument("image value count " + std::to_string(values.size()) + " does not match " +
                                std::to_string(height) + "x" + std::to_string(width) + "x" +
                                std::to_string(channels));
  for (auto& v : values) v = std::clamp(v, 0.0f, 1.0f);
  img.data_ = std::move(values);
  return img;
}

Image to_gray(const Image& img) {
  if (img.channels() == 1) return img;
  std::vector<float> out(static_cast<std::size_t>(img.height()) * img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      float acc = 0.0f;
      for (int c = 0; c < img.channels(); ++c) acc += img(y, x, c);
      out[static_cast<std::size_t>(y) * img.width() + x] = acc / static_cast<float>(img.channels());
    }
  return Image::from_values(img.height(), img.width(), 1, std::move(out));
}

Image to_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  std::vector<float> out;
  out.reserve(img.size() * 3);
  for (float v : img.values()) out.insert(out.end(), {v, v, v});
  return Image::from_values(img.height(), img.width(), 3, std::move(out));
}

}  // namespace svs::imagecore
