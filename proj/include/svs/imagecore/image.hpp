#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svs::imagecore {

/// Row-major H x W x C intensity image. Every stored value lies in [0, 1];
/// all mutating entry points clamp.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f);

  /// Takes ownership of interleaved values, clamping each into [0, 1].
  static Image from_values(int height, int width, int channels, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float operator()(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }
  void set(int y, int x, int c, float v) { data_[index(y, x, c)] = std::clamp(v, 0.0f, 1.0f); }

  std::span<const float> values() const& { return data_; }
  std::span<const float> values() && = delete;  // would dangle

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  bool same_shape(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

namespace detail {
struct FlowTag {
  using value_type = float;
  static float normalize(float v) { return v; }
};
struct ConfidenceTag {
  using value_type = float;
  static float normalize(float v) { return std::clamp(v, 0.0f, 1.0f); }
};
struct MaskTag {
  using value_type = std::uint8_t;
  static std::uint8_t normalize(std::uint8_t v) { return v != 0 ? 1 : 0; }
};
}  // namespace detail

/// Single-channel H x W field whose value policy comes from Tag.
template <class Tag>
class Grid {
 public:
  using value_type = typename Tag::value_type;

  Grid() = default;
  Grid(int height, int width, value_type fill = value_type{})
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(check_dims(height, width)), Tag::normalize(fill)) {}

  static Grid from_values(int height, int width, std::vector<value_type> values) {
    if (values.size() != static_cast<std::size_t>(check_dims(height, width)))
      throw std::invalid_argument("grid value count does not match " + std::to_string(height) + "x" +
                                  std::to_string(width));
    Grid g;
    g.height_ = height;
    g.width_ = width;
    for (auto& v : values) v = Tag::normalize(v);
    g.data_ = std::move(values);
    return g;
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  value_type operator()(int y, int x) const { return data_[index(y, x)]; }
  void set(int y, int x, value_type v) { data_[index(y, x)] = Tag::normalize(v); }

  std::span<const value_type> values() const& { return data_; }
  std::span<const value_type> values() && = delete;
  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width_ + x; }

  template <class Other>
  bool same_size(const Other& o) const {
    return height_ == o.height() && width_ == o.width();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static long check_dims(int height, int width) {
    if (height < 0 || width < 0) throw std::invalid_argument("negative grid dimensions");
    return static_cast<long>(height) * width;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<value_type> data_;
};

/// Horizontal per-pixel displacement in pixels; there is no vertical component.
using FlowField = Grid<detail::FlowTag>;
/// Per-pixel values in [0, 1].
using ConfidenceMap = Grid<detail::ConfidenceTag>;
/// Per-pixel values in {0, 1}.
using BinaryMask = Grid<detail::MaskTag>;

/// Throws std::invalid_argument naming `what` when the spatial sizes differ.
template <class A, class B>
void require_same_size(const A& a, const B& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width())
    throw std::invalid_argument(std::string(what) + ": size mismatch " + std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()));
}

/// Channel-mean of an image as a single-channel image.
Image to_gray(const Image& img);
/// Replicates a single-channel image to three channels; RGB input is returned unchanged.
Image to_rgb(const Image& img);

}  // namespace svs::imagecore
