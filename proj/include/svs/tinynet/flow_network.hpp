#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svs/imagecore/image.hpp"
#include "svs/tinynet/tensor.hpp"

namespace svs::tinynet {

/// Encoder-decoder shape. widths[0] is the full-resolution width and
/// widths[1..3] the widths after each of the three 2x downsampling stages.
struct Architecture {
  int in_channels = 3;
  std::vector<int> widths{8, 12, 16, 16};
  double slope = 0.1;  // leaky ReLU

  std::string describe() const;
  static Architecture parse(const std::string& text);
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <class T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
  /// Convolution kernels; biases are never pruned.
  bool prunable() const;
};

/// Predicts a single-channel horizontal flow with the same spatial size as its input.
///
/// enc0 -> [pool -> enc1] -> [pool -> enc2] -> [pool -> enc3], then three
/// decoder stages that upsample, concatenate the matching encoder features,
/// and convolve; a 1x1 head emits the flow.
template <class T>
class FlowNetwork {
 public:
  static constexpr int kDownsampleFactor = 8;

  FlowNetwork() = default;
  /// Deterministic He-style initialisation from `seed`.
  static FlowNetwork initialize(const Architecture& arch, std::uint64_t seed);
  /// All parameters zero.
  static FlowNetwork zeros(const Architecture& arch);

  const Architecture& architecture() const { return arch_; }
  std::vector<NamedParameter<T>>& parameters() { return params_; }
  const std::vector<NamedParameter<T>>& parameters() const { return params_; }
  Tensor<T>& parameter(const std::string& name);
  const Tensor<T>& parameter(const std::string& name) const;

  /// x: [in_channels, H, W] with H, W divisible by kDownsampleFactor; returns [1, H, W].
  Tensor<T> forward(const Tensor<T>& x) const;
  imagecore::FlowField forward(const imagecore::Image& img) const;

  /// Independent copy of every parameter (requires_grad preserved).
  FlowNetwork clone() const;

  void zero_grad();
  std::size_t parameter_count() const;

 private:
  Tensor<T> conv(const Tensor<T>& x, const std::string& layer) const;

  Architecture arch_;
  std::vector<NamedParameter<T>> params_;
};

/// [C, H, W] tensor from an image, values shifted by -0.5 when `centered`.
template <class T>
Tensor<T> image_to_tensor(const imagecore::Image& img, bool centered = false);
/// Planar [C, H, W] tensor back to an interleaved image (values clamped to [0, 1]).
template <class T>
imagecore::Image tensor_to_image(const Tensor<T>& t);
template <class T>
imagecore::FlowField tensor_to_flow(const Tensor<T>& t);
template <class T>
Tensor<T> flow_to_tensor(const imagecore::FlowField& f);

/// Throws with the required padding when H or W is not divisible by `factor`.
void require_divisible(int height, int width, int factor);

using FlowNet = FlowNetwork<float>;

extern template class FlowNetwork<float>;
extern template class FlowNetwork<double>;

}  // namespace svs::tinynet
