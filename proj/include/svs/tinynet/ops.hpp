#pragma once

#include "svs/tinynet/tensor.hpp"

namespace svs::tinynet {

// Differentiable primitives over single-image tensors laid out [C, H, W].

/// Same-padded convolution. weight [O, C, k, k] with odd k; bias [O] or undefined.
template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <class T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope);

/// 2x2 average pooling; H and W must be even.
template <class T>
Tensor<T> avg_pool2(const Tensor<T>& x);

/// Nearest-neighbour 2x upsampling.
template <class T>
Tensor<T> upsample2(const Tensor<T>& x);

/// Channel concatenation of two [C, H, W] tensors with equal H, W.
template <class T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
/// Elementwise product.
template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T>
Tensor<T> add_scalar(const Tensor<T>& a, T s);
template <class T>
Tensor<T> scale(const Tensor<T>& a, T s);

/// Horizontal backward warp with clamped linear sampling:
/// out[c, y, x] = img[c, y, x + flow[0, y, x]]. Differentiable in both arguments.
template <class T>
Tensor<T> warp(const Tensor<T>& img, const Tensor<T>& flow);

/// Per-channel mean absolute error, summed over channels:
/// sum_c (1 / HW) sum_{y,x} |a - b|.
template <class T>
Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> sum(const Tensor<T>& x);
template <class T>
Tensor<T> mean(const Tensor<T>& x);

}  // namespace svs::tinynet
