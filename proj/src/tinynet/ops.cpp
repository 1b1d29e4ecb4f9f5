#include "svs/tinynet/ops.hpp"

#include <cmath>

#include "svs/kernels/kernels.hpp"

namespace svs::tinynet {

namespace {

template <class T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

template <class T>
void require_chw(const Tensor<T>& x, const char* op) {
  require(x.defined() && x.shape().size() == 3,
          std::string(op) + ": expected a [C,H,W] tensor, got " + (x.defined() ? shape_string(x.shape()) : "undefined"));
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  require(a.shape() == b.shape(),
          std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

}  // namespace

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_chw(x, "conv2d");
  require(weight.defined() && weight.shape().size() == 4, "conv2d: weight must be [O,C,k,k]");
  const kernels::ConvShape s{x.dim(0), weight.dim(0), x.dim(1), x.dim(2), weight.dim(2)};
  require(weight.dim(1) == s.cin && weight.dim(3) == s.kernel && s.kernel % 2 == 1,
          "conv2d: weight " + shape_string(weight.shape()) + " incompatible with input " + shape_string(x.shape()));
  require(!bias.defined() || bias.shape() == Shape{s.cout}, "conv2d: bias must have shape [O]");

  std::vector<T> out(std::size_t(s.cout) * s.height * s.width);
  kernels::conv2d_forward<T>(x.values(), weight.values(), bias.defined() ? bias.values() : std::span<const T>{}, s,
                             out);
  std::vector<NodePtr<T>> inputs{x.node(), weight.node()};
  if (bias.defined()) inputs.push_back(bias.node());
  return make_result<T>("conv2d", {s.cout, s.height, s.width}, std::move(out), std::move(inputs),
                        [s](detail::Node<T>& self) {
                          auto& in = *self.inputs[0];
                          auto& w = *self.inputs[1];
                          if (in.requires_grad) kernels::conv2d_backward_input<T>(self.grad, w.value, s, in.grad);
                          const bool has_bias = self.inputs.size() > 2 && self.inputs[2]->requires_grad;
                          if (w.requires_grad || has_bias) {
                            std::vector<T> scratch;
                            std::span<T> gw = w.grad;
                            if (!w.requires_grad) {
                              scratch.assign(w.value.size(), T(0));
                              gw = scratch;
                            }
                            kernels::conv2d_backward_weight<T>(self.grad, in.value, s, gw,
                                                               has_bias ? std::span<T>(self.inputs[2]->grad)
                                                                        : std::span<T>{});
                          }
                        });
}

template <class T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  std::vector<T> out(x.numel());
  const auto v = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] > T(0) ? v[i] : slope * v[i];
  return make_result<T>("leaky_relu", x.shape(), std::move(out), {x.node()}, [slope](detail::Node<T>& self) {
    auto& in = *self.inputs[0];
    for (std::size_t i = 0; i < in.value.size(); ++i)
      in.grad[i] += in.value[i] > T(0) ? self.grad[i] : slope * self.grad[i];
  });
}

template <class T>
Tensor<T> avg_pool2(const Tensor<T>& x) {
  require_chw(x, "avg_pool2");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  require(h % 2 == 0 && w % 2 == 0, "avg_pool2: spatial size " + shape_string(x.shape()) + " must be even");
  const int oh = h / 2, ow = w / 2;
  std::vector<T> out(std::size_t(c) * oh * ow);
  const auto v = x.values();
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < oh; ++y)
      for (int q = 0; q < ow; ++q) {
        const std::size_t i0 = (std::size_t(k) * h + 2 * y) * w + 2 * q;
        out[(std::size_t(k) * oh + y) * ow + q] = T(0.25) * (v[i0] + v[i0 + 1] + v[i0 + w] + v[i0 + w + 1]);
      }
  return make_result<T>("avg_pool2", {c, oh, ow}, std::move(out), {x.node()}, [c, h, w](detail::Node<T>& self) {
    auto& g = self.inputs[0]->grad;
    const int oh = h / 2, ow = w / 2;
    for (int k = 0; k < c; ++k)
      for (int y = 0; y < oh; ++y)
        for (int q = 0; q < ow; ++q) {
          const T go = T(0.25) * self.grad[(std::size_t(k) * oh + y) * ow + q];
          const std::size_t i0 = (std::size_t(k) * h + 2 * y) * w + 2 * q;
          g[i0] += go;
          g[i0 + 1] += go;
          g[i0 + w] += go;
          g[i0 + w + 1] += go;
        }
  });
}

template <class T>
Tensor<T> upsample2(const Tensor<T>& x) {
  require_chw(x, "upsample2");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = 2 * h, ow = 2 * w;
  std::vector<T> out(std::size_t(c) * oh * ow);
  const auto v = x.values();
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < oh; ++y)
      for (int q = 0; q < ow; ++q) out[(std::size_t(k) * oh + y) * ow + q] = v[(std::size_t(k) * h + y / 2) * w + q / 2];
  return make_result<T>("upsample2", {c, oh, ow}, std::move(out), {x.node()}, [c, h, w](detail::Node<T>& self) {
    auto& g = self.inputs[0]->grad;
    const int oh = 2 * h, ow = 2 * w;
    for (int k = 0; k < c; ++k)
      for (int y = 0; y < oh; ++y)
        for (int q = 0; q < ow; ++q) g[(std::size_t(k) * h + y / 2) * w + q / 2] += self.grad[(std::size_t(k) * oh + y) * ow + q];
  });
}

template <class T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  require_chw(a, "concat_channels");
  require_chw(b, "concat_channels");
  require(a.dim(1) == b.dim(1) && a.dim(2) == b.dim(2),
          "concat_channels: spatial mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  std::vector<T> out(a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  const std::size_t na = a.numel();
  return make_result<T>("concat", {a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, std::move(out), {a.node(), b.node()},
                        [na](detail::Node<T>& self) {
                          auto& ga = *self.inputs[0];
                          auto& gb = *self.inputs[1];
                          if (ga.requires_grad)
                            for (std::size_t i = 0; i < na; ++i) ga.grad[i] += self.grad[i];
                          if (gb.requires_grad)
                            for (std::size_t i = 0; i < gb.value.size(); ++i) gb.grad[i] += self.grad[na + i];
                        });
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_result<T>("add", a.shape(), std::move(out), {a.node(), b.node()}, [](detail::Node<T>& self) {
    for (auto& in : self.inputs)
      if (in->requires_grad)
        for (std::size_t i = 0; i < self.grad.size(); ++i) in->grad[i] += self.grad[i];
  });
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return make_result<T>("sub", a.shape(), std::move(out), {a.node(), b.node()}, [](detail::Node<T>& self) {
    auto& ia = *self.inputs[0];
    auto& ib = *self.inputs[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (ia.requires_grad) ia.grad[i] += self.grad[i];
      if (ib.requires_grad) ib.grad[i] -= self.grad[i];
    }
  });
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_result<T>("mul", a.shape(), std::move(out), {a.node(), b.node()}, [](detail::Node<T>& self) {
    auto& ia = *self.inputs[0];
    auto& ib = *self.inputs[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (ia.requires_grad) ia.grad[i] += self.grad[i] * ib.value[i];
      if (ib.requires_grad) ib.grad[i] += self.grad[i] * ia.value[i];
    }
  });
}

template <class T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  std::vector<T> out(a.values().begin(), a.values().end());
  for (auto& v : out) v += s;
  return make_result<T>("add_scalar", a.shape(), std::move(out), {a.node()}, [](detail::Node<T>& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) self.inputs[0]->grad[i] += self.grad[i];
  });
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  std::vector<T> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= s;
  return make_result<T>("scale", a.shape(), std::move(out), {a.node()}, [s](detail::Node<T>& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) self.inputs[0]->grad[i] += s * self.grad[i];
  });
}

template <class T>
Tensor<T> warp(const Tensor<T>& img, const Tensor<T>& flow) {
  require_chw(img, "warp");
  require_chw(flow, "warp");
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  require(flow.dim(0) == 1 && flow.dim(1) == h && flow.dim(2) == w,
          "warp: flow " + shape_string(flow.shape()) + " must be [1," + std::to_string(h) + "," + std::to_string(w) +
              "]");
  const auto L = kernels::Layout::planar(c, h, w);
  std::vector<T> out(img.numel());
  kernels::warp_rows<T>(img.values(), L, flow.values(), out);
  return make_result<T>("warp", img.shape(), std::move(out), {img.node(), flow.node()}, [L](detail::Node<T>& self) {
    auto& im = *self.inputs[0];
    auto& fl = *self.inputs[1];
#pragma omp parallel for schedule(static)
    for (int y = 0; y < L.height; ++y)
      for (int x = 0; x < L.width; ++x) {
        const std::size_t p = std::size_t(y) * L.width + x;
        const auto s = kernels::axis_sample(double(x) + double(fl.value[p]), L.width);
        const T a = static_cast<T>(s.frac);
        T gflow = 0;
        for (int k = 0; k < L.channels; ++k) {
          const T g = self.grad[L.at(y, x, k)];
          if (im.requires_grad) {
            im.grad[L.at(y, s.lo, k)] += (T(1) - a) * g;
            im.grad[L.at(y, s.hi, k)] += a * g;
          }
          if (!s.clamped) gflow += g * (im.value[L.at(y, s.hi, k)] - im.value[L.at(y, s.lo, k)]);
        }
        if (fl.requires_grad) fl.grad[p] += gflow;
      }
  });
}

template <class T>
Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b) {
  require_chw(a, "l1_loss");
  require_same_shape(a, b, "l1_loss");
  const T inv_n = T(1) / static_cast<T>(std::size_t(a.dim(1)) * a.dim(2));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) acc += std::abs(double(a.values()[i]) - double(b.values()[i]));
  return make_result<T>("l1_loss", {1}, {static_cast<T>(acc) * inv_n}, {a.node(), b.node()},
                        [inv_n](detail::Node<T>& self) {
                          auto& ia = *self.inputs[0];
                          auto& ib = *self.inputs[1];
                          const T g = self.grad[0] * inv_n;
                          for (std::size_t i = 0; i < ia.value.size(); ++i) {
                            const T d = ia.value[i] - ib.value[i];
                            const T sg = d > T(0) ? g : (d < T(0) ? -g : T(0));
                            if (ia.requires_grad) ia.grad[i] += sg;
                            if (ib.requires_grad) ib.grad[i] -= sg;
                          }
                        });
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  double acc = 0.0;
  for (T v : x.values()) acc += v;
  return make_result<T>("sum", {1}, {static_cast<T>(acc)}, {x.node()}, [](detail::Node<T>& self) {
    for (auto& g : self.inputs[0]->grad) g += self.grad[0];
  });
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

#define SVS_INSTANTIATE(T)                                                             \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                              \
  template Tensor<T> avg_pool2<T>(const Tensor<T>&);                                  \
  template Tensor<T> upsample2<T>(const Tensor<T>&);                                  \
  template Tensor<T> concat_channels<T>(const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> add_scalar<T>(const Tensor<T>&, T);                              \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                                   \
  template Tensor<T> warp<T>(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> l1_loss<T>(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> sum<T>(const Tensor<T>&);                                        \
  template Tensor<T> mean<T>(const Tensor<T>&);

SVS_INSTANTIATE(float)
SVS_INSTANTIATE(double)
#undef SVS_INSTANTIATE

}  // namespace svs::tinynet
