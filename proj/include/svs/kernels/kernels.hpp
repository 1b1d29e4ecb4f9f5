#pragma once

// Data-parallel pixel kernels shared by the image, network, and MPI code.
//
// Every kernel has an OpenMP version in svs::kernels and a plain loop
// version in svs::kernels::serial. The serial versions are the reference
// the tests compare against; they are written independently (different loop
// order, per-output accumulation) so agreement is a real check. Parallel
// loops only ever split over output elements, never over a reduction, so
// results do not depend on the thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace svs::kernels {

/// Addressing for a 3-D (row, column, channel) buffer.
struct Layout {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::ptrdiff_t row_stride = 0;
  std::ptrdiff_t col_stride = 0;
  std::ptrdiff_t chan_stride = 0;

  /// Interleaved H x W x C (image files, imagecore::Image).
  static Layout interleaved(int h, int w, int c) { return {h, w, c, std::ptrdiff_t(w) * c, c, 1}; }
  /// Planar C x H x W (network tensors, MPI planes).
  static Layout planar(int c, int h, int w) {
    return {h, w, c, w, 1, std::ptrdiff_t(h) * w};
  }
  std::ptrdiff_t at(int y, int x, int c) const { return y * row_stride + x * col_stride + c * chan_stride; }
  std::size_t count() const { return std::size_t(height) * width * channels; }
};

/// Clamped linear sampling position along one axis of length n.
/// `frac` is zero and `hi == lo` when the position is clamped at the last sample.
struct AxisSample {
  int lo;
  int hi;
  double frac;
  bool clamped;
};

inline AxisSample axis_sample(double pos, int n) {
  AxisSample s{0, 0, 0.0, false};
  if (n <= 1) {
    s.clamped = true;
    return s;
  }
  if (pos <= 0.0) {
    s.clamped = pos < 0.0;
    s.hi = 1;
    return s;
  }
  if (pos >= n - 1) {
    s.clamped = pos > n - 1;
    s.lo = s.hi = n - 1;
    return s;
  }
  s.lo = static_cast<int>(std::floor(pos));
  s.hi = s.lo + 1;
  s.frac = pos - s.lo;
  return s;
}

/// 2-D clamped bilinear sample of channel c.
template <class T>
T bilinear_at(std::span<const T> src, const Layout& L, double x, double y, int c) {
  const AxisSample sx = axis_sample(x, L.width);
  const AxisSample sy = axis_sample(y, L.height);
  const T ax = static_cast<T>(sx.frac);
  const T ay = static_cast<T>(sy.frac);
  const T top = (T(1) - ax) * src[L.at(sy.lo, sx.lo, c)] + ax * src[L.at(sy.lo, sx.hi, c)];
  const T bot = (T(1) - ax) * src[L.at(sy.hi, sx.lo, c)] + ax * src[L.at(sy.hi, sx.hi, c)];
  return (T(1) - ay) * top + ay * bot;
}

// ---------------------------------------------------------------------------
// Horizontal backward warp: out(y, x, c) = src(y, x + flow(y, x), c).
// `flow` is a dense H x W row-major array.

template <class T>
void warp_rows(std::span<const T> src, const Layout& L, std::span<const T> flow, std::span<T> out) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < L.height; ++y) {
    for (int x = 0; x < L.width; ++x) {
      const AxisSample s = axis_sample(double(x) + double(flow[std::size_t(y) * L.width + x]), L.width);
      const T a = static_cast<T>(s.frac);
      for (int c = 0; c < L.channels; ++c)
        out[L.at(y, x, c)] = (T(1) - a) * src[L.at(y, s.lo, c)] + a * src[L.at(y, s.hi, c)];
    }
  }
}

/// Constant shift of every row by `shift` pixels (a warp with uniform flow).
template <class T>
void shift_rows(std::span<const T> src, const Layout& L, double shift, std::span<T> out) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < L.height; ++y) {
    for (int x = 0; x < L.width; ++x) {
      const AxisSample s = axis_sample(double(x) + shift, L.width);
      const T a = static_cast<T>(s.frac);
      for (int c = 0; c < L.channels; ++c)
        out[L.at(y, x, c)] = (T(1) - a) * src[L.at(y, s.lo, c)] + a * src[L.at(y, s.hi, c)];
    }
  }
}

// ---------------------------------------------------------------------------
// Same-padded (zero) 2-D convolution on planar single-image tensors.
// in: [cin, h, w], weight: [cout, cin, k, k], bias: [cout] or empty, out: [cout, h, w].

struct ConvShape {
  int cin = 0;
  int cout = 0;
  int height = 0;
  int width = 0;
  int kernel = 3;
};

template <class T>
void conv2d_forward(std::span<const T> in, std::span<const T> weight, std::span<const T> bias,
                    const ConvShape& s, std::span<T> out) {
  const int pad = s.kernel / 2;
  const std::size_t plane = std::size_t(s.height) * s.width;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < s.cout; ++co) {
    T* o = out.data() + co * plane;
    std::fill(o, o + plane, bias.empty() ? T(0) : bias[co]);
    for (int ci = 0; ci < s.cin; ++ci) {
      const T* src = in.data() + ci * plane;
      for (int ky = 0; ky < s.kernel; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(s.height, s.height - dy);
        for (int kx = 0; kx < s.kernel; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(s.width, s.width - dx);
          const T wv = weight[((std::size_t(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx];
          if (wv == T(0)) continue;
          for (int y = y0; y < y1; ++y) {
            T* orow = o + std::size_t(y) * s.width;
            const T* irow = src + std::size_t(y + dy) * s.width + dx;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
}

/// grad_in += conv_transpose(grad_out, weight).
template <class T>
void conv2d_backward_input(std::span<const T> grad_out, std::span<const T> weight, const ConvShape& s,
                           std::span<T> grad_in) {
  const int pad = s.kernel / 2;
  const std::size_t plane = std::size_t(s.height) * s.width;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < s.cin; ++ci) {
    T* gi = grad_in.data() + ci * plane;
    for (int co = 0; co < s.cout; ++co) {
      const T* go = grad_out.data() + co * plane;
      for (int ky = 0; ky < s.kernel; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(s.height, s.height - dy);
        for (int kx = 0; kx < s.kernel; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(s.width, s.width - dx);
          const T wv = weight[((std::size_t(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx];
          if (wv == T(0)) continue;
          for (int y = y0; y < y1; ++y) {
            const T* grow = go + std::size_t(y) * s.width;
            T* irow = gi + std::size_t(y + dy) * s.width + dx;
            for (int x = x0; x < x1; ++x) irow[x] += wv * grow[x];
          }
        }
      }
    }
  }
}

/// grad_weight += correlation(grad_out, in); grad_bias += spatial sum of grad_out (if non-empty).
template <class T>
void conv2d_backward_weight(std::span<const T> grad_out, std::span<const T> in, const ConvShape& s,
                            std::span<T> grad_weight, std::span<T> grad_bias) {
  const int pad = s.kernel / 2;
  const std::size_t plane = std::size_t(s.height) * s.width;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < s.cout; ++co) {
    const T* go = grad_out.data() + co * plane;
    if (!grad_bias.empty()) {
      T acc = 0;
      for (std::size_t i = 0; i < plane; ++i) acc += go[i];
      grad_bias[co] += acc;
    }
    for (int ci = 0; ci < s.cin; ++ci) {
      const T* src = in.data() + ci * plane;
      for (int ky = 0; ky < s.kernel; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(s.height, s.height - dy);
        for (int kx = 0; kx < s.kernel; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(s.width, s.width - dx);
          T acc = 0;
          for (int y = y0; y < y1; ++y) {
            const T* grow = go + std::size_t(y) * s.width;
            const T* irow = src + std::size_t(y + dy) * s.width + dx;
            for (int x = x0; x < x1; ++x) acc += grow[x] * irow[x];
          }
          grad_weight[((std::size_t(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx] += acc;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Plane-sweep matching cost: per pixel, channel-mean |a - b| followed by a
// (2r+1)^2 box filter that averages over the in-bounds neighbours.
// a, b: interleaved H x W x C; cost: H x W.

template <class T>
void matching_cost(std::span<const T> a, std::span<const T> b, const Layout& L, int radius, std::span<T> cost) {
  const std::size_t n = std::size_t(L.height) * L.width;
  std::vector<T> raw(n), rows(n);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < L.height; ++y)
    for (int x = 0; x < L.width; ++x) {
      T acc = 0;
      for (int c = 0; c < L.channels; ++c) acc += std::abs(a[L.at(y, x, c)] - b[L.at(y, x, c)]);
      raw[std::size_t(y) * L.width + x] = acc / T(L.channels);
    }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < L.height; ++y)
    for (int x = 0; x < L.width; ++x) {
      const int lo = std::max(0, x - radius), hi = std::min(L.width - 1, x + radius);
      T acc = 0;
      for (int k = lo; k <= hi; ++k) acc += raw[std::size_t(y) * L.width + k];
      rows[std::size_t(y) * L.width + x] = acc / T(hi - lo + 1);
    }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < L.height; ++y) {
    const int lo = std::max(0, y - radius), hi = std::min(L.height - 1, y + radius);
    for (int x = 0; x < L.width; ++x) {
      T acc = 0;
      for (int k = lo; k <= hi; ++k) acc += rows[std::size_t(k) * L.width + x];
      cost[std::size_t(y) * L.width + x] = acc / T(hi - lo + 1);
    }
  }
}

// ---------------------------------------------------------------------------
// Back-to-front "over" compositing of D planes, index 0 farthest.
// colors: D planes of interleaved H x W x C; alphas: D planes of H x W.

template <class T>
void composite_over(std::span<const T> colors, std::span<const T> alphas, int planes, const Layout& L,
                    std::span<T> out) {
  const std::size_t n = std::size_t(L.height) * L.width;
  const std::size_t cstride = n * L.channels;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < L.height; ++y)
    for (int x = 0; x < L.width; ++x) {
      const std::size_t p = std::size_t(y) * L.width + x;
      for (int c = 0; c < L.channels; ++c) {
        T acc = 0;
        for (int d = 0; d < planes; ++d) {
          const T a = alphas[d * n + p];
          const T col = colors[d * cstride + L.at(y, x, c)];
          // Opaque planes replace exactly; equal colours leave acc unchanged.
          acc = a == T(1) ? col : acc + a * (col - acc);
        }
        out[L.at(y, x, c)] = acc;
      }
    }
}

/// Inverse-mapped planar homography warp of a C-channel planar image.
/// For each output pixel (x, y), the source location is H * [x, y, 1]^T.
/// Returns false if any output pixel maps to a non-positive homogeneous
/// coordinate; `out` is then only partially written.
template <class T>
bool warp_homography(std::span<const T> src, const Layout& L, const std::array<double, 9>& H, std::span<T> out) {
  bool ok = true;
#pragma omp parallel for schedule(static) reduction(&& : ok)
  for (int y = 0; y < L.height; ++y)
    for (int x = 0; x < L.width; ++x) {
      const double w = H[6] * x + H[7] * y + H[8];
      if (!(w > 1e-12)) {
        ok = false;
        continue;
      }
      const double sx = (H[0] * x + H[1] * y + H[2]) / w;
      const double sy = (H[3] * x + H[4] * y + H[5]) / w;
      for (int c = 0; c < L.channels; ++c) out[L.at(y, x, c)] = bilinear_at<T>(src, L, sx, sy, c);
    }
  return ok;
}

namespace serial {

template <class T>
void warp_rows(std::span<const T> src, const Layout& L, std::span<const T> flow, std::span<T> out) {
  for (int c = 0; c < L.channels; ++c)
    for (int y = 0; y < L.height; ++y)
      for (int x = 0; x < L.width; ++x) {
        double pos = double(x) + double(flow[std::size_t(y) * L.width + x]);
        pos = std::clamp(pos, 0.0, double(L.width - 1));
        const int lo = std::min(static_cast<int>(std::floor(pos)), L.width - 1);
        const int hi = std::min(lo + 1, L.width - 1);
        const T a = static_cast<T>(pos - lo);
        out[L.at(y, x, c)] = (T(1) - a) * src[L.at(y, lo, c)] + a * src[L.at(y, hi, c)];
      }
}

template <class T>
void shift_rows(std::span<const T> src, const Layout& L, double shift, std::span<T> out) {
  std::vector<T> flow(std::size_t(L.height) * L.width, static_cast<T>(shift));
  if (static_cast<double>(static_cast<T>(shift)) != shift) {
    // The flow buffer cannot carry the shift exactly at this precision.
    for (int c = 0; c < L.channels; ++c)
      for (int y = 0; y < L.height; ++y)
        for (int x = 0; x < L.width; ++x) out[L.at(y, x, c)] = bilinear_at<T>(src, L, x + shift, y, c);
    return;
  }
  serial::warp_rows<T>(src, L, flow, out);
}

template <class T>
void conv2d_forward(std::span<const T> in, std::span<const T> weight, std::span<const T> bias,
                    const ConvShape& s, std::span<T> out) {
  const int pad = s.kernel / 2;
  for (int co = 0; co < s.cout; ++co)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        T acc = bias.empty() ? T(0) : bias[co];
        for (int ci = 0; ci < s.cin; ++ci)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int iy = y + ky - pad, ix = x + kx - pad;
              if (iy < 0 || iy >= s.height || ix < 0 || ix >= s.width) continue;
              acc += weight[((std::size_t(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx] *
                     in[(std::size_t(ci) * s.height + iy) * s.width + ix];
            }
        out[(std::size_t(co) * s.height + y) * s.width + x] = acc;
      }
}

template <class T>
void conv2d_backward_input(std::span<const T> grad_out, std::span<const T> weight, const ConvShape& s,
                           std::span<T> grad_in) {
  const int pad = s.kernel / 2;
  for (int ci = 0; ci < s.cin; ++ci)
    for (int iy = 0; iy < s.height; ++iy)
      for (int ix = 0; ix < s.width; ++ix) {
        T acc = 0;
        for (int co = 0; co < s.cout; ++co)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int y = iy - ky + pad, x = ix - kx + pad;
              if (y < 0 || y >= s.height || x < 0 || x >= s.width) continue;
              acc += weight[((std::size_t(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx] *
                     grad_out[(std::size_t(co) * s.height + y) * s.width + x];
            }
        grad_in[(std::size_t(ci) * s.height + iy) * s.width + ix] += acc;
      }
}

template <class T>
void conv2d_backward_weight(std::span<const T> grad_out, std::span<const T> in, const ConvShape& s,
                            std::span<T> grad_weight, std::span<T> grad_bias) {
  const int pad = s.kernel / 2;
  for (int co = 0; co < s.cout; ++co) {
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const T g = grad_out[(std::size_t(co) * s.height + y) * s.width + x];
        if (!grad_bias.empty()) grad_bias[co] += g;
        for (int ci = 0; ci < s.cin; ++ci)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int iy = y + ky - pad, ix = x + kx - pad;
              if (iy < 0 || iy >= s.height || ix < 0 || ix >= s.width) continue;
              grad_weight[((std::size_t(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx] +=
                  g * in[(std::size_t(ci) * s.height + iy) * s.width + ix];
            }
      }
  }
}

template <class T>
void matching_cost(std::span<const T> a, std::span<const T> b, const Layout& L, int radius, std::span<T> cost) {
  for (int y = 0; y < L.height; ++y)
    for (int x = 0; x < L.width; ++x) {
      T acc = 0;
      int count = 0;
      for (int v = std::max(0, y - radius); v <= std::min(L.height - 1, y + radius); ++v)
        for (int u = std::max(0, x - radius); u <= std::min(L.width - 1, x + radius); ++u) {
          T d = 0;
          for (int c = 0; c < L.channels; ++c) d += std::abs(a[L.at(v, u, c)] - b[L.at(v, u, c)]);
          acc += d / T(L.channels);
          ++count;
        }
      cost[std::size_t(y) * L.width + x] = acc / T(count);
    }
}

template <class T>
void composite_over(std::span<const T> colors, std::span<const T> alphas, int planes, const Layout& L,
                    std::span<T> out) {
  // Explicit weights: sum_i c_i a_i prod_{j>i} (1 - a_j).
  const std::size_t n = std::size_t(L.height) * L.width;
  const std::size_t cstride = n * L.channels;
  for (int y = 0; y < L.height; ++y)
    for (int x = 0; x < L.width; ++x) {
      const std::size_t p = std::size_t(y) * L.width + x;
      for (int c = 0; c < L.channels; ++c) {
        T acc = 0;
        for (int i = 0; i < planes; ++i) {
          T transmit = 1;
          for (int j = i + 1; j < planes; ++j) transmit *= T(1) - alphas[j * n + p];
          acc += colors[i * cstride + L.at(y, x, c)] * alphas[i * n + p] * transmit;
        }
        out[L.at(y, x, c)] = acc;
      }
    }
}

template <class T>
bool warp_homography(std::span<const T> src, const Layout& L, const std::array<double, 9>& H, std::span<T> out) {
  for (int y = 0; y < L.height; ++y)
    for (int x = 0; x < L.width; ++x)
      if (!(H[6] * x + H[7] * y + H[8] > 1e-12)) return false;
  for (int c = 0; c < L.channels; ++c)
    for (int y = 0; y < L.height; ++y)
      for (int x = 0; x < L.width; ++x) {
        const double w = H[6] * x + H[7] * y + H[8];
        out[L.at(y, x, c)] =
            bilinear_at<T>(src, L, (H[0] * x + H[1] * y + H[2]) / w, (H[3] * x + H[4] * y + H[5]) / w, c);
      }
  return true;
}

}  // namespace serial
}  // namespace svs::kernels
