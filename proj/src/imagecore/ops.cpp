#include "svs/imagecore/ops.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "svs/kernels/kernels.hpp"

namespace svs::imagecore {

namespace {

kernels::Layout layout_of(const Image& img) {
  return kernels::Layout::interleaved(img.height(), img.width(), img.channels());
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": image shapes differ (" + std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                                std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                                std::to_string(b.channels()) + ")");
}

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> taps(size);
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - r;
    taps[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Separable filtering restricted to the windows fully inside the image.
// Input is H x W, output is (H - k + 1) x (W - k + 1).
std::vector<double> filter_valid(const std::vector<double>& in, int h, int w, const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = w - k + 1, oh = h - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * in[static_cast<std::size_t>(y) * w + x + t];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

std::array<float, 3> bilinear_sample(const Image& src, double x, double y) {
  if (src.empty()) throw std::invalid_argument("bilinear_sample: empty image");
  std::array<float, 3> out{};
  const auto L = layout_of(src);
  for (int c = 0; c < src.channels(); ++c) out[c] = kernels::bilinear_at<float>(src.values(), L, x, y, c);
  return out;
}

Image warp_horizontal(const Image& src, const FlowField& flow) {
  require_same_size(src, flow, "warp_horizontal");
  std::vector<float> out(src.size());
  kernels::warp_rows<float>(src.values(), layout_of(src), flow.values(), out);
  return Image::from_values(src.height(), src.width(), src.channels(), std::move(out));
}

ConfidenceMap pixel_difference(const Image& a, const Image& b) {
  require_same_shape(a, b, "pixel_difference");
  const int h = a.height(), w = a.width(), ch = a.channels();
  std::vector<float> diff(static_cast<std::size_t>(h) * w);
  float peak = 0.0f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < ch; ++c) acc += std::abs(double(a(y, x, c)) - double(b(y, x, c)));
      const float d = static_cast<float>(acc / ch);
      diff[static_cast<std::size_t>(y) * w + x] = d;
      peak = std::max(peak, d);
    }
  if (peak > 0.0f)
    for (auto& d : diff) d /= peak;
  return ConfidenceMap::from_values(h, w, std::move(diff));
}

Image crop_border(const Image& img, double fraction) {
  if (!(fraction >= 0.0 && fraction < 0.5))
    throw std::invalid_argument("crop_border: fraction must lie in [0, 0.5), got " + std::to_string(fraction));
  const int dy = static_cast<int>(std::floor(fraction * img.height()));
  const int dx = static_cast<int>(std::floor(fraction * img.width()));
  const int h = img.height() - 2 * dy, w = img.width() - 2 * dx;
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(h) * w * img.channels());
  for (int y = dy; y < dy + h; ++y)
    for (int x = dx; x < dx + w; ++x)
      for (int c = 0; c < img.channels(); ++c) out.push_back(img(y, x, c));
  return Image::from_values(h, w, img.channels(), std::move(out));
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  if (a.empty()) throw std::invalid_argument("psnr: empty images");
  double sse = 0.0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = double(va[i]) - double(vb[i]);
    sse += d * d;
  }
  if (sse == 0.0) return kPsnrIdentical;
  return -10.0 * std::log10(sse / static_cast<double>(va.size()));
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  const int h = a.height(), w = a.width();
  if (h < kSsimWindow || w < kSsimWindow)
    throw std::invalid_argument("ssim: image " + std::to_string(h) + "x" + std::to_string(w) +
                                " is smaller than the " + std::to_string(kSsimWindow) + "x" +
                                std::to_string(kSsimWindow) + " window");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto taps = gaussian_taps(kSsimWindow, kSsimSigma);
  const std::size_t n = static_cast<std::size_t>(h) * w;

  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (int r = 0; r < h; ++r)
      for (int q = 0; q < w; ++q) {
        const std::size_t i = static_cast<std::size_t>(r) * w + q;
        x[i] = a(r, q, c);
        y[i] = b(r, q, c);
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
    const auto mx = filter_valid(x, h, w, taps), my = filter_valid(y, h, w, taps);
    const auto mxx = filter_valid(xx, h, w, taps), myy = filter_valid(yy, h, w, taps);
    const auto mxy = filter_valid(xy, h, w, taps);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cxy = mxy[i] - mx[i] * my[i];
      acc += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += acc / static_cast<double>(mx.size());
  }
  return total / a.channels();
}

}  // namespace svs::imagecore
