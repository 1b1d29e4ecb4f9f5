#include "svs/stereosynth/inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svs::stereosynth {

using imagecore::BinaryMask;
using imagecore::Image;

std::vector<int> mask_distance(const BinaryMask& mask, int cap) {
  const int h = mask.height(), w = mask.width();
  std::vector<int> dist(mask.size(), cap + 1);
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (mask.values()[i]) dist[i] = 0;
  // Repeated 3x3 dilation; cap is small.
  for (int k = 1; k <= cap; ++k) {
    auto next = dist;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        auto& d = next[mask.index(y, x)];
        if (d <= k) continue;
        for (int dy = -1; dy <= 1 && d > k; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            if (dist[mask.index(yy, xx)] == k - 1) {
              d = k;
              break;
            }
          }
      }
    dist = std::move(next);
  }
  return dist;
}

namespace {

/// Red-black SOR for Laplace's equation on the pixels with free[i] set.
/// Fixed pixels act as Dirichlet data, the image border reflects.
void solve_laplace(std::vector<double>& u, const std::vector<std::uint8_t>& free, int h, int w,
                   const InpaintOptions& opt, InpaintReport& rep) {
  for (rep.sweeps = 0; rep.sweeps < opt.max_sweeps;) {
    double change = 0.0;
    for (int colour = 0; colour < 2; ++colour) {
#pragma omp parallel for schedule(static) reduction(max : change)
      for (int y = 0; y < h; ++y) {
        for (int x = (y + colour) & 1; x < w; x += 2) {
          const std::size_t i = std::size_t(y) * w + x;
          if (!free[i]) continue;
          double sum = 0.0;
          int n = 0;
          if (x > 0) sum += u[i - 1], ++n;
          if (x + 1 < w) sum += u[i + 1], ++n;
          if (y > 0) sum += u[i - w], ++n;
          if (y + 1 < h) sum += u[i + w], ++n;
          const double delta = opt.relaxation * (sum / n - u[i]);
          u[i] += delta;
          change = std::max(change, std::abs(delta));
        }
      }
    }
    ++rep.sweeps;
    rep.last_change = change;
    if (change < opt.tolerance) break;
  }
}

}  // namespace

Image inpaint(const Image& image, const BinaryMask& mask, const InpaintOptions& opt, InpaintReport* report) {
  imagecore::require_same_size(image, mask, "inpaint");
  if (opt.band < 0) throw std::invalid_argument("inpaint band must be non-negative");
  const int h = image.height(), w = image.width(), ch = image.channels();
  const std::size_t n = mask.size();
  const auto masked = static_cast<std::size_t>(std::count(mask.values().begin(), mask.values().end(), 1));
  InpaintReport rep;
  rep.masked_fraction = n ? double(masked) / double(n) : 0.0;
  rep.degraded = rep.masked_fraction >= 0.5;
  if (masked == n && n > 0) throw std::invalid_argument("inpaint mask covers every pixel; nothing to anchor the fill");
  if (masked == 0) {
    if (report) *report = rep;
    return image;
  }

  const auto dist = mask_distance(mask, opt.band);
  std::vector<std::uint8_t> free(n);
  for (std::size_t i = 0; i < n; ++i) free[i] = dist[i] <= opt.band;
  if (std::all_of(free.begin(), free.end(), [](auto f) { return f != 0; })) {
    // The band swallows every known pixel: anchor on the known pixels themselves.
    for (std::size_t i = 0; i < n; ++i) free[i] = dist[i] == 0;
  }

  std::vector<float> out(image.values().begin(), image.values().end());
  for (int c = 0; c < ch; ++c) {
    std::vector<double> u(n);
    double anchor = 0.0;
    std::size_t anchors = 0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = image.values()[i * ch + c];
      if (!free[i]) anchor += u[i], ++anchors;
    }
    // Start the free pixels at the mean of the fixed ones.
    anchor /= double(anchors);
    for (std::size_t i = 0; i < n; ++i)
      if (free[i]) u[i] = anchor;
    InpaintReport channel;
    solve_laplace(u, free, h, w, opt, channel);
    rep.sweeps = std::max(rep.sweeps, channel.sweeps);
    rep.last_change = std::max(rep.last_change, channel.last_change);
    for (std::size_t i = 0; i < n; ++i) {
      if (!free[i]) continue;
      const double beta = dist[i] == 0 ? 1.0 : double(opt.band + 1 - dist[i]) / double(opt.band + 1);
      const double orig = image.values()[i * ch + c];
      out[i * ch + c] = static_cast<float>(beta * u[i] + (1.0 - beta) * orig);
    }
  }
  if (report) *report = rep;
  return Image::from_values(h, w, ch, std::move(out));
}

}  // namespace svs::stereosynth
