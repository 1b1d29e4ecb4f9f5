#pragma once

#include <array>
#include <limits>

#include "svs/imagecore/image.hpp"

namespace svs::imagecore {

/// Clamped bilinear sample at real pixel coordinates; entries past channels() are zero.
std::array<float, 3> bilinear_sample(const Image& src, double x, double y);

/// Backward horizontal warp: out(x, y) = src(x + dx(x, y), y).
Image warp_horizontal(const Image& src, const FlowField& flow);

/// Channel-mean absolute difference divided by its own maximum.
/// Equal inputs give an all-zero map.
ConfidenceMap pixel_difference(const Image& a, const Image& b);

/// Removes floor(fraction * height) rows from top and bottom and
/// floor(fraction * width) columns from each side. Requires 0 <= fraction < 0.5.
Image crop_border(const Image& img, double fraction);

/// PSNR value reported for identical inputs.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// -10 log10(MSE) over all channels of two [0, 1] images.
double psnr(const Image& a, const Image& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean SSIM over all fully-inside 11x11 Gaussian windows (sigma 1.5,
/// C1 = 0.01^2, C2 = 0.03^2), averaged over channels.
double ssim(const Image& a, const Image& b);

}  // namespace svs::imagecore
