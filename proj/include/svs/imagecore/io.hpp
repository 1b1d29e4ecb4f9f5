#pragma once

#include <filesystem>
#include <stdexcept>

#include "svs/imagecore/image.hpp"

namespace svs::imagecore {

/// Raised for unreadable, truncated, or unsupported image files.
class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads PNG (8/16-bit gray, gray+alpha, RGB, RGBA), PPM (P6) or PGM (P5).
/// Alpha channels are dropped; values map linearly to [0, 1].
Image load_image(const std::filesystem::path& path);

/// Writes by extension: .png, .ppm (RGB) or .pgm (gray). `bit_depth` is 8 or 16.
void save_image(const Image& img, const std::filesystem::path& path, int bit_depth = 8);

/// RGBA PNG with a separate alpha plane (MPI layers). `alpha` is H x W.
void save_rgba_png(const Image& rgb, const ConfidenceMap& alpha, const std::filesystem::path& path,
                   int bit_depth = 16);
/// Loads an RGBA (or RGB, alpha = 1) PNG.
std::pair<Image, ConfidenceMap> load_rgba_png(const std::filesystem::path& path);

/// Single-channel maps as PGM scaled to the file bit depth.
void save_map(const ConfidenceMap& map, const std::filesystem::path& path, int bit_depth = 16);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);
ConfidenceMap load_map(const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path);

/// Disparity as 16-bit PGM in fixed point (value = round(256 * dx)); dx must lie in [0, 255.99].
void save_disparity(const FlowField& disparity, const std::filesystem::path& path);
FlowField load_disparity(const std::filesystem::path& path);

}  // namespace svs::imagecore
