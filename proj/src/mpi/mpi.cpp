#include "svs/mpi/mpi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "svs/kernels/kernels.hpp"

namespace svs::mpi {

using imagecore::ConfidenceMap;
using imagecore::Image;

Volume::Volume(std::array<int, 4> s) : shape(s) {
  for (int d : s)
    if (d < 0) throw std::invalid_argument("negative volume dimension");
  data.assign(std::size_t(s[0]) * s[1] * s[2] * s[3], 0.0f);
}

void Mpi::validate() const {
  if (depths.empty()) throw std::invalid_argument("MPI has no planes");
  if (colors.size() != depths.size() || alphas.size() != depths.size())
    throw std::invalid_argument("MPI plane count mismatch between depths, colours and alphas");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (!(depths[i] > 0.0)) throw std::invalid_argument("MPI depth " + std::to_string(i) + " is not positive");
    if (i > 0 && !(depths[i] < depths[i - 1]))
      throw std::invalid_argument("MPI depths must be strictly decreasing (far to near) at plane " + std::to_string(i));
    if (colors[i].channels() != 3) throw std::invalid_argument("MPI plane colours must be RGB");
    imagecore::require_same_size(colors[i], colors.front(), "MPI plane colour");
    imagecore::require_same_size(alphas[i], colors.front(), "MPI plane alpha");
  }
  // ConfidenceMap clamps on construction, so the alpha range holds by type.
}

Volume Mpi::to_volume() const {
  validate();
  const int h = height(), w = width(), n = planes();
  Volume v({4, h, w, n});
  for (int d = 0; d < n; ++d)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) v(c, y, x, d) = colors[d](y, x, c);
        v(3, y, x, d) = alphas[d](y, x);
      }
  return v;
}

Mpi Mpi::from_volume(const Volume& v, std::vector<double> depths, const CameraRig& rig) {
  if (v.channels() != 4) throw std::invalid_argument("MPI volume must have 4 channels");
  if (v.planes() != int(depths.size())) throw std::invalid_argument("MPI volume plane count does not match depths");
  Mpi m;
  m.depths = std::move(depths);
  m.rig = rig;
  const int h = v.height(), w = v.width();
  for (int d = 0; d < v.planes(); ++d) {
    Image col(h, w, 3);
    ConfidenceMap a(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) col.set(y, x, c, v(c, y, x, d));
        a.set(y, x, v(3, y, x, d));
      }
    m.colors.push_back(std::move(col));
    m.alphas.push_back(std::move(a));
  }
  m.validate();
  return m;
}

void MpiConfig::validate() const {
  if (planes < 2) throw std::invalid_argument("MPI needs at least 2 planes");
  if (!(d_near > 0.0 && d_near < d_far))
    throw std::invalid_argument("MPI depth range needs 0 < d_near < d_far");
  if (!(temperature > 0.0)) throw std::invalid_argument("MPI temperature must be positive");
  if (cost_radius < 0) throw std::invalid_argument("MPI cost radius must be non-negative");
}

std::vector<double> plane_depths(double d_near, double d_far, int count) {
  if (!(d_near > 0.0) || !(d_near < d_far) || !std::isfinite(d_far))
    throw std::invalid_argument("plane_depths needs 0 < d_near < d_far, got " + std::to_string(d_near) + ", " +
                                std::to_string(d_far));
  if (count < 2) throw std::invalid_argument("plane_depths needs at least 2 planes");
  std::vector<double> out(count);
  const double a = 1.0 / d_far, b = 1.0 / d_near;
  for (int i = 0; i < count; ++i) out[i] = 1.0 / (a + (b - a) * double(i) / double(count - 1));
  out.front() = d_far;
  out.back() = d_near;
  return out;
}

PlaneSweepVolume build_psv(const Image& left, const Image& right, const CameraRig& rig,
                           const std::vector<double>& depths) {
  rig.validate();
  if (!left.same_shape(right)) throw std::invalid_argument("build_psv: left and right images differ in shape");
  if (left.channels() != 3) throw std::invalid_argument("build_psv expects RGB images");
  const int h = left.height(), w = left.width(), n = int(depths.size());
  PlaneSweepVolume psv({6, h, w, n});
  const auto L = kernels::Layout::interleaved(h, w, 3);
  const auto lv = left.values();
  std::vector<float> warped(right.size());
  for (int d = 0; d < n; ++d) {
    // Left pixel x sees the plane point that the right camera images at x - disparity.
    kernels::shift_rows<float>(right.values(), L, -rig.disparity(depths[d]), warped);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) {
          psv(c, y, x, d) = lv[L.at(y, x, c)];
          psv(c + 3, y, x, d) = warped[L.at(y, x, c)];
        }
  }
  return psv;
}

Mpi estimate_mpi(const PlaneSweepVolume& psv, const CameraRig& rig, const std::vector<double>& depths,
                 double temperature, int cost_radius) {
  if (psv.channels() != 6) throw std::invalid_argument("estimate_mpi expects a [6, H, W, D] volume");
  if (psv.planes() != int(depths.size())) throw std::invalid_argument("estimate_mpi: depth count does not match volume");
  if (!(temperature > 0.0)) throw std::invalid_argument("estimate_mpi: temperature must be positive");
  const int h = psv.height(), w = psv.width(), n = psv.planes();
  const std::size_t hw = std::size_t(h) * w;
  const auto L = kernels::Layout::interleaved(h, w, 3);

  std::vector<float> cost(hw * n);
  std::vector<float> a(hw * 3), b(hw * 3);
  for (int d = 0; d < n; ++d) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) {
          a[L.at(y, x, c)] = psv(c, y, x, d);
          b[L.at(y, x, c)] = psv(c + 3, y, x, d);
        }
    kernels::matching_cost<float>(a, b, L, cost_radius, std::span<float>(cost).subspan(d * hw, hw));
  }

  Mpi m;
  m.depths = depths;
  m.rig = rig;
  Image left(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) left.set(y, x, c, psv(c, y, x, 0));
  std::vector<std::vector<float>> alpha(n, std::vector<float>(hw));
#pragma omp parallel for schedule(static)
  for (long p = 0; p < long(hw); ++p) {
    double lo = cost[p];
    for (int d = 1; d < n; ++d) lo = std::min(lo, double(cost[d * hw + p]));
    std::vector<double> wgt(n);
    double total = 0.0;
    for (int d = 0; d < n; ++d) total += wgt[d] = std::exp(-(double(cost[d * hw + p]) - lo) / temperature);
    // alpha_i = w_i / prod_{j>i}(1 - alpha_j) = w_i / sum_{j<=i} w_j for normalised w.
    double cumulative = 0.0;
    for (int d = 0; d < n; ++d) {
      const double wd = wgt[d] / total;
      cumulative += wd;
      alpha[d][p] = d == 0 ? 1.0f : float(std::clamp(cumulative > 0.0 ? wd / cumulative : 0.0, 0.0, 1.0));
    }
  }
  for (int d = 0; d < n; ++d) {
    m.colors.push_back(left);
    m.alphas.push_back(ConfidenceMap::from_values(h, w, std::move(alpha[d])));
  }
  m.validate();
  return m;
}

std::vector<ConfidenceMap> compositing_weights(const Mpi& mpi) {
  mpi.validate();
  const int h = mpi.height(), w = mpi.width(), n = mpi.planes();
  std::vector<ConfidenceMap> out(n, ConfidenceMap(h, w));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double transmit = 1.0;
      for (int d = n - 1; d >= 0; --d) {
        const double a = mpi.alphas[d](y, x);
        out[d].set(y, x, float(a * transmit));
        transmit *= 1.0 - a;
      }
    }
  return out;
}

}  // namespace svs::mpi
