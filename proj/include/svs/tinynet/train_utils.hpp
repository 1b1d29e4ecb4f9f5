#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "svs/tinynet/flow_network.hpp"

namespace svs::tinynet {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Raised when a gradient contains NaN or Inf; parameters are left untouched.
class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adam with bias correction. Moment buffers are keyed by parameter position,
/// so one optimizer serves one network.
template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// Applies one update from each parameter's accumulated gradient.
  void step(std::vector<NamedParameter<T>>& params);

  long steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct PruneSpec {
  double fraction = 0.5;
  /// Rank within each tensor instead of across the whole network.
  bool per_layer = false;
};

/// Zeroes the floor(fraction * N) smallest-magnitude entries across all
/// spans (N = total entry count); ties go to the earlier span, then index.
template <class T>
void prune_values(const std::vector<std::span<T>>& tensors, double fraction);

/// Copy of `net` with floor(fraction * N) prunable weights zeroed, chosen by
/// ascending magnitude (ties: parameter order, then index). N counts every
/// prunable weight (per tensor when per_layer). Biases are untouched.
template <class T>
FlowNetwork<T> prune(const FlowNetwork<T>& net, const PruneSpec& spec);

/// Writes a text manifest at `path` and raw little-endian float32 data at `path` + ".bin".
void save_checkpoint(const FlowNet& net, const std::filesystem::path& path);
FlowNet load_checkpoint(const std::filesystem::path& path);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace svs::tinynet
