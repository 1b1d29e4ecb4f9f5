#include <algorithm>
#include <cmath>
#include <tuple>

#include "svs/tinynet/train_utils.hpp"

namespace svs::tinynet {

namespace {

void check_fraction(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("prune fraction must lie in [0, 1], got " + std::to_string(fraction));
}

}  // namespace

template <class T>
void prune_values(const std::vector<std::span<T>>& tensors, double fraction) {
  check_fraction(fraction);
  struct Entry {
    double magnitude;
    std::size_t tensor;
    std::size_t index;
  };
  std::vector<Entry> entries;
  for (std::size_t t = 0; t < tensors.size(); ++t)
    for (std::size_t i = 0; i < tensors[t].size(); ++i) entries.push_back({std::abs(double(tensors[t][i])), t, i});
  const auto count = static_cast<std::size_t>(std::floor(fraction * double(entries.size())));
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.magnitude, a.tensor, a.index) < std::tie(b.magnitude, b.tensor, b.index);
  });
  for (std::size_t i = 0; i < count; ++i) tensors[entries[i].tensor][entries[i].index] = T(0);
}

template <class T>
FlowNetwork<T> prune(const FlowNetwork<T>& net, const PruneSpec& spec) {
  check_fraction(spec.fraction);
  FlowNetwork<T> out = net.clone();
  std::vector<std::span<T>> weights;
  for (auto& p : out.parameters())
    if (p.prunable()) weights.push_back(p.tensor.mutable_values());
  if (spec.per_layer) {
    for (auto& w : weights) prune_values<T>({w}, spec.fraction);
  } else {
    prune_values(weights, spec.fraction);
  }
  return out;
}

template void prune_values<float>(const std::vector<std::span<float>>&, double);
template void prune_values<double>(const std::vector<std::span<double>>&, double);
template FlowNetwork<float> prune<float>(const FlowNetwork<float>&, const PruneSpec&);
template FlowNetwork<double> prune<double>(const FlowNetwork<double>&, const PruneSpec&);

}  // namespace svs::tinynet
