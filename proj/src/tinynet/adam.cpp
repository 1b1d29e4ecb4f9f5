#include <cmath>

#include "svs/tinynet/train_utils.hpp"

namespace svs::tinynet {

template <class T>
void Adam<T>::step(std::vector<NamedParameter<T>>& params) {
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (T g : p.tensor.grad())
      if (!std::isfinite(static_cast<double>(g)))
        throw NonFiniteGradient("non-finite gradient in parameter '" + p.name + "'; step rejected");
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.tensor.numel(), 0.0);
      v_.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam: parameter list changed between steps");

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& tensor = params[i].tensor;
    if (m_[i].size() != tensor.numel()) throw std::invalid_argument("Adam: shape of '" + params[i].name + "' changed");
    if (!tensor.has_grad()) continue;
    auto values = tensor.mutable_values();
    const auto grad = tensor.grad();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double g = grad[k];
      m_[i][k] = cfg_.beta1 * m_[i][k] + (1.0 - cfg_.beta1) * g;
      v_[i][k] = cfg_.beta2 * v_[i][k] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[i][k] / bc1, vhat = v_[i][k] / bc2;
      values[k] = static_cast<T>(values[k] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace svs::tinynet
