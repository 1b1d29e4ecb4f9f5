#include "svs/tinynet/tensor.hpp"

#include <unordered_set>

namespace svs::tinynet {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative tensor dimension in " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <class T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value.assign(shape_numel(shape), T(0));
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <class T>
Tensor<T> Tensor<T>::from_values(Shape shape, std::vector<T> values, bool requires_grad) {
  if (values.size() != shape_numel(shape))
    throw std::invalid_argument("tensor of shape " + shape_string(shape) + " needs " +
                                std::to_string(shape_numel(shape)) + " values, got " + std::to_string(values.size()));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <class T>
std::span<const T> Tensor<T>::grad() const {
  if (!has_grad()) node_->ensure_grad();
  return node_->grad;
}

template <class T>
T Tensor<T>::item() const {
  if (numel() != 1) throw std::invalid_argument("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

template <class T>
Tensor<T> Tensor<T>::detach() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->value = node_->value;
  node->op = "detach";
  return Tensor(std::move(node));
}

template <class T>
Tensor<T> Tensor<T>::clone(bool requires_grad) const {
  return from_values(node_->shape, node_->value, requires_grad);
}

template <class T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> value,
                      std::vector<std::shared_ptr<detail::Node<T>>> inputs,
                      std::function<void(detail::Node<T>&)> backward_fn) {
  auto node = std::make_shared<detail::Node<T>>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  for (const auto& in : inputs)
    if (in->requires_grad) node->requires_grad = true;
  if (node->requires_grad) {
    node->inputs = std::move(inputs);
    node->backward = std::move(backward_fn);
  }
  return Tensor<T>(std::move(node));
}

template <class T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined()) throw std::invalid_argument("backward on an undefined tensor");
  if (loss.numel() != 1)
    throw std::invalid_argument("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  if (!loss.requires_grad()) return;

  using Node = detail::Node<T>;
  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (!node->backward) continue;
    for (auto& in : node->inputs)
      if (in->requires_grad) in->ensure_grad();
    node->ensure_grad();
    node->backward(*node);
  }
}

template class Tensor<float>;
template class Tensor<double>;

#define SVS_INSTANTIATE(T)                                                                               \
  template Tensor<T> make_result<T>(const char*, Shape, std::vector<T>,                                 \
                                    std::vector<std::shared_ptr<detail::Node<T>>>,                      \
                                    std::function<void(detail::Node<T>&)>);                             \
  template void backward<T>(const Tensor<T>&);

SVS_INSTANTIATE(float)
SVS_INSTANTIATE(double)
#undef SVS_INSTANTIATE

}  // namespace svs::tinynet
