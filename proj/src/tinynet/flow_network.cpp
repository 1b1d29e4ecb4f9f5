#include "svs/tinynet/flow_network.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string_view>

#include "svs/tinynet/ops.hpp"
#include "svs/util/rng.hpp"

namespace svs::tinynet {

namespace {

struct LayerSpec {
  std::string name;
  int cin;
  int cout;
  int kernel;
};

std::vector<LayerSpec> layer_specs(const Architecture& a) {
  if (a.widths.size() != 4) throw std::invalid_argument("architecture needs exactly 4 widths");
  for (int w : a.widths)
    if (w <= 0 || w > 32) throw std::invalid_argument("architecture widths must lie in [1, 32]");
  if (a.in_channels <= 0) throw std::invalid_argument("architecture needs at least one input channel");
  const auto& w = a.widths;
  return {
      {"enc0", a.in_channels, w[0], 3}, {"enc1", w[0], w[1], 3},      {"enc2", w[1], w[2], 3},
      {"enc3", w[2], w[3], 3},          {"dec2", w[3] + w[2], w[2], 3}, {"dec1", w[2] + w[1], w[1], 3},
      {"dec0", w[1] + w[0], w[0], 3},   {"head", w[0], w[0], 1},        {"out", w[0], 1, 1},
  };
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string Architecture::describe() const {
  std::ostringstream os;
  os << "in_channels=" << in_channels << " widths=";
  for (std::size_t i = 0; i < widths.size(); ++i) os << (i ? "," : "") << widths[i];
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, slope);
  os << " slope=" << std::string_view(buf, r.ptr - buf);
  return os.str();
}

Architecture Architecture::parse(const std::string& text) {
  Architecture a;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad architecture token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "in_channels") {
      a.in_channels = std::stoi(val);
    } else if (key == "widths") {
      a.widths.clear();
      std::istringstream ws(val);
      std::string part;
      while (std::getline(ws, part, ',')) a.widths.push_back(std::stoi(part));
    } else if (key == "slope") {
      a.slope = std::stod(val);
    } else {
      throw std::invalid_argument("unknown architecture key '" + key + "'");
    }
  }
  layer_specs(a);
  return a;
}

template <class T>
bool NamedParameter<T>::prunable() const {
  return ends_with(name, ".weight");
}

template <class T>
FlowNetwork<T> FlowNetwork<T>::zeros(const Architecture& arch) {
  FlowNetwork net;
  net.arch_ = arch;
  for (const auto& l : layer_specs(arch)) {
    net.params_.push_back({l.name + ".weight", Tensor<T>::zeros({l.cout, l.cin, l.kernel, l.kernel}, true)});
    net.params_.push_back({l.name + ".bias", Tensor<T>::zeros({l.cout}, true)});
  }
  return net;
}

template <class T>
FlowNetwork<T> FlowNetwork<T>::initialize(const Architecture& arch, std::uint64_t seed) {
  FlowNetwork net = zeros(arch);
  util::Rng rng(seed);
  const auto specs = layer_specs(arch);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& l = specs[i];
    const double fan_in = double(l.cin) * l.kernel * l.kernel;
    double bound = std::sqrt(6.0 / ((1.0 + arch.slope * arch.slope) * fan_in));
    if (l.name == "out") bound *= 0.1;
    for (auto& v : net.params_[2 * i].tensor.mutable_values()) v = static_cast<T>(rng.uniform(-bound, bound));
  }
  return net;
}

template <class T>
Tensor<T>& FlowNetwork<T>::parameter(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p.tensor;
  throw std::invalid_argument("no parameter named '" + name + "'");
}

template <class T>
const Tensor<T>& FlowNetwork<T>::parameter(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.tensor;
  throw std::invalid_argument("no parameter named '" + name + "'");
}

template <class T>
Tensor<T> FlowNetwork<T>::conv(const Tensor<T>& x, const std::string& layer) const {
  return conv2d(x, parameter(layer + ".weight"), parameter(layer + ".bias"));
}

void require_divisible(int height, int width, int factor) {
  if (height % factor == 0 && width % factor == 0) return;
  const int ph = (factor - height % factor) % factor, pw = (factor - width % factor) % factor;
  throw std::invalid_argument("input " + std::to_string(height) + "x" + std::to_string(width) +
                              " is not divisible by " + std::to_string(factor) + "; pad by " + std::to_string(ph) +
                              " rows and " + std::to_string(pw) + " columns");
}

template <class T>
Tensor<T> FlowNetwork<T>::forward(const Tensor<T>& x) const {
  if (x.shape().size() != 3 || x.dim(0) != arch_.in_channels)
    throw std::invalid_argument("network input must be [" + std::to_string(arch_.in_channels) + ",H,W], got " +
                                shape_string(x.shape()));
  require_divisible(x.dim(1), x.dim(2), kDownsampleFactor);
  const T s = static_cast<T>(arch_.slope);
  auto act = [s](const Tensor<T>& t) { return leaky_relu(t, s); };

  const auto e0 = act(conv(x, "enc0"));
  const auto e1 = act(conv(avg_pool2(e0), "enc1"));
  const auto e2 = act(conv(avg_pool2(e1), "enc2"));
  const auto e3 = act(conv(avg_pool2(e2), "enc3"));
  const auto d2 = act(conv(concat_channels(upsample2(e3), e2), "dec2"));
  const auto d1 = act(conv(concat_channels(upsample2(d2), e1), "dec1"));
  const auto d0 = act(conv(concat_channels(upsample2(d1), e0), "dec0"));
  return conv(act(conv(d0, "head")), "out");
}

template <class T>
imagecore::FlowField FlowNetwork<T>::forward(const imagecore::Image& img) const {
  return tensor_to_flow(forward(image_to_tensor<T>(img, true)));
}

template <class T>
FlowNetwork<T> FlowNetwork<T>::clone() const {
  FlowNetwork net;
  net.arch_ = arch_;
  for (const auto& p : params_) net.params_.push_back({p.name, p.tensor.clone(p.tensor.requires_grad())});
  return net;
}

template <class T>
void FlowNetwork<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <class T>
std::size_t FlowNetwork<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

template <class T>
Tensor<T> image_to_tensor(const imagecore::Image& img, bool centered) {
  const int c = img.channels(), h = img.height(), w = img.width();
  std::vector<T> v(img.size());
  const T offset = centered ? T(0.5) : T(0);
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) v[(std::size_t(k) * h + y) * w + x] = static_cast<T>(img(y, x, k)) - offset;
  return Tensor<T>::from_values({c, h, w}, std::move(v));
}

template <class T>
imagecore::Image tensor_to_image(const Tensor<T>& t) {
  if (t.shape().size() != 3) throw std::invalid_argument("tensor_to_image needs [C,H,W]");
  const int c = t.dim(0), h = t.dim(1), w = t.dim(2);
  std::vector<float> v(t.numel());
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        v[(std::size_t(y) * w + x) * c + k] = static_cast<float>(t.values()[(std::size_t(k) * h + y) * w + x]);
  return imagecore::Image::from_values(h, w, c, std::move(v));
}

template <class T>
imagecore::FlowField tensor_to_flow(const Tensor<T>& t) {
  if (t.shape().size() != 3 || t.dim(0) != 1) throw std::invalid_argument("flow tensor must be [1,H,W]");
  std::vector<float> v(t.values().begin(), t.values().end());
  return imagecore::FlowField::from_values(t.dim(1), t.dim(2), std::move(v));
}

template <class T>
Tensor<T> flow_to_tensor(const imagecore::FlowField& f) {
  std::vector<T> v(f.values().begin(), f.values().end());
  return Tensor<T>::from_values({1, f.height(), f.width()}, std::move(v));
}

template struct NamedParameter<float>;
template struct NamedParameter<double>;
template class FlowNetwork<float>;
template class FlowNetwork<double>;
template Tensor<float> image_to_tensor<float>(const imagecore::Image&, bool);
template Tensor<double> image_to_tensor<double>(const imagecore::Image&, bool);
template imagecore::Image tensor_to_image<float>(const Tensor<float>&);
template imagecore::Image tensor_to_image<double>(const Tensor<double>&);
template imagecore::FlowField tensor_to_flow<float>(const Tensor<float>&);
template imagecore::FlowField tensor_to_flow<double>(const Tensor<double>&);
template Tensor<float> flow_to_tensor<float>(const imagecore::FlowField&);
template Tensor<double> flow_to_tensor<double>(const imagecore::FlowField&);

}  // namespace svs::tinynet
