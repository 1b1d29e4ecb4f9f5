#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "../support/gradcheck.hpp"
#include "svs/tinynet/train_utils.hpp"

using namespace svs;
using namespace svs::tinynet;
namespace fs = std::filesystem;

namespace {

FlowNet small_net(std::uint64_t seed) {
  Architecture arch;
  arch.widths = {4, 4, 6, 6};
  return FlowNet::initialize(arch, seed);
}

std::vector<float> all_values(const FlowNet& net) {
  std::vector<float> v;
  for (const auto& p : net.parameters()) v.insert(v.end(), p.tensor.values().begin(), p.tensor.values().end());
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("tinynet") {
  TEST_CASE("tensor basics") {
    const auto t = Tensor<float>::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(shape_string(t.shape()) == "[2,3]");
    CHECK_THROWS_AS(Tensor<float>::from_values({2, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(backward(t), std::invalid_argument);
  }

  TEST_CASE("gradient of a sum is ones; detached branches get nothing") {
    auto p = Tensor<double>::from_values({1, 2, 2}, {0.1, -0.2, 0.3, 0.4}, true);
    auto q = Tensor<double>::from_values({1, 2, 2}, {1, 2, 3, 4}, true);
    backward(add(sum(p), sum(mul(q.detach(), p))));
    CHECK(p.grad()[0] == doctest::Approx(2.0));
    CHECK(p.grad()[3] == doctest::Approx(5.0));
    CHECK_FALSE(q.has_grad());

    auto r = Tensor<double>::from_values({1, 1, 3}, {1, 2, 3}, true);
    backward(sum(r));
    for (double g : r.grad()) CHECK(g == 1.0);
  }

  TEST_CASE("primitive gradients match central differences (float)") {
    for (const auto& pc : testing::check_primitives<float>(20, 1e-3, 17)) {
      INFO(pc.name << " worst relative error " << pc.worst);
      CHECK(pc.worst < 1e-3);
    }
  }

  TEST_CASE("primitive gradients match central differences (double)") {
    for (const auto& pc : testing::check_primitives<double>(20, 1e-6, 18)) {
      INFO(pc.name << " worst relative error " << pc.worst);
      CHECK(pc.worst < 1e-6);
    }
  }

  TEST_CASE("photometric loss through the network matches central differences") {
    // loss = mean |warp(I, f(I)) - I_r| on an 8x8 toy. The float network's
    // reverse-mode gradient is compared along 10 random parameters with a
    // central difference (step 1e-3) of the same network evaluated in double,
    // since the float loss itself is only good to ~1e-7. Draws whose step
    // crosses a kink of |.|, leaky ReLU or the clamped border are redrawn.
    util::Rng rng(5);
    int checked = 0, redrawn = 0;
    while (checked < 5 && redrawn < 20) {
      auto net = small_net(100 + checked + redrawn);
      net.parameter("out.bias").mutable_values()[0] = 1.37f;  // keep sample positions off the integer grid
      const auto img = testing::random_tensor<float>({3, 8, 8}, rng, 0.0, 1.0, false);
      const auto target = testing::random_tensor<float>({3, 8, 8}, rng, 0.0, 1.0, false);
      net.zero_grad();
      backward(l1_loss(warp(img, net.forward(add_scalar(img, -0.5f))), target));

      auto as_double = [&](const FlowNet& n) {
        auto d = FlowNetwork<double>::zeros(n.architecture());
        for (std::size_t i = 0; i < n.parameters().size(); ++i) {
          const auto src = n.parameters()[i].tensor.values();
          std::copy(src.begin(), src.end(), d.parameters()[i].tensor.mutable_values().begin());
        }
        return d;
      };
      const auto img64 = Tensor<double>::from_values(img.shape(), {img.values().begin(), img.values().end()});
      const auto tgt64 = Tensor<double>::from_values(target.shape(), {target.values().begin(), target.values().end()});
      auto loss_of = [&](const FlowNetwork<double>& n) {
        return l1_loss(warp(img64, n.forward(add_scalar(img64, -0.5))), tgt64).item();
      };
      const double h = 1e-3;
      auto base = as_double(net), plus = base.clone(), minus = base.clone();
      double analytic = 0.0, magnitude = 0.0;
      for (int k = 0; k < 10; ++k) {
        const std::size_t pi = rng.next() % net.parameters().size();
        const std::size_t ei = rng.next() % net.parameters()[pi].tensor.numel();
        const double dir = rng.uniform(-1.0, 1.0);
        plus.parameters()[pi].tensor.mutable_values()[ei] += h * dir;
        minus.parameters()[pi].tensor.mutable_values()[ei] -= h * dir;
        const double term = net.parameters()[pi].tensor.grad()[ei] * dir;
        analytic += term;
        magnitude += std::abs(term);
      }
      const double f0 = loss_of(base), fp = loss_of(plus), fm = loss_of(minus);
      const double numeric = (fp - fm) / (2 * h);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), magnitude});
      if (std::abs((fp - f0) - (f0 - fm)) / (2 * h) > 1e-4 * scale) {
        ++redrawn;
        continue;
      }
      INFO("analytic " << analytic << " numeric " << numeric);
      CHECK(std::abs(analytic - numeric) < 1e-3 * scale);
      ++checked;
    }
    INFO("redrawn " << redrawn);
    CHECK(checked == 5);
  }

  TEST_CASE("network forward contract") {
    auto zero = FlowNet::zeros(Architecture{});
    zero.parameter("out.bias").mutable_values()[0] = 0.75f;
    const imagecore::Image img(16, 24, 3, 0.3f);
    const auto flow = zero.forward(img);
    CHECK(flow.height() == 16);
    CHECK(flow.width() == 24);
    for (float v : flow.values()) CHECK(v == 0.75f);

    const auto a = FlowNet::initialize(Architecture{}, 9);
    const auto b = FlowNet::initialize(Architecture{}, 9);
    CHECK(a.forward(img) == b.forward(img));
    CHECK(all_values(a) != all_values(FlowNet::initialize(Architecture{}, 10)));

    try {
      a.forward(imagecore::Image(12, 24, 3));
      FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("pad by 4 rows") != std::string::npos);
    }
    CHECK(Architecture::parse(Architecture{}.describe()) == Architecture{});
    CHECK_THROWS_AS(Architecture::parse("widths=8,64,8,8"), std::invalid_argument);
  }

  TEST_CASE("adam") {
    auto net = small_net(1);
    const auto before = all_values(net);
    for (auto& p : net.parameters()) p.tensor.grad();  // zero-filled gradients
    Adam<float> zero_opt;
    for (int i = 0; i < 5; ++i) zero_opt.step(net.parameters());
    CHECK(all_values(net) == before);
    CHECK(zero_opt.config().lr == 1e-4);

    // Constant gradient: m_hat / sqrt(v_hat) = 1, so each step moves by lr.
    auto p = Tensor<double>::from_values({1}, {0.0}, true);
    std::vector<NamedParameter<double>> params{{"p.weight", p}};
    Adam<double> opt(AdamConfig{0.01});
    double last = 0.0;
    for (int i = 0; i < 200; ++i) {
      p.zero_grad();
      backward(scale(sum(p), 3.0));
      last = p.values()[0];
      opt.step(params);
    }
    CHECK(last - p.values()[0] == doctest::Approx(0.01).epsilon(1e-6));

    p.zero_grad();
    backward(scale(sum(p), std::numeric_limits<double>::quiet_NaN()));
    const double held = p.values()[0];
    CHECK_THROWS_AS(opt.step(params), NonFiniteGradient);
    CHECK(p.values()[0] == held);
  }

  TEST_CASE("prune") {
    std::vector<float> toy{-0.1f, 0.2f, -0.3f, 0.4f};
    prune_values<float>({std::span<float>(toy)}, 0.5);
    CHECK(toy == std::vector<float>{0.0f, 0.0f, -0.3f, 0.4f});

    // Ties resolve to the earlier tensor, then the lower index.
    std::vector<float> first{0.5f, 0.2f}, second{0.2f, 0.2f};
    prune_values<float>({std::span<float>(first), std::span<float>(second)}, 0.5);
    CHECK(first == std::vector<float>{0.5f, 0.0f});
    CHECK(second == std::vector<float>{0.0f, 0.2f});
    CHECK_THROWS_AS(prune_values<float>({std::span<float>(toy)}, 1.5), std::invalid_argument);

    const auto big = small_net(3);
    const imagecore::Image img(8, 8, 3, 0.6f);
    CHECK(prune(big, PruneSpec{0.0}).forward(img) == big.forward(img));
    const auto before = all_values(big);
    prune(big, PruneSpec{0.7});
    CHECK(all_values(big) == before);

    const auto all = prune(big, PruneSpec{1.0});
    for (const auto& p : all.parameters())
      for (float v : p.tensor.values())
        if (p.prunable()) CHECK(v == 0.0f);
    CHECK(all.parameter("enc0.bias").values()[0] == big.parameter("enc0.bias").values()[0]);

    const auto half = prune(big, PruneSpec{0.5});
    CHECK(all_values(prune(half, PruneSpec{0.5})) == all_values(half));
    std::size_t zeros = 0, total = 0;
    for (const auto& p : half.parameters())
      if (p.prunable()) {
        total += p.tensor.numel();
        for (float v : p.tensor.values()) zeros += v == 0.0f;
      }
    CHECK(zeros == total / 2);

    const auto layered = prune(big, PruneSpec{0.5, true});
    for (const auto& p : layered.parameters()) {
      if (!p.prunable()) continue;
      std::size_t z = 0;
      for (float v : p.tensor.values()) z += v == 0.0f;
      CHECK(z >= p.tensor.numel() / 2);
    }
  }

  TEST_CASE("checkpoint round trip is exact and deterministic") {
    const fs::path dir = fs::temp_directory_path() / "svs_test_ckpt";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto net = small_net(4);
    save_checkpoint(net, dir / "a.ckpt");
    save_checkpoint(net, dir / "b.ckpt");
    CHECK(slurp(dir / "a.ckpt.bin") == slurp(dir / "b.ckpt.bin"));
    CHECK(slurp(dir / "a.ckpt").find("enc0.weight") != std::string::npos);
    const auto back = load_checkpoint(dir / "a.ckpt");
    CHECK(back.architecture() == net.architecture());
    CHECK(all_values(back) == all_values(net));
    CHECK_THROWS(load_checkpoint(dir / "missing.ckpt"));
    std::ofstream(dir / "a.ckpt.bin", std::ios::binary) << "short";
    CHECK_THROWS(load_checkpoint(dir / "a.ckpt"));
  }
}
