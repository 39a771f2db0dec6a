#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <set>

#include "rsf/color.hpp"
#include "rsf/error.hpp"
#include "rsf/networks.hpp"
#include "support/synthetic.hpp"

using namespace rsf;

TEST_CASE("conv layer examples") {
  Graph g;
  ConvLayer id(1, 1, 3);
  id.weight.at(0, 1, 1) = 1.0f;
  Tensor x = testing::random_image(1, 5, 5, 2);
  Var y = apply_conv(g, g.constant(x), id);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(g.value(y)[i] == x[i]);

  ConvLayer ones(1, 1, 3);
  for (float& w : ones.weight.data()) w = 1.0f;
  Var s = apply_conv(g, g.constant(Tensor(1, 5, 5, 0.25f)), ones);
  CHECK(g.value(s).at(0, 2, 2) == doctest::Approx(9 * 0.25));

  CHECK_THROWS_AS(apply_conv(g, g.constant(Tensor(2, 5, 5)), ones), InvalidInput);
  CHECK_THROWS_AS(ConvLayer(1, 1, 4), InvalidConfig);
}

TEST_CASE("dehaze network shape and range") {
  Rng rng(3);
  ModelState m = init_weights(rng);
  REQUIRE(m.dehaze.units.size() == 5);
  for (const auto& u : m.dehaze.units) {
    CHECK(u.conv.in_channels == 6);
    CHECK(u.conv.out_channels == 3);
    CHECK(u.conv.kernel == 7);
  }
  Graph g;
  Tensor x = testing::tissue_image(24, 1);
  DehazeOutput out = dehaze_forward(g, m.dehaze, g.constant(x));
  const Tensor& d = g.value(out.image);
  CHECK(d.same_shape(x));
  CHECK(d.min_value() >= 0.0f);
  CHECK(d.max_value() <= 1.0f);
  CHECK(out.plans.size() == 5);
  CHECK(out.final_variance.values.height() == 24);

  // Extreme weights still respect the range contract.
  for (auto& u : m.dehaze.units)
    for (float& w : u.conv.weight.data()) w *= 50.0f;
  Graph g2;
  const Tensor& d2 = g2.value(dehaze_forward(g2, m.dehaze, g2.constant(x)).image);
  CHECK(d2.min_value() >= 0.0f);
  CHECK(d2.max_value() <= 1.0f);
}

TEST_CASE("zero weights give a constant 0.5 output") {
  ModelState m = create_model();
  Graph g;
  const Tensor& d = g.value(dehaze_forward(g, m.dehaze, g.constant(testing::tissue_image(16, 2))).image);
  for (float v : d.data()) CHECK(std::abs(v - 0.5f) < 1e-5);
}

TEST_CASE("differentiable rsfm matches the plain module") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Tensor ycc = rgb_to_ycbcr(testing::tissue_image(32, seed));
    Graph g;
    const Tensor& a = g.value(differentiable_rsfm(g, g.constant(ycc), {}));
    const Tensor b = rsfm_apply_ycbcr(ycc, {});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6);
  }
  Graph g;
  Tensor flat(3, 8, 8, 0.4f);
  Var v = g.variable(flat);
  Var out = differentiable_rsfm(g, v, {});
  for (std::size_t i = 0; i < flat.size(); ++i) CHECK(g.value(out)[i] == flat[i]);
  Rng rng(1);
  Tensor w = rng.uniform_tensor(3, 8, 8, -1.0, 1.0);
  g.backward(ad::mean(ad::mul_const(out, w)));
  const Tensor gr = g.grad(v);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(gr[i] == doctest::Approx(w[i] / 192.0));
}

TEST_CASE("perception network") {
  Rng rng(5);
  ModelState m = init_weights(rng);
  const Tensor x = testing::tissue_image(32, 3);
  CHECK(latent_shape(32, 32) == std::array<int, 3>{8, 4, 4});
  {
    Graph g;
    Rng noise(9);
    GpnOutput o = gpn_forward(g, m.gpn, g.constant(x), noise);
    const Tensor& a = g.value(o.airlight);
    CHECK(a.same_shape(x));
    CHECK(a.min_value() > 0.0f);
    CHECK(a.max_value() < 1.0f);
    CHECK(g.value(o.mu).height() == 4);
  }
  auto run = [&](std::uint64_t seed) {
    Graph g;
    Rng noise(seed);
    return g.value(gpn_forward(g, m.gpn, g.constant(x), noise).airlight);
  };
  CHECK(run(1).data() == run(1).data());
  CHECK(run(1).data() != run(2).data());

  ModelState bright = m;
  for (float& b : bright.gpn.to_rgb.bias.data()) b = 10.0f;
  Graph g;
  Rng noise(1);
  const Tensor& a = g.value(gpn_forward(g, bright.gpn, g.constant(x), noise).airlight);
  CHECK(a.min_value() > 0.99f);

  Graph bad;
  Rng n2(1);
  CHECK_THROWS_AS(gpn_forward(bad, m.gpn, bad.constant(Tensor(3, 12, 16)), n2), InvalidInput);
}

TEST_CASE("weight initialisation") {
  Rng a(42), b(42);
  ModelState ma = init_weights(a), mb = init_weights(b);
  auto pa = ma.parameters();
  auto pb = mb.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].tensor->data() == pb[i].tensor->data());

  for (const auto& p : pa)
    if (p.name.ends_with(".bias"))
      for (float v : p.tensor->data()) CHECK(v == 0.0f);

  // 6 -> 3, 7x7 unit conv.
  const Tensor& w = ma.dehaze.units[0].conv.weight;
  const double bound = std::sqrt(1.0 / (6 * 49));
  double sum = 0.0, sq = 0.0;
  for (float v : w.data()) {
    CHECK(std::abs(v) <= bound);
    sum += v;
    sq += double(v) * v;
  }
  const double n = static_cast<double>(w.size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(sd - bound / std::sqrt(3.0)) < 0.1 * bound / std::sqrt(3.0));

  Rng c(43);
  ModelState mc = init_weights(c);
  CHECK(mc.dehaze.units[0].conv.weight.data() != w.data());
}

TEST_CASE("parameter names are unique and prefixed") {
  ModelState m = create_model();
  auto ps = m.parameters();
  std::set<std::string> names;
  for (const auto& p : ps) {
    CHECK((p.name.starts_with("dehaze.") || p.name.starts_with("gpn.")));
    names.insert(p.name);
  }
  CHECK(names.size() == ps.size());
}

TEST_CASE("checkpoint round trip") {
  Rng rng(7);
  ModelState m = init_weights(rng);
  const auto path = std::filesystem::temp_directory_path() / "rsf_ckpt_test.bin";
  save_checkpoint(path, m);
  ModelState back = create_model();
  load_checkpoint(path, back);
  auto pa = m.parameters();
  auto pb = back.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].tensor->data() == pb[i].tensor->data());

  RsfmConfig k3;
  k3.window = 3;
  ModelState other = create_model(k3);
  CHECK_THROWS_AS(load_checkpoint(path, other), LoadError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path, back), LoadError);
}
