#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "c2s2/ops.hpp"
#include "c2s2/rng.hpp"
#include "c2s2/tensor.hpp"
#include "testutil.hpp"

using namespace c2s2;
using testutil::check_gradients;
using testutil::project_to_scalar;
using testutil::random_tensor;

TEST_CASE("conv2d known values") {
  // all-ones 3x3 input with an all-ones 3x3 kernel collapses to the sum
  Tensor x = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor y = ops::conv2d(x, w, Tensor(), 1, 0);
  CHECK(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y.item() == doctest::Approx(9.0));

  Tensor wz = Tensor::zeros({2, 1, 3, 3});
  Tensor yz = ops::conv2d(x, wz, Tensor(), 1, 0);
  for (double v : yz.data()) CHECK(v == 0.0);
}

TEST_CASE("conv2d shape errors") {
  Tensor x = Tensor::full({1, 2, 4, 4}, 1.0);
  Tensor w = Tensor::full({3, 1, 3, 3}, 1.0);  // depth mismatch
  CHECK_THROWS_AS(ops::conv2d(x, w, Tensor(), 1, 0), ShapeError);
  Tensor wbig = Tensor::full({1, 2, 7, 7}, 1.0);  // kernel larger than padded input
  CHECK_THROWS_AS(ops::conv2d(x, wbig, Tensor(), 1, 1), ShapeError);
}

TEST_CASE("conv2d output shape and gradients vs finite differences") {
  Rng rng(42);
  Tensor x = random_tensor({2, 3, 8, 8}, rng);
  Tensor w = random_tensor({4, 3, 3, 3}, rng);
  Tensor b = random_tensor({4}, rng);
  Tensor y = ops::conv2d(x, w, b, 2, 1);
  CHECK(y.shape() == Shape{2, 4, 4, 4});

  auto make_loss = [&]() { return project_to_scalar(ops::conv2d(x, w, b, 2, 1), 7); };
  auto res = check_gradients(make_loss, {x, w, b});
  CHECK_MESSAGE(res.ok, res.detail);
}

TEST_CASE("channel_scale identity, masking and gradients") {
  Rng rng(1);
  Tensor x = random_tensor({2, 2, 3, 3}, rng, false);

  Tensor ones = Tensor::full({2}, 1.0);
  Tensor y = ops::channel_scale(x, ones);
  // exact bitwise identity
  for (size_t i = 0; i < x.data().size(); ++i) CHECK(y.data()[i] == x.data()[i]);

  Tensor mask = Tensor::from_data({2}, {1.0, 0.0});
  Tensor ym = ops::channel_scale(x, mask);
  for (int n = 0; n < 2; ++n) {
    for (int i = 0; i < 9; ++i) {
      CHECK(ym.data()[n * 18 + i] == x.data()[n * 18 + i]);
      CHECK(ym.data()[n * 18 + 9 + i] == 0.0);
    }
  }

  Tensor xg = random_tensor({2, 3, 4, 4}, rng);
  Tensor wg = random_tensor({3}, rng);
  auto make_loss = [&]() { return project_to_scalar(ops::channel_scale(xg, wg), 11); };
  auto res = check_gradients(make_loss, {xg, wg});
  CHECK_MESSAGE(res.ok, res.detail);

  Tensor bad = Tensor::full({5}, 1.0);
  CHECK_THROWS_AS(ops::channel_scale(x, bad), ShapeError);
}

TEST_CASE("relu known values") {
  Tensor x = Tensor::from_data({3}, {-1.0, 0.0, 2.0});
  Tensor y = ops::relu(x);
  CHECK(y.data() == std::vector<double>{0.0, 0.0, 2.0});
}

TEST_CASE("softmax cross entropy on uniform logits is ln(k)") {
  for (int k : {2, 5, 10}) {
    Tensor z = Tensor::zeros({3, k});
    std::vector<int> labels = {0, k - 1, k / 2};
    Tensor loss = ops::softmax_cross_entropy(z, labels);
    CHECK(loss.item() == doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-12));
  }
}

TEST_CASE("softmax cross entropy errors") {
  Tensor z = Tensor::zeros({2, 3});
  CHECK_THROWS_AS(ops::softmax_cross_entropy(z, {0, 5}), ShapeError);
  CHECK_THROWS_AS(ops::softmax_cross_entropy(z, {0}), ShapeError);
}

TEST_CASE("softmax cross entropy gradient vs finite differences") {
  Rng rng(3);
  Tensor z = random_tensor({4, 5}, rng);
  std::vector<int> labels = {1, 0, 4, 2};
  auto make_loss = [&]() { return ops::softmax_cross_entropy(z, labels); };
  auto res = check_gradients(make_loss, {z});
  CHECK_MESSAGE(res.ok, res.detail);
}

TEST_CASE("batchnorm2d gradient vs finite differences (train and eval)") {
  Rng rng(5);
  Tensor x = random_tensor({2, 3, 4, 4}, rng);
  Tensor gamma = random_tensor({3}, rng, true, 0.5, 1.5);
  Tensor beta = random_tensor({3}, rng);
  ops::BatchNormState st;
  st.running_mean = {0.1, -0.2, 0.05};
  st.running_var = {1.1, 0.9, 1.3};

  auto train_loss = [&]() {
    return project_to_scalar(ops::batchnorm2d(x, gamma, beta, st, true, false), 13);
  };
  auto res = check_gradients(train_loss, {x, gamma, beta});
  CHECK_MESSAGE(res.ok, res.detail);

  auto eval_loss = [&]() {
    return project_to_scalar(ops::batchnorm2d(x, gamma, beta, st, false, false), 17);
  };
  res = check_gradients(eval_loss, {x, gamma, beta});
  CHECK_MESSAGE(res.ok, res.detail);
}

TEST_CASE("batchnorm2d running stats update only when asked") {
  Rng rng(6);
  Tensor x = random_tensor({2, 2, 3, 3}, rng, false);
  Tensor gamma = Tensor::full({2}, 1.0);
  Tensor beta = Tensor::zeros({2});
  ops::BatchNormState st;
  st.running_mean = {0.0, 0.0};
  st.running_var = {1.0, 1.0};
  ops::batchnorm2d(x, gamma, beta, st, true, false);
  CHECK(st.running_mean == std::vector<double>{0.0, 0.0});
  ops::batchnorm2d(x, gamma, beta, st, true, true);
  CHECK(st.running_mean != std::vector<double>{0.0, 0.0});
}

TEST_CASE("maxpool, avgpool, dense, add gradients vs finite differences") {
  Rng rng(8);
  Tensor x = random_tensor({2, 2, 4, 4}, rng);
  auto pool_loss = [&]() { return project_to_scalar(ops::maxpool2d(x, 2, 2), 19); };
  auto res = check_gradients(pool_loss, {x});
  CHECK_MESSAGE(res.ok, res.detail);

  auto gap_loss = [&]() { return project_to_scalar(ops::global_avgpool(x), 23); };
  res = check_gradients(gap_loss, {x});
  CHECK_MESSAGE(res.ok, res.detail);

  Tensor xf = random_tensor({3, 5}, rng);
  Tensor wf = random_tensor({4, 5}, rng);
  Tensor bf = random_tensor({4}, rng);
  auto dense_loss = [&]() { return project_to_scalar(ops::dense(xf, wf, bf), 29); };
  res = check_gradients(dense_loss, {xf, wf, bf});
  CHECK_MESSAGE(res.ok, res.detail);

  Tensor a = random_tensor({2, 3}, rng);
  Tensor b2 = random_tensor({2, 3}, rng);
  auto add_loss = [&]() { return project_to_scalar(ops::add(a, b2), 31); };
  res = check_gradients(add_loss, {a, b2});
  CHECK_MESSAGE(res.ok, res.detail);
}

TEST_CASE("diamond graphs accumulate gradients once per node") {
  Tensor x = Tensor::from_data({2}, {1.0, 2.0}, true);
  Tensor s = ops::add(x, x);  // y = 2x
  Tensor loss = project_to_scalar(s, 37);
  loss.backward();
  // d(sum w*2x)/dx = 2w; recompute w from the projection seed
  Rng rng(37);
  for (size_t i = 0; i < 2; ++i) {
    const double w = rng.uniform(-1.0, 1.0);
    CHECK(x.grad()[i] == doctest::Approx(2.0 * w).epsilon(1e-12));
  }
}

TEST_CASE("forward evaluation is deterministic") {
  Rng rng(9);
  Tensor x = random_tensor({2, 3, 6, 6}, rng, false);
  Tensor w = random_tensor({4, 3, 3, 3}, rng, false);
  Tensor y1 = ops::conv2d(x, w, Tensor(), 1, 1);
  Tensor y2 = ops::conv2d(x, w, Tensor(), 1, 1);
  CHECK(y1.data() == y2.data());
}

TEST_CASE("sgd_step known values") {
  Tensor p = Tensor::from_data({1}, {1.0}, true);
  double* g = detail::grad_ptr(p);
  g[0] = 0.5;
  std::vector<double> vel;
  ops::sgd_step("p", p, vel, 0.1, 0.0);
  CHECK(p.data()[0] == doctest::Approx(0.95).epsilon(1e-15));

  // zero gradient leaves parameters untouched
  Tensor q = Tensor::from_data({2}, {0.3, -0.7}, true);
  double* gq = detail::grad_ptr(q);
  gq[0] = 0.0;
  gq[1] = 0.0;
  ops::sgd_step("q", q, vel, 0.1, 0.0);
  CHECK(q.data() == std::vector<double>{0.3, -0.7});

  // two momentum steps with constant unit gradient: v=1 then v=1.9
  Tensor r = Tensor::from_data({1}, {0.0}, true);
  std::vector<double> vr;
  for (int step = 0; step < 2; ++step) {
    r.zero_grad();
    double* gr = detail::grad_ptr(r);
    gr[0] = 1.0;
    ops::sgd_step("r", r, vr, 0.1, 0.9);
  }
  CHECK(r.data()[0] == doctest::Approx(-0.29).epsilon(1e-12));
}

TEST_CASE("sgd_step rejects non-finite gradients by name") {
  Tensor p = Tensor::from_data({1}, {1.0}, true);
  double* g = detail::grad_ptr(p);
  g[0] = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> vel;
  CHECK_THROWS_WITH_AS(ops::sgd_step("conv1.w", p, vel, 0.1, 0.0),
                       doctest::Contains("conv1.w"), NumericError);
}

TEST_CASE("l1 and bipolar penalties with gradients") {
  Tensor p = Tensor::from_data({2}, {0.9, 0.3}, true);
  CHECK(ops::l1_norm(p).item() == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(ops::bipolar_norm(p).item() == doctest::Approx(0.30).epsilon(1e-12));

  Tensor z = Tensor::zeros({3});
  CHECK(ops::l1_norm(z).item() == 0.0);
  Tensor pm = Tensor::from_data({2}, {-0.2, 0.2});
  CHECK(ops::l1_norm(pm).item() == doctest::Approx(0.4).epsilon(1e-12));

  Tensor bp = Tensor::from_data({4}, {0.0, 1.0, 1.0, 0.0});
  CHECK(ops::bipolar_norm(bp).item() == 0.0);
  Tensor half = Tensor::from_data({1}, {0.5});
  CHECK(ops::bipolar_norm(half).item() == doctest::Approx(0.25).epsilon(1e-12));

  // gradients away from the kinks at 0 and 1
  Rng rng(12);
  Tensor pr = random_tensor({6}, rng, true, 0.05, 0.95);
  auto l1_loss = [&]() { return ops::l1_norm(pr); };
  auto res = check_gradients(l1_loss, {pr});
  CHECK_MESSAGE(res.ok, res.detail);
  auto bp_loss = [&]() { return ops::bipolar_norm(pr); };
  res = check_gradients(bp_loss, {pr});
  CHECK_MESSAGE(res.ok, res.detail);
}
