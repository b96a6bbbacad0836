#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "tailvar/errors.hpp"
#include "tailvar/lstm.hpp"
#include "tailvar/prng.hpp"

using namespace tailvar;
namespace fs = std::filesystem;

namespace {

Matrix random_window(std::size_t rows, Prng& rng) {
  Matrix w(rows, 4);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      w(i, c) = rng.next_range(-1.0, 1.0);
    }
  }
  return w;
}

// Scalar probe loss: a fixed random linear functional of the mapped output,
// differentiable everywhere, so finite differences are clean.
double probe_loss(const LstmModel& model, const Matrix& window,
                  const Vec& probe) {
  const Vec out = lstm_forward(model, window);
  double loss = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) loss += probe[k] * out[k];
  return loss;
}

}  // namespace

TEST_SUITE("lstm") {

TEST_CASE("initialization is deterministic and shaped by the head") {
  Prng a(7), b(7);
  const LstmModel first = lstm_init(8, HeadKind::htqf, 4, a);
  const LstmModel second = lstm_init(8, HeadKind::htqf, 4, b);
  const Vec fa = first.weights.flatten();
  const Vec fb = second.weights.flatten();
  REQUIRE(fa.size() == fb.size());
  for (std::size_t k = 0; k < fa.size(); ++k) {
    REQUIRE(fa[k] == fb[k]);
  }

  CHECK(first.weights.w_out.rows() == 4);
  CHECK(first.weights.w_f.rows() == 8);
  CHECK(first.weights.w_f.cols() == 4);
  CHECK(first.weights.u_f.cols() == 8);

  Prng c(9);
  const LstmModel tqr = lstm_init(16, HeadKind::tqr, 21, c);
  CHECK(tqr.weights.w_out.rows() == 21);
  CHECK(tqr.weights.b_out.size() == 21);

  // Bounds of the draw and the bias convention.
  const double limit = 1.0 / std::sqrt(8.0);
  for (double w : first.weights.w_f.flat()) {
    REQUIRE(w >= -limit);
    REQUIRE(w < limit);
  }
  for (double bias : first.weights.b_f) CHECK(bias == 1.0);
  for (double bias : first.weights.b_i) CHECK(bias == 0.0);
  for (double bias : first.weights.b_o) CHECK(bias == 0.0);
  for (double bias : first.weights.b_g) CHECK(bias == 0.0);
}

TEST_CASE("zero weights yield the head-map image of zero") {
  Prng rng(3);
  LstmModel model = lstm_init(4, HeadKind::htqf, 4, rng);
  model.weights.scale(0.0);
  Matrix window = random_window(6, rng);
  ForwardTrace trace;
  const Vec out = lstm_forward(model, window, &trace);
  for (std::size_t j = 0; j < trace.steps; ++j) {
    for (std::size_t k = 0; k < 4; ++k) {
      REQUIRE(trace.h(j, k) == 0.0);
    }
  }
  for (double raw : trace.head_tanh) CHECK(raw == 0.0);
  // Head map at zero: mu = 0, sigma = midpoint, u = u_max/2, v = v_max/2.
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(0.5 * (1e-3 + 3.0)).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out[3] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hand-computed single step with H = 1") {
  LstmModel model;
  model.hidden = 1;
  model.head_kind = HeadKind::htqf;
  model.head_dim = 4;
  model.weights = LstmWeights::shaped(1, 4, 4);
  auto fill_row = [](Matrix& m, std::initializer_list<double> values) {
    std::size_t k = 0;
    for (double v : values) m.flat()[k++] = v;
  };
  fill_row(model.weights.w_f, {0.1, -0.2, 0.3, 0.05});
  fill_row(model.weights.u_f, {0.5});
  model.weights.b_f = {0.1};
  fill_row(model.weights.w_i, {0.2, 0.1, -0.1, 0.4});
  fill_row(model.weights.u_i, {-0.3});
  model.weights.b_i = {-0.2};
  fill_row(model.weights.w_o, {-0.1, 0.3, 0.2, 0.1});
  fill_row(model.weights.u_o, {0.2});
  model.weights.b_o = {0.3};
  fill_row(model.weights.w_g, {0.3, -0.4, 0.1, 0.2});
  fill_row(model.weights.u_g, {0.1});
  model.weights.b_g = {0.0};
  fill_row(model.weights.w_out, {0.5, -0.25, 0.8, -0.6});
  model.weights.b_out = {0.1, 0.2, -0.1, 0.05};

  Matrix window(1, 4);
  window(0, 0) = 0.5;
  window(0, 1) = 0.25;
  window(0, 2) = 0.125;
  window(0, 3) = 0.0625;

  ForwardTrace trace;
  const Vec out = lstm_forward(model, window, &trace);

  CHECK(trace.f(0, 0) == doctest::Approx(0.53509842862661153).epsilon(1e-14));
  CHECK(trace.i(0, 0) == doctest::Approx(0.48438008427698437).epsilon(1e-14));
  CHECK(trace.o(0, 0) == doctest::Approx(0.58813236266215872).epsilon(1e-14));
  CHECK(trace.g(0, 0) ==
        doctest::Approx(0.074859690687499099).epsilon(1e-14));
  CHECK(trace.c(0, 0) ==
        doctest::Approx(0.036260543284159796).epsilon(1e-14));
  CHECK(trace.h(0, 0) ==
        doctest::Approx(0.021316657239790614).epsilon(1e-14));

  const double raw[4] = {0.11020884987455633, 0.19224842008740366,
                         -0.082756967733468194, 0.037192841696092596};
  const double mapped[4] = {0.22041769974911266, 1.7887765059210618,
                            0.91724303226653181, 1.0371928416960926};
  for (int k = 0; k < 4; ++k) {
    REQUIRE(trace.head_tanh[k] == doctest::Approx(raw[k]).epsilon(1e-14));
    REQUIRE(out[k] == doctest::Approx(mapped[k]).epsilon(1e-14));
  }
}

TEST_CASE("forward is pure") {
  Prng rng(29);
  const LstmModel model = lstm_init(8, HeadKind::htqf, 4, rng);
  const Matrix window = random_window(12, rng);
  const Vec first = lstm_forward(model, window);
  const Vec second = lstm_forward(model, window);
  for (std::size_t k = 0; k < first.size(); ++k) {
    REQUIRE(first[k] == second[k]);
  }
}

TEST_CASE("gate activations stay inside their ranges") {
  Prng rng(31);
  const LstmModel model = lstm_init(8, HeadKind::htqf, 4, rng);
  Matrix window = random_window(30, rng);
  for (double& x : window.flat()) x *= 10.0;  // exaggerate the inputs
  ForwardTrace trace;
  lstm_forward(model, window, &trace);
  for (std::size_t j = 0; j < trace.steps; ++j) {
    for (std::size_t k = 0; k < model.hidden; ++k) {
      REQUIRE(trace.f(j, k) > 0.0);
      REQUIRE(trace.f(j, k) < 1.0);
      REQUIRE(trace.i(j, k) > 0.0);
      REQUIRE(trace.i(j, k) < 1.0);
      REQUIRE(trace.o(j, k) > 0.0);
      REQUIRE(trace.o(j, k) < 1.0);
      REQUIRE(trace.g(j, k) > -1.0);
      REQUIRE(trace.g(j, k) < 1.0);
      REQUIRE(trace.tanh_c(j, k) > -1.0);
      REQUIRE(trace.tanh_c(j, k) < 1.0);
    }
  }
}

TEST_CASE("head map lands inside the valid parameter region") {
  const HeadBounds bounds;
  Prng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const double a[4] = {rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0),
                         rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)};
    const HtqfParams p = map_head_htqf(std::span<const double>(a, 4), bounds);
    REQUIRE(p.sigma > 0.0);
    REQUIRE(p.sigma <= 3.0);
    REQUIRE(p.u >= 0.0);
    REQUIRE(p.u <= 2.0);
    REQUIRE(p.v >= 0.0);
    REQUIRE(p.v <= 2.0);
    REQUIRE(std::abs(p.mu) <= 2.0);
  }
  // sigma approaches its floor, never zero, as the tanh output approaches -1.
  const double edge[4] = {0.0, -0.999999999, 0.0, 0.0};
  const HtqfParams p = map_head_htqf(std::span<const double>(edge, 4), bounds);
  CHECK(p.sigma > 0.0);
  CHECK(p.sigma == doctest::Approx(1e-3).epsilon(1e-2));
}

TEST_CASE("zero output gradient means zero weight gradient") {
  Prng rng(43);
  const LstmModel model = lstm_init(4, HeadKind::htqf, 4, rng);
  const Matrix window = random_window(7, rng);
  ForwardTrace trace;
  lstm_forward(model, window, &trace);
  const Vec d_output(4, 0.0);
  const LstmWeights grad = lstm_backward(model, trace, d_output);
  for (double g : grad.flatten()) REQUIRE(g == 0.0);
}

TEST_CASE("backward matches finite differences on sampled weights") {
  Prng rng(47);
  LstmModel model = lstm_init(4, HeadKind::htqf, 4, rng);
  const Matrix window = random_window(9, rng);
  Vec probe{0.7, -1.3, 0.4, 0.9};

  ForwardTrace trace;
  lstm_forward(model, window, &trace);
  Vec d_output = probe;
  const LstmWeights grad = lstm_backward(model, trace, d_output);
  const Vec grad_flat = grad.flatten();

  Vec theta = model.weights.flatten();
  const double step = 1e-5;
  for (int probe_index = 0; probe_index < 20; ++probe_index) {
    const std::size_t k =
        static_cast<std::size_t>(rng.next_uniform() * theta.size());
    const double saved = theta[k];
    theta[k] = saved + step;
    model.weights.assign_flat(theta);
    const double up = probe_loss(model, window, probe);
    theta[k] = saved - step;
    model.weights.assign_flat(theta);
    const double down = probe_loss(model, window, probe);
    theta[k] = saved;
    model.weights.assign_flat(theta);

    const double fd = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(fd), std::abs(grad_flat[k]),
                                   1e-8});
    REQUIRE(std::abs(fd - grad_flat[k]) / scale < 1e-4);
  }
}

TEST_CASE("full gradient check on every parameter") {
  Prng rng(53);
  LstmModel model = lstm_init(4, HeadKind::htqf, 4, rng);
  std::vector<Matrix> windows;
  for (int w = 0; w < 5; ++w) windows.push_back(random_window(6, rng));
  const Vec probe{1.1, -0.6, 0.35, -0.8};

  LstmWeights grad = LstmWeights::shaped(4, 4, 4);
  grad.scale(0.0);
  ForwardTrace trace;
  for (const Matrix& window : windows) {
    lstm_forward(model, window, &trace);
    lstm_backward_into(model, trace, probe, grad);
  }
  const Vec grad_flat = grad.flatten();

  Vec theta = model.weights.flatten();
  const double step = 1e-5;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    auto total = [&](double value) {
      theta[k] = value;
      model.weights.assign_flat(theta);
      double loss = 0.0;
      for (const Matrix& window : windows) {
        loss += probe_loss(model, window, probe);
      }
      return loss;
    };
    const double fd = (total(saved + step) - total(saved - step)) /
                      (2.0 * step);
    theta[k] = saved;
    model.weights.assign_flat(theta);

    const double scale = std::max({std::abs(fd), std::abs(grad_flat[k]),
                                   1e-8});
    REQUIRE(std::abs(fd - grad_flat[k]) / scale < 1e-4);
  }
}

TEST_CASE("summed-loss gradient is the sum of per-window gradients") {
  Prng rng(59);
  const LstmModel model = lstm_init(3, HeadKind::htqf, 4, rng);
  const Matrix first = random_window(5, rng);
  const Matrix second = random_window(5, rng);
  const Vec probe{0.5, 0.5, -0.5, 1.0};

  ForwardTrace trace;
  lstm_forward(model, first, &trace);
  LstmWeights sum = lstm_backward(model, trace, probe);
  lstm_forward(model, second, &trace);
  sum.add_scaled(lstm_backward(model, trace, probe), 1.0);

  LstmWeights accumulated = LstmWeights::shaped(3, 4, 4);
  accumulated.scale(0.0);
  lstm_forward(model, first, &trace);
  lstm_backward_into(model, trace, probe, accumulated);
  lstm_forward(model, second, &trace);
  lstm_backward_into(model, trace, probe, accumulated);

  const Vec a = sum.flatten();
  const Vec b = accumulated.flatten();
  for (std::size_t k = 0; k < a.size(); ++k) {
    REQUIRE(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
}

TEST_CASE("identity head map passes tanh values through") {
  Prng rng(61);
  LstmModel model = lstm_init(4, HeadKind::htqf, 4, rng);
  model.bounds.map = HeadMapKind::identity;
  const Matrix window = random_window(6, rng);
  ForwardTrace trace;
  const Vec out = lstm_forward(model, window, &trace);
  for (std::size_t k = 0; k < 4; ++k) {
    REQUIRE(out[k] == trace.head_tanh[k]);
  }
}

TEST_CASE("model serialization round-trips bit-exactly") {
  Prng rng(67);
  LstmModel model = lstm_init(8, HeadKind::htqf, 4, rng);
  model.window_len = 40;
  model.bounds.sigma_max = 2.5;
  const fs::path dir = fs::temp_directory_path() / "tailvar_lstm_tests";
  fs::create_directories(dir);
  const std::string path = (dir / "model.txt").string();
  save_model(model, path);
  const LstmModel loaded = load_model(path);

  CHECK(loaded.hidden == model.hidden);
  CHECK(loaded.head_kind == model.head_kind);
  CHECK(loaded.head_dim == model.head_dim);
  CHECK(loaded.window_len == 40);
  CHECK(loaded.bounds.sigma_max == 2.5);
  CHECK(loaded.bounds.map == model.bounds.map);

  const Vec original = model.weights.flatten();
  const Vec reloaded = loaded.weights.flatten();
  REQUIRE(original.size() == reloaded.size());
  for (std::size_t k = 0; k < original.size(); ++k) {
    REQUIRE(original[k] == reloaded[k]);
  }

  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), DataError);
}

TEST_CASE("dimension mismatches are rejected") {
  Prng rng(71);
  const LstmModel model = lstm_init(4, HeadKind::htqf, 4, rng);
  Matrix bad(5, 3);
  bad.fill(0.1);
  CHECK_THROWS_AS(lstm_forward(model, bad), std::invalid_argument);
  CHECK_THROWS_AS(lstm_init(0, HeadKind::htqf, 4, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(lstm_init(4, HeadKind::htqf, 3, rng),
                  std::invalid_argument);
}

}  // TEST_SUITE
