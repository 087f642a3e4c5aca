#include "doctest.h"

#include "splinesketch/model.hpp"
#include "splinesketch/sketch.hpp"

#include <cmath>
#include <random>

using namespace splinesketch;

TEST_CASE("cardinal spline point values") {
  CHECK(spline_value(0, 0.5) == 1.0);
  CHECK(spline_value(0, 1.0) == 0.0);  // right-open support
  CHECK(spline_value(1, 0.5) == 0.5);
  CHECK(spline_value(1, 1.5) == 0.5);
  CHECK(spline_value(1, 1.0) == 1.0);
  CHECK(spline_value(2, 1.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(spline_value(2, 0.5) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(spline_value(2, 3.0) == 0.0);
}

TEST_CASE("quadratic spline equals the convolution of lower degrees") {
  // Convolve phi_1 with phi_0 on a fine grid and compare pointwise.
  const int G = 2000;           // samples per unit
  const double h = 1.0 / G;
  for (double x : {0.2, 0.7, 1.0, 1.3, 1.9, 2.5, 2.9}) {
    double conv = 0.0;
    for (int i = 0; i < 2 * G; ++i) {
      double u = (i + 0.5) * h;  // midpoint rule
      conv += spline_value(1, u) * spline_value(0, x - u) * h;
    }
    CHECK(std::abs(conv - spline_value(2, x)) < 1e-4);
  }
}

TEST_CASE("feature vector worked examples") {
  VectorXd f = feature_vector(0, 4, 8.0, 2.5);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 1.0);
  CHECK(f[2] == 0.0);
  CHECK(f[3] == 0.0);

  f = feature_vector(1, 4, 8.0, 3.0);
  CHECK(f[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f[2] == 0.0);
  CHECK(f[3] == 0.0);

  f = feature_vector(1, 4, 8.0, 0.5);
  CHECK(f[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(f[3] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);
}

TEST_CASE("partition of unity for random timestamps") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 600.0);
  for (int p = 0; p <= 2; ++p) {
    for (int c = 0; c < 500; ++c) {
      VectorXd f = feature_vector(p, 8, 600.0, u(rng));
      CHECK(std::abs(f.sum() - 1.0) < 1e-12);
      CHECK((f.array() > 1e-15).count() <= p + 1);
    }
  }
}

TEST_CASE("accumulate basics") {
  PhotonStream one{{5.3}};
  SketchVector z = accumulate(one, 2, 8, 64);
  VectorXd f = feature_vector(2, 8, 64.0, 5.3);
  CHECK((z.values - f).cwiseAbs().maxCoeff() < 1e-15);

  PhotonStream grid;
  for (int t = 0; t < 64; ++t) grid.timestamps.push_back(static_cast<double>(t));
  z = accumulate(grid, 1, 8, 64);
  for (int i = 0; i < 8; ++i)
    CHECK(z.values[i] == doctest::Approx(1.0 / 8).epsilon(1e-12));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 64.0);
  PhotonStream rnd;
  for (int j = 0; j < 1000; ++j) rnd.timestamps.push_back(u(rng));
  for (int p = 0; p <= 2; ++p) {
    z = accumulate(rnd, p, 8, 64);
    CHECK(std::abs(z.values.sum() - 1.0) < 1e-12);
    CHECK(z.values.minCoeff() >= 0.0);
    CHECK(z.values.maxCoeff() <= 1.0);
  }
}

TEST_CASE("merge equals single-pass accumulation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  PhotonStream a, b, all;
  for (int j = 0; j < 300; ++j) {
    double x = u(rng);
    (j < 120 ? a : b).timestamps.push_back(x);
    all.timestamps.push_back(x);
  }
  for (int p = 0; p <= 2; ++p) {
    SketchVector za = accumulate(a, p, 10, 100);
    SketchVector zb = accumulate(b, p, 10, 100);
    SketchVector zm = merge(za, zb);
    SketchVector zs = accumulate(all, p, 10, 100);
    CHECK(zm.n == zs.n);
    CHECK((zm.values - zs.values).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("fixed-point integer values and op counts") {
  // b = 4, r = 4, p = 1: active values (4, 12), dequantized (0.25, 0.75).
  PhotonStream s{{20.0}};  // tick 20 = idx 1, r 4 with log2_T=8, log2_M=4
  FixedPointConfig cfg{8, 4};
  REQUIRE(cfg.b() == 4);
  FixedPointSketch fp = accumulate_fixed_point(s, 1, cfg);
  CHECK(fp.acc[1] == 4);   // phi_1(f) at the knot interval index
  CHECK(fp.acc[0] == 12);  // phi_1(f + 1) at the previous index
  SketchVector z = dequantize(fp);
  CHECK(z.values[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(z.values[0] == doctest::Approx(0.75).epsilon(1e-15));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 256.0);
  PhotonStream rnd;
  for (int j = 0; j < 1000; ++j) rnd.timestamps.push_back(u(rng));
  FixedPointSketch f0 = accumulate_fixed_point(rnd, 0, cfg);
  CHECK(f0.ops.add_sub == 1000);
  CHECK(f0.ops.mult == 0);
  FixedPointSketch f1 = accumulate_fixed_point(rnd, 1, cfg);
  CHECK(f1.ops.add_sub == 3000);
  CHECK(f1.ops.mult == 0);
  FixedPointSketch f2 = accumulate_fixed_point(rnd, 2, cfg);
  CHECK(f2.ops.add_sub == 7000);
  CHECK(f2.ops.mult == 1000);
}

TEST_CASE("fixed-point matches the float path on quantized ticks") {
  std::mt19937_64 rng(7);
  for (int c = 0; c < 10; ++c) {
    int log2_T = 6 + static_cast<int>(rng() % 7);   // 64 .. 4096
    int log2_M = 2 + static_cast<int>(rng() % 4);   // 4 .. 32
    if (log2_M > log2_T) std::swap(log2_M, log2_T);
    FixedPointConfig cfg{log2_T, log2_M};
    int T = 1 << log2_T, M = 1 << log2_M;
    std::uniform_real_distribution<double> u(0.0, static_cast<double>(T));
    PhotonStream s, ticks;
    for (int j = 0; j < 2000; ++j) {
      double x = u(rng);
      s.timestamps.push_back(x);
      ticks.timestamps.push_back(std::floor(x));
    }
    for (int p = 0; p <= 2; ++p) {
      SketchVector zq = dequantize(accumulate_fixed_point(s, p, cfg));
      SketchVector zf = accumulate(ticks, p, M, T);
      CHECK((zq.values - zf.values).cwiseAbs().maxCoeff() <
            std::pow(2.0, -40));
    }
  }
}

TEST_CASE("fourier sketch basics") {
  PhotonStream zeros{{0.0, 0.0, 0.0}};
  SketchVector z = accumulate_fourier(zeros, 6, 64);
  for (int l = 0; l < 3; ++l) {
    CHECK(z.values[2 * l] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(z.values[2 * l + 1]) < 1e-12);
  }

  PhotonStream grid;
  for (int t = 0; t < 64; ++t) grid.timestamps.push_back(static_cast<double>(t));
  z = accumulate_fourier(grid, 6, 64);
  CHECK(z.values.cwiseAbs().maxCoeff() < 1e-10);

  PhotonStream quarter{{16.0}};
  z = accumulate_fourier(quarter, 2, 64);
  CHECK(std::abs(z.values[0]) < 1e-12);
  CHECK(z.values[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expected sketches: background, point mass, symmetry") {
  PixelModel bg;
  bg.T = 64;
  bg.depths = VectorXd(0);
  bg.weights = VectorXd(0);
  bg.background = 1.0;
  for (int p = 0; p <= 2; ++p) {
    SketchVector z = expected_sketch(bg, SketchKind::spline, p, 8);
    for (int i = 0; i < 8; ++i)
      CHECK(z.values[i] == doctest::Approx(1.0 / 8).epsilon(1e-12));
  }

  // Point mass at a bin center: expectation is the feature vector there.
  VectorXd pmf = VectorXd::Zero(64);
  pmf[21] = 1.0;
  SketchVector z = expected_sketch_from_pmf(pmf, SketchKind::spline, 2, 8, 64);
  VectorXd f = feature_vector(2, 8, 64.0, 21.0);
  CHECK((z.values - f).cwiseAbs().maxCoeff() < 1e-15);

  // Narrow gaussian at a knot point: symmetric dominant pair for p=1.
  PixelModel g;
  g.T = 64;
  g.depths = VectorXd::Constant(1, 16.0);  // knot point for M=8
  g.weights = VectorXd::Constant(1, 1.0);
  g.background = 0.0;
  g.irf = Irf::gaussian(2.0);  // delta/4
  // Feature 1 peaks exactly at the knot 16; its neighbours 0 and 2 are the
  // symmetric pair.
  SketchVector zs = expected_sketch(g, SketchKind::spline, 1, 8);
  CHECK(std::abs(zs.values[0] - zs.values[2]) < 1e-9);
}

TEST_CASE("analytic gaussian expectation agrees with the grid sum") {
  PixelModel m;
  m.T = 600;
  m.weights = VectorXd::Constant(1, 0.6);
  m.background = 0.4;
  m.irf = Irf::gaussian(16.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 600.0);
  for (int c = 0; c < 5; ++c) {
    m.depths = VectorXd::Constant(1, u(rng));
    SketchVector grid = expected_sketch(m, SketchKind::spline, 2, 8);
    SketchVector ana = expected_sketch_gaussian_analytic(m, 2, 8);
    CHECK((grid.values - ana.values).cwiseAbs().maxCoeff() < 1e-6);
  }
  // p=1 configuration whose pulse support contains no knot (the linear
  // feature's kink at a knot otherwise limits grid-sum accuracy).
  m.irf = Irf::gaussian(2.0);
  m.depths = VectorXd::Constant(1, 337.5);  // mid knot interval
  SketchVector grid = expected_sketch(m, SketchKind::spline, 1, 8);
  SketchVector ana = expected_sketch_gaussian_analytic(m, 1, 8);
  CHECK((grid.values - ana.values).cwiseAbs().maxCoeff() < 1e-6);
}
