// Acceptance gate: one line per criterion, nonzero exit if any criterion
// fails. Criterion 8 requires the optional real-scene cube and is skipped
// with an explicit record when the file is absent.

#include "splinesketch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace splinesketch;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& detail) {
  std::cout << "criterion " << idx << ": " << (ok ? "PASS" : "FAIL") << " ("
            << detail << ")" << std::endl;
  if (!ok) ++g_failures;
}

void report_skip(int idx, const std::string& detail) {
  std::cout << "criterion " << idx << ": SKIP (" << detail << ")" << std::endl;
}

template <typename F>
void guarded(int idx, F&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(idx, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// --- 1: partition of unity -----------------------------------------------------

void criterion1() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 600.0);
  double worst = 0.0;
  PhotonStream stream;
  for (int j = 0; j < 10000; ++j) stream.timestamps.push_back(u(rng));
  for (int p = 0; p <= 2; ++p) {
    for (double x : stream.timestamps) {
      VectorXd f = feature_vector(p, 8, 600.0, x);
      worst = std::max(worst, std::abs(f.sum() - 1.0));
    }
    SketchVector z = accumulate(stream, p, 8, 600);
    worst = std::max(worst, std::abs(z.values.sum() - 1.0));
  }
  report(1, worst < 1e-12, "max unity deviation " + fmt(worst));
}

// --- 2: op accounting and fixed-point equivalence --------------------------------

void criterion2() {
  std::mt19937_64 rng(102);
  FixedPointConfig cfg{12, 4};
  std::uniform_real_distribution<double> u(0.0, 4096.0);
  PhotonStream s, ticks;
  const int n = 5000;
  for (int j = 0; j < n; ++j) {
    double x = u(rng);
    s.timestamps.push_back(x);
    ticks.timestamps.push_back(std::floor(x));
  }
  bool ops_ok = true;
  double worst = 0.0;
  for (int p = 0; p <= 2; ++p) {
    FixedPointSketch fp = accumulate_fixed_point(s, p, cfg);
    std::int64_t want_add = (p == 0 ? 1 : p == 1 ? 3 : 7) * std::int64_t(n);
    std::int64_t want_mul = (p == 2 ? 1 : 0) * std::int64_t(n);
    if (fp.ops.add_sub != want_add || fp.ops.mult != want_mul ||
        fp.ops.detections != n)
      ops_ok = false;
    SketchVector zq = dequantize(fp);
    SketchVector zf = accumulate(ticks, p, 16, 4096);
    worst = std::max(worst, (zq.values - zf.values).cwiseAbs().maxCoeff());
  }
  report(2, ops_ok && worst < std::pow(2.0, -40),
         std::string("ops ") + (ops_ok ? "exact" : "WRONG") +
             ", max fixed/float gap " + fmt(worst));
}

// --- 3: closed-form exactness ------------------------------------------------------

void criterion3() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int T = 64, M = 8;
  double worst_lme = 0.0;
  for (int c = 0; c < 100; ++c) {
    int L = 2 + static_cast<int>(rng() % 5);
    VectorXd table(L);
    for (int j = 0; j < L; ++j) table[j] = 0.05 + u(rng);
    Irf irf = Irf::empirical(table);
    double t = 16.0 + 32.0 * u(rng);
    VectorXd pmf = signal_pmf(irf, t, T);
    double mean = 0.0;
    for (int i = 0; i < T; ++i) mean += i * pmf[i];
    SketchVector z = expected_sketch_from_pmf(pmf, SketchKind::spline, 1, M, T);
    SurfaceEstimate e = lme_closed_form(z, irf, 1.0);
    worst_lme = std::max(worst_lme, std::abs(e.depth - mean));
  }

  const int T2 = 200, M2 = 20;
  double worst_var = 0.0, worst_pm = 0.0;
  double d2 = std::pow(static_cast<double>(T2) / M2, 2);
  for (int c = 0; c < 100; ++c) {
    int start = 60 + static_cast<int>(rng() % 60);
    int width = 2 + static_cast<int>(rng() % 12);
    VectorXd pmf = VectorXd::Zero(T2);
    double s = 0.0;
    for (int j = 0; j < width; ++j) {
      pmf[start + j] = 0.05 + u(rng);
      s += pmf[start + j];
    }
    pmf /= s;
    double mean = 0.0, var = 0.0;
    for (int t = 0; t < T2; ++t) mean += t * pmf[t];
    for (int t = 0; t < T2; ++t) var += (t - mean) * (t - mean) * pmf[t];
    SketchVector z =
        expected_sketch_from_pmf(pmf, SketchKind::spline, 2, M2, T2);
    LocalMoments lm = local_moments(noise_correct(z, 1.0));
    if (var > 1e-12)
      worst_var = std::max(worst_var, std::abs(lm.var - var) / var);

    VectorXd point = VectorXd::Zero(T2);
    point[40 + static_cast<int>(rng() % 120)] = 1.0;
    SketchVector zp =
        expected_sketch_from_pmf(point, SketchKind::spline, 2, M2, T2);
    LocalMoments lp = local_moments(noise_correct(zp, 1.0));
    worst_pm = std::max(worst_pm, std::abs(lp.var_raw) / d2);
  }
  bool ok = worst_lme < 1e-9 && worst_var < 1e-6 && worst_pm < 1e-9;
  report(3, ok,
         "lme " + fmt(worst_lme) + " bins, var " + fmt(worst_var) +
             " rel, point-mass var " + fmt(worst_pm) + " delta^2");
}

// --- 4-6: bound sweeps -------------------------------------------------------------

std::map<std::string, double> sweep_at(double sigma_bins, int n_depths) {
  VectorXd grid(1);
  grid << 1.0;
  auto rows = crb_sbr_sweep(sigma_bins, 8, 600, 1000, grid, n_depths);
  std::map<std::string, double> out;
  for (const auto& r : rows) out[r.kind] = r.bound_cm;
  return out;
}

void criterion4() {
  auto b = sweep_at(16.0, 1000);
  bool band = b["p1"] >= 3.5 && b["p1"] <= 7.0 && b["p2"] >= 3.5 &&
              b["p2"] <= 7.0 && b["fourier"] >= 3.5 && b["fourier"] <= 7.0;
  double tol = 1e-9;
  bool order = b["full"] <= b["fourier"] * (1 + tol) &&
               b["fourier"] <= b["p2"] * (1 + tol) &&
               b["p2"] <= b["p1"] * (1 + tol) && b["p1"] <= b["p0"] * (1 + tol);
  report(4, band && order,
         "full " + fmt(b["full"]) + ", fourier " + fmt(b["fourier"]) + ", p2 " +
             fmt(b["p2"]) + ", p1 " + fmt(b["p1"]) + ", p0 " + fmt(b["p0"]) +
             " cm");
}

void criterion5() {
  VectorXd depths(101);
  for (int j = 0; j <= 100; ++j) depths[j] = j * 75.0 / 100.0;
  auto rows = crb_depth_sweep(1.0, 16.0, 8, 600, 1000, depths);
  double f_lo = 1e300, f_hi = 0.0, p0_max = 0.0;
  for (const auto& r : rows) {
    if (r.kind == "fourier") {
      f_lo = std::min(f_lo, r.bound_cm);
      f_hi = std::max(f_hi, r.bound_cm);
    }
    if (r.kind == "p0") p0_max = std::max(p0_max, r.bound_cm);
  }
  bool flat = (f_hi - f_lo) / f_lo < 0.01;
  bool peak = p0_max >= 28.0 * 0.8 && p0_max <= 28.0 * 1.2;
  report(5, flat && peak,
         "fourier variation " + fmt((f_hi - f_lo) / f_lo) + ", p0 peak " +
             fmt(p0_max) + " cm");
}

void criterion6() {
  auto b = sweep_at(6.0, 1000);  // 24 cm pulse width at 4 cm per bin
  report(6, b["p0"] > 3.0 * b["p1"],
         "p0 " + fmt(b["p0"]) + " cm vs p1 " + fmt(b["p1"]) + " cm");
}

// --- 7: Monte Carlo against the sketched bounds ---------------------------------------

void criterion7() {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::mc_vs_crb;
  spec.sbr_values = {1.0, 10.0};
  spec.trials = 500;
  spec.n = 1000;
  spec.seed = 1007;
  ResultTable table = run(spec);

  std::map<std::string, double> rmse, crb, se;
  for (const auto& r : table.rows) {
    std::string key = r.point + "/" + r.estimator;
    if (r.metric == "depth-rmse-bins") {
      rmse[key] = r.value;
      se[key] = r.std_error;
    } else if (r.metric == "crb-depth-bins") {
      crb[key] = r.value;
    }
  }
  bool ok = true;
  std::string detail;
  for (const auto& [key, v] : rmse) {
    double bound = 1.5 * crb[key] + 3.0 * se[key];
    if (v > bound) ok = false;
    detail += key.substr(key.find('/') + 1) + "@" + key.substr(4, 2) + " " +
              fmt(v / crb[key]) + "x ";
  }
  report(7, ok, "rmse-to-bound ratios: " + detail);
}

// --- 8: optional real-scene cube -----------------------------------------------------

void criterion8() {
  const std::string path = "data/face_cube.spc";
  std::ifstream probe(path, std::ios::binary);
  if (!probe.good()) {
    report_skip(8, "real-scene cube not found at " + path +
                       "; place the 141x141xT u16 cube there to enable");
    return;
  }
  probe.close();
  HistogramCube cube = load_cube(path);
  Irf irf = make_spad_irf();
  ImageResult ref = reconstruct_image(cube, "crosscorr", 20, 1, 1, irf);
  ImageResult mp = reconstruct_image(cube, "mp", 20, 1, 1, irf,
                                     &ref.depth);
  bool ok = mp.rmse_masked >= 8.4 * 0.85 && mp.rmse_masked <= 8.4 * 1.15;
  report(8, ok, "mp p1 M=20 rmse " + fmt(mp.rmse_masked) + " bins");
}

// --- 9: synthetic image analog -------------------------------------------------------

void criterion9() {
  SyntheticScene scene =
      make_synthetic_face_cube(141, 141, 4613, 337.0, 1.0, 57.0, 1009);
  Irf irf = Irf::gaussian(57.0);
  ImageResult mp = reconstruct_image(scene.cube, "mp", 20, 1, 1, irf,
                                     &scene.truth_depth);
  ImageResult cc = reconstruct_image(scene.cube, "crosscorr", 20, 1, 1, irf,
                                     &scene.truth_depth);
  double mean_n = static_cast<double>(scene.cube.total_count()) / (141.0 * 141.0);
  double ratio = static_cast<double>(sketch_bytes_fixed(20)) / (mean_n * 8.0);
  bool ok = mp.rmse_masked <= 2.0 * cc.rmse_masked && ratio <= 0.05;
  report(9, ok,
         "mp rmse " + fmt(mp.rmse_masked) + " vs crosscorr " +
             fmt(cc.rmse_masked) + " bins, transfer ratio " + fmt(ratio));
}

// --- 10: range-walk correction sweep ---------------------------------------------------

void criterion10() {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::rangewalk_sweep;
  spec.sbr_values = {100.0};
  spec.T = 4613;
  spec.M = 50;
  spec.mu = 512.0;
  spec.N = 300000;
  spec.trials = 60;
  spec.irf = "spad";
  spec.seed = 1010;
  spec.beta_values.clear();
  for (int i = 0; i < 50; ++i)
    spec.beta_values.push_back(std::pow(10.0, -4.0 + 4.0 * i / 49.0));
  ResultTable table = run(spec);

  double shape_base = -1.0, shape_max = 0.0;
  double int_base = -1.0, int_max = 0.0;
  for (const auto& r : table.rows) {
    if (r.metric != "depth-rmse-bins") continue;
    if (r.estimator == "shape-lut") {
      if (shape_base < 0.0) shape_base = r.value;
      shape_max = std::max(shape_max, r.value);
    } else if (r.estimator == "intensity-lut") {
      if (int_base < 0.0) int_base = r.value;
      int_max = std::max(int_max, r.value);
    }
  }
  bool ok = shape_max <= 3.0 * shape_base && int_max > 10.0 * int_base;
  report(10, ok,
         "shape max/base " + fmt(shape_max / shape_base) +
             " (need <= 3), intensity max/base " + fmt(int_max / int_base) +
             " (need > 10)");
}

// --- 11: data-processing inequality ----------------------------------------------------

void criterion11() {
  std::mt19937_64 rng(1011);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    PixelModel m;
    m.T = 600;
    m.depths = VectorXd::Constant(1, 600.0 * u(rng));
    m.weights = VectorXd::Constant(1, 0.3 + 0.6 * u(rng));
    m.background = 1.0 - m.weights[0];
    m.irf = Irf::gaussian(6.0 + 14.0 * u(rng));
    MatrixXd full = fisher_full(m, 1).info;
    double scale = full.cwiseAbs().maxCoeff();
    auto check = [&](SketchKind kind, int p) {
      MatrixXd sk = fisher_sketch(m, kind, p, 8, 1).info;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(full - sk);
      worst = std::max(worst, -es.eigenvalues().minCoeff() / scale);
    };
    check(SketchKind::spline, 0);
    check(SketchKind::spline, 1);
    check(SketchKind::spline, 2);
    check(SketchKind::fourier, 0);
  }
  report(11, worst < 1e-8, "worst negative eigenvalue " + fmt(worst) + " rel");
}

}  // namespace

int main() {
  guarded(1, criterion1);
  guarded(2, criterion2);
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criterion5);
  guarded(6, criterion6);
  guarded(7, criterion7);
  guarded(8, criterion8);
  guarded(9, criterion9);
  guarded(10, criterion10);
  guarded(11, criterion11);
  std::cout << (g_failures == 0 ? "acceptance: ALL PASS"
                                : "acceptance: FAILURES") << std::endl;
  return g_failures == 0 ? 0 : 1;
}
