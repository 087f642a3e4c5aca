#pragma once

#include "splinesketch/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace splinesketch {

// --- Sketch vectors ----------------------------------------------------------

enum class SketchKind { spline, fourier };

struct SketchVector {
  SketchKind kind = SketchKind::spline;
  int p = 0;        // spline degree (0, 1, 2); unused for Fourier
  int M = 0;        // number of stored values (Fourier: m, interleaved cos/sin)
  int T = 0;        // window length in time bins
  std::int64_t n = 0;  // photon count the average was taken over
  VectorXd values;

  double delta() const { return static_cast<double>(T) / M; }
};

// Cardinal B-spline of degree p in {0, 1, 2}; zero outside [0, p+1).
double spline_value(int p, double x);

// Component i = phi_p((x/Delta - i) mod M); at most p+1 nonzero components.
VectorXd feature_vector(int p, int M, double T, double x);

// z = (1/n) sum_j Phi_p(x_j), one streaming pass, p+1 components per photon.
SketchVector accumulate(const PhotonStream& stream, int p, int M, int T);

// Histogram adapter: positions with integer counts as weights.
SketchVector accumulate_weighted(const VectorXd& positions,
                                 const VectorXd& weights, int p, int M, int T);

// Fourier sketch of size m (even): harmonics l = 1..m/2, interleaved
// (cos, sin) pairs.
SketchVector accumulate_fourier(const PhotonStream& stream, int m, int T);

// Count-weighted average of two partial sketches over disjoint streams.
SketchVector merge(const SketchVector& a, const SketchVector& b);

// --- Fixed-point streaming accumulator ---------------------------------------
//
// Emulates the on-chip integer pipeline: T = 2^log2_T ticks, M = 2^log2_M
// knots, b = log2_T - log2_M sub-knot bits. Per detection the knot index is
// the leading log2_M bits and r the low b bits; the active integer spline
// values always sum to the same power of two (partition of unity), namely
// 2^b for p=1 and 2^(2b+1) for p=2 (the quadratic values are stored doubled
// and halved in the final descaling).

struct FixedPointConfig {
  int log2_T = 0;
  int log2_M = 0;
  int b() const { return log2_T - log2_M; }
};

struct OpCounter {
  std::int64_t add_sub = 0;
  std::int64_t mult = 0;
  std::int64_t detections = 0;
};

struct FixedPointSketch {
  FixedPointConfig cfg;
  int p = 0;
  std::int64_t n = 0;
  std::vector<std::uint64_t> acc;
  OpCounter ops;
};

// Timestamps are quantized to integer ticks by floor.
FixedPointSketch accumulate_fixed_point(const PhotonStream& stream, int p,
                                        const FixedPointConfig& cfg);

// Divide by n * 2^(p*b) (doubled scale for p=2); reproduces the float sketch
// of the floor-quantized timestamps.
SketchVector dequantize(const FixedPointSketch& fp);

// --- Expected sketches --------------------------------------------------------

// E Phi over the discrete grid of T bin centers for an arbitrary pmf.
SketchVector expected_sketch_from_pmf(const VectorXd& pmf, SketchKind kind,
                                      int p, int M, int T);

// E_{x ~ pi_theta} Phi(x) for a full mixture model.
SketchVector expected_sketch(const PixelModel& model, SketchKind kind, int p,
                             int M);

// Pure-signal template E_{x ~ pi_s(t)} Phi(x) (no background term).
SketchVector expected_signal_sketch(const Irf& irf, double t, int T,
                                    SketchKind kind, int p, int M);

// Closed-form spline-against-Gaussian expectation via error-function
// primitives (periodic wrap, 6 sigma truncation); cross-check for the grid
// path on Gaussian IRF models.
SketchVector expected_sketch_gaussian_analytic(const PixelModel& model, int p,
                                               int M);

}  // namespace splinesketch
