#pragma once

#include "splinesketch/estimate.hpp"
#include "splinesketch/model.hpp"
#include "splinesketch/sketch.hpp"

#include <string>
#include <vector>

namespace splinesketch {

// --- Noise-corrected quadratic-sketch window ----------------------------------

struct NoiseCorrectedWindow {
  int l = 0;               // anchor (argmax) component
  VectorXd z_sub;          // 2w+1 noise-corrected values, indices l-w .. l+w mod M
  double alpha_hat = 1.0;  // signal weight used for the correction
  double delta = 1.0;      // knot interval
  int half_width = 2;
  int T = 0;
};

// z_tilde = (z - (1 - alpha_hat)/M) / alpha_hat over the window around the
// argmax component. Requires a p=2 sketch.
NoiseCorrectedWindow noise_correct(const SketchVector& z, double alpha_hat,
                                   int half_width = 2);

// Robust variant for causal pile-up background, whose level differs before
// and after the pulse: per-side background levels are estimated from
// flanking component rings (l +/- (w+1 .. w+3)) and subtracted as a two-level
// step across the window. Coincides with noise_correct when the background
// is flat.
NoiseCorrectedWindow noise_correct_flanked(const SketchVector& z,
                                           int half_width = 2);

struct LocalMoments {
  double t_hat = 0.0;    // local mean of the detected distribution, in [0, T)
  double var = 0.0;      // variance in bins^2, clamped at 0
  double var_raw = 0.0;  // unclamped value; strongly negative values signal a
                         // window-containment violation
};

// Closed-form local mean/variance from the quadratic window:
// t_hat = xi_l + c1' z_sub + 1.5 delta, var = c2' z_sub - (c1' z_sub)^2 with
// c1[k] = k delta, c2[k] = (k^2 - 1/4) delta^2 for k in [-w, w].
LocalMoments local_moments(const NoiseCorrectedWindow& w);

// --- Range-walk look-up tables -------------------------------------------------

enum class LutKind { intensity, shape };

struct RangeWalkLut {
  LutKind kind = LutKind::shape;
  int M = 0;
  int T = 0;
  double mu = 0.0;
  double sbr = 0.0;
  VectorXd beta_grid;
  VectorXd keys;         // strictly increasing observable values
  VectorXd corrections;  // depth offsets in bins
};

struct RangeWalkConfig {
  VectorXd beta_grid;  // sorted ascending
  double sbr = 100.0;
  double mu = 512.0;
  std::int64_t N = 300000;  // laser pulses per acquisition
  int M = 50;
  int T = 4613;
  double t_build = 0.0;  // build depth; defaults to T/2 when 0
};

// Builds the LUT from exact expected pile-up pmfs (deterministic, no Monte
// Carlo). The range-walk error is measured on the mean-offset-corrected
// local-moments depth estimate; the background flux per beta is solved so
// the detected signal-to-background ratio equals sbr.
RangeWalkLut build_lut(LutKind kind, const Irf& irf,
                       const RangeWalkConfig& cfg);

// Piecewise-linear interpolation of the correction at the observable,
// clamped to the endpoint corrections; corrected depth = estimate - correction.
double correct(double estimate, double observable, const RangeWalkLut& lut);

// Pool-adjacent-violators rectification to a non-increasing sequence;
// returns the maximum violation that had to be merged.
double isotonic_decreasing(VectorXd& values);

// Linear interpolation helper on sorted keys with endpoint clamping.
double interp_clamped(const VectorXd& keys, const VectorXd& values, double x);

}  // namespace splinesketch
