#pragma once

#include "splinesketch/model.hpp"
#include "splinesketch/sketch.hpp"

#include <vector>

namespace splinesketch {

// A recovered surface. Depth is the local mean of the detected distribution;
// converting to a physical surface depth subtracts the IRF's mean offset
// (leading-edge-to-mean convention), which callers apply where needed.
struct SurfaceEstimate {
  double depth = 0.0;       // in [0, T), time bins
  double intensity = 0.0;   // alpha_k after normalization
  double background = 0.0;  // alpha_0
  int scenario = 0;         // 1 | 2 | 3 for the closed form, 0 for pursuit
  double loss = 0.0;        // residual sketch loss
};

// Smallest index attaining the maximum value.
int argmax_component(const SketchVector& z);

// Indices whose features overlap the signal region around the argmax
// component (p+2 indices, modulo M).
std::vector<int> default_exclusion(const SketchVector& z);

// alpha_hat = clamp(1 - M * mean(z_i over non-excluded i), 0, 1).
double estimate_background(const SketchVector& z,
                           const std::vector<int>& exclusion);

// Euclidean distance between the empirical sketch and the model's expected
// sketch (method-of-moments loss with identity weighting).
double sketch_loss(const SketchVector& z, const PixelModel& model);

// Closed-form local-means estimator for p=1 sketches: evaluates all three
// scenario estimators and keeps the one with the lowest sketch loss.
// alpha_hat is the background-corrected signal weight.
SurfaceEstimate lme_closed_form(const SketchVector& z, const Irf& irf,
                                double alpha_hat);

// Lazily built bank of pure-signal expected-sketch templates at integer
// depths; built once and shared read-only across pixels.
class TemplateBank {
 public:
  TemplateBank(const Irf& irf, int T, SketchKind kind, int p, int M);
  const VectorXd& at(int t);
  int T() const { return T_; }

 private:
  int T_;
  SketchKind kind_;
  int p_, M_;
  std::vector<double> offsets_, mass_;
  std::vector<char> built_;
  std::vector<VectorXd> cache_;
};

// Greedy template pursuit for K surfaces on any sketch kind. Candidate
// depths are searched on a two-stage grid: global stride delta/4, then
// 1-bin refinement around the incumbent. Weights are rescaled at the end so
// that alpha_0 + sum alpha_k = 1, with alpha_0 from estimate_background.
std::vector<SurfaceEstimate> matching_pursuit(const SketchVector& z, int K,
                                              TemplateBank& bank);
std::vector<SurfaceEstimate> matching_pursuit(const SketchVector& z, int K,
                                              const Irf& irf);

// Coarse-binning baseline: center of the argmax component's feature support.
double coarse_argmax_depth(const SketchVector& z);

// Full-data reference: circular cross-correlation of a T-bin count histogram
// with the IRF, with 3-point parabolic sub-bin refinement.
double cross_correlation_depth(const VectorXd& histogram, const Irf& irf);

}  // namespace splinesketch
