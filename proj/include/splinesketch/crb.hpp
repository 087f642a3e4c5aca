#pragma once

#include "splinesketch/model.hpp"
#include "splinesketch/sketch.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace splinesketch {

using Eigen::MatrixXd;

// Fisher information over the 2K free parameters (t_1..t_K, alpha_1..alpha_K)
// with alpha_0 = 1 - sum alpha_k eliminated.
struct FisherMatrix {
  MatrixXd info;
  std::int64_t n = 0;
};

struct FisherOptions {
  bool force_finite_difference = false;  // Gaussian IRFs use analytic
                                         // derivatives unless forced
  double fd_step = 1e-3;                 // bins
};

// d pi / d theta over the T-bin grid, one column per parameter.
MatrixXd pmf_derivatives(const PixelModel& model,
                         const FisherOptions& opt = {});

FisherMatrix fisher_full(const PixelModel& model, std::int64_t n,
                         const FisherOptions& opt = {});
double crb_rmse_full(const PixelModel& model, std::int64_t n,
                     const FisherOptions& opt = {});

// Covariance of the sketch features under the model:
// Sigma = E[Phi Phi'] - z z'.
MatrixXd sketch_covariance(const PixelModel& model, SketchKind kind, int p,
                           int M);

// I_sketch = n J' Sigma^+ J with Sigma inverted on its numerical range
// (eigenvalues below 1e-12 of the largest are exact null directions from the
// partition of unity and are discarded).
FisherMatrix fisher_sketch(const PixelModel& model, SketchKind kind, int p,
                           int M, std::int64_t n,
                           const FisherOptions& opt = {});
double crb_rmse_sketch(const PixelModel& model, SketchKind kind, int p, int M,
                       std::int64_t n, const FisherOptions& opt = {});

// Depth-marginal bounds: sqrt of the inverse-FIM trace restricted to the
// depth parameters.
double crb_depth_rmse_full(const PixelModel& model, std::int64_t n,
                           const FisherOptions& opt = {});
double crb_depth_rmse_sketch(const PixelModel& model, SketchKind kind, int p,
                             int M, std::int64_t n,
                             const FisherOptions& opt = {});

// --- Sweep drivers --------------------------------------------------------------
//
// Rows for the CSV schema {sweep-var, sketch-kind, M, bound-cm}; kinds are
// "full", "fourier", "p0", "p1", "p2". Unit conversion default: 4 cm per bin
// (24 m range over T = 600 bins).

struct CrbRow {
  double sweep_var = 0.0;
  std::string kind;
  int M = 0;
  double bound_cm = 0.0;
};

std::vector<CrbRow> crb_sbr_sweep(double sigma_bins, int M, int T,
                                  std::int64_t n, const VectorXd& sbr_grid,
                                  int n_depths, double cm_per_bin = 4.0);

std::vector<CrbRow> crb_depth_sweep(double sbr, double sigma_bins, int M,
                                    int T, std::int64_t n,
                                    const VectorXd& depths,
                                    double cm_per_bin = 4.0);

std::vector<CrbRow> crb_width_sweep(double sbr, const VectorXd& sigma_grid,
                                    int M, int T, std::int64_t n, int n_depths,
                                    double cm_per_bin = 4.0);

}  // namespace splinesketch
