#pragma once

#include "splinesketch/crb.hpp"
#include "splinesketch/estimate.hpp"
#include "splinesketch/io.hpp"
#include "splinesketch/model.hpp"
#include "splinesketch/rangewalk.hpp"
#include "splinesketch/sketch.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace splinesketch {

enum class ExperimentKind {
  sbr_sweep,
  pulse_width_sweep,
  depth_sweep,
  mc_vs_crb,
  rangewalk_sweep,
  image_recon,
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::mc_vs_crb;
  std::vector<double> sbr_values{1.0, 10.0};
  std::vector<double> sigma_values;   // pulse widths in bins
  std::vector<double> depth_values;   // bins
  std::vector<double> beta_values;    // reflectivities
  int T = 600;
  int M = 8;
  double sigma_bins = 16.0;
  std::int64_t n = 1000;        // photons per acquisition (ideal mixture)
  std::int64_t N = 300000;      // laser pulses (pile-up)
  double mu = 512.0;            // pile-up flux scale
  int trials = 500;
  int K = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> estimators{"lme", "mp-p1", "mp-p2"};
  std::string irf = "gaussian";  // "gaussian" or "spad"
  std::string output;

  void validate() const;
  static ExperimentSpec from_config(const RunConfig& cfg);
  static const std::set<std::string>& config_keys();
  std::string describe() const;  // flat key=value text
};

struct ResultRow {
  std::string point;      // e.g. "sbr=1;beta=0.5"
  std::string estimator;  // estimator or sketch id
  std::string metric;
  double value = 0.0;
  int trials = 0;
  double std_error = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::string spec_text;
  std::uint64_t seed = 0;
};

ResultTable run(const ExperimentSpec& spec);
void write_result_csv(const std::string& path, const ResultTable& table);

// Frozen wide empirical system response used by the range-walk experiments:
// a fast Gaussian rise into a mixed exponential/Gaussian diffusion tail.
Irf make_spad_irf();

// --- Image-scale reconstruction ------------------------------------------------------

struct SyntheticScene {
  HistogramCube cube;
  Eigen::MatrixXd truth_depth;
};

// Face-shaped synthetic scene: an elliptical dome over a background plane,
// per-pixel Poisson photon budgets around n_bar, single Gaussian return per
// pixel plus uniform background.
SyntheticScene make_synthetic_face_cube(int H, int W, int T, double n_bar,
                                        double sbr, double sigma_bins,
                                        std::uint64_t seed);

struct ImageResult {
  Eigen::MatrixXd depth;
  Eigen::MatrixXd intensity;
  int no_estimate = 0;       // empty pixels excluded from the RMSE
  double rmse_masked = 0.0;  // over estimated pixels only
  double rmse_all = 0.0;     // empty pixels counted against the reference
};

// method: "mp" (spline degree p), "mp-fourier", "lme", "coarse", "crosscorr".
ImageResult reconstruct_image(const HistogramCube& cube,
                              const std::string& method, int M, int p, int K,
                              const Irf& irf,
                              const Eigen::MatrixXd* reference = nullptr);

// Serialized sketch payload bytes per pixel for the compression accounting:
// fixed-point transfer representation (M u32 accumulators + u32 count) and
// the float record (M f64 + u32 count).
std::size_t sketch_bytes_fixed(int M);
std::size_t sketch_bytes_float(int M);

}  // namespace splinesketch
