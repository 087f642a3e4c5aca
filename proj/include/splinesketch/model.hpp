#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <variant>
#include <vector>

namespace splinesketch {

using Eigen::VectorXd;

// --- Seed derivation -------------------------------------------------------
//
// Splittable counter-based seeding: every work unit (pixel, trial, grid
// point) derives its own independent seed from the master seed, so sharded
// execution reproduces serial execution regardless of scheduling order.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t unit,
                          std::uint64_t sub = 0);

// --- Instrument response function ------------------------------------------
//
// Either an analytic Gaussian pulse of width sigma (in time bins) or an
// empirical per-bin response table. Empirical tables are anchored so that
// table index floor(L/2) corresponds to offset 0 from the shift position;
// fractional offsets are evaluated by linear interpolation.

class Irf {
 public:
  static Irf gaussian(double sigma);
  static Irf empirical(VectorXd table);

  bool is_gaussian() const { return std::holds_alternative<Gauss>(v_); }
  double sigma() const;           // Gaussian only
  const VectorXd& table() const;  // Empirical only
  double normalizer() const;      // H = sum of table (1 for Gaussian)

  // Normalized response h(d)/H at signed offset d from the shift position.
  double response(double d) const;

  // Mean offset E[d] of the normalized response (0 for Gaussian); used for
  // the leading-edge-to-mean depth convention.
  double mean_offset() const;
  double std_bins() const;

  // Radius beyond which the response is treated as zero.
  double support_radius() const;

 private:
  struct Gauss {
    double sigma;
  };
  struct Table {
    VectorXd values;
    double H;
    int center;
    double mean_off;
    double std_bins;
  };
  std::variant<Gauss, Table> v_;
};

// Normalized discrete signal pmf over T bins: the IRF shifted to depth t,
// evaluated at integer bin centers, periodically wrapped, normalized to sum
// exactly to 1.
VectorXd signal_pmf(const Irf& irf, double t, int T);

// --- Mixture observation model ---------------------------------------------

struct PixelModel {
  int T = 0;          // window length in time bins
  VectorXd depths;    // t_k in [0, T), one per surface
  VectorXd weights;   // alpha_k in [0, 1], one per surface
  double background;  // alpha_0
  Irf irf = Irf::gaussian(1.0);

  int K() const { return static_cast<int>(depths.size()); }
  void validate() const;  // throws std::invalid_argument on violation
};

// p[t] = sum_k alpha_k h((t - t_k) mod T)/H + alpha_0/T at bin centers.
VectorXd mixture_pmf(const PixelModel& model);

struct PhotonStream {
  std::vector<double> timestamps;  // each in [0, T)
  std::int64_t n() const { return static_cast<std::int64_t>(timestamps.size()); }
};

PhotonStream sample_photons(const PixelModel& model, std::int64_t n,
                            std::uint64_t seed);

// --- Photon pile-up ---------------------------------------------------------
//
// First-arrival detection model: per-bin rates lambda_i = mu(beta h(i-t)/H + s)
// with a causal scan from bin 0 (dead time is physical; no periodic wrap).
// mu scales the mean detected photons per pulse; values above 1 model
// high-flux acquisition where a pulse saturates the detector.

struct PileupConfig {
  double mu = 0.01;      // flux scale (> 0)
  double beta = 1.0;     // target reflectivity in [0, 1]
  double s = 0.0;        // background flux level per bin (>= 0)
  std::int64_t N = 1;    // number of laser pulses
  void validate() const;
};

struct PileupPmf {
  VectorXd pmf;     // detection-bin law conditioned on detection (sums to 1)
  double p_detect;  // probability a pulse yields at least one detection
};

PileupPmf pileup_detection_pmf(const PileupConfig& cfg, const Irf& irf,
                               double t, int T);

// Fraction of detections attributable to background (per-bin thinning
// weights lambda_bg / lambda applied to the detection law).
double pileup_background_fraction(const PileupConfig& cfg, const Irf& irf,
                                  double t, int T);

// Solves for the background flux s so that the detected background fraction
// equals 1/(1+sbr), i.e. pins the detected signal-to-background ratio.
double solve_background_flux(double mu, double beta, double sbr,
                             const Irf& irf, double t, int T);

// N pulses, each yielding zero detections with probability 1 - p_detect or
// one timestamp from the conditional law plus uniform sub-bin jitter.
PhotonStream sample_pileup_stream(const PileupConfig& cfg, const Irf& irf,
                                  double t, int T, std::uint64_t seed);

}  // namespace splinesketch
