#include "splinesketch/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace splinesketch {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t unit,
                          std::uint64_t sub) {
  return splitmix64(splitmix64(master ^ 0x5851f42d4c957f2dULL) + unit * 0x2545f4914f6cdd1dULL + sub);
}

// --- Irf ---------------------------------------------------------------------

Irf Irf::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("Irf: sigma must be > 0");
  Irf irf;
  irf.v_ = Gauss{sigma};
  return irf;
}

Irf Irf::empirical(VectorXd table) {
  if (table.size() == 0 || table.minCoeff() < 0.0 || table.maxCoeff() <= 0.0)
    throw std::invalid_argument(
        "Irf: empirical table must be non-negative with a positive entry");
  Table t;
  t.H = table.sum();
  t.center = static_cast<int>(table.size()) / 2;
  double m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < table.size(); ++j) {
    double d = j - t.center;
    m1 += d * table[j];
    m2 += d * d * table[j];
  }
  m1 /= t.H;
  m2 /= t.H;
  t.mean_off = m1;
  t.std_bins = std::sqrt(std::max(0.0, m2 - m1 * m1));
  t.values = std::move(table);
  Irf irf;
  irf.v_ = std::move(t);
  return irf;
}

double Irf::sigma() const { return std::get<Gauss>(v_).sigma; }

const VectorXd& Irf::table() const { return std::get<Table>(v_).values; }

double Irf::normalizer() const {
  if (is_gaussian()) return 1.0;
  return std::get<Table>(v_).H;
}

double Irf::response(double d) const {
  if (is_gaussian()) {
    double s = std::get<Gauss>(v_).sigma;
    return std::exp(-0.5 * d * d / (s * s)) / (s * std::sqrt(2.0 * M_PI));
  }
  const Table& t = std::get<Table>(v_);
  double pos = d + t.center;
  // The continuous response linearly interpolates the taps and tapers to zero
  // one bin outside the table. Integer samples reproduce the taps exactly,
  // and the sampled mass and mean are invariant under fractional shifts.
  if (pos <= -1.0 || pos >= static_cast<double>(t.values.size())) return 0.0;
  int j = static_cast<int>(std::floor(pos));
  double f = pos - j;
  double lo = (j >= 0 && j < t.values.size()) ? t.values[j] : 0.0;
  double hi = (j + 1 >= 0 && j + 1 < t.values.size()) ? t.values[j + 1] : 0.0;
  return ((1.0 - f) * lo + f * hi) / t.H;
}

double Irf::mean_offset() const {
  return is_gaussian() ? 0.0 : std::get<Table>(v_).mean_off;
}

double Irf::std_bins() const {
  return is_gaussian() ? std::get<Gauss>(v_).sigma : std::get<Table>(v_).std_bins;
}

double Irf::support_radius() const {
  if (is_gaussian()) return 6.0 * std::get<Gauss>(v_).sigma;
  return static_cast<double>(std::get<Table>(v_).values.size());
}

VectorXd signal_pmf(const Irf& irf, double t, int T) {
  VectorXd p = VectorXd::Zero(T);
  if (irf.is_gaussian()) {
    // No support truncation: the exponential underflows to zero on its own,
    // and the far tails keep the pmf sensitive to the depth everywhere (the
    // Fisher information of coarse sketches would otherwise vanish exactly
    // for pulses contained in a single knot interval).
    double s = irf.sigma();
    for (int i = 0; i < T; ++i) {
      // wrapped signed distance from bin center i to depth t
      double d = std::fmod(i - t + 1.5 * T, static_cast<double>(T)) - 0.5 * T;
      p[i] = std::exp(-0.5 * d * d / (s * s));
    }
  } else {
    for (int i = 0; i < T; ++i) {
      double d = std::fmod(i - t + 1.5 * T, static_cast<double>(T)) - 0.5 * T;
      p[i] = irf.response(d);
    }
  }
  double sum = p.sum();
  if (sum <= 0.0)
    throw std::invalid_argument("signal_pmf: response vanishes on the grid");
  return p / sum;
}

// --- PixelModel ---------------------------------------------------------------

void PixelModel::validate() const {
  if (T <= 0) throw std::invalid_argument("PixelModel: T must be positive");
  if (depths.size() != weights.size())
    throw std::invalid_argument("PixelModel: depths/weights size mismatch");
  double total = background + weights.sum();
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("PixelModel: weights must sum to 1");
  if (background < -1e-12 || background > 1.0 + 1e-12)
    throw std::invalid_argument("PixelModel: background weight out of [0,1]");
  for (int k = 0; k < K(); ++k) {
    if (depths[k] < 0.0 || depths[k] >= T)
      throw std::invalid_argument("PixelModel: depth out of [0, T)");
    if (weights[k] < -1e-12 || weights[k] > 1.0 + 1e-12)
      throw std::invalid_argument("PixelModel: weight out of [0,1]");
  }
}

VectorXd mixture_pmf(const PixelModel& model) {
  model.validate();
  VectorXd p = VectorXd::Constant(model.T, model.background / model.T);
  for (int k = 0; k < model.K(); ++k)
    p += model.weights[k] * signal_pmf(model.irf, model.depths[k], model.T);
  return p;
}

PhotonStream sample_photons(const PixelModel& model, std::int64_t n,
                            std::uint64_t seed) {
  model.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PhotonStream out;
  out.timestamps.reserve(static_cast<std::size_t>(n));

  // Component selection thresholds: background first, then surfaces.
  std::vector<double> cdf;
  cdf.push_back(model.background);
  for (int k = 0; k < model.K(); ++k) cdf.push_back(cdf.back() + model.weights[k]);

  // Per-surface bin samplers for empirical IRFs.
  std::vector<std::discrete_distribution<int>> bins;
  if (!model.irf.is_gaussian()) {
    for (int k = 0; k < model.K(); ++k) {
      VectorXd g = signal_pmf(model.irf, model.depths[k], model.T);
      bins.emplace_back(g.data(), g.data() + g.size());
    }
  }
  std::normal_distribution<double> gauss(0.0, 1.0);

  double T = model.T;
  for (std::int64_t j = 0; j < n; ++j) {
    double u = unit(rng);
    int comp = 0;
    while (comp < static_cast<int>(cdf.size()) - 1 && u >= cdf[comp]) ++comp;
    double x;
    if (comp == 0 && u < cdf[0]) {
      x = unit(rng) * T;
    } else {
      int k = (u < cdf[0]) ? 0 : comp - 1;
      if (k >= model.K()) k = model.K() - 1;
      if (model.irf.is_gaussian()) {
        x = model.depths[k] + model.irf.sigma() * gauss(rng);
      } else {
        x = bins[static_cast<std::size_t>(k)](rng) + (unit(rng) - 0.5);
      }
      x = std::fmod(x, T);
      if (x < 0.0) x += T;
    }
    if (x >= T) x = 0.0;
    out.timestamps.push_back(x);
  }
  return out;
}

// --- Pile-up ------------------------------------------------------------------

void PileupConfig::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("PileupConfig: mu must be > 0");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("PileupConfig: beta must be in [0,1]");
  if (s < 0.0) throw std::invalid_argument("PileupConfig: s must be >= 0");
  if (N < 0) throw std::invalid_argument("PileupConfig: N must be >= 0");
}

namespace {

VectorXd pileup_rates(const PileupConfig& cfg, const Irf& irf, double t, int T) {
  VectorXd g = signal_pmf(irf, t, T);
  VectorXd lam = cfg.mu * (cfg.beta * g.array() + cfg.s);
  if (lam.minCoeff() < 0.0)
    throw std::invalid_argument("pileup: negative rate");
  return lam;
}

}  // namespace

PileupPmf pileup_detection_pmf(const PileupConfig& cfg, const Irf& irf,
                               double t, int T) {
  cfg.validate();
  VectorXd lam = pileup_rates(cfg, irf, t, T);
  PileupPmf out;
  out.pmf = VectorXd::Zero(T);
  double cum = 0.0;  // sum of rates of earlier bins
  for (int i = 0; i < T; ++i) {
    out.pmf[i] = -std::expm1(-lam[i]) * std::exp(-cum);
    cum += lam[i];
  }
  out.p_detect = -std::expm1(-cum);
  double mass = out.pmf.sum();
  if (mass > 0.0) out.pmf /= mass;
  return out;
}

double pileup_background_fraction(const PileupConfig& cfg, const Irf& irf,
                                  double t, int T) {
  VectorXd lam = pileup_rates(cfg, irf, t, T);
  double lam_bg = cfg.mu * cfg.s;
  double cum = 0.0, total = 0.0, bg = 0.0;
  for (int i = 0; i < T; ++i) {
    double p = -std::expm1(-lam[i]) * std::exp(-cum);
    total += p;
    if (lam[i] > 0.0) bg += p * (lam_bg / lam[i]);
    cum += lam[i];
  }
  return total > 0.0 ? bg / total : 0.0;
}

double solve_background_flux(double mu, double beta, double sbr,
                             const Irf& irf, double t, int T) {
  double target = 1.0 / (1.0 + sbr);
  double lo = 0.0;
  double hi = 50.0 * beta / T + 1e-12;
  PileupConfig cfg{mu, beta, hi, 1};
  while (pileup_background_fraction(cfg, irf, t, T) < target) {
    hi *= 2.0;
    cfg.s = hi;
    if (hi > 1e6) break;
  }
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    cfg.s = mid;
    if (pileup_background_fraction(cfg, irf, t, T) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

PhotonStream sample_pileup_stream(const PileupConfig& cfg, const Irf& irf,
                                  double t, int T, std::uint64_t seed) {
  cfg.validate();
  PileupPmf law = pileup_detection_pmf(cfg, irf, t, T);
  std::mt19937_64 rng(seed);
  std::binomial_distribution<std::int64_t> detect(cfg.N, law.p_detect);
  std::int64_t n = cfg.N > 0 ? detect(rng) : 0;

  PhotonStream out;
  out.timestamps.reserve(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);

  // Multinomial over bins via sequential binomial thinning.
  std::int64_t remaining = n;
  double mass_left = 1.0;
  for (int i = 0; i < T && remaining > 0; ++i) {
    double p = law.pmf[i];
    if (p <= 0.0) continue;
    std::int64_t c;
    if (p >= mass_left) {
      c = remaining;
    } else {
      std::binomial_distribution<std::int64_t> bin(remaining, p / mass_left);
      c = bin(rng);
    }
    for (std::int64_t j = 0; j < c; ++j) {
      double x = i + jitter(rng);
      if (x < 0.0) x += T;
      if (x >= T) x -= T;
      out.timestamps.push_back(x);
    }
    remaining -= c;
    mass_left -= p;
  }
  return out;
}

}  // namespace splinesketch
