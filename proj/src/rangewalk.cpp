#include "splinesketch/rangewalk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splinesketch {

namespace {

double wrap(double x, double T) {
  double y = std::fmod(x, T);
  return y < 0.0 ? y + T : y;
}

double wrap_signed(double x, double T) {
  double y = std::fmod(x + 0.5 * T, T);
  if (y < 0.0) y += T;
  return y - 0.5 * T;
}

void check_window(const SketchVector& z, int half_width) {
  if (z.kind != SketchKind::spline || z.p != 2)
    throw std::invalid_argument("noise correction requires a p=2 sketch");
  if (half_width < 1 || 2 * half_width + 1 > z.M)
    throw std::invalid_argument("window does not fit the sketch");
}

}  // namespace

NoiseCorrectedWindow noise_correct(const SketchVector& z, double alpha_hat,
                                   int half_width) {
  check_window(z, half_width);
  if (!(alpha_hat > 0.0))
    throw std::invalid_argument("noise_correct: alpha_hat must be > 0");
  NoiseCorrectedWindow w;
  w.l = argmax_component(z);
  w.alpha_hat = alpha_hat;
  w.delta = z.delta();
  w.half_width = half_width;
  w.T = z.T;
  w.z_sub.resize(2 * half_width + 1);
  double bg = (1.0 - alpha_hat) / z.M;
  for (int k = -half_width; k <= half_width; ++k) {
    int i = ((w.l + k) % z.M + z.M) % z.M;
    w.z_sub[k + half_width] = (z.values[i] - bg) / alpha_hat;
  }
  return w;
}

NoiseCorrectedWindow noise_correct_flanked(const SketchVector& z,
                                           int half_width) {
  check_window(z, half_width);
  if (2 * half_width + 7 > z.M)
    throw std::invalid_argument("flanked correction: sketch too small");
  int l = argmax_component(z);
  auto at = [&](int k) { return z.values[((l + k) % z.M + z.M) % z.M]; };
  double bl = 0.0, br = 0.0;
  for (int j = 1; j <= 3; ++j) {
    bl += at(-half_width - j);
    br += at(half_width + j);
  }
  bl /= 3.0;
  br /= 3.0;
  double alpha = std::clamp(1.0 - z.M * 0.5 * (bl + br), 1e-9, 1.0);

  NoiseCorrectedWindow w;
  w.l = l;
  w.alpha_hat = alpha;
  w.delta = z.delta();
  w.half_width = half_width;
  w.T = z.T;
  w.z_sub.resize(2 * half_width + 1);
  for (int k = -half_width; k <= half_width; ++k) {
    double bg = k < 0 ? bl : (k > 0 ? br : 0.5 * (bl + br));
    w.z_sub[k + half_width] = (at(k) - bg) / alpha;
  }
  return w;
}

LocalMoments local_moments(const NoiseCorrectedWindow& w) {
  double d = w.delta;
  double m1 = 0.0, m2 = 0.0;
  for (int k = -w.half_width; k <= w.half_width; ++k) {
    double v = w.z_sub[k + w.half_width];
    m1 += k * d * v;
    m2 += (k * k - 0.25) * d * d * v;
  }
  LocalMoments out;
  out.t_hat = wrap(w.l * d + m1 + 1.5 * d, w.T);
  out.var_raw = m2 - m1 * m1;
  out.var = std::max(0.0, out.var_raw);
  return out;
}

double isotonic_decreasing(VectorXd& values) {
  // Pool-adjacent-violators for a non-increasing fit.
  std::vector<double> level, weight;
  double max_violation = 0.0;
  for (int i = 0; i < values.size(); ++i) {
    level.push_back(values[i]);
    weight.push_back(1.0);
    while (level.size() > 1 && level[level.size() - 2] < level.back()) {
      max_violation =
          std::max(max_violation, level.back() - level[level.size() - 2]);
      double merged = (level[level.size() - 2] * weight[weight.size() - 2] +
                       level.back() * weight.back()) /
                      (weight[weight.size() - 2] + weight.back());
      weight[weight.size() - 2] += weight.back();
      level[level.size() - 2] = merged;
      level.pop_back();
      weight.pop_back();
    }
  }
  int i = 0;
  for (std::size_t b = 0; b < level.size(); ++b)
    for (int r = 0; r < static_cast<int>(weight[b]); ++r) values[i++] = level[b];
  return max_violation;
}

double interp_clamped(const VectorXd& keys, const VectorXd& values, double x) {
  int n = static_cast<int>(keys.size());
  if (n == 0) throw std::invalid_argument("interp_clamped: empty table");
  if (x <= keys[0]) return values[0];
  if (x >= keys[n - 1]) return values[n - 1];
  int hi = 1;
  while (keys[hi] < x) ++hi;
  double f = (x - keys[hi - 1]) / (keys[hi] - keys[hi - 1]);
  return (1.0 - f) * values[hi - 1] + f * values[hi];
}

RangeWalkLut build_lut(LutKind kind, const Irf& irf,
                       const RangeWalkConfig& cfg) {
  int nb = static_cast<int>(cfg.beta_grid.size());
  if (nb < 2) throw std::invalid_argument("build_lut: beta grid too small");
  for (int i = 1; i < nb; ++i)
    if (cfg.beta_grid[i] <= cfg.beta_grid[i - 1])
      throw std::invalid_argument("build_lut: beta grid must be ascending");

  double t_build = cfg.t_build > 0.0 ? cfg.t_build : cfg.T / 2.0;
  VectorXd keys(nb), errors(nb);
  for (int i = 0; i < nb; ++i) {
    double beta = cfg.beta_grid[i];
    PileupConfig pc{cfg.mu, beta,
                    solve_background_flux(cfg.mu, beta, cfg.sbr, irf, t_build,
                                          cfg.T),
                    1};
    PileupPmf law = pileup_detection_pmf(pc, irf, t_build, cfg.T);
    SketchVector z =
        expected_sketch_from_pmf(law.pmf, SketchKind::spline, 2, cfg.M, cfg.T);
    LocalMoments lm = local_moments(noise_correct_flanked(z));
    errors[i] =
        wrap_signed(lm.t_hat - irf.mean_offset() - t_build, cfg.T);
    keys[i] = kind == LutKind::intensity ? law.p_detect : std::sqrt(lm.var);
  }

  RangeWalkLut lut;
  lut.kind = kind;
  lut.M = cfg.M;
  lut.T = cfg.T;
  lut.mu = cfg.mu;
  lut.sbr = cfg.sbr;
  lut.beta_grid = cfg.beta_grid;

  if (kind == LutKind::intensity) {
    // Clamp at the saturation plateau: past it the observable carries no
    // information about the growing range-walk error.
    int cut = nb;
    for (int i = 0; i + 1 < nb; ++i) {
      if (keys[i + 1] - keys[i] < 1e-6) {
        cut = i + 1;
        break;
      }
    }
    lut.keys = keys.head(cut);
    lut.corrections = errors.head(cut);
  } else {
    // sigma_hat decreases with beta; rectify, then store ascending.
    double violation = isotonic_decreasing(keys);
    if (violation > 1e-3)
      throw std::runtime_error("build_lut: shape observable severely non-monotone");
    std::vector<double> k2, e2;
    for (int i = nb - 1; i >= 0; --i) {
      if (!k2.empty() && keys[i] <= k2.back() + 1e-12) {
        e2.back() = 0.5 * (e2.back() + errors[i]);  // merged plateau
        continue;
      }
      k2.push_back(keys[i]);
      e2.push_back(errors[i]);
    }
    lut.keys = Eigen::Map<VectorXd>(k2.data(), static_cast<int>(k2.size()));
    lut.corrections =
        Eigen::Map<VectorXd>(e2.data(), static_cast<int>(e2.size()));
  }
  if (lut.keys.size() == 0) throw std::runtime_error("build_lut: empty table");
  return lut;
}

double correct(double estimate, double observable, const RangeWalkLut& lut) {
  if (lut.keys.size() == 0) throw std::invalid_argument("correct: empty LUT");
  return estimate - interp_clamped(lut.keys, lut.corrections, observable);
}

}  // namespace splinesketch
