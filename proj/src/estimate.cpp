#include "splinesketch/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splinesketch {

namespace {

double wrap(double x, double T) {
  double y = std::fmod(x, T);
  return y < 0.0 ? y + T : y;
}

}  // namespace

int argmax_component(const SketchVector& z) {
  if (z.values.size() == 0 || (z.n <= 0 && z.values.isZero(0.0)))
    throw std::invalid_argument("argmax_component: empty sketch");
  int best = 0;
  for (int i = 1; i < z.values.size(); ++i)
    if (z.values[i] > z.values[best]) best = i;
  return best;
}

std::vector<int> default_exclusion(const SketchVector& z) {
  int l = argmax_component(z);
  std::vector<int> out;
  for (int q = -z.p; q <= 1; ++q) out.push_back(((l + q) % z.M + z.M) % z.M);
  return out;
}

double estimate_background(const SketchVector& z,
                           const std::vector<int>& exclusion) {
  if (z.kind != SketchKind::spline)
    throw std::invalid_argument("estimate_background: spline sketches only");
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < z.M; ++i) {
    if (std::find(exclusion.begin(), exclusion.end(), i) != exclusion.end())
      continue;
    sum += z.values[i];
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("estimate_background: exclusion covers all indices");
  double alpha = 1.0 - z.M * (sum / count);
  return std::clamp(alpha, 0.0, 1.0);
}

double sketch_loss(const SketchVector& z, const PixelModel& model) {
  SketchVector e = expected_sketch(model, z.kind, z.p, z.M);
  if (e.values.size() != z.values.size())
    throw std::invalid_argument("sketch_loss: shape mismatch");
  return (z.values - e.values).norm();
}

SurfaceEstimate lme_closed_form(const SketchVector& z, const Irf& irf,
                                double alpha_hat) {
  if (z.kind != SketchKind::spline || z.p != 1)
    throw std::invalid_argument("lme_closed_form: requires a p=1 sketch");
  if (!(alpha_hat > 0.0))
    throw std::invalid_argument("lme_closed_form: alpha_hat must be > 0");

  int M = z.M;
  double T = z.T;
  double delta = z.delta();
  int l = argmax_component(z);
  double zl = z.values[l];
  double zm = z.values[(l + M - 1) % M];
  double zp = z.values[(l + 1) % M];
  double xi = l * delta;

  // Candidate local means: signal support in [xi_l, xi_{l+1}), in
  // [xi_{l+1}, xi_{l+2}) seen from the argmax at l+1's left neighbour, or
  // straddling the knot xi_{l+1}.
  double cands[3];
  cands[0] = xi + 0.5 * delta + delta * (zl - zm) / (2.0 * alpha_hat);
  cands[1] = xi + 1.5 * delta + delta * (zp - zl) / (2.0 * alpha_hat);
  cands[2] = xi + delta + delta * (zp - zm) / alpha_hat;

  SurfaceEstimate best;
  best.loss = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 3; ++s) {
    double mean = wrap(cands[s], T);
    PixelModel cand;
    cand.T = z.T;
    cand.depths = VectorXd::Constant(1, wrap(mean - irf.mean_offset(), T));
    cand.weights = VectorXd::Constant(1, alpha_hat);
    cand.background = 1.0 - alpha_hat;
    cand.irf = irf;
    double loss = sketch_loss(z, cand);
    if (loss < best.loss) {
      best.depth = mean;
      best.intensity = alpha_hat;
      best.background = 1.0 - alpha_hat;
      best.scenario = s + 1;
      best.loss = loss;
    }
  }
  return best;
}

// An integer shift of the depth circularly shifts the signal pmf, so all
// templates are sketches of shifted copies of the depth-0 pmf restricted to
// its support.
TemplateBank::TemplateBank(const Irf& irf, int T, SketchKind kind, int p,
                           int M)
    : T_(T), kind_(kind), p_(p), M_(M), built_(T, 0), cache_(T) {
  VectorXd g0 = signal_pmf(irf, 0.0, T);
  for (int b = 0; b < T; ++b) {
    double d = std::fmod(b + 1.5 * T, static_cast<double>(T)) - 0.5 * T;
    if (g0[b] > 0.0) {
      offsets_.push_back(d);
      mass_.push_back(g0[b]);
    }
  }
}

const VectorXd& TemplateBank::at(int t) {
  int i = ((t % T_) + T_) % T_;
  if (!built_[i]) {
    VectorXd pmf = VectorXd::Zero(T_);
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      int b = static_cast<int>(std::llround(offsets_[j])) + i;
      b %= T_;
      if (b < 0) b += T_;
      pmf[b] += mass_[j];
    }
    cache_[i] = expected_sketch_from_pmf(pmf, kind_, p_, M_, T_).values;
    built_[i] = 1;
  }
  return cache_[i];
}

std::vector<SurfaceEstimate> matching_pursuit(const SketchVector& z, int K,
                                              const Irf& irf) {
  TemplateBank bank(irf, z.T, z.kind, z.p, z.M);
  return matching_pursuit(z, K, bank);
}

std::vector<SurfaceEstimate> matching_pursuit(const SketchVector& z, int K,
                                              TemplateBank& bank) {
  if (K < 1) throw std::invalid_argument("matching_pursuit: K must be >= 1");
  int T = z.T;
  int M = z.M;
  double delta = static_cast<double>(T) / (z.kind == SketchKind::spline
                                               ? M
                                               : std::max(2, M / 2));
  double alpha0 = 0.0;
  VectorXd r = z.values;
  if (z.kind == SketchKind::spline) {
    // estimate_background returns the signal weight alpha; the background
    // weight is its complement and contributes 1/M per component.
    alpha0 = 1.0 - estimate_background(z, default_exclusion(z));
    r.array() -= alpha0 / M;
  }
  // A uniform background has zero expectation at the Fourier harmonics, so
  // the Fourier residual starts at z itself; alpha0 is reported as 0.

  int stride = std::max(1, static_cast<int>(std::llround(delta / 4.0)));

  std::vector<SurfaceEstimate> out;
  double weight_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    int best_t = 0;
    double best_corr = -std::numeric_limits<double>::infinity();
    auto consider = [&](int t) {
      const VectorXd& v = bank.at(t);
      double nv = v.norm();
      if (nv <= 0.0) return;
      double c = v.dot(r) / nv;
      if (c > best_corr) {
        best_corr = c;
        best_t = ((t % T) + T) % T;
      }
    };
    for (int t = 0; t < T; t += stride) consider(t);
    int center = best_t;
    for (int t = center - stride + 1; t < center + stride; ++t) consider(t);

    const VectorXd& v = bank.at(best_t);
    double nv = v.norm();
    if (nv <= 0.0)
      throw std::invalid_argument("matching_pursuit: degenerate template");
    double alpha_k = z.values.dot(v) / nv;
    r -= alpha_k * v;
    SurfaceEstimate e;
    e.depth = best_t;
    e.intensity = alpha_k;
    e.scenario = 0;
    e.loss = r.norm();
    out.push_back(e);
    weight_sum += alpha_k;
  }

  // Rescale so that alpha_0 + sum alpha_k = 1.
  double signal_total = 1.0 - alpha0;
  for (auto& e : out) {
    e.intensity = weight_sum > 1e-12 ? e.intensity * signal_total / weight_sum
                                     : 0.0;
    e.background = alpha0;
  }
  return out;
}

double coarse_argmax_depth(const SketchVector& z) {
  if (z.kind != SketchKind::spline)
    throw std::invalid_argument("coarse_argmax_depth: spline sketches only");
  int l = argmax_component(z);
  return wrap((l + 0.5 * (z.p + 1)) * z.delta(), z.T);
}

double cross_correlation_depth(const VectorXd& histogram, const Irf& irf) {
  int T = static_cast<int>(histogram.size());
  if (T <= 0) throw std::invalid_argument("cross_correlation_depth: empty histogram");
  int R = static_cast<int>(std::min(irf.support_radius(), T / 2.0 - 1.0));
  VectorXd resp(2 * R + 1);
  for (int d = -R; d <= R; ++d) resp[d + R] = irf.response(d);
  VectorXd corr = VectorXd::Zero(T);
  for (int b = 0; b < T; ++b) {
    double h = histogram[b];
    if (h == 0.0) continue;
    for (int d = -R; d <= R; ++d) {
      if (resp[d + R] == 0.0) continue;
      int t = b - d;
      t %= T;
      if (t < 0) t += T;
      corr[t] += h * resp[d + R];
    }
  }
  int l = 0;
  for (int i = 1; i < T; ++i)
    if (corr[i] > corr[l]) l = i;
  double ym = corr[(l + T - 1) % T], y0 = corr[l], yp = corr[(l + 1) % T];
  double den = ym - 2.0 * y0 + yp;
  double off = (den < 0.0) ? 0.5 * (ym - yp) / den : 0.0;
  return wrap(l + off, T);
}

}  // namespace splinesketch
