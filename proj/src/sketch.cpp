#include "splinesketch/sketch.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace splinesketch {

double spline_value(int p, double x) {
  switch (p) {
    case 0:
      return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
    case 1:
      if (x >= 0.0 && x < 1.0) return x;
      if (x >= 1.0 && x < 2.0) return 2.0 - x;
      return 0.0;
    case 2:
      if (x >= 0.0 && x < 1.0) return 0.5 * x * x;
      if (x >= 1.0 && x < 2.0) {
        double v = x - 1.0;
        return 0.5 + v - v * v;
      }
      if (x >= 2.0 && x < 3.0) {
        double v = x - 2.0;
        return 0.5 - v + 0.5 * v * v;
      }
      return 0.0;
    default:
      throw std::invalid_argument("spline_value: degree must be 0, 1 or 2");
  }
}

namespace {

void check_spline_args(int p, int M, double T) {
  if (p < 0 || p > 2)
    throw std::invalid_argument("spline degree must be 0, 1 or 2");
  if (M < p + 2) throw std::invalid_argument("sketch size M too small");
  if (T <= 0.0) throw std::invalid_argument("window T must be positive");
}

// Adds Phi_p(x) scaled by w into z (length M).
void add_features(VectorXd& z, int p, int M, double T, double x, double w) {
  double delta = T / M;
  double u = x / delta;
  int l = static_cast<int>(std::floor(u));
  double f = u - l;
  l %= M;
  if (l < 0) l += M;
  for (int q = 0; q <= p; ++q) {
    int i = l - q;
    if (i < 0) i += M;
    z[i] += w * spline_value(p, f + q);
  }
}

}  // namespace

VectorXd feature_vector(int p, int M, double T, double x) {
  check_spline_args(p, M, T);
  if (x < 0.0 || x >= T)
    throw std::out_of_range("feature_vector: timestamp outside [0, T)");
  VectorXd z = VectorXd::Zero(M);
  add_features(z, p, M, T, x, 1.0);
  return z;
}

SketchVector accumulate(const PhotonStream& stream, int p, int M, int T) {
  check_spline_args(p, M, T);
  SketchVector out{SketchKind::spline, p, M, T, stream.n(),
                   VectorXd::Zero(M)};
  for (double x : stream.timestamps) add_features(out.values, p, M, T, x, 1.0);
  if (out.n > 0) out.values /= static_cast<double>(out.n);
  return out;
}

SketchVector accumulate_weighted(const VectorXd& positions,
                                 const VectorXd& weights, int p, int M,
                                 int T) {
  check_spline_args(p, M, T);
  if (positions.size() != weights.size())
    throw std::invalid_argument("accumulate_weighted: size mismatch");
  SketchVector out{SketchKind::spline, p, M, T, 0, VectorXd::Zero(M)};
  double total = 0.0;
  for (int j = 0; j < positions.size(); ++j) {
    if (weights[j] == 0.0) continue;
    add_features(out.values, p, M, T, positions[j], weights[j]);
    total += weights[j];
  }
  out.n = static_cast<std::int64_t>(std::llround(total));
  if (total > 0.0) out.values /= total;
  return out;
}

SketchVector accumulate_fourier(const PhotonStream& stream, int m, int T) {
  if (m < 2 || m % 2 != 0)
    throw std::invalid_argument("accumulate_fourier: m must be even and >= 2");
  SketchVector out{SketchKind::fourier, 0, m, T, stream.n(), VectorXd::Zero(m)};
  for (double x : stream.timestamps) {
    for (int l = 1; l <= m / 2; ++l) {
      double w = 2.0 * M_PI * l * x / T;
      out.values[2 * (l - 1)] += std::cos(w);
      out.values[2 * (l - 1) + 1] += std::sin(w);
    }
  }
  if (out.n > 0) out.values /= static_cast<double>(out.n);
  return out;
}

SketchVector merge(const SketchVector& a, const SketchVector& b) {
  if (a.kind != b.kind || a.p != b.p || a.M != b.M || a.T != b.T)
    throw std::invalid_argument("merge: incompatible sketches");
  SketchVector out = a;
  out.n = a.n + b.n;
  if (out.n > 0)
    out.values = (static_cast<double>(a.n) * a.values +
                  static_cast<double>(b.n) * b.values) /
                 static_cast<double>(out.n);
  return out;
}

// --- Fixed point ---------------------------------------------------------------

namespace {

void checked_add(std::uint64_t& acc, std::uint64_t v) {
  if (acc > std::numeric_limits<std::uint64_t>::max() - v)
    throw std::overflow_error("fixed-point accumulator overflow");
  acc += v;
}

}  // namespace

FixedPointSketch accumulate_fixed_point(const PhotonStream& stream, int p,
                                        const FixedPointConfig& cfg) {
  if (p < 0 || p > 2)
    throw std::invalid_argument("spline degree must be 0, 1 or 2");
  if (cfg.log2_M < 1 || cfg.log2_M > cfg.log2_T || cfg.log2_T > 62)
    throw std::invalid_argument("fixed-point config invalid");
  int b = cfg.b();
  int M = 1 << cfg.log2_M;
  std::uint64_t T = 1ULL << cfg.log2_T;
  std::uint64_t rmask = (b == 0) ? 0 : ((1ULL << b) - 1);

  FixedPointSketch out;
  out.cfg = cfg;
  out.p = p;
  out.n = stream.n();
  out.acc.assign(static_cast<std::size_t>(M), 0);

  for (double x : stream.timestamps) {
    std::uint64_t tick = static_cast<std::uint64_t>(std::floor(x));
    if (tick >= T) throw std::out_of_range("timestamp outside the tick window");
    std::uint64_t idx = tick >> b;
    std::uint64_t r = tick & rmask;
    switch (p) {
      case 0:
        checked_add(out.acc[idx], 1);
        out.ops.add_sub += 1;
        break;
      case 1: {
        std::uint64_t i1 = (idx + M - 1) % M;
        checked_add(out.acc[idx], r);                  // phi1 at f
        checked_add(out.acc[i1], (1ULL << b) - r);     // phi1 at f + 1
        out.ops.add_sub += 3;
        break;
      }
      case 2: {
        std::uint64_t i1 = (idx + M - 1) % M;
        std::uint64_t i2 = (idx + M - 2) % M;
        std::uint64_t r2 = r * r;
        std::uint64_t s2 = 1ULL << (2 * b);
        std::uint64_t cross = r << (b + 1);
        checked_add(out.acc[idx], r2);                 // 2^(2b+1) phi2(f)
        checked_add(out.acc[i1], s2 + cross - 2 * r2); // 2^(2b+1) phi2(f+1)
        checked_add(out.acc[i2], s2 - cross + r2);     // 2^(2b+1) phi2(f+2)
        out.ops.add_sub += 7;
        out.ops.mult += 1;
        break;
      }
    }
    out.ops.detections += 1;
  }
  return out;
}

SketchVector dequantize(const FixedPointSketch& fp) {
  int M = 1 << fp.cfg.log2_M;
  std::uint64_t T = 1ULL << fp.cfg.log2_T;
  double scale = std::ldexp(1.0, fp.p * fp.cfg.b()) * (fp.p == 2 ? 2.0 : 1.0);
  SketchVector out{SketchKind::spline, fp.p, M, static_cast<int>(T), fp.n,
                   VectorXd::Zero(M)};
  if (fp.n > 0) {
    double denom = static_cast<double>(fp.n) * scale;
    for (int i = 0; i < M; ++i)
      out.values[i] = static_cast<double>(fp.acc[static_cast<std::size_t>(i)]) / denom;
  }
  return out;
}

// --- Expected sketches -----------------------------------------------------------

SketchVector expected_sketch_from_pmf(const VectorXd& pmf, SketchKind kind,
                                      int p, int M, int T) {
  if (pmf.size() != T)
    throw std::invalid_argument("expected_sketch_from_pmf: pmf length != T");
  SketchVector out{kind, kind == SketchKind::spline ? p : 0, M, T, 0,
                   VectorXd::Zero(M)};
  if (kind == SketchKind::spline) {
    check_spline_args(p, M, T);
    for (int t = 0; t < T; ++t)
      if (pmf[t] != 0.0)
        add_features(out.values, p, M, T, static_cast<double>(t), pmf[t]);
  } else {
    for (int t = 0; t < T; ++t) {
      if (pmf[t] == 0.0) continue;
      for (int l = 1; l <= M / 2; ++l) {
        double w = 2.0 * M_PI * l * t / T;
        out.values[2 * (l - 1)] += pmf[t] * std::cos(w);
        out.values[2 * (l - 1) + 1] += pmf[t] * std::sin(w);
      }
    }
  }
  return out;
}

SketchVector expected_sketch(const PixelModel& model, SketchKind kind, int p,
                             int M) {
  return expected_sketch_from_pmf(mixture_pmf(model), kind, p, M, model.T);
}

SketchVector expected_signal_sketch(const Irf& irf, double t, int T,
                                    SketchKind kind, int p, int M) {
  return expected_sketch_from_pmf(signal_pmf(irf, t, T), kind, p, M, T);
}

namespace {

// Integrals of ((x - x0)/delta)^k against N(mu, sigma^2) over [x0, x0+delta],
// k = 0, 1, 2, via error-function primitives.
struct GaussPiece {
  double g0, g1, g2;
};

GaussPiece gauss_piece(double x0, double delta, double mu, double sigma) {
  double a = x0, b = x0 + delta;
  auto cdf = [&](double x) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
  };
  auto pdf = [&](double x) {
    double d = (x - mu) / sigma;
    return std::exp(-0.5 * d * d) / (sigma * std::sqrt(2.0 * M_PI));
  };
  double i0 = cdf(b) - cdf(a);
  double dn = pdf(b) - pdf(a);
  double muy = mu - x0;
  double s2 = sigma * sigma;
  double i1y = muy * i0 - s2 * dn;
  double i2y = s2 * i0 - s2 * ((b - mu) * pdf(b) - (a - mu) * pdf(a)) -
               2.0 * muy * s2 * dn + muy * muy * i0;
  return {i0, i1y / delta, i2y / (delta * delta)};
}

// Polynomial coefficients of phi_p on piece q in the local variable
// v = u - q in [0, 1): value = c0 + c1 v + c2 v^2.
void piece_coeffs(int p, int q, double& c0, double& c1, double& c2) {
  c0 = c1 = c2 = 0.0;
  if (p == 0) {
    c0 = 1.0;
  } else if (p == 1) {
    if (q == 0) c1 = 1.0;
    else { c0 = 1.0; c1 = -1.0; }
  } else {
    if (q == 0) c2 = 0.5;
    else if (q == 1) { c0 = 0.5; c1 = 1.0; c2 = -1.0; }
    else { c0 = 0.5; c1 = -1.0; c2 = 0.5; }
  }
}

}  // namespace

SketchVector expected_sketch_gaussian_analytic(const PixelModel& model, int p,
                                               int M) {
  model.validate();
  if (!model.irf.is_gaussian())
    throw std::invalid_argument("analytic path requires a Gaussian IRF");
  check_spline_args(p, M, model.T);
  double T = model.T;
  double delta = T / M;
  SketchVector out{SketchKind::spline, p, M, model.T, 0,
                   VectorXd::Constant(M, model.background / M)};
  double sigma = model.irf.sigma();
  for (int k = 0; k < model.K(); ++k) {
    double t = model.depths[k];
    double alpha = model.weights[k];
    for (int i = 0; i < M; ++i) {
      double v = 0.0;
      for (int w = -1; w <= 1; ++w) {
        for (int q = 0; q <= p; ++q) {
          double x0 = (i + q + w * M) * delta;
          if (x0 + delta < t - 6.5 * sigma || x0 > t + 6.5 * sigma) continue;
          double c0, c1, c2;
          piece_coeffs(p, q, c0, c1, c2);
          GaussPiece g = gauss_piece(x0, delta, t, sigma);
          v += c0 * g.g0 + c1 * g.g1 + c2 * g.g2;
        }
      }
      out.values[i] += alpha * v;
    }
  }
  return out;
}

}  // namespace splinesketch
