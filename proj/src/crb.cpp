#include "splinesketch/crb.hpp"

#include <cmath>
#include <stdexcept>

namespace splinesketch {

namespace {

// Analytic derivative of the normalized discrete Gaussian signal pmf.
VectorXd gaussian_pmf_derivative(const Irf& irf, double t, int T) {
  double s = irf.sigma();
  // Untruncated, matching signal_pmf: the tails carry the only depth
  // sensitivity of coarse sketches when the pulse sits inside one interval.
  VectorXd w = VectorXd::Zero(T), dw = VectorXd::Zero(T);
  for (int i = 0; i < T; ++i) {
    double d = std::fmod(i - t + 1.5 * T, static_cast<double>(T)) - 0.5 * T;
    w[i] = std::exp(-0.5 * d * d / (s * s));
    dw[i] = w[i] * d / (s * s);
  }
  double W = w.sum(), dW = dw.sum();
  return (dw - (dW / W) * w) / W;
}

VectorXd fd_pmf_derivative(const Irf& irf, double t, int T, double h) {
  VectorXd hi = signal_pmf(irf, std::fmod(t + h + T, static_cast<double>(T)), T);
  VectorXd lo = signal_pmf(irf, std::fmod(t - h + T, static_cast<double>(T)), T);
  return (hi - lo) / (2.0 * h);
}

MatrixXd feature_matrix(SketchKind kind, int p, int M, int T) {
  int cols = M;
  MatrixXd phi(T, cols);
  for (int t = 0; t < T; ++t) {
    if (kind == SketchKind::spline) {
      phi.row(t) = feature_vector(p, M, T, static_cast<double>(t)).transpose();
    } else {
      for (int l = 1; l <= M / 2; ++l) {
        double w = 2.0 * M_PI * l * t / T;
        phi(t, 2 * (l - 1)) = std::cos(w);
        phi(t, 2 * (l - 1) + 1) = std::sin(w);
      }
    }
  }
  return phi;
}

MatrixXd pseudo_inverse_ranged(const MatrixXd& sym, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  const VectorXd& ev = es.eigenvalues();
  double lmax = ev.cwiseAbs().maxCoeff();
  if (lmax <= 0.0) throw std::runtime_error("covariance is identically zero");
  VectorXd inv = VectorXd::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > rel_tol * lmax) inv[i] = 1.0 / ev[i];
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd invert_fim(const MatrixXd& info) {
  Eigen::FullPivLU<MatrixXd> lu(info);
  // Nearly unidentifiable directions (e.g. the depth of a pulse buried inside
  // one knot interval of a coarse sketch) produce extreme but genuine
  // conditioning; only an exactly rank-deficient matrix is an error.
  lu.setThreshold(std::numeric_limits<double>::min());
  if (!lu.isInvertible()) {
    Eigen::JacobiSVD<MatrixXd> svd(info);
    double cond = svd.singularValues()(0) /
                  svd.singularValues()(svd.singularValues().size() - 1);
    throw std::runtime_error("singular Fisher matrix (condition " +
                             std::to_string(cond) + ")");
  }
  return lu.inverse();
}

}  // namespace

MatrixXd pmf_derivatives(const PixelModel& model, const FisherOptions& opt) {
  model.validate();
  int K = model.K();
  int T = model.T;
  MatrixXd D(T, 2 * K);
  for (int k = 0; k < K; ++k) {
    VectorXd dg;
    if (model.irf.is_gaussian() && !opt.force_finite_difference)
      dg = gaussian_pmf_derivative(model.irf, model.depths[k], T);
    else
      dg = fd_pmf_derivative(model.irf, model.depths[k], T, opt.fd_step);
    D.col(k) = model.weights[k] * dg;
    D.col(K + k) = signal_pmf(model.irf, model.depths[k], T).array() - 1.0 / T;
  }
  return D;
}

FisherMatrix fisher_full(const PixelModel& model, std::int64_t n,
                         const FisherOptions& opt) {
  VectorXd pi = mixture_pmf(model);
  MatrixXd D = pmf_derivatives(model, opt);
  int dim = static_cast<int>(D.cols());
  MatrixXd info = MatrixXd::Zero(dim, dim);
  for (int t = 0; t < model.T; ++t) {
    if (pi[t] <= 0.0) {
      if (D.row(t).cwiseAbs().maxCoeff() > 0.0)
        throw std::runtime_error("zero-density bin with nonzero derivative");
      continue;
    }
    info.noalias() += D.row(t).transpose() * D.row(t) / pi[t];
  }
  return {static_cast<double>(n) * info, n};
}

double crb_rmse_full(const PixelModel& model, std::int64_t n,
                     const FisherOptions& opt) {
  return std::sqrt(invert_fim(fisher_full(model, n, opt).info).trace());
}

MatrixXd sketch_covariance(const PixelModel& model, SketchKind kind, int p,
                           int M) {
  VectorXd pi = mixture_pmf(model);
  MatrixXd phi = feature_matrix(kind, p, M, model.T);
  VectorXd z = phi.transpose() * pi;
  MatrixXd second = phi.transpose() * pi.asDiagonal() * phi;
  return second - z * z.transpose();
}

FisherMatrix fisher_sketch(const PixelModel& model, SketchKind kind, int p,
                           int M, std::int64_t n, const FisherOptions& opt) {
  MatrixXd phi = feature_matrix(kind, p, M, model.T);
  MatrixXd J = phi.transpose() * pmf_derivatives(model, opt);  // M x 2K
  MatrixXd pinv = pseudo_inverse_ranged(sketch_covariance(model, kind, p, M),
                                        1e-12);
  MatrixXd info = J.transpose() * pinv * J;
  // Symmetrize against roundoff.
  info = 0.5 * (info + info.transpose()).eval();
  return {static_cast<double>(n) * info, n};
}

double crb_rmse_sketch(const PixelModel& model, SketchKind kind, int p, int M,
                       std::int64_t n, const FisherOptions& opt) {
  return std::sqrt(invert_fim(fisher_sketch(model, kind, p, M, n, opt).info).trace());
}

double crb_depth_rmse_full(const PixelModel& model, std::int64_t n,
                           const FisherOptions& opt) {
  MatrixXd inv = invert_fim(fisher_full(model, n, opt).info);
  return std::sqrt(inv.topLeftCorner(model.K(), model.K()).trace());
}

double crb_depth_rmse_sketch(const PixelModel& model, SketchKind kind, int p,
                             int M, std::int64_t n, const FisherOptions& opt) {
  MatrixXd inv = invert_fim(fisher_sketch(model, kind, p, M, n, opt).info);
  return std::sqrt(inv.topLeftCorner(model.K(), model.K()).trace());
}

// --- Sweep drivers ----------------------------------------------------------------

namespace {

struct KindSpec {
  std::string name;
  bool full;
  SketchKind kind;
  int p;
};

const std::vector<KindSpec>& sweep_kinds() {
  static const std::vector<KindSpec> kinds = {
      {"full", true, SketchKind::spline, 0},
      {"fourier", false, SketchKind::fourier, 0},
      {"p0", false, SketchKind::spline, 0},
      {"p1", false, SketchKind::spline, 1},
      {"p2", false, SketchKind::spline, 2},
  };
  return kinds;
}

PixelModel sweep_model(double sbr, double sigma_bins, double depth, int T) {
  PixelModel m;
  m.T = T;
  m.depths = VectorXd::Constant(1, depth);
  m.weights = VectorXd::Constant(1, sbr / (1.0 + sbr));
  m.background = 1.0 / (1.0 + sbr);
  m.irf = Irf::gaussian(sigma_bins);
  return m;
}

double bound_for(const KindSpec& ks, const PixelModel& model, int M,
                 std::int64_t n) {
  if (ks.full) return crb_rmse_full(model, n);
  return crb_rmse_sketch(model, ks.kind, ks.p, M, n);
}

}  // namespace

std::vector<CrbRow> crb_sbr_sweep(double sigma_bins, int M, int T,
                                  std::int64_t n, const VectorXd& sbr_grid,
                                  int n_depths, double cm_per_bin) {
  std::vector<CrbRow> rows;
  for (int i = 0; i < sbr_grid.size(); ++i) {
    for (const auto& ks : sweep_kinds()) {
      double sum = 0.0;
      for (int j = 0; j < n_depths; ++j) {
        double depth = (j + 0.5) * T / static_cast<double>(n_depths);
        sum += bound_for(ks, sweep_model(sbr_grid[i], sigma_bins, depth, T), M,
                         n);
      }
      rows.push_back({sbr_grid[i], ks.name, M, cm_per_bin * sum / n_depths});
    }
  }
  return rows;
}

std::vector<CrbRow> crb_depth_sweep(double sbr, double sigma_bins, int M,
                                    int T, std::int64_t n,
                                    const VectorXd& depths,
                                    double cm_per_bin) {
  std::vector<CrbRow> rows;
  for (int i = 0; i < depths.size(); ++i)
    for (const auto& ks : sweep_kinds())
      rows.push_back({depths[i], ks.name, M,
                      cm_per_bin * bound_for(ks, sweep_model(sbr, sigma_bins,
                                                             depths[i], T),
                                             M, n)});
  return rows;
}

std::vector<CrbRow> crb_width_sweep(double sbr, const VectorXd& sigma_grid,
                                    int M, int T, std::int64_t n, int n_depths,
                                    double cm_per_bin) {
  std::vector<CrbRow> rows;
  for (int i = 0; i < sigma_grid.size(); ++i) {
    for (const auto& ks : sweep_kinds()) {
      double sum = 0.0;
      for (int j = 0; j < n_depths; ++j) {
        double depth = (j + 0.5) * T / static_cast<double>(n_depths);
        sum +=
            bound_for(ks, sweep_model(sbr, sigma_grid[i], depth, T), M, n);
      }
      rows.push_back({sigma_grid[i], ks.name, M, cm_per_bin * sum / n_depths});
    }
  }
  return rows;
}

}  // namespace splinesketch
