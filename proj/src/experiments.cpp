#include "splinesketch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

namespace splinesketch {

namespace {

double wrap_signed(double x, double T) {
  double y = std::fmod(x + 0.5 * T, T);
  if (y < 0.0) y += T;
  return y - 0.5 * T;
}

struct Rmse {
  double value = 0.0;
  double std_error = 0.0;
  int count = 0;
};

Rmse rmse_of(const std::vector<double>& errors) {
  Rmse out;
  out.count = static_cast<int>(errors.size());
  if (errors.empty()) return out;
  double m2 = 0.0;
  for (double e : errors) m2 += e * e;
  m2 /= errors.size();
  double v4 = 0.0;
  for (double e : errors) v4 += (e * e - m2) * (e * e - m2);
  v4 /= errors.size();
  out.value = std::sqrt(m2);
  if (out.value > 0.0 && errors.size() > 1)
    out.std_error = std::sqrt(v4 / errors.size()) / (2.0 * out.value);
  return out;
}

std::vector<double> default_beta_grid() {
  std::vector<double> betas(50);
  for (int i = 0; i < 50; ++i)
    betas[i] = std::pow(10.0, -4.0 + 4.0 * i / 49.0);
  return betas;
}

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::sbr_sweep: return "sbr-sweep";
    case ExperimentKind::pulse_width_sweep: return "pulse-width-sweep";
    case ExperimentKind::depth_sweep: return "depth-sweep";
    case ExperimentKind::mc_vs_crb: return "mc-vs-crb";
    case ExperimentKind::rangewalk_sweep: return "rangewalk-sweep";
    case ExperimentKind::image_recon: return "image-recon";
  }
  return "?";
}

ExperimentKind kind_from_name(const std::string& s) {
  for (ExperimentKind k :
       {ExperimentKind::sbr_sweep, ExperimentKind::pulse_width_sweep,
        ExperimentKind::depth_sweep, ExperimentKind::mc_vs_crb,
        ExperimentKind::rangewalk_sweep, ExperimentKind::image_recon})
    if (kind_name(k) == s) return k;
  throw std::invalid_argument("unknown experiment kind: " + s);
}

std::string join(const std::vector<double>& v) {
  std::ostringstream ss;
  ss.precision(12);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) ss << ",";
    ss << v[i];
  }
  return ss.str();
}

Irf resolve_irf(const ExperimentSpec& spec) {
  if (spec.irf == "spad") return make_spad_irf();
  if (spec.irf == "gaussian") return Irf::gaussian(spec.sigma_bins);
  throw std::invalid_argument("unknown irf id: " + spec.irf);
}

}  // namespace

Irf make_spad_irf() {
  const int length = 240;
  const double peak = 60.0;
  VectorXd table(length);
  for (int j = 0; j < length; ++j) {
    double x = j;
    if (x < peak) {
      table[j] = std::exp(-0.5 * std::pow((x - peak) / 16.0, 2));
    } else {
      double k = x - peak;
      table[j] = 0.5 * std::exp(-k / 45.0) +
                 0.5 * std::exp(-0.5 * std::pow(k / 28.0, 2));
    }
  }
  return Irf::empirical(table);
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials >= 1");
  if (T <= 0 || M <= 0) throw std::invalid_argument("ExperimentSpec: T, M > 0");
  if (kind == ExperimentKind::sbr_sweep && sbr_values.empty())
    throw std::invalid_argument("ExperimentSpec: empty SBR grid");
  if (kind == ExperimentKind::pulse_width_sweep && sigma_values.empty())
    throw std::invalid_argument("ExperimentSpec: empty sigma grid");
  if (kind == ExperimentKind::depth_sweep && depth_values.empty())
    throw std::invalid_argument("ExperimentSpec: empty depth grid");
}

const std::set<std::string>& ExperimentSpec::config_keys() {
  static const std::set<std::string> keys = {
      "kind", "sbr", "sigmas", "depths", "betas", "T", "M", "sigma-bins",
      "n", "N", "mu", "trials", "K", "seed", "estimators", "irf", "output"};
  return keys;
}

ExperimentSpec ExperimentSpec::from_config(const RunConfig& cfg) {
  ExperimentSpec spec;
  spec.kind = kind_from_name(cfg.get_string("kind", "mc-vs-crb"));
  if (spec.kind == ExperimentKind::rangewalk_sweep) {
    spec.T = 4613;
    spec.M = 50;
    spec.irf = "spad";
    spec.trials = 64;
    spec.sbr_values = {100.0};
    spec.beta_values = default_beta_grid();
  }
  if (spec.kind == ExperimentKind::image_recon) {
    spec.T = 4613;
    spec.M = 20;
    spec.sigma_bins = 57.0;
    spec.n = 337;
    spec.sbr_values = {1.0};
  }
  spec.sbr_values = cfg.get_list("sbr", spec.sbr_values);
  spec.sigma_values = cfg.get_list("sigmas", spec.sigma_values);
  spec.depth_values = cfg.get_list("depths", spec.depth_values);
  spec.beta_values = cfg.get_list("betas", spec.beta_values);
  spec.T = static_cast<int>(cfg.get_int("T", spec.T));
  spec.M = static_cast<int>(cfg.get_int("M", spec.M));
  spec.sigma_bins = cfg.get_double("sigma-bins", spec.sigma_bins);
  spec.n = cfg.get_int("n", spec.n);
  spec.N = cfg.get_int("N", spec.N);
  spec.mu = cfg.get_double("mu", spec.mu);
  spec.trials = static_cast<int>(cfg.get_int("trials", spec.trials));
  spec.K = static_cast<int>(cfg.get_int("K", spec.K));
  spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  spec.irf = cfg.get_string("irf", spec.irf);
  spec.output = cfg.get_string("output", spec.output);
  std::string est = cfg.get_string("estimators", "");
  if (!est.empty()) {
    spec.estimators.clear();
    std::istringstream ss(est);
    std::string tok;
    while (std::getline(ss, tok, ',')) spec.estimators.push_back(tok);
  }
  spec.validate();
  return spec;
}

std::string ExperimentSpec::describe() const {
  std::ostringstream ss;
  ss << "kind=" << kind_name(kind);
  if (!sbr_values.empty()) ss << " sbr=" << join(sbr_values);
  if (!sigma_values.empty()) ss << " sigmas=" << join(sigma_values);
  if (!depth_values.empty()) ss << " depths=" << join(depth_values);
  if (!beta_values.empty()) ss << " betas=<" << beta_values.size() << " values>";
  ss << " T=" << T << " M=" << M << " sigma-bins=" << sigma_bins << " n=" << n
     << " N=" << N << " mu=" << mu << " trials=" << trials << " K=" << K
     << " seed=" << seed << " irf=" << irf;
  ss << " estimators=";
  for (std::size_t i = 0; i < estimators.size(); ++i)
    ss << (i ? "," : "") << estimators[i];
  return ss.str();
}

// --- Monte-Carlo vs CRB ---------------------------------------------------------

namespace {

void run_mc_vs_crb(const ExperimentSpec& spec, ResultTable& table) {
  Irf irf = Irf::gaussian(spec.sigma_bins);
  TemplateBank bank_p1(irf, spec.T, SketchKind::spline, 1, spec.M);
  TemplateBank bank_p2(irf, spec.T, SketchKind::spline, 2, spec.M);

  for (std::size_t si = 0; si < spec.sbr_values.size(); ++si) {
    double sbr = spec.sbr_values[si];
    std::string point = "sbr=" + std::to_string(sbr);
    PixelModel model;
    model.T = spec.T;
    model.weights = VectorXd::Constant(1, sbr / (1.0 + sbr));
    model.background = 1.0 / (1.0 + sbr);
    model.irf = irf;

    // Depth-marginal sketched bounds averaged over uniform depths.
    auto avg_crb = [&](int p) {
      const int nd = 50;
      double sum = 0.0;
      for (int j = 0; j < nd; ++j) {
        model.depths = VectorXd::Constant(1, (j + 0.5) * spec.T / double(nd));
        sum += crb_depth_rmse_sketch(model, SketchKind::spline, p, spec.M,
                                     spec.n);
      }
      return sum / nd;
    };
    double crb_p1 = avg_crb(1), crb_p2 = avg_crb(2);

    std::vector<double> err_lme, err_mp1, err_mp2;
    for (int tr = 0; tr < spec.trials; ++tr) {
      std::uint64_t s = derive_seed(spec.seed, si, static_cast<std::uint64_t>(tr));
      std::mt19937_64 rng(s);
      std::uniform_real_distribution<double> unif(0.0, spec.T);
      double truth = unif(rng);
      model.depths = VectorXd::Constant(1, truth);
      PhotonStream stream = sample_photons(model, spec.n, derive_seed(s, 1));
      SketchVector z1 = accumulate(stream, 1, spec.M, spec.T);
      SketchVector z2 = accumulate(stream, 2, spec.M, spec.T);

      for (const std::string& est : spec.estimators) {
        if (est == "lme") {
          double a = std::max(1e-3, estimate_background(z1, default_exclusion(z1)));
          SurfaceEstimate e = lme_closed_form(z1, irf, a);
          err_lme.push_back(wrap_signed(e.depth - truth, spec.T));
        } else if (est == "mp-p1") {
          auto ests = matching_pursuit(z1, spec.K, bank_p1);
          err_mp1.push_back(wrap_signed(ests[0].depth - truth, spec.T));
        } else if (est == "mp-p2") {
          auto ests = matching_pursuit(z2, spec.K, bank_p2);
          err_mp2.push_back(wrap_signed(ests[0].depth - truth, spec.T));
        }
      }
    }

    auto emit = [&](const std::string& name, const std::vector<double>& errs,
                    double crb) {
      if (errs.empty()) return;
      Rmse r = rmse_of(errs);
      table.rows.push_back({point, name, "depth-rmse-bins", r.value, r.count,
                            r.std_error});
      table.rows.push_back({point, name, "crb-depth-bins", crb, 0, 0.0});
      table.rows.push_back({point, name, "rmse-to-crb", r.value / crb, r.count,
                            r.std_error / crb});
    };
    emit("lme", err_lme, crb_p1);
    emit("mp-p1", err_mp1, crb_p1);
    emit("mp-p2", err_mp2, crb_p2);
  }
}

// --- Range-walk sweep --------------------------------------------------------------

void run_rangewalk(const ExperimentSpec& spec, ResultTable& table) {
  Irf irf = resolve_irf(spec);
  std::vector<double> betas =
      spec.beta_values.empty() ? default_beta_grid() : spec.beta_values;
  VectorXd beta_grid =
      Eigen::Map<const VectorXd>(betas.data(), static_cast<int>(betas.size()));
  double t_build = spec.T / 2.0;

  for (std::size_t si = 0; si < spec.sbr_values.size(); ++si) {
    double sbr = spec.sbr_values[si];
    RangeWalkConfig cfg{beta_grid, sbr, spec.mu, spec.N, spec.M, spec.T,
                        t_build};
    RangeWalkLut lut_i = build_lut(LutKind::intensity, irf, cfg);
    RangeWalkLut lut_s = build_lut(LutKind::shape, irf, cfg);

    for (int bi = 0; bi < beta_grid.size(); ++bi) {
      double beta = beta_grid[bi];
      double s = solve_background_flux(spec.mu, beta, sbr, irf, t_build,
                                       spec.T);
      PileupConfig pc{spec.mu, beta, s, spec.N};
      std::vector<double> e_raw, e_int, e_shape;
      for (int tr = 0; tr < spec.trials; ++tr) {
        std::uint64_t sd =
            derive_seed(spec.seed, si * 1000 + static_cast<std::uint64_t>(bi),
                        static_cast<std::uint64_t>(tr));
        std::mt19937_64 rng(sd);
        std::uniform_real_distribution<double> unif(600.0, spec.T - 600.0);
        double truth = unif(rng);
        PhotonStream stream =
            sample_pileup_stream(pc, irf, truth, spec.T, derive_seed(sd, 1));
        if (stream.n() == 0) continue;
        SketchVector z = accumulate(stream, 2, spec.M, spec.T);
        LocalMoments lm = local_moments(noise_correct_flanked(z));
        double raw = lm.t_hat - irf.mean_offset();
        double obs_i = static_cast<double>(stream.n()) / spec.N;
        double obs_s = std::sqrt(lm.var);
        e_raw.push_back(wrap_signed(raw - truth, spec.T));
        e_int.push_back(wrap_signed(correct(raw, obs_i, lut_i) - truth, spec.T));
        e_shape.push_back(
            wrap_signed(correct(raw, obs_s, lut_s) - truth, spec.T));
      }
      std::ostringstream point;
      point.precision(10);
      point << "sbr=" << sbr << ";beta=" << beta;
      auto emit = [&](const std::string& name, const std::vector<double>& e) {
        Rmse r = rmse_of(e);
        table.rows.push_back({point.str(), name, "depth-rmse-bins", r.value,
                              r.count, r.std_error});
      };
      emit("raw", e_raw);
      emit("intensity-lut", e_int);
      emit("shape-lut", e_shape);
    }
  }
}

// --- CRB sweeps ----------------------------------------------------------------------

void run_crb_sweep(const ExperimentSpec& spec, ResultTable& table) {
  std::vector<CrbRow> rows;
  const int n_depths = 200;
  if (spec.kind == ExperimentKind::sbr_sweep) {
    VectorXd grid = Eigen::Map<const VectorXd>(
        spec.sbr_values.data(), static_cast<int>(spec.sbr_values.size()));
    rows = crb_sbr_sweep(spec.sigma_bins, spec.M, spec.T, spec.n, grid,
                         n_depths);
  } else if (spec.kind == ExperimentKind::pulse_width_sweep) {
    VectorXd grid = Eigen::Map<const VectorXd>(
        spec.sigma_values.data(), static_cast<int>(spec.sigma_values.size()));
    rows = crb_width_sweep(spec.sbr_values.empty() ? 1.0 : spec.sbr_values[0],
                           grid, spec.M, spec.T, spec.n, n_depths);
  } else {
    VectorXd grid = Eigen::Map<const VectorXd>(
        spec.depth_values.data(), static_cast<int>(spec.depth_values.size()));
    rows = crb_depth_sweep(spec.sbr_values.empty() ? 1.0 : spec.sbr_values[0],
                           spec.sigma_bins, spec.M, spec.T, spec.n, grid);
  }
  for (const auto& r : rows) {
    std::ostringstream point;
    point.precision(10);
    point << "var=" << r.sweep_var;
    table.rows.push_back({point.str(), r.kind, "crb-bound-cm", r.bound_cm, 0,
                          0.0});
  }
}

// --- Image reconstruction ---------------------------------------------------------------

void run_image_recon(const ExperimentSpec& spec, ResultTable& table) {
  double sbr = spec.sbr_values.empty() ? 1.0 : spec.sbr_values[0];
  SyntheticScene scene = make_synthetic_face_cube(
      141, 141, spec.T, static_cast<double>(spec.n), sbr, spec.sigma_bins,
      spec.seed);
  Irf irf = Irf::gaussian(spec.sigma_bins);

  for (const std::string& est : spec.estimators) {
    std::string method = est;
    int p = 1;
    if (est == "mp-p1") { method = "mp"; p = 1; }
    else if (est == "mp-p2") { method = "mp"; p = 2; }
    ImageResult res = reconstruct_image(scene.cube, method, spec.M, p, spec.K,
                                        irf, &scene.truth_depth);
    std::string point = "image=synthetic-face;M=" + std::to_string(spec.M);
    table.rows.push_back({point, est, "image-rmse-bins", res.rmse_masked,
                          scene.cube.H * scene.cube.W - res.no_estimate, 0.0});
    table.rows.push_back({point, est, "image-rmse-bins-unmasked", res.rmse_all,
                          scene.cube.H * scene.cube.W, 0.0});
    table.rows.push_back({point, est, "no-estimate-pixels",
                          static_cast<double>(res.no_estimate), 0, 0.0});
  }
  double mean_n = static_cast<double>(scene.cube.total_count()) /
                  (scene.cube.H * scene.cube.W);
  double raw_bytes = mean_n * sizeof(double);
  std::string point = "image=synthetic-face;M=" + std::to_string(spec.M);
  table.rows.push_back({point, "sketch", "compression-ratio-fixed",
                        sketch_bytes_fixed(spec.M) / raw_bytes, 0, 0.0});
  table.rows.push_back({point, "sketch", "compression-ratio-float",
                        sketch_bytes_float(spec.M) / raw_bytes, 0, 0.0});
}

}  // namespace

ResultTable run(const ExperimentSpec& spec) {
  spec.validate();
  ResultTable table;
  table.spec_text = spec.describe();
  table.seed = spec.seed;
  switch (spec.kind) {
    case ExperimentKind::mc_vs_crb:
      run_mc_vs_crb(spec, table);
      break;
    case ExperimentKind::rangewalk_sweep:
      run_rangewalk(spec, table);
      break;
    case ExperimentKind::image_recon:
      run_image_recon(spec, table);
      break;
    default:
      run_crb_sweep(spec, table);
      break;
  }
  return table;
}

void write_result_csv(const std::string& path, const ResultTable& table) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "# spec: " << table.spec_text << "\n";
  os << "# seed: " << table.seed << "\n";
  os << "point,estimator,metric,value,trials,std-error\n";
  os.precision(12);
  for (const auto& r : table.rows)
    os << r.point << "," << r.estimator << "," << r.metric << "," << r.value
       << "," << r.trials << "," << r.std_error << "\n";
}

// --- Synthetic scene ------------------------------------------------------------------

SyntheticScene make_synthetic_face_cube(int H, int W, int T, double n_bar,
                                        double sbr, double sigma_bins,
                                        std::uint64_t seed) {
  SyntheticScene scene;
  scene.cube.H = H;
  scene.cube.W = W;
  scene.cube.T = T;
  scene.cube.dtype = 0;
  scene.cube.counts.assign(static_cast<std::size_t>(H) * W * T, 0);
  scene.truth_depth.resize(H, W);

  double cx = (W - 1) / 2.0, cy = (H - 1) / 2.0;
  double rx = 0.38 * W, ry = 0.45 * H;
  double alpha1 = sbr / (1.0 + sbr);
  for (int h = 0; h < H; ++h) {
    for (int w = 0; w < W; ++w) {
      double dx = (w - cx) / rx, dy = (h - cy) / ry;
      double r2 = dx * dx + dy * dy;
      double depth = 0.65 * T;
      if (r2 < 1.0) depth -= 0.125 * T * std::sqrt(1.0 - r2);
      scene.truth_depth(h, w) = depth;

      std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(h) * W + w);
      std::mt19937_64 rng(s);
      std::poisson_distribution<std::int64_t> budget(n_bar);
      std::int64_t n = budget(rng);
      std::binomial_distribution<std::int64_t> sig(n, alpha1);
      std::int64_t ns = sig(rng);
      std::normal_distribution<double> pulse(depth, sigma_bins);
      std::uniform_real_distribution<double> unif(0.0, static_cast<double>(T));
      for (std::int64_t j = 0; j < n; ++j) {
        double x = j < ns ? pulse(rng) : unif(rng);
        x = std::fmod(x, static_cast<double>(T));
        if (x < 0.0) x += T;
        int bin = static_cast<int>(std::llround(x)) % T;
        if (bin < 0) bin += T;
        scene.cube.at(h, w, bin) += 1;
      }
    }
  }
  return scene;
}

std::size_t sketch_bytes_fixed(int M) {
  return static_cast<std::size_t>(M) * sizeof(std::uint32_t) +
         sizeof(std::uint32_t);
}

std::size_t sketch_bytes_float(int M) {
  return static_cast<std::size_t>(M) * sizeof(double) + 12;
}

ImageResult reconstruct_image(const HistogramCube& cube,
                              const std::string& method, int M, int p, int K,
                              const Irf& irf,
                              const Eigen::MatrixXd* reference) {
  ImageResult out;
  out.depth = Eigen::MatrixXd::Constant(cube.H, cube.W,
                                        std::numeric_limits<double>::quiet_NaN());
  out.intensity = Eigen::MatrixXd::Zero(cube.H, cube.W);

  std::unique_ptr<TemplateBank> bank;
  SketchKind kind = method == "mp-fourier" ? SketchKind::fourier
                                           : SketchKind::spline;
  if (method == "mp" || method == "mp-fourier")
    bank = std::make_unique<TemplateBank>(irf, cube.T, kind, p, M);

  double se_masked = 0.0, se_all = 0.0;
  int est_count = 0;
  VectorXd hist;
  if (method == "crosscorr") hist.resize(cube.T);

  for (int h = 0; h < cube.H; ++h) {
    for (int w = 0; w < cube.W; ++w) {
      std::vector<double> pos, cnt;
      double n = 0.0;
      for (int t = 0; t < cube.T; ++t) {
        std::uint32_t c = cube.at(h, w, t);
        if (c == 0) continue;
        pos.push_back(static_cast<double>(t));
        cnt.push_back(static_cast<double>(c));
        n += c;
      }
      double truth = reference ? (*reference)(h, w) : 0.0;
      if (n == 0.0) {
        ++out.no_estimate;
        if (reference) {
          double e = wrap_signed(0.0 - truth, cube.T);
          se_all += e * e;
        }
        continue;
      }

      double depth = 0.0, intensity = 0.0;
      VectorXd positions = Eigen::Map<VectorXd>(pos.data(), static_cast<int>(pos.size()));
      VectorXd weights = Eigen::Map<VectorXd>(cnt.data(), static_cast<int>(cnt.size()));
      if (method == "mp") {
        SketchVector z = accumulate_weighted(positions, weights, p, M, cube.T);
        auto ests = matching_pursuit(z, K, *bank);
        depth = ests[0].depth;
        intensity = ests[0].intensity;
      } else if (method == "mp-fourier") {
        SketchVector z{SketchKind::fourier, 0, M, cube.T,
                       static_cast<std::int64_t>(n), VectorXd::Zero(M)};
        for (int j = 0; j < positions.size(); ++j) {
          for (int l = 1; l <= M / 2; ++l) {
            double wv = 2.0 * M_PI * l * positions[j] / cube.T;
            z.values[2 * (l - 1)] += weights[j] * std::cos(wv);
            z.values[2 * (l - 1) + 1] += weights[j] * std::sin(wv);
          }
        }
        z.values /= n;
        auto ests = matching_pursuit(z, K, *bank);
        depth = ests[0].depth;
        intensity = ests[0].intensity;
      } else if (method == "lme") {
        SketchVector z = accumulate_weighted(positions, weights, 1, M, cube.T);
        double a = std::max(1e-3, estimate_background(z, default_exclusion(z)));
        SurfaceEstimate e = lme_closed_form(z, irf, a);
        depth = e.depth - irf.mean_offset();
        intensity = e.intensity;
      } else if (method == "coarse") {
        SketchVector z = accumulate_weighted(positions, weights, 0, M, cube.T);
        depth = coarse_argmax_depth(z);
        intensity = estimate_background(z, default_exclusion(z));
      } else if (method == "crosscorr") {
        hist.setZero();
        for (int j = 0; j < positions.size(); ++j)
          hist[static_cast<int>(positions[j])] = weights[j];
        depth = cross_correlation_depth(hist, irf);
        intensity = 1.0;
      } else {
        throw std::invalid_argument("unknown reconstruction method: " + method);
      }
      depth = std::fmod(depth, static_cast<double>(cube.T));
      if (depth < 0.0) depth += cube.T;
      out.depth(h, w) = depth;
      out.intensity(h, w) = intensity;
      if (reference) {
        double e = wrap_signed(depth - truth, cube.T);
        se_masked += e * e;
        se_all += e * e;
        ++est_count;
      }
    }
  }
  if (reference) {
    if (est_count > 0) out.rmse_masked = std::sqrt(se_masked / est_count);
    out.rmse_all = std::sqrt(se_all / (cube.H * cube.W));
  }
  return out;
}

}  // namespace splinesketch
