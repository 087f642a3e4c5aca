// Command-line front end: simulate photon streams, build sketches, run
// estimators, tabulate bounds, build/apply range-walk tables, and drive the
// experiment suites.

#include "CLI11.hpp"

#include "splinesketch/experiments.hpp"

#include <iostream>
#include <sstream>

namespace ss = splinesketch;

namespace {

std::vector<double> parse_csv_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

ss::Irf make_irf(const std::string& id, double sigma) {
  if (id == "spad") return ss::make_spad_irf();
  if (id == "gaussian") return ss::Irf::gaussian(sigma);
  throw CLI::ValidationError("--irf", "unknown irf id: " + id);
}

ss::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const ss::VectorXd>(v.data(), static_cast<int>(v.size()));
}

struct SimulateArgs {
  int T = 600;
  std::string depths = "300";
  std::string weights;
  double background = 0.0;
  std::string irf = "gaussian";
  double sigma = 16.0;
  std::int64_t n = 1000;
  std::uint64_t seed = 1;
  std::string out;
  // pile-up
  bool pileup = false;
  double mu = 512.0;
  double beta = 1.0;
  double sbr = 100.0;
  std::int64_t N = 300000;
};

int run_simulate(const SimulateArgs& a) {
  ss::Irf irf = make_irf(a.irf, a.sigma);
  ss::PhotonStream stream;
  if (a.pileup) {
    auto depths = parse_csv_list(a.depths);
    if (depths.size() != 1)
      throw CLI::ValidationError("--depths", "pile-up simulation takes one depth");
    double s = ss::solve_background_flux(a.mu, a.beta, a.sbr, irf, depths[0],
                                         a.T);
    ss::PileupConfig cfg{a.mu, a.beta, s, a.N};
    std::cout << "config: pileup mu=" << a.mu << " beta=" << a.beta
              << " sbr=" << a.sbr << " s=" << s << " N=" << a.N
              << " T=" << a.T << " depth=" << depths[0] << " irf=" << a.irf
              << " seed=" << a.seed << "\n";
    stream = ss::sample_pileup_stream(cfg, irf, depths[0], a.T, a.seed);
  } else {
    ss::PixelModel model;
    model.T = a.T;
    model.depths = to_vec(parse_csv_list(a.depths));
    std::vector<double> w = a.weights.empty()
                                ? std::vector<double>(model.K(),
                                                      (1.0 - a.background) /
                                                          model.K())
                                : parse_csv_list(a.weights);
    model.weights = to_vec(w);
    model.background = a.background;
    model.irf = irf;
    std::cout << "config: mixture T=" << a.T << " depths=" << a.depths
              << " background=" << a.background << " n=" << a.n
              << " irf=" << a.irf << " seed=" << a.seed << "\n";
    stream = ss::sample_photons(model, a.n, a.seed);
  }
  ss::write_stream(a.out, stream, a.T);
  std::cout << "wrote " << stream.n() << " timestamps to " << a.out << "\n";
  return 0;
}

struct SketchArgs {
  std::string in, out;
  int p = 1;
  int M = 8;
  int fourier_m = 0;
  bool fixed_point = false;
};

int run_sketch(const SketchArgs& a) {
  int T = 0;
  ss::PhotonStream stream = ss::load_stream(a.in, T);
  if (a.fixed_point) {
    int lt = static_cast<int>(std::round(std::log2(T)));
    int lm = static_cast<int>(std::round(std::log2(a.M)));
    if ((1 << lt) != T || (1 << lm) != a.M)
      throw CLI::ValidationError("--fixed-point",
                                 "requires power-of-two T and M");
    ss::FixedPointSketch fp =
        ss::accumulate_fixed_point(stream, a.p, {lt, lm});
    ss::write_fixed_point_sketch(a.out, fp);
    std::cout << "config: fixed-point p=" << a.p << " M=" << a.M << " T=" << T
              << " b=" << fp.cfg.b() << "\n"
              << "ops: add_sub=" << fp.ops.add_sub << " mult=" << fp.ops.mult
              << " detections=" << fp.ops.detections << "\n";
    return 0;
  }
  ss::SketchVector z = a.fourier_m > 0
                           ? ss::accumulate_fourier(stream, a.fourier_m, T)
                           : ss::accumulate(stream, a.p, a.M, T);
  ss::write_sketches(a.out, {z});
  std::cout << "config: "
            << (a.fourier_m > 0 ? "fourier m=" + std::to_string(a.fourier_m)
                                : "spline p=" + std::to_string(a.p) +
                                      " M=" + std::to_string(a.M))
            << " T=" << T << " n=" << z.n << "\n";
  return 0;
}

struct EstimateArgs {
  std::string in;
  std::string method = "lme";
  int K = 1;
  std::string irf = "gaussian";
  double sigma = 16.0;
};

int run_estimate(const EstimateArgs& a) {
  auto sketches = ss::load_sketches(a.in);
  ss::Irf irf = make_irf(a.irf, a.sigma);
  std::cout << "config: method=" << a.method << " K=" << a.K
            << " irf=" << a.irf << " sketches=" << sketches.size() << "\n";
  for (const auto& z : sketches) {
    std::vector<ss::SurfaceEstimate> ests;
    if (a.method == "lme") {
      if (z.kind != ss::SketchKind::spline || z.p != 1)
        throw CLI::ValidationError("--method",
                                   "lme requires a degree-1 spline sketch");
      double al = std::max(
          1e-3, ss::estimate_background(z, ss::default_exclusion(z)));
      ests.push_back(ss::lme_closed_form(z, irf, al));
    } else if (a.method == "mp") {
      ests = ss::matching_pursuit(z, a.K, irf);
    } else if (a.method == "coarse-argmax") {
      ss::SurfaceEstimate e;
      e.depth = ss::coarse_argmax_depth(z);
      e.intensity = ss::estimate_background(z, ss::default_exclusion(z));
      ests.push_back(e);
    } else {
      throw CLI::ValidationError("--method", "unknown method: " + a.method);
    }
    for (const auto& e : ests)
      std::cout << "surface depth=" << e.depth - irf.mean_offset()
                << " intensity=" << e.intensity
                << " background=" << e.background << "\n";
  }
  return 0;
}

struct CrbArgs {
  std::string sweep = "sbr";
  double sigma_cm = 64.0;  // pulse width in cm (4 cm per bin)
  int M = 8;
  int T = 600;
  std::int64_t n = 1000;
  double sbr = 1.0;
  std::string grid = "0.1,1,10";
  std::string out;
};

int run_crb(const CrbArgs& a) {
  const double cm_per_bin = 4.0;
  ss::VectorXd grid = to_vec(parse_csv_list(a.grid));
  std::vector<ss::CrbRow> rows;
  std::cout << "config: sweep=" << a.sweep << " sigma-cm=" << a.sigma_cm
            << " M=" << a.M << " T=" << a.T << " n=" << a.n
            << " sbr=" << a.sbr << " grid=" << a.grid << "\n";
  if (a.sweep == "sbr") {
    rows = ss::crb_sbr_sweep(a.sigma_cm / cm_per_bin, a.M, a.T, a.n, grid, 200);
  } else if (a.sweep == "depth") {
    rows = ss::crb_depth_sweep(a.sbr, a.sigma_cm / cm_per_bin, a.M, a.T, a.n,
                               grid);
  } else if (a.sweep == "width") {
    rows = ss::crb_width_sweep(a.sbr, grid / cm_per_bin, a.M, a.T, a.n, 200);
  } else {
    throw CLI::ValidationError("--sweep", "expected sbr, depth, or width");
  }
  ss::write_crb_csv(a.out, rows);
  std::cout << "wrote " << rows.size() << " rows to " << a.out << "\n";
  return 0;
}

struct RangewalkArgs {
  std::string mode = "build-lut";
  std::string kind = "shape";
  std::string lut;
  std::string irf = "spad";
  double sigma = 16.0;
  double sbr = 100.0;
  double mu = 512.0;
  std::int64_t N = 300000;
  int M = 50;
  int T = 4613;
  std::string betas;
  double estimate = 0.0;
  double observable = 0.0;
};

int run_rangewalk_cmd(const RangewalkArgs& a) {
  if (a.mode == "correct") {
    ss::RangeWalkLut lut = ss::load_lut(a.lut);
    double corrected = ss::correct(a.estimate, a.observable, lut);
    std::cout << "corrected=" << corrected << "\n";
    return 0;
  }
  if (a.mode != "build-lut")
    throw CLI::ValidationError("--mode", "expected build-lut or correct");
  ss::Irf irf = make_irf(a.irf, a.sigma);
  std::vector<double> betas = a.betas.empty()
                                  ? std::vector<double>()
                                  : parse_csv_list(a.betas);
  if (betas.empty())
    for (int i = 0; i < 50; ++i)
      betas.push_back(std::pow(10.0, -4.0 + 4.0 * i / 49.0));
  ss::RangeWalkConfig cfg{to_vec(betas), a.sbr, a.mu, a.N, a.M, a.T, 0.0};
  ss::LutKind kind =
      a.kind == "intensity" ? ss::LutKind::intensity : ss::LutKind::shape;
  std::cout << "config: build-lut kind=" << a.kind << " sbr=" << a.sbr
            << " mu=" << a.mu << " N=" << a.N << " M=" << a.M << " T=" << a.T
            << " betas=" << betas.size() << " irf=" << a.irf << "\n";
  ss::RangeWalkLut lut = ss::build_lut(kind, irf, cfg);
  ss::write_lut(a.lut, lut);
  std::cout << "wrote " << lut.keys.size() << " keys to " << a.lut << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
};

int run_experiment(const ExperimentArgs& a) {
  ss::RunConfig cfg =
      ss::RunConfig::parse_file(a.config, ss::ExperimentSpec::config_keys());
  ss::ExperimentSpec spec = ss::ExperimentSpec::from_config(cfg);
  if (!a.out.empty()) spec.output = a.out;
  if (spec.output.empty())
    throw CLI::ValidationError("--out", "no output path given");
  std::cout << "config: " << spec.describe() << "\n"
            << "seed: " << spec.seed << "\n";
  ss::ResultTable table = ss::run(spec);
  ss::write_result_csv(spec.output, table);
  std::cout << "wrote " << table.rows.size() << " rows to " << spec.output
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spline-sketch compression and estimation for time-correlated "
               "single-photon data"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Sample a photon stream");
  c_sim->add_option("--T", sim.T);
  c_sim->add_option("--depths", sim.depths);
  c_sim->add_option("--weights", sim.weights);
  c_sim->add_option("--background", sim.background);
  c_sim->add_option("--irf", sim.irf);
  c_sim->add_option("--sigma", sim.sigma);
  c_sim->add_option("--n", sim.n);
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_flag("--pileup", sim.pileup);
  c_sim->add_option("--mu", sim.mu);
  c_sim->add_option("--beta", sim.beta);
  c_sim->add_option("--sbr", sim.sbr);
  c_sim->add_option("--N", sim.N);
  c_sim->add_option("--out", sim.out)->required();

  SketchArgs sk;
  auto* c_sk = app.add_subcommand("sketch", "Compress a stream into a sketch");
  c_sk->add_option("--in", sk.in)->required();
  c_sk->add_option("--p", sk.p);
  c_sk->add_option("--M", sk.M);
  c_sk->add_option("--fourier", sk.fourier_m);
  c_sk->add_flag("--fixed-point", sk.fixed_point);
  c_sk->add_option("--out", sk.out)->required();

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Recover surfaces from sketches");
  c_est->add_option("--in", est.in)->required();
  c_est->add_option("--method", est.method);
  c_est->add_option("--K", est.K);
  c_est->add_option("--irf", est.irf);
  c_est->add_option("--sigma", est.sigma);

  CrbArgs crb;
  auto* c_crb = app.add_subcommand("crb", "Tabulate estimation bounds");
  c_crb->add_option("--sweep", crb.sweep);
  c_crb->add_option("--sigma-cm", crb.sigma_cm);
  c_crb->add_option("--M", crb.M);
  c_crb->add_option("--T", crb.T);
  c_crb->add_option("--n", crb.n);
  c_crb->add_option("--sbr", crb.sbr);
  c_crb->add_option("--grid", crb.grid);
  c_crb->add_option("--out", crb.out)->required();

  RangewalkArgs rw;
  auto* c_rw = app.add_subcommand("rangewalk", "Range-walk tables");
  c_rw->add_option("--mode", rw.mode);
  c_rw->add_option("--kind", rw.kind);
  c_rw->add_option("--lut", rw.lut)->required();
  c_rw->add_option("--irf", rw.irf);
  c_rw->add_option("--sigma", rw.sigma);
  c_rw->add_option("--sbr", rw.sbr);
  c_rw->add_option("--mu", rw.mu);
  c_rw->add_option("--N", rw.N);
  c_rw->add_option("--M", rw.M);
  c_rw->add_option("--T", rw.T);
  c_rw->add_option("--betas", rw.betas);
  c_rw->add_option("--estimate", rw.estimate);
  c_rw->add_option("--observable", rw.observable);

  ExperimentArgs exp;
  auto* c_exp = app.add_subcommand("experiment", "Run an experiment suite");
  c_exp->add_option("--config", exp.config)->required();
  c_exp->add_option("--out", exp.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_sk) return run_sketch(sk);
    if (*c_est) return run_estimate(est);
    if (*c_crb) return run_crb(crb);
    if (*c_rw) return run_rangewalk_cmd(rw);
    if (*c_exp) return run_experiment(exp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
