#include "doctest.h"

#include "splinesketch/io.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

using namespace splinesketch;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("io_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("histogram cube round trip and truncation error") {
  HistogramCube cube;
  cube.H = 2;
  cube.W = 2;
  cube.T = 4;
  cube.dtype = 0;
  cube.counts.assign(16, 0);
  for (int i = 0; i < 16; ++i) cube.counts[i] = static_cast<std::uint32_t>(i * 3);

  TempFile f("cube.spc");
  write_cube(f.path, cube);
  HistogramCube back = load_cube(f.path);
  CHECK(back.H == 2);
  CHECK(back.W == 2);
  CHECK(back.T == 4);
  CHECK(back.dtype == 0);
  CHECK(back.counts == cube.counts);
  CHECK(back.total_count() == cube.total_count());

  // Byte-identical re-serialization.
  TempFile g("cube2.spc");
  write_cube(g.path, back);
  CHECK(read_all(f.path) == read_all(g.path));

  // Truncated payload is a loud error.
  std::string bytes = read_all(f.path);
  std::ofstream trunc(f.path, std::ios::binary | std::ios::trunc);
  trunc.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
  trunc.close();
  CHECK_THROWS(load_cube(f.path));
}

TEST_CASE("cube rejects bad magic") {
  TempFile f("bad.spc");
  std::ofstream out(f.path, std::ios::binary);
  out << "NOPE garbage bytes that are long enough to cover a header";
  out.close();
  CHECK_THROWS(load_cube(f.path));
}

TEST_CASE("photon stream round trip") {
  PhotonStream s;
  s.timestamps = {0.5, 17.25, 99.875};
  TempFile f("stream.bin");
  write_stream(f.path, s, 128);
  int T = 0;
  PhotonStream back = load_stream(f.path, T);
  CHECK(T == 128);
  CHECK(back.timestamps == s.timestamps);
}

TEST_CASE("sketch records round trip") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 64.0);
  PhotonStream s;
  for (int j = 0; j < 200; ++j) s.timestamps.push_back(u(rng));
  std::vector<SketchVector> zs = {accumulate(s, 1, 8, 64),
                                  accumulate(s, 2, 8, 64),
                                  accumulate_fourier(s, 6, 64)};
  TempFile f("sk.bin");
  write_sketches(f.path, zs);
  auto back = load_sketches(f.path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].kind == zs[i].kind);
    CHECK(back[i].p == zs[i].p);
    CHECK(back[i].M == zs[i].M);
    CHECK(back[i].T == zs[i].T);
    CHECK(back[i].n == zs[i].n);
    CHECK(back[i].values == zs[i].values);
  }

  FixedPointSketch fp = accumulate_fixed_point(s, 2, {6, 3});
  TempFile g("fp.bin");
  write_fixed_point_sketch(g.path, fp);
  FixedPointSketch fback = load_fixed_point_sketch(g.path);
  CHECK(fback.cfg.log2_T == fp.cfg.log2_T);
  CHECK(fback.cfg.log2_M == fp.cfg.log2_M);
  CHECK(fback.p == fp.p);
  CHECK(fback.n == fp.n);
  CHECK(fback.acc == fp.acc);
}

TEST_CASE("range-walk table round trip") {
  RangeWalkLut lut;
  lut.kind = LutKind::shape;
  lut.M = 50;
  lut.T = 4613;
  lut.mu = 512.0;
  lut.sbr = 100.0;
  lut.beta_grid = VectorXd::LinSpaced(5, 0.0001, 1.0);
  lut.keys = VectorXd::LinSpaced(4, 2.0, 30.0);
  lut.corrections = VectorXd::LinSpaced(4, -12.0, -0.1);
  TempFile f("lut.bin");
  write_lut(f.path, lut);
  RangeWalkLut back = load_lut(f.path);
  CHECK(back.kind == lut.kind);
  CHECK(back.M == lut.M);
  CHECK(back.T == lut.T);
  CHECK(back.mu == lut.mu);
  CHECK(back.sbr == lut.sbr);
  CHECK(back.beta_grid == lut.beta_grid);
  CHECK(back.keys == lut.keys);
  CHECK(back.corrections == lut.corrections);

  TempFile g("lut2.bin");
  write_lut(g.path, back);
  CHECK(read_all(f.path) == read_all(g.path));
}

TEST_CASE("run configuration parsing") {
  std::set<std::string> keys = {"kind", "sbr", "trials"};
  RunConfig cfg = RunConfig::parse_text(
      "# comment line\nkind = mc-vs-crb\nsbr=1,10\ntrials= 25\n", keys);
  CHECK(cfg.get_string("kind", "") == "mc-vs-crb");
  CHECK(cfg.get_int("trials", 0) == 25);
  auto list = cfg.get_list("sbr", {});
  REQUIRE(list.size() == 2);
  CHECK(list[0] == 1.0);
  CHECK(list[1] == 10.0);
  CHECK(cfg.get_double("missing", 7.5) == 7.5);

  CHECK_THROWS(RunConfig::parse_text("kindd = oops\n", keys));
}

TEST_CASE("CRB csv writer emits the schema") {
  std::vector<CrbRow> rows = {{1.0, "p1", 8, 5.0}, {10.0, "full", 8, 1.5}};
  TempFile f("crb.csv");
  write_crb_csv(f.path, rows, "demo");
  std::string text = read_all(f.path);
  CHECK(text.find("sweep-var,sketch-kind,M,bound-cm") != std::string::npos);
  CHECK(text.find("1,p1,8,5") != std::string::npos);
}
