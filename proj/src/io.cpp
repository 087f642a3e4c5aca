#include "splinesketch/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace splinesketch {

namespace {

// All formats are little-endian; this implementation targets little-endian
// hosts and writes native byte order.

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is, const std::string& what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is)
    throw std::runtime_error("truncated file while reading " + what +
                             " at byte offset " + std::to_string(is.tellg() == -1
                                                                     ? -1
                                                                     : static_cast<long long>(is.tellg())));
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

}  // namespace

std::uint64_t HistogramCube::total_count() const {
  std::uint64_t sum = 0;
  for (std::uint32_t c : counts) sum += c;
  return sum;
}

void write_cube(const std::string& path, const HistogramCube& cube) {
  if (cube.counts.size() !=
      static_cast<std::size_t>(cube.H) * cube.W * cube.T)
    throw std::invalid_argument("write_cube: payload length mismatch");
  std::ofstream os = open_out(path);
  os.write("SPC1", 4);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(cube.dtype));
  const char pad[3] = {0, 0, 0};
  os.write(pad, 3);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cube.H));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cube.W));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cube.T));
  for (std::uint32_t c : cube.counts) {
    if (cube.dtype == 0) {
      if (c > 0xffff)
        throw std::invalid_argument("write_cube: count exceeds u16 dtype");
      put<std::uint16_t>(os, static_cast<std::uint16_t>(c));
    } else {
      put<std::uint32_t>(os, c);
    }
  }
}

HistogramCube load_cube(const std::string& path) {
  std::ifstream is = open_in(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SPC1", 4) != 0)
    throw std::runtime_error("bad cube magic at byte offset 0 in " + path);
  HistogramCube cube;
  cube.dtype = take<std::uint8_t>(is, "dtype");
  if (cube.dtype > 1)
    throw std::runtime_error("unknown cube dtype code at byte offset 4");
  char pad[3];
  is.read(pad, 3);
  cube.H = static_cast<int>(take<std::uint32_t>(is, "H"));
  cube.W = static_cast<int>(take<std::uint32_t>(is, "W"));
  cube.T = static_cast<int>(take<std::uint32_t>(is, "T"));
  std::size_t total = static_cast<std::size_t>(cube.H) * cube.W * cube.T;
  cube.counts.resize(total);
  std::size_t width = cube.dtype == 0 ? 2 : 4;
  std::vector<char> payload(total * width);
  is.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(is.gcount()) != payload.size())
    throw std::runtime_error(
        "truncated cube payload: expected " + std::to_string(payload.size()) +
        " bytes, got " + std::to_string(is.gcount()));
  for (std::size_t i = 0; i < total; ++i) {
    if (cube.dtype == 0) {
      std::uint16_t v;
      std::memcpy(&v, payload.data() + 2 * i, 2);
      cube.counts[i] = v;
    } else {
      std::memcpy(&cube.counts[i], payload.data() + 4 * i, 4);
    }
  }
  return cube;
}

void write_stream(const std::string& path, const PhotonStream& stream, int T) {
  std::ofstream os = open_out(path);
  os.write("SPST", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(T));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(stream.timestamps.size()));
  for (double x : stream.timestamps) put<double>(os, x);
}

PhotonStream load_stream(const std::string& path, int& T) {
  std::ifstream is = open_in(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SPST", 4) != 0)
    throw std::runtime_error("bad stream magic in " + path);
  T = static_cast<int>(take<std::uint32_t>(is, "T"));
  std::uint32_t n = take<std::uint32_t>(is, "n");
  PhotonStream out;
  out.timestamps.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i)
    out.timestamps.push_back(take<double>(is, "timestamp"));
  return out;
}

void write_sketches(const std::string& path,
                    const std::vector<SketchVector>& sketches) {
  std::ofstream os = open_out(path);
  os.write("SPSK", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sketches.size()));
  for (const auto& z : sketches) {
    put<std::uint8_t>(os, z.kind == SketchKind::spline ? 0 : 1);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(
                              z.kind == SketchKind::spline ? z.p : z.M));
    put<std::uint16_t>(os, static_cast<std::uint16_t>(z.M));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(z.T));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(z.n));
    for (int i = 0; i < z.values.size(); ++i) put<double>(os, z.values[i]);
  }
}

std::vector<SketchVector> load_sketches(const std::string& path) {
  std::ifstream is = open_in(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SPSK", 4) != 0)
    throw std::runtime_error("bad sketch-file magic in " + path);
  std::uint32_t count = take<std::uint32_t>(is, "record count");
  std::vector<SketchVector> out;
  out.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    SketchVector z;
    std::uint8_t tag = take<std::uint8_t>(is, "tag");
    if (tag > 1) throw std::runtime_error("unknown sketch record tag");
    z.kind = tag == 0 ? SketchKind::spline : SketchKind::fourier;
    std::uint8_t pm = take<std::uint8_t>(is, "p-or-m");
    z.M = take<std::uint16_t>(is, "M");
    z.p = tag == 0 ? pm : 0;
    z.T = static_cast<int>(take<std::uint32_t>(is, "T"));
    z.n = take<std::uint32_t>(is, "n");
    z.values.resize(z.M);
    for (int i = 0; i < z.M; ++i) z.values[i] = take<double>(is, "value");
    out.push_back(std::move(z));
  }
  return out;
}

void write_fixed_point_sketch(const std::string& path,
                              const FixedPointSketch& fp) {
  std::ofstream os = open_out(path);
  os.write("SPSK", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint8_t>(os, 2);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(fp.p));
  put<std::uint16_t>(os, static_cast<std::uint16_t>(1 << fp.cfg.log2_M));
  put<std::uint32_t>(os, 1u << fp.cfg.log2_T);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(fp.n));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(fp.cfg.b()));
  for (std::uint64_t a : fp.acc) put<std::uint64_t>(os, a);
}

FixedPointSketch load_fixed_point_sketch(const std::string& path) {
  std::ifstream is = open_in(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SPSK", 4) != 0)
    throw std::runtime_error("bad sketch-file magic in " + path);
  take<std::uint32_t>(is, "record count");
  if (take<std::uint8_t>(is, "tag") != 2)
    throw std::runtime_error("not a fixed-point sketch record");
  FixedPointSketch fp;
  fp.p = take<std::uint8_t>(is, "p");
  int M = take<std::uint16_t>(is, "M");
  std::uint32_t T = take<std::uint32_t>(is, "T");
  fp.n = take<std::uint32_t>(is, "n");
  int b = take<std::uint8_t>(is, "b");
  fp.cfg.log2_M = static_cast<int>(std::round(std::log2(M)));
  fp.cfg.log2_T = fp.cfg.log2_M + b;
  if ((1u << fp.cfg.log2_T) != T)
    throw std::runtime_error("inconsistent fixed-point header");
  fp.acc.resize(static_cast<std::size_t>(M));
  for (auto& a : fp.acc) a = take<std::uint64_t>(is, "accumulator");
  return fp;
}

void write_lut(const std::string& path, const RangeWalkLut& lut) {
  std::ofstream os = open_out(path);
  os << "SPLUT v1 kind="
     << (lut.kind == LutKind::intensity ? "intensity" : "shape")
     << " M=" << lut.M << " T=" << lut.T
     << " nbeta=" << lut.beta_grid.size() << " nkeys=" << lut.keys.size()
     << "\n";
  put<double>(os, lut.mu);
  put<double>(os, lut.sbr);
  for (int i = 0; i < lut.beta_grid.size(); ++i) put<double>(os, lut.beta_grid[i]);
  for (int i = 0; i < lut.keys.size(); ++i) put<double>(os, lut.keys[i]);
  for (int i = 0; i < lut.corrections.size(); ++i)
    put<double>(os, lut.corrections[i]);
}

RangeWalkLut load_lut(const std::string& path) {
  std::ifstream is = open_in(path);
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "SPLUT" || version != "v1")
    throw std::runtime_error("bad LUT header in " + path);
  RangeWalkLut lut;
  int nbeta = -1, nkeys = -1;
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("malformed LUT header token: " + tok);
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "kind")
      lut.kind = val == "intensity" ? LutKind::intensity : LutKind::shape;
    else if (key == "M")
      lut.M = std::stoi(val);
    else if (key == "T")
      lut.T = std::stoi(val);
    else if (key == "nbeta")
      nbeta = std::stoi(val);
    else if (key == "nkeys")
      nkeys = std::stoi(val);
    else
      throw std::runtime_error("unknown LUT header key: " + key);
  }
  if (nbeta < 0 || nkeys < 0)
    throw std::runtime_error("LUT header missing sizes");
  lut.mu = take<double>(is, "mu");
  lut.sbr = take<double>(is, "sbr");
  lut.beta_grid.resize(nbeta);
  for (int i = 0; i < nbeta; ++i) lut.beta_grid[i] = take<double>(is, "beta");
  lut.keys.resize(nkeys);
  for (int i = 0; i < nkeys; ++i) lut.keys[i] = take<double>(is, "key");
  lut.corrections.resize(nkeys);
  for (int i = 0; i < nkeys; ++i)
    lut.corrections[i] = take<double>(is, "correction");
  return lut;
}

void write_crb_csv(const std::string& path, const std::vector<CrbRow>& rows,
                   const std::string& header_comment) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "sweep-var,sketch-kind,M,bound-cm\n";
  os.precision(12);
  for (const auto& r : rows)
    os << r.sweep_var << "," << r.kind << "," << r.M << "," << r.bound_cm
       << "\n";
}

RunConfig RunConfig::parse_text(const std::string& text,
                                const std::set<std::string>& known_keys) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    auto a = s.find_first_not_of(" \t\r");
    auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (known_keys.find(key) == known_keys.end())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
    cfg.kv_[key] = val;
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path,
                                const std::set<std::string>& known_keys) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_text(ss.str(), known_keys);
}

bool RunConfig::has(const std::string& key) const {
  return kv_.find(key) != kv_.end();
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stod(it->second);
}

std::int64_t RunConfig::get_int(const std::string& key,
                                std::int64_t fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoll(it->second);
}

std::vector<double> RunConfig::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  std::istringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

}  // namespace splinesketch
