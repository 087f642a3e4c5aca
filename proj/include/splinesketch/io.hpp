#pragma once

#include "splinesketch/crb.hpp"
#include "splinesketch/model.hpp"
#include "splinesketch/rangewalk.hpp"
#include "splinesketch/sketch.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace splinesketch {

// --- Histogram cube -------------------------------------------------------------
//
// Binary layout: 16-byte header {magic "SPC1", u8 dtype (0 = u16, 1 = u32),
// 3 pad bytes, u32 H, u32 W} + u32 T, then row-major (H, W, T) little-endian
// counts.

struct HistogramCube {
  int H = 0, W = 0, T = 0;
  int dtype = 0;  // 0 = u16, 1 = u32
  std::vector<std::uint32_t> counts;

  std::uint32_t& at(int h, int w, int t) {
    return counts[(static_cast<std::size_t>(h) * W + w) * T + t];
  }
  std::uint32_t at(int h, int w, int t) const {
    return counts[(static_cast<std::size_t>(h) * W + w) * T + t];
  }
  std::uint64_t total_count() const;
};

void write_cube(const std::string& path, const HistogramCube& cube);
HistogramCube load_cube(const std::string& path);

// --- Photon stream --------------------------------------------------------------

void write_stream(const std::string& path, const PhotonStream& stream, int T);
PhotonStream load_stream(const std::string& path, int& T);

// --- Sketch records -------------------------------------------------------------
//
// One record per pixel: {tag u8 (0 spline, 1 fourier), p-or-m u8, M u16,
// T u32, n u32, values: M little-endian f64}. Fixed-point records (tag 2)
// additionally carry b and the raw u64 accumulators.

void write_sketches(const std::string& path,
                    const std::vector<SketchVector>& sketches);
std::vector<SketchVector> load_sketches(const std::string& path);

void write_fixed_point_sketch(const std::string& path,
                              const FixedPointSketch& fp);
FixedPointSketch load_fixed_point_sketch(const std::string& path);

// --- Range-walk LUT ---------------------------------------------------------------

void write_lut(const std::string& path, const RangeWalkLut& lut);
RangeWalkLut load_lut(const std::string& path);

// --- CSV ---------------------------------------------------------------------------

void write_crb_csv(const std::string& path, const std::vector<CrbRow>& rows,
                   const std::string& header_comment = "");

// --- Run configuration ---------------------------------------------------------------
//
// Flat key=value text files; '#' starts a comment; unknown keys are rejected.

class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path,
                              const std::set<std::string>& known_keys);
  static RunConfig parse_text(const std::string& text,
                              const std::set<std::string>& known_keys);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace splinesketch
