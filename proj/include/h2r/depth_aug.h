// Copyright 2026 The h2r Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef H2R_DEPTH_AUG_H_
#define H2R_DEPTH_AUG_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace h2r {

/// Row-major metric depth grid. Missing measurements are encoded as 0.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  double max_depth = 0.0;

  static DepthImage Filled(int width, int height, double value, double max_depth);

  double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return values.size(); }

  /// Dimensions positive, storage consistent, every value in [0, max_depth].
  void Validate() const;
};

struct AugmentConfig {
  double clip_distance = 1.0;  // d, metres
  double clip_range_lower = 0.9;
  double clip_range_upper = 1.1;
  double noise_sigma = 0.0;    // metres
  double blur_sigma = 0.0;     // pixels
  double dropout_fraction = 0.005;
  double mixup_alpha = 1.0;    // weight of the simulated image
  uint64_t seed = 0;

  void Validate() const;
};

/// Values above d become d; max_depth becomes d.
DepthImage ClipDepth(const DepthImage& img, double d);

/// Zeros become max_depth.
DepthImage FillMissing(const DepthImage& img);

/// Adds N(0, sigma^2) per pixel, then clamps to [0, max_depth].
DepthImage AddGaussianNoise(const DepthImage& img, double sigma, uint64_t seed);

/// Separable Gaussian, radius ceil(3 sigma), clamp-to-edge borders.
DepthImage GaussianBlur(const DepthImage& img, double sigma);

/// Sets exactly round(fraction * W * H) distinct pixels to max_depth.
DepthImage DropoutToMax(const DepthImage& img, double fraction, uint64_t seed);

/// alpha * sim + (1 - alpha) * dataset. Throws DimensionMismatch.
DepthImage Mixup(const DepthImage& sim, const DepthImage& dataset, double alpha);

/// Per-pixel reciprocal; max_depth becomes the largest output value.
/// Throws ZeroDepth.
DepthImage ToDisparity(const DepthImage& img);

/// clip -> blur -> noise -> dropout -> mixup (only when a dataset image is
/// given and alpha < 1).
DepthImage SimPipeline(const DepthImage& img, const AugmentConfig& cfg,
                       const DepthImage* dataset = nullptr);

/// fill_missing then clip(d); missing pixels end up exactly at d.
DepthImage RealPipeline(const DepthImage& img, double d);

/// Proportions over `bins` equal-width bins spanning [0, max_depth].
std::vector<double> Histogram(const DepthImage& img, int bins);

/// KL(p || q) with both inputs smoothed by `epsilon` and renormalized.
double KlDivergence(const std::vector<double>& p, const std::vector<double>& q,
                    double epsilon = 1e-6);

// 16-bit binary PGM (P5, maxval 65535, big-endian). The header carries
// "# scale meters-per-unit <s>" and "# max-depth meters <m>" comment lines.
inline constexpr double kDefaultPgmScale = 1e-4;
DepthImage ReadPgm(std::istream& in);
void WritePgm(const DepthImage& img, std::ostream& out, double scale = kDefaultPgmScale);
DepthImage LoadPgm(const std::filesystem::path& path);
void SavePgm(const DepthImage& img, const std::filesystem::path& path,
             double scale = kDefaultPgmScale);

/// Two columns: bin_center, proportion.
void WriteHistogramCsv(const std::vector<double>& proportions, double max_depth,
                       std::ostream& out);

}  // namespace h2r

#endif  // H2R_DEPTH_AUG_H_
