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

#include "h2r/depth_aug.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/random.h"
#include "h2r/text_io.h"

namespace h2r {
namespace {

void RequireSameShape(const DepthImage& a, const DepthImage& b) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionMismatch(fmt::format("image sizes differ: {}x{} vs {}x{}", a.width, a.height,
                                        b.width, b.height));
  }
}

std::vector<double> GaussianKernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

// Reads the next header token, collecting "# ..." comment lines on the way.
std::string NextPgmToken(std::istream& in, std::vector<std::string>& comments) {
  std::string token;
  int c = 0;
  while ((c = in.peek()) != EOF) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      comments.push_back(line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
    token.push_back(static_cast<char>(in.get()));
  }
  if (token.empty()) throw FormatError("truncated PGM header");
  return token;
}

}  // namespace

DepthImage DepthImage::Filled(int width, int height, double value, double max_depth) {
  DepthImage img;
  img.width = width;
  img.height = height;
  img.max_depth = max_depth;
  img.values.assign(static_cast<size_t>(std::max(0, width) * std::max(0, height)), value);
  return img;
}

void DepthImage::Validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("depth image must be non-empty");
  if (values.size() != static_cast<size_t>(width) * height) {
    throw ValidationError("depth image storage does not match its dimensions");
  }
  if (!(max_depth > 0.0) || !std::isfinite(max_depth)) {
    throw ValidationError("depth image max_depth must be positive");
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= max_depth)) {
      throw ValidationError(
          fmt::format("pixel {} value {} outside [0, {}]", i, values[i], max_depth));
    }
  }
}

void AugmentConfig::Validate() const {
  if (!(clip_distance >= clip_range_lower && clip_distance <= clip_range_upper)) {
    throw ValidationError(fmt::format("clip distance {} outside the task range [{}, {}]",
                                      clip_distance, clip_range_lower, clip_range_upper));
  }
  if (!(clip_distance > 0.0)) throw ValidationError("clip distance must be > 0");
  if (noise_sigma < 0.0 || blur_sigma < 0.0) throw ValidationError("sigmas must be >= 0");
  if (!(dropout_fraction >= 0.0 && dropout_fraction <= 1.0)) {
    throw ValidationError("dropout fraction must lie in [0, 1]");
  }
  if (!(mixup_alpha >= 0.0 && mixup_alpha <= 1.0)) {
    throw ValidationError("mixup alpha must lie in [0, 1]");
  }
}

DepthImage ClipDepth(const DepthImage& img, double d) {
  if (!(d > 0.0)) throw ValidationError("clip distance must be > 0");
  DepthImage out = img;
  for (double& v : out.values) v = std::min(v, d);
  out.max_depth = d;
  return out;
}

DepthImage FillMissing(const DepthImage& img) {
  DepthImage out = img;
  for (double& v : out.values) {
    if (v == 0.0) v = out.max_depth;
  }
  return out;
}

DepthImage AddGaussianNoise(const DepthImage& img, double sigma, uint64_t seed) {
  if (sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
  if (sigma == 0.0) return img;
  DepthImage out = img;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.values) v = std::clamp(v + noise(rng), 0.0, out.max_depth);
  return out;
}

DepthImage GaussianBlur(const DepthImage& img, double sigma) {
  if (sigma < 0.0) throw ValidationError("blur sigma must be >= 0");
  if (sigma == 0.0) return img;
  const std::vector<double> kernel = GaussianKernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = img.width;
  const int h = img.height;

  DepthImage tmp = img;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<size_t>(i + radius)] * img.at(std::clamp(x + i, 0, w - 1), y);
      }
      tmp.at(x, y) = acc;
    }
  }
  DepthImage out = img;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<size_t>(i + radius)] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      }
      // Rounding in the weighted sum can step a hair past the valid range.
      out.at(x, y) = std::clamp(acc, 0.0, out.max_depth);
    }
  }
  return out;
}

DepthImage DropoutToMax(const DepthImage& img, double fraction, uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("dropout fraction must lie in [0, 1]");
  }
  const size_t n = img.size();
  const auto count = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
  DepthImage out = img;
  if (count == 0) return out;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
    out.values[order[i]] = out.max_depth;
  }
  return out;
}

DepthImage Mixup(const DepthImage& sim, const DepthImage& dataset, double alpha) {
  RequireSameShape(sim, dataset);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("mixup alpha must lie in [0, 1]");
  if (alpha == 1.0) return sim;
  if (alpha == 0.0) return dataset;
  DepthImage out = sim;
  out.max_depth = std::max(sim.max_depth, dataset.max_depth);
  for (size_t i = 0; i < out.size(); ++i) {
    out.values[i] = alpha * sim.values[i] + (1.0 - alpha) * dataset.values[i];
  }
  return out;
}

DepthImage ToDisparity(const DepthImage& img) {
  DepthImage out = img;
  double largest = 0.0;
  for (size_t i = 0; i < out.size(); ++i) {
    if (img.values[i] == 0.0) {
      throw ZeroDepth(fmt::format("pixel {} has zero depth; fill and clip first", i));
    }
    out.values[i] = 1.0 / img.values[i];
    largest = std::max(largest, out.values[i]);
  }
  out.max_depth = largest;
  return out;
}

DepthImage SimPipeline(const DepthImage& img, const AugmentConfig& cfg,
                       const DepthImage* dataset) {
  cfg.Validate();
  DepthImage out = ClipDepth(img, cfg.clip_distance);
  out = GaussianBlur(out, cfg.blur_sigma);
  out = AddGaussianNoise(out, cfg.noise_sigma, DeriveSeed(cfg.seed, 1));
  out = DropoutToMax(out, cfg.dropout_fraction, DeriveSeed(cfg.seed, 2));
  if (dataset != nullptr && cfg.mixup_alpha < 1.0) {
    out = Mixup(out, ClipDepth(*dataset, cfg.clip_distance), cfg.mixup_alpha);
  }
  return out;
}

DepthImage RealPipeline(const DepthImage& img, double d) {
  // A missing reading means nothing returned within range, so it lands on
  // the clip plane even when the capture's own max_depth is nearer.
  DepthImage widened = img;
  widened.max_depth = std::max(img.max_depth, d);
  return ClipDepth(FillMissing(widened), d);
}

std::vector<double> Histogram(const DepthImage& img, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  if (!(img.max_depth > 0.0)) throw ValidationError("histogram needs max_depth > 0");
  std::vector<double> counts(static_cast<size_t>(bins), 0.0);
  for (double v : img.values) {
    auto b = static_cast<long long>(std::floor(v / img.max_depth * bins));
    b = std::clamp<long long>(b, 0, bins - 1);
    counts[static_cast<size_t>(b)] += 1.0;
  }
  const double n = static_cast<double>(img.size());
  for (double& c : counts) c /= n;
  return counts;
}

double KlDivergence(const std::vector<double>& p, const std::vector<double>& q, double epsilon) {
  if (p.size() != q.size()) throw DimensionMismatch("distributions have different bin counts");
  const double zp = std::accumulate(p.begin(), p.end(), 0.0) + epsilon * p.size();
  const double zq = std::accumulate(q.begin(), q.end(), 0.0) + epsilon * q.size();
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double pi = (p[i] + epsilon) / zp;
    const double qi = (q[i] + epsilon) / zq;
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

DepthImage ReadPgm(std::istream& in) {
  std::vector<std::string> comments;
  if (NextPgmToken(in, comments) != "P5") throw FormatError("not a binary PGM (P5)");
  const auto width = ParseInt(NextPgmToken(in, comments), "PGM width");
  const auto height = ParseInt(NextPgmToken(in, comments), "PGM height");
  const auto maxval = ParseInt(NextPgmToken(in, comments), "PGM maxval");
  if (width <= 0 || height <= 0) throw FormatError("PGM dimensions must be positive");
  if (maxval != 65535) throw FormatError("PGM maxval must be 65535");
  in.get();  // single whitespace before the raster

  double scale = 0.0;
  double max_depth = 0.0;
  for (const std::string& c : comments) {
    std::istringstream ss(c.substr(1));
    std::string key, unit;
    double value = 0.0;
    ss >> key >> unit >> value;
    if (key == "scale" && unit == "meters-per-unit" && ss) scale = value;
    if (key == "max-depth" && unit == "meters" && ss) max_depth = value;
  }
  if (!(scale > 0.0)) throw FormatError("PGM lacks '# scale meters-per-unit <value>'");
  if (!(max_depth > 0.0)) max_depth = 65535.0 * scale;

  DepthImage img = DepthImage::Filled(static_cast<int>(width), static_cast<int>(height), 0.0,
                                      max_depth);
  std::vector<unsigned char> raw(img.size() * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw FormatError("PGM raster is truncated");
  }
  for (size_t i = 0; i < img.size(); ++i) {
    const unsigned value = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
    img.values[i] = std::min(value * scale, max_depth);
  }
  return img;
}

void WritePgm(const DepthImage& img, std::ostream& out, double scale) {
  if (!(scale > 0.0)) throw FormatError("PGM scale must be positive");
  out << "P5\n# scale meters-per-unit " << FormatDouble(scale) << "\n# max-depth meters "
      << FormatDouble(img.max_depth) << '\n'
      << img.width << ' ' << img.height << "\n65535\n";
  std::vector<unsigned char> raw(img.size() * 2);
  for (size_t i = 0; i < img.size(); ++i) {
    const double units = std::clamp(std::round(img.values[i] / scale), 0.0, 65535.0);
    const auto value = static_cast<unsigned>(units);
    raw[2 * i] = static_cast<unsigned char>(value >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(value & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

DepthImage LoadPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  return ReadPgm(in);
}

void SavePgm(const DepthImage& img, const std::filesystem::path& path, double scale) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot write '{}'", path.string()));
  WritePgm(img, out, scale);
}

void WriteHistogramCsv(const std::vector<double>& proportions, double max_depth,
                       std::ostream& out) {
  out << "bin_center,proportion\n";
  const double width = max_depth / static_cast<double>(proportions.size());
  for (size_t i = 0; i < proportions.size(); ++i) {
    out << FormatDouble((static_cast<double>(i) + 0.5) * width) << ','
        << FormatDouble(proportions[i]) << '\n';
  }
}

}  // namespace h2r
