#include "pedintent/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "pedintent/error.hpp"

namespace pedintent {

std::string_view to_string(FeatureSource source) {
  switch (source) {
    case FeatureSource::hog: return "hog";
    case FeatureSource::lbp: return "lbp";
    case FeatureSource::cnn: return "cnn";
  }
  return "?";
}

FeatureSource parse_feature_source(std::string_view text) {
  if (text == "hog") return FeatureSource::hog;
  if (text == "lbp") return FeatureSource::lbp;
  if (text == "cnn") return FeatureSource::cnn;
  throw UsageError("unknown feature source '" + std::string(text) + "'");
}

std::size_t descriptor_length(FeatureSource source) {
  switch (source) {
    case FeatureSource::hog: return 3600;
    case FeatureSource::lbp: return 59;
    case FeatureSource::cnn: return 4096;
  }
  return 0;
}

HogParams::HogParams(int cell, int block, int stride, int nbins)
    : cell_size(cell), block_size(block), block_stride(stride), bins(nbins) {
  if (cell <= 0 || block <= 0 || stride <= 0 || nbins <= 0) {
    throw UsageError("HOG parameters must be positive");
  }
}

std::size_t HogParams::length(int width, int height) const {
  const int cells_x = width / cell_size;
  const int cells_y = height / cell_size;
  if (cells_x < block_size || cells_y < block_size) return 0;
  const auto blocks_x = static_cast<std::size_t>((cells_x - block_size) / block_stride + 1);
  const auto blocks_y = static_cast<std::size_t>((cells_y - block_size) / block_stride + 1);
  return blocks_x * blocks_y * block_size * block_size * bins;
}

GrayImage to_gray(const RgbImage& rgb) {
  // Integer weights keep R=G=B pixels exact fixed points: 9999*v/(9999*255)
  // rounds to the same double as v/255.
  constexpr int wr = 2989, wg = 5870, wb = 1140;
  constexpr double denom = (wr + wg + wb) * 255.0;
  GrayImage out(rgb.width, rgb.height);
  for (int y = 0; y < rgb.height; ++y) {
    for (int x = 0; x < rgb.width; ++x) {
      const auto* p = rgb.at(x, y);
      out.at(x, y) = static_cast<double>(wr * p[0] + wg * p[1] + wb * p[2]) / denom;
    }
  }
  return out;
}

GrayImage resize(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1) throw UsageError("resize target must be at least 1x1");
  if (img.width < 1 || img.height < 1) throw DataError("cannot resize an empty image");
  GrayImage out(width, height);
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy_src = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy_src);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = fy_src - y0;
    for (int x = 0; x < width; ++x) {
      const double fx_src = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(fx_src);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = fx_src - x0;
      const double top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
      const double bottom = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
      out.at(x, y) = top + fy * (bottom - top);
    }
  }
  return out;
}

std::vector<double> hog(const GrayImage& img, const HogParams& params) {
  const int cell = params.cell_size;
  if (img.width % cell != 0 || img.height % cell != 0) {
    throw DataError("HOG input size must be a multiple of the cell size");
  }
  const int cells_x = img.width / cell;
  const int cells_y = img.height / cell;
  if (cells_x < params.block_size || cells_y < params.block_size) {
    throw DataError("HOG input smaller than one block");
  }
  const int bins = params.bins;
  const double bin_width = 180.0 / bins;

  std::vector<double> cells(static_cast<std::size_t>(cells_x) * cells_y * bins, 0.0);
  auto cell_hist = [&](int cx, int cy) { return &cells[(static_cast<std::size_t>(cy) * cells_x + cx) * bins]; };

  for (int y = 0; y < img.height; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, img.height - 1);
    const double pos_y = (y + 0.5) / cell - 0.5;
    const int cy0 = static_cast<int>(std::floor(pos_y));
    const double wy1 = pos_y - cy0;

    for (int x = 0; x < img.width; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, img.width - 1);
      const double gx = img.at(xp, y) - img.at(xm, y);
      const double gy = img.at(x, yp) - img.at(x, ym);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;

      double angle = std::atan2(gy, gx) * (180.0 / std::numbers::pi);
      if (angle < 0.0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;

      // bin centres sit at (k + 0.5) * bin_width; wrap 170 deg <-> 10 deg
      const double pos_b = angle / bin_width - 0.5;
      int b0 = static_cast<int>(std::floor(pos_b));
      const double wb1 = pos_b - b0;
      const int b1 = (b0 + 1) % bins;
      b0 = (b0 + bins) % bins;

      const double pos_x = (x + 0.5) / cell - 0.5;
      const int cx0 = static_cast<int>(std::floor(pos_x));
      const double wx1 = pos_x - cx0;

      for (int dy = 0; dy < 2; ++dy) {
        const int cy = cy0 + dy;
        if (cy < 0 || cy >= cells_y) continue;
        const double wy = dy ? wy1 : 1.0 - wy1;
        for (int dx = 0; dx < 2; ++dx) {
          const int cx = cx0 + dx;
          if (cx < 0 || cx >= cells_x) continue;
          const double w = mag * wy * (dx ? wx1 : 1.0 - wx1);
          double* h = cell_hist(cx, cy);
          h[b0] += w * (1.0 - wb1);
          h[b1] += w * wb1;
        }
      }
    }
  }

  constexpr double eps = 1e-10;
  const int bs = params.block_size;
  std::vector<double> out;
  out.reserve(params.length(img.width, img.height));
  std::vector<double> block(static_cast<std::size_t>(bs) * bs * bins);
  for (int by = 0; by + bs <= cells_y; by += params.block_stride) {
    for (int bx = 0; bx + bs <= cells_x; bx += params.block_stride) {
      std::size_t k = 0;
      double sq = 0.0;
      for (int cy = by; cy < by + bs; ++cy) {
        for (int cx = bx; cx < bx + bs; ++cx) {
          const double* h = cell_hist(cx, cy);
          for (int b = 0; b < bins; ++b, ++k) {
            block[k] = h[b];
            sq += h[b] * h[b];
          }
        }
      }
      const double norm = std::sqrt(sq + eps);
      for (double v : block) out.push_back(v / norm);
    }
  }
  return out;
}

int circular_transitions(std::uint8_t code) {
  const auto rotated = static_cast<std::uint8_t>((code >> 1) | (code << 7));
  return std::popcount(static_cast<std::uint8_t>(code ^ rotated));
}

const std::array<std::uint8_t, 256>& uniform_lbp_table() {
  static const auto table = [] {
    std::array<std::uint8_t, 256> t{};
    std::uint8_t next = 0;
    for (int code = 0; code < 256; ++code) {
      t[code] = circular_transitions(static_cast<std::uint8_t>(code)) <= 2 ? next++ : 0xff;
    }
    for (auto& bin : t) {
      if (bin == 0xff) bin = next;
    }
    return t;
  }();
  return table;
}

std::vector<double> lbp(const GrayImage& img, const LbpParams& params) {
  if (params.neighbors != 8) throw UsageError("only 8-neighbour LBP is supported");
  if (params.radius < 1) throw UsageError("LBP radius must be >= 1");
  const int r = params.radius;
  if (img.width < 2 * r + 1 || img.height < 2 * r + 1) {
    throw DataError("LBP input smaller than one neighbourhood");
  }

  struct Offset {
    double dx, dy;
  };
  std::array<Offset, 8> offsets{};
  for (int p = 0; p < 8; ++p) {
    const double theta = 2.0 * std::numbers::pi * p / 8.0;
    double dx = r * std::cos(theta);
    double dy = -r * std::sin(theta);  // counter-clockwise with y pointing down
    if (params.sampling == LbpSampling::nearest || std::abs(dx - std::round(dx)) < 1e-9) {
      dx = std::round(dx);
    }
    if (params.sampling == LbpSampling::nearest || std::abs(dy - std::round(dy)) < 1e-9) {
      dy = std::round(dy);
    }
    offsets[p] = {dx, dy};
  }

  auto sample = [&](double xs, double ys) {
    const int x0 = static_cast<int>(std::floor(xs));
    const int y0 = static_cast<int>(std::floor(ys));
    const double fx = xs - x0;
    const double fy = ys - y0;
    const double a = img.at(x0, y0);
    const double top = fx > 0.0 ? a + fx * (img.at(x0 + 1, y0) - a) : a;
    if (fy == 0.0) return top;
    const double c = img.at(x0, y0 + 1);
    const double bottom = fx > 0.0 ? c + fx * (img.at(x0 + 1, y0 + 1) - c) : c;
    return top + fy * (bottom - top);
  };

  const auto& table = uniform_lbp_table();
  std::vector<double> hist(static_cast<std::size_t>(params.bins()), 0.0);
  for (int y = r; y < img.height - r; ++y) {
    for (int x = r; x < img.width - r; ++x) {
      const double center = img.at(x, y);
      unsigned code = 0;
      for (int p = 0; p < 8; ++p) {
        if (sample(x + offsets[p].dx, y + offsets[p].dy) >= center) code |= 1u << p;
      }
      hist[table[code]] += 1.0;
    }
  }
  double sq = 0.0;
  for (double v : hist) sq += v * v;
  const double norm = std::sqrt(sq);
  for (double& v : hist) v /= norm;
  return hist;
}

}  // namespace pedintent
