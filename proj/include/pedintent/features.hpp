#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pedintent/image.hpp"

namespace pedintent {

enum class FeatureSource { hog, lbp, cnn };

std::string_view to_string(FeatureSource source);
FeatureSource parse_feature_source(std::string_view text);

/// Expected descriptor length per source (220x220 crops for HOG).
std::size_t descriptor_length(FeatureSource source);

struct FeatureVector {
  std::string sample_id;
  FeatureSource source = FeatureSource::hog;
  std::vector<double> values;
};

struct HogParams {
  int cell_size = 20;
  int block_size = 2;   // cells per block side
  int block_stride = 1; // cells
  int bins = 9;

  HogParams() = default;
  HogParams(int cell, int block, int stride, int nbins);

  /// Descriptor length for an image of the given size.
  std::size_t length(int width, int height) const;
};

enum class LbpSampling {
  nearest,  // neighbours rounded to the 3x3 grid; order-statistic only
  bilinear, // diagonal neighbours interpolated on the unit circle
};

struct LbpParams {
  int neighbors = 8;
  int radius = 1;
  LbpSampling sampling = LbpSampling::nearest;

  int bins() const { return neighbors * (neighbors - 1) + 3; }
};

/// Luma conversion with the rgb2gray weights renormalised to sum to one.
GrayImage to_gray(const RgbImage& rgb);

/// Bilinear resampling on pixel centres with clamped edges.
GrayImage resize(const GrayImage& img, int width, int height);

/// Unsigned-gradient HOG with block L2 normalisation; see HogParams.
std::vector<double> hog(const GrayImage& img, const HogParams& params = {});

/// 59-bin uniform LBP histogram, L2 normalised.
std::vector<double> lbp(const GrayImage& img, const LbpParams& params = {});

/// Number of 0<->1 transitions in the circular 8-bit pattern.
int circular_transitions(std::uint8_t code);

/// Bin index for every 8-bit code: uniform codes get 0..57 in ascending
/// code order, everything else 58.
const std::array<std::uint8_t, 256>& uniform_lbp_table();

}  // namespace pedintent
