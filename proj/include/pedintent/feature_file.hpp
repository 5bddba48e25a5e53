#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pedintent/features.hpp"

namespace pedintent {

// Binary little-endian descriptor container shared with the CNN exporter:
//   "CNNF" | version u32 = 1 | record count u64 | dimension u32
//   per record: id length u16 | id bytes (UTF-8) | dimension x f32
inline constexpr std::uint32_t kFeatureFileVersion = 1;

struct FeatureRecord {
  std::string id;
  std::vector<float> values;
};

struct FeatureFile {
  std::uint32_t dimension = 0;
  std::vector<FeatureRecord> records;
};

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file);
FeatureFile decode_feature_file(const std::vector<std::uint8_t>& bytes, std::string_view source);

void write_feature_file(const FeatureFile& file, const std::filesystem::path& path);

/// Validates header, unique ids and finite values; when `expected_dimension`
/// is set the header dimension must match it.
FeatureFile read_feature_file(const std::filesystem::path& path,
                              std::optional<std::uint32_t> expected_dimension = std::nullopt);

/// 4096-dimensional CNN activations keyed by sample id.
std::map<std::string, FeatureVector> load_cnn_features(const std::filesystem::path& path);

}  // namespace pedintent
