#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pedintent/learners.hpp"

namespace pedintent {

// Little-endian container: kind magic ("PKNN", "PSVM", "PMLP", "PCRT"),
// version u32, dimensions, standardiser, then the model's f64 arrays.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const TrainedModel& model);
TrainedModel decode_model(const std::vector<std::uint8_t>& bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace pedintent
