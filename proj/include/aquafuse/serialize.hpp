#pragma once

#include <filesystem>
#include <json.hpp>

#include "aquafuse/depth.hpp"
#include "aquafuse/metrics.hpp"
#include "aquafuse/waterbody.hpp"

namespace aquafuse {

inline constexpr const char* kSchema = "aquafuse/v1";

nlohmann::json to_json(const WaterbodyParams& params);
WaterbodyParams waterbody_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DepthCoeffs& coeffs);
DepthCoeffs depth_coeffs_from_json(const nlohmann::json& j);

/// PSNR of identical images is written as the string "infinite".
nlohmann::json to_json(const MetricReport& report);

/// Throws IoError on a missing or unparsable file.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace aquafuse
