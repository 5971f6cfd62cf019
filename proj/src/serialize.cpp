#include "aquafuse/serialize.hpp"

#include <cmath>
#include <fstream>

namespace aquafuse {
namespace {

using nlohmann::json;

Rgb rgb_from(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 3) {
    throw ParameterError(std::string("waterbody json: '") + key + "' must be an array of 3 numbers");
  }
  Rgb out{};
  for (std::size_t c = 0; c < 3; ++c) out[c] = j.at(key).at(c).get<double>();
  return out;
}

void check_schema(const json& j) {
  if (j.contains("schema") && j.at("schema") != kSchema) {
    throw ParameterError("unsupported schema '" + j.at("schema").dump() + "'");
  }
}

}  // namespace

json to_json(const WaterbodyParams& params) {
  json beta_d = json::array();
  for (const auto& channel : params.beta_d.mu) beta_d.push_back(channel);
  return {
      {"schema", kSchema},
      {"b_inf", params.backscatter.b_inf.rgb},
      {"beta_b", params.backscatter.beta_b},
      {"residual_j", params.backscatter.residual_j},
      {"residual_beta_d", params.backscatter.residual_beta_d},
      {"beta_d_mu", beta_d},
      {"warnings", params.warnings},
  };
}

WaterbodyParams waterbody_from_json(const json& j) {
  try {
    check_schema(j);
    WaterbodyParams params;
    params.backscatter.b_inf.rgb = rgb_from(j, "b_inf");
    params.background = params.backscatter.b_inf;
    params.backscatter.beta_b = rgb_from(j, "beta_b");
    params.backscatter.residual_j = j.contains("residual_j") ? rgb_from(j, "residual_j") : Rgb{};
    params.backscatter.residual_beta_d = j.contains("residual_beta_d") ? rgb_from(j, "residual_beta_d") : Rgb{};
    const json& mu = j.at("beta_d_mu");
    if (!mu.is_array() || mu.size() != 3) throw ParameterError("waterbody json: 'beta_d_mu' must be 3 x 4");
    for (std::size_t c = 0; c < 3; ++c) {
      if (mu.at(c).size() != 4) throw ParameterError("waterbody json: 'beta_d_mu' must be 3 x 4");
      for (std::size_t i = 0; i < 4; ++i) params.beta_d.mu[c][i] = mu.at(c).at(i).get<double>();
    }
    if (j.contains("warnings")) params.warnings = j.at("warnings").get<Warnings>();
    for (double v : params.backscatter.b_inf.rgb) {
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("waterbody json: b_inf outside [0, 1]");
    }
    return params;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("waterbody json: ") + e.what());
  }
}

json to_json(const DepthCoeffs& coeffs) { return {{"schema", kSchema}, {"mu", coeffs.mu}}; }

DepthCoeffs depth_coeffs_from_json(const json& j) {
  try {
    check_schema(j);
    const json& mu = j.at("mu");
    if (!mu.is_array() || mu.size() != 5) throw ParameterError("coeffs json: 'mu' must be an array of 5 numbers");
    DepthCoeffs coeffs;
    for (std::size_t i = 0; i < 5; ++i) coeffs.mu[i] = mu.at(i).get<double>();
    coeffs.validate();
    return coeffs;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("coeffs json: ") + e.what());
  }
}

json to_json(const MetricReport& report) {
  json j = {{"schema", kSchema}, {"ssim", report.ssim}};
  if (std::isinf(report.psnr_db)) {
    j["psnr_db"] = "infinite";
  } else {
    j["psnr_db"] = report.psnr_db;
  }
  if (report.depth_rmse) j["depth_rmse"] = *report.depth_rmse;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("file not found: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace aquafuse
