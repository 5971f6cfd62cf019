#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <optional>
#include <ostream>
#include <thread>
#include <variant>

#include "aquafuse/cli.hpp"
#include "aquafuse/metrics.hpp"
#include "aquafuse/parallel.hpp"
#include "aquafuse/serialize.hpp"

namespace aquafuse::cli {
namespace {

using nlohmann::json;

struct Manifest {
  std::vector<fs::path> inputs;
  std::vector<fs::path> references;
  GlobalOptions options;
  fs::path output_dir;
  bool emit_depth = false;
  bool emit_params = false;
};

fs::path resolve(const fs::path& base, const std::string& entry) {
  const fs::path p(entry);
  return p.is_absolute() ? p : base / p;
}

Manifest parse_manifest(const fs::path& path, const GlobalOptions& globals) {
  const json j = read_json_file(path);
  const fs::path base = path.parent_path();
  Manifest m;
  m.options = globals;
  try {
    if (j.contains("schema") && j.at("schema") != kSchema) throw ParameterError("manifest: unsupported schema");
    for (const auto& entry : j.at("inputs")) m.inputs.push_back(resolve(base, entry.get<std::string>()));
    for (const auto& entry : j.at("references")) m.references.push_back(resolve(base, entry.get<std::string>()));
    m.output_dir = resolve(base, j.at("output_dir").get<std::string>());
    m.emit_depth = j.value("emit_depth", false);
    m.emit_params = j.value("emit_params", false);
    if (j.contains("config")) {
      const json& c = j.at("config");
      m.options.alpha = c.value("alpha", m.options.alpha);
      m.options.theta_deg = c.value("theta_deg", m.options.theta_deg);
      const std::string clamp = c.value("clamp", std::string("clip"));
      if (clamp != "clip" && clamp != "rescale") throw ParameterError("manifest: clamp must be clip or rescale");
      m.options.clamp = clamp == "rescale" ? ClampMode::rescale : ClampMode::clip;
      if (c.contains("coeffs")) m.options.coeffs = resolve(base, c.at("coeffs").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw IoError("manifest " + path.string() + ": " + e.what());
  }
  for (const auto& p : m.inputs) {
    if (!fs::exists(p)) throw IoError("manifest input not found: " + p.string());
  }
  for (const auto& p : m.references) {
    if (!fs::exists(p)) throw IoError("manifest reference not found: " + p.string());
  }
  return m;
}

/// Runs task(i) for i in [0, n) on a bounded pool of threads. Each worker
/// keeps OpenMP to a single thread when more than one worker runs.
template <class Task>
void run_pool(std::size_t n, int jobs, Task task) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, jobs > 0 ? static_cast<std::size_t>(jobs)
                                                                 : std::max(1u, std::thread::hardware_concurrency())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    const ThreadLimit limit(workers > 1 ? 1 : max_threads());
    for (std::size_t i = next++; i < n; i = next++) task(i);
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
}

using Outcome = std::variant<SceneEstimate, std::string>;
using RefOutcome = std::variant<WaterbodyParams, std::string>;

}  // namespace

int cmd_augment(const GlobalOptions& globals, const fs::path& manifest_path, Console console) {
  Manifest m;
  DepthCoeffs coeffs;
  FusionConfig config;
  try {
    m = parse_manifest(manifest_path, globals);
    coeffs = load_coeffs(m.options);
    config = m.options.fusion();
    fs::create_directories(m.output_dir);
  } catch (const std::exception& e) {
    console.err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  }

  std::vector<Outcome> inputs(m.inputs.size(), std::string());
  run_pool(m.inputs.size(), m.options.jobs, [&](std::size_t i) {
    try {
      const Image image = io::read_image(m.inputs[i], m.options.encoding());
      SceneEstimate scene = estimate_waterbody(image, coeffs, m.options.estimation());
      const std::string stem = m.inputs[i].stem().string();
      if (m.emit_depth) io::write_pfm(m.output_dir / (stem + ".depth.pfm"), scene.depth);
      if (m.emit_params) write_json_file(m.output_dir / (stem + ".waterbody.json"), to_json(scene.params));
      inputs[i] = std::move(scene);
    } catch (const std::exception& e) {
      inputs[i] = std::string(e.what());
    }
  });

  std::vector<RefOutcome> references(m.references.size(), std::string());
  run_pool(m.references.size(), m.options.jobs, [&](std::size_t r) {
    try {
      references[r] = load_reference(m.options, m.references[r], coeffs);
      if (m.emit_params && m.references[r].extension() != ".json") {
        write_json_file(m.output_dir / (m.references[r].stem().string() + ".waterbody.json"),
                        to_json(std::get<WaterbodyParams>(references[r])));
      }
    } catch (const std::exception& e) {
      references[r] = std::string(e.what());
    }
  });

  const std::size_t pairs = m.inputs.size() * m.references.size();
  std::vector<json> records(pairs);
  std::vector<char> failed(pairs, 0);
  run_pool(pairs, m.options.jobs, [&](std::size_t p) {
    const std::size_t i = p / m.references.size();
    const std::size_t r = p % m.references.size();
    const auto start = std::chrono::steady_clock::now();
    json record = {{"input", m.inputs[i].string()}, {"reference", m.references[r].string()}};
    try {
      if (const auto* error = std::get_if<std::string>(&inputs[i])) throw Error("input: " + *error);
      if (const auto* error = std::get_if<std::string>(&references[r])) throw Error("reference: " + *error);
      const auto& scene = std::get<SceneEstimate>(inputs[i]);
      const auto& ref = std::get<WaterbodyParams>(references[r]);
      const Image fused = fuse(scene, ref, config);
      const fs::path out = m.output_dir / pair_output_name(m.inputs[i], m.references[r]);
      io::write_image(out, fused, m.options.encoding());
      Warnings warnings = scene.params.warnings;
      warnings.insert(warnings.end(), ref.warnings.begin(), ref.warnings.end());
      record["output"] = out.string();
      record["warnings"] = warnings;
      record["metrics"] = to_json(compare(fused, scene.image));
    } catch (const std::exception& e) {
      failed[p] = 1;
      record["error"] = e.what();
    }
    record["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    records[p] = std::move(record);
  });

  std::ranges::stable_sort(records, [](const json& a, const json& b) {
    return std::tie(a.at("input").get_ref<const std::string&>(), a.at("reference").get_ref<const std::string&>()) <
           std::tie(b.at("input").get_ref<const std::string&>(), b.at("reference").get_ref<const std::string&>());
  });
  const auto failures = static_cast<std::size_t>(std::ranges::count(failed, 1));
  const json run_record = {{"schema", kSchema},
                           {"outputs", pairs - failures},
                           {"failures", failures},
                           {"records", records}};
  try {
    write_json_file(m.output_dir / "run_record.json", run_record);
  } catch (const std::exception& e) {
    console.err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  }
  console.out << "augment: " << (pairs - failures) << " outputs, " << failures << " failures\n";
  return failures > 0 ? kPartialFailure : kOk;
}

}  // namespace aquafuse::cli
