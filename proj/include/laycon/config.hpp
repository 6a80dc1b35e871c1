#pragma once

// Run configuration: a JSON document overlaid on a built-in scenario preset.
//
// The preset doubles as the schema. Every key in the user document must
// exist in the preset, and values must keep the preset's type. Syntax and
// validation errors carry file:line:column.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "laycon/iss_cert.hpp"
#include "laycon/sim.hpp"

namespace laycon::config {

struct IssSettings {
  double m = 2.94;
  iss::SettlingMode settling_mode = iss::SettlingMode::kRelative;
  std::optional<double> v_bar_h_override;
  double r_low = 1.0;
  double feedforward_residual = 0.0;
  double r_bar_v = 0.0;
};

struct LipschitzSettings {
  std::optional<double> l_v;  // given value; estimated when absent
  int samples = 200;
  double radius = 2.0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::string base;  // preset the document overlays: "a" or "b"
  sim::LayeredConfig layered;
  IssSettings iss;
  LipschitzSettings lipschitz;
  std::vector<double> reference_grid;  // voltage references for the admissibility infimum
};

/// The preset for scenario "a" or "b". Throws ConfigError for other names.
nlohmann::ordered_json preset(const std::string& base);

/// Parses `text` (named `origin` in messages), overlays it on the preset
/// selected by `scenario` or, when that is empty, by the document's "base"
/// key (default "b"), and converts the result. Throws ConfigError.
RunConfig parse_config(std::string_view text, const std::string& origin,
                       const std::string& scenario = "");

/// Reads and parses a file. Throws ConfigError when unreadable.
RunConfig load_config(const std::string& path, const std::string& scenario = "");

/// The preset for a scenario with no overlay.
RunConfig scenario_config(const std::string& base);

}  // namespace laycon::config
