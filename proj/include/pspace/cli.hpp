#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pspace/common.hpp"

namespace pspace::cli {

// Every knob of a pipeline run, with the method's standard constants as
// defaults. Each stage writes its resolved copy to `<out>/<stage>.config.json`,
// which `--config` accepts back.
struct RunConfig {
  std::string trade;
  std::string income;
  std::string meta;
  std::string regions;

  YearWindow window{1998, 2000};
  std::optional<std::pair<int, int>> compare;  // start and end snapshot years
  std::optional<int> income_year;              // defaults to window.last

  double rca_high = 1.0;
  double rca_low = 0.5;
  double overlay_phi = 0.55;
  double min_export = 0.0;  // drop countries with smaller pooled totals

  double phi0 = 0.55;
  std::vector<double> phi_grid;  // 0.4:0.05:0.8 unless set
  int iterations = 20;
  int top_n = 50;
  bool inclusive = true;

  std::vector<double> phi_thresholds{0.1, 0.2};
  std::vector<double> component_grid;  // 0:0.05:1 unless set
  double density_bin = 0.02;
  double curve_bin = 0.1;
  bool empty_baskets = true;

  std::vector<std::string> formats;    // graph / proximity output formats
  std::vector<std::string> countries;  // diffusion subset, all when empty
  std::string highlight;               // node rca flag source in graph exports
  std::string against;                 // second proximity table to correlate with

  std::uint64_t seed = 1;
  int synth_countries = 24;
  int synth_products = 60;

  std::string out;

  RunConfig();
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

// "0.4:0.05:0.8" (inclusive range) or "0.55,0.6,0.65".
std::vector<double> parse_grid(const std::string& text);

// Entry point shared by the `pspace` executable and the tests. `args`
// excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pspace::cli
