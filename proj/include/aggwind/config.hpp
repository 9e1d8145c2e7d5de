#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aggwind {

/// Every knob of the experiment harness. Config files are flat `key = value`
/// lines; `#` starts a comment. Lists are comma separated, groups are
/// separated by `;` (e.g. `groups = 2 4 5; 8 6 3`).
struct ExperimentConfig {
  std::string layout = "builtin";     ///< `builtin` or a layout CSV path
  std::string data = "generate";      ///< `generate` or a data CSV path
  std::uint64_t seed = 42;
  int samples_per_day = 96;
  std::string partitioning = "round_robin";  ///< round_robin | sorted

  double threshold_km = 4.0;
  std::vector<double> thresholds = {3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5};

  int order = 3;
  int order_min = 1;
  int order_max = 30;
  int order_a = 23;
  int order_b = 20;
  int em_order = 23;  ///< centralized EM order in marginal-compare

  double key_percentage = 0.3;
  std::vector<double> percentages = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::vector<int>> groups = {{2, 4, 5}, {2, 5, 7}, {1, 3, 10}, {1, 6, 3}, {8, 6, 3}};
  std::string tiebreak = "degree";  ///< degree | rmse

  int rounds = 5;
  int threshold_rounds = 20;
  int em_iterations = 100;
  int bootstrap_per_node = 10;
  std::string vn_mode = "participant";  ///< participant | readout
  bool attach_vn = true;                ///< graph-export only

  int central_max_iters = 300;
  double central_tol = 1e-6;

  int grid_cells = 100;
  double grid_margin = 0.05;

  std::string out = "out";

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Applies one `key = value` assignment; ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Every key with its effective value; parse_config(config_to_text(c)) == c.
std::string config_to_text(const ExperimentConfig& config);

}  // namespace aggwind
