#pragma once

#include <map>
#include <string>
#include <vector>

#include "aggwind/config.hpp"
#include "aggwind/data.hpp"
#include "aggwind/dmap.hpp"
#include "aggwind/graph.hpp"
#include "aggwind/plot.hpp"

namespace aggwind {

/// Layout, data and derived settings shared by every study.
struct StudyContext {
  ExperimentConfig config;
  FarmLayout layout;
  DatasetWindow window;
  std::vector<LocalDataset> local;
  GridSpec grid;
  MapPrior prior;
  double cov_floor = 0.0;

  /// Loads or generates everything; ConfigError for missing files.
  static StudyContext load(const ExperimentConfig& config);

  ConsensusConfig consensus(int order, int rounds) const;
  /// Data owned by the farms in `members`.
  std::vector<LocalDataset> local_for(const std::vector<NodeId>& members) const;
};

/// Files to write, keyed by path relative to the output directory.
struct CommandOutput {
  std::map<std::string, std::string> files;
  std::vector<PlotSpec> plots;
};

CommandOutput cmd_coreness_table(const StudyContext& ctx);
CommandOutput cmd_keynode_groups(const StudyContext& ctx);
CommandOutput cmd_keynode_percentage(const StudyContext& ctx);
CommandOutput cmd_order_sweep(const StudyContext& ctx);
CommandOutput cmd_order_compare(const StudyContext& ctx);
CommandOutput cmd_marginal_compare(const StudyContext& ctx);
CommandOutput cmd_threshold_sweep(const StudyContext& ctx);
CommandOutput cmd_gen_data(const StudyContext& ctx);
CommandOutput cmd_graph_export(const StudyContext& ctx);

const std::vector<std::string>& subcommand_names();
/// Dispatches by name; InvalidArgument for unknown names.
CommandOutput run_subcommand(const std::string& name, const ExperimentConfig& config);

/// Writes the files, the effective config, the plot manifest and the SVGs.
void write_output(const CommandOutput& output, const ExperimentConfig& config);

/// (a - b) / a * 100.
double percent_decrease(double a, double b);

/// Key nodes at `percentage`, ties broken by the configured tiebreak.
std::vector<NodeId> choose_key_nodes(const StudyContext& ctx, const CommGraph& graph, double percentage);

}  // namespace aggwind
