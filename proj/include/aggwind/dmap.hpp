#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "aggwind/data.hpp"
#include "aggwind/gmm.hpp"
#include "aggwind/graph.hpp"

namespace aggwind {

enum class VnMode {
  kParticipant,  ///< the virtual node averages like any other node, holding zero data
  kReadout,      ///< farms reach consensus alone; the virtual node reads its key nodes each iteration
};

struct ConsensusConfig {
  int rounds_per_iteration = 5;
  int em_iterations = 100;
  int order = 20;
  MapPrior prior;
  std::uint64_t seed = 42;
  /// Eigenvalue floor shared by every node; non-positive derives it from the bootstrap sample.
  double cov_floor = 0.0;
  /// Points each farm contributes to the shared initialization sample.
  int bootstrap_per_node = 10;
  VnMode vn_mode = VnMode::kParticipant;

  void validate() const;
};

using NodeVectors = std::map<NodeId, Eigen::VectorXd>;

/// `rounds` applications of the Metropolis weight matrix.
NodeVectors consensus_average(const CommGraph& graph, const NodeVectors& values, int rounds);
NodeVectors consensus_average(const WeightMatrix& weights, const NodeVectors& values, int rounds);

/// First k points of every farm (owner order), k = max(per_node, ceil(order / farms with data)).
Samples bootstrap_sample(const std::vector<LocalDataset>& data, int order, int per_node);

/// Initial mixture every node starts from.
GmmParams shared_initialization(const std::vector<LocalDataset>& data, const ConsensusConfig& config);

struct DmapResult {
  std::map<NodeId, GmmParams> params;
  GmmParams initial;
  Samples bootstrap;
  double cov_floor = 0.0;
};

DmapResult run_dmap(const CommGraph& graph, const std::vector<LocalDataset>& data, const ConsensusConfig& config);

/// Centralized MAP fit on the pooled data, started from the same shared
/// initialization and run for the same number of updates as run_dmap.
FitResult centralized_benchmark(const std::vector<LocalDataset>& data, const ConsensusConfig& config);

std::map<NodeId, double> per_node_rmse(const std::map<NodeId, GmmParams>& node_params, const GmmParams& benchmark,
                                       const GridSpec& grid);

}  // namespace aggwind
