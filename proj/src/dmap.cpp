#include "aggwind/dmap.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aggwind/errors.hpp"

namespace aggwind {

void ConsensusConfig::validate() const {
  if (rounds_per_iteration < 1) throw InvalidArgument("rounds_per_iteration must be at least 1");
  if (em_iterations < 1) throw InvalidArgument("em_iterations must be at least 1");
  if (order < 1) throw InvalidArgument("order must be at least 1");
  if (bootstrap_per_node < 1) throw InvalidArgument("bootstrap_per_node must be at least 1");
}

NodeVectors consensus_average(const WeightMatrix& weights, const NodeVectors& values, int rounds) {
  if (rounds < 0) throw InvalidArgument("rounds must be nonnegative");
  const auto n = static_cast<Eigen::Index>(weights.order.size());
  if (static_cast<Eigen::Index>(values.size()) != n) throw InvalidArgument("need one vector per node");
  const Eigen::Index len = values.begin()->second.size();
  Eigen::MatrixXd state(n, len);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto it = values.find(weights.order[static_cast<std::size_t>(i)]);
    if (it == values.end()) throw InvalidArgument("missing value for a node");
    if (it->second.size() != len) throw InvalidArgument("all node vectors must have the same length");
    state.row(i) = it->second.transpose();
  }
  for (int r = 0; r < rounds; ++r) state = (weights.weights * state).eval();
  NodeVectors out;
  for (Eigen::Index i = 0; i < n; ++i) out[weights.order[static_cast<std::size_t>(i)]] = state.row(i).transpose();
  return out;
}

NodeVectors consensus_average(const CommGraph& graph, const NodeVectors& values, int rounds) {
  return consensus_average(metropolis_weights(graph), values, rounds);
}

Samples bootstrap_sample(const std::vector<LocalDataset>& data, int order, int per_node) {
  std::vector<const LocalDataset*> sorted;
  for (const auto& ds : data) {
    if (ds.samples.cols() > 0) sorted.push_back(&ds);
  }
  if (sorted.empty()) throw InvalidArgument("no farm holds any samples");
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->owner < b->owner; });
  const auto farms = static_cast<int>(sorted.size());
  const int k = std::max(per_node, (order + farms - 1) / farms);
  Eigen::Index total = 0;
  for (const auto* ds : sorted) total += std::min<Eigen::Index>(k, ds->samples.cols());
  Samples out(sorted.front()->samples.rows(), total);
  Eigen::Index at = 0;
  for (const auto* ds : sorted) {
    const Eigen::Index take = std::min<Eigen::Index>(k, ds->samples.cols());
    out.middleCols(at, take) = ds->samples.leftCols(take);
    at += take;
  }
  return out;
}

GmmParams shared_initialization(const std::vector<LocalDataset>& data, const ConsensusConfig& config) {
  return initialize_params(bootstrap_sample(data, config.order, config.bootstrap_per_node), config.order,
                           config.seed);
}

namespace {

double resolve_floor(const ConsensusConfig& config, const Samples& bootstrap) {
  return config.cov_floor > 0.0 ? config.cov_floor : default_cov_floor(bootstrap);
}

}  // namespace

DmapResult run_dmap(const CommGraph& graph, const std::vector<LocalDataset>& data, const ConsensusConfig& config) {
  config.validate();
  if (!is_connected(graph)) throw InvalidArgument("distributed estimation needs a connected graph");

  std::map<NodeId, const Samples*> local;
  for (const auto& ds : data) {
    if (ds.owner.is_virtual()) throw InvalidArgument("the virtual node cannot own samples");
    if (!graph.contains(ds.owner)) throw InvalidArgument("dataset owner " + to_string(ds.owner) + " not in graph");
    if (!local.emplace(ds.owner, &ds.samples).second) throw InvalidArgument("duplicate dataset owner");
  }
  for (const NodeId id : graph.farm_ids()) {
    if (!local.count(id)) throw InvalidArgument("farm " + to_string(id) + " has no dataset");
  }

  DmapResult result;
  result.bootstrap = bootstrap_sample(data, config.order, config.bootstrap_per_node);
  result.initial = initialize_params(result.bootstrap, config.order, config.seed);
  result.cov_floor = resolve_floor(config, result.bootstrap);
  const int dim = result.initial.dim();
  config.prior.validate(dim);
  for (auto& cov : result.initial.covariances) cov = floor_covariance(cov, result.cov_floor);

  const bool readout = graph.has_vn() && config.vn_mode == VnMode::kReadout;
  const CommGraph consensus_graph = readout ? induced_subgraph(graph, graph.farm_ids()) : graph;
  if (!is_connected(consensus_graph)) throw InvalidArgument("farm graph is disconnected without the virtual node");
  const WeightMatrix weights = metropolis_weights(consensus_graph);
  const auto participants = static_cast<double>(weights.order.size());

  std::map<NodeId, GmmParams>& params = result.params;
  for (const NodeId id : graph.node_ids()) params[id] = result.initial;
  const Eigen::VectorXd zero_stats = Eigen::VectorXd::Zero(SufficientStats::flat_size(config.order, dim));

  for (int it = 0; it < config.em_iterations; ++it) {
    NodeVectors flat;
    for (const NodeId id : weights.order) {
      const Samples* samples = id.is_virtual() ? nullptr : local.at(id);
      flat[id] = (samples && samples->cols() > 0) ? expectation_step(params[id], *samples).stats.flatten()
                                                  : zero_stats;
    }
    const NodeVectors averaged = consensus_average(weights, flat, config.rounds_per_iteration);
    std::map<NodeId, GmmParams> next;
    std::map<NodeId, SufficientStats> totals;
    for (const auto& [id, avg] : averaged) {
      SufficientStats stats = SufficientStats::unflatten(avg * participants, config.order, dim);
      GmmParams updated = map_update(stats, config.prior, result.cov_floor);
      reseed_components(updated, starved_components(stats), result.bootstrap, params[id], result.cov_floor);
      next[id] = std::move(updated);
      if (readout) totals.emplace(id, std::move(stats));
    }
    if (readout) {
      SufficientStats sum = SufficientStats::zero(config.order, dim);
      for (const NodeId key : graph.vn_neighbors()) sum += totals.at(key);
      const SufficientStats mean = sum.scaled(1.0 / static_cast<double>(graph.vn_neighbors().size()));
      GmmParams updated = map_update(mean, config.prior, result.cov_floor);
      reseed_components(updated, starved_components(mean), result.bootstrap, params[kVirtualNode],
                        result.cov_floor);
      next[kVirtualNode] = std::move(updated);
    }
    params = std::move(next);
  }
  return result;
}

FitResult centralized_benchmark(const std::vector<LocalDataset>& data, const ConsensusConfig& config) {
  config.validate();
  FitConfig fit;
  fit.max_iters = config.em_iterations;
  fit.tol = 0.0;
  const Samples bootstrap = bootstrap_sample(data, config.order, config.bootstrap_per_node);
  fit.cov_floor = resolve_floor(config, bootstrap);
  fit.reseed_pool = bootstrap;
  return map_fit(pool(data), initialize_params(bootstrap, config.order, config.seed), config.prior, fit);
}

std::map<NodeId, double> per_node_rmse(const std::map<NodeId, GmmParams>& node_params, const GmmParams& benchmark,
                                       const GridSpec& grid) {
  const DensityGrid reference = density_grid(benchmark, grid.x_edges, grid.y_edges);
  std::map<NodeId, double> out;
  for (const auto& [id, p] : node_params) {
    out[id] = rmse_between_grids(density_grid(p, grid.x_edges, grid.y_edges), reference);
  }
  return out;
}

}  // namespace aggwind
