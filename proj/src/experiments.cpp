#include "aggwind/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>

#include "aggwind/errors.hpp"
#include "aggwind/table.hpp"
#include "aggwind/text.hpp"

namespace aggwind {

namespace {

std::string fmt(double v) { return text::format_double(v); }

std::string join_ids(const std::vector<NodeId>& ids) {
  std::vector<std::string> parts;
  for (const NodeId id : ids) parts.push_back(std::to_string(id.value));
  return text::join(parts, ";");
}

const char* axis_name(int axis) { return axis == 0 ? "awo" : "fwo"; }

void require_connected(const CommGraph& graph, double threshold_km) {
  if (!is_connected(graph)) {
    throw ConfigError("communication graph is disconnected at threshold " + fmt(threshold_km) + " km");
  }
}

std::vector<NodeId> group_nodes(const StudyContext& ctx, const std::vector<int>& group) {
  std::vector<NodeId> out;
  std::set<int> seen;
  for (const int id : group) {
    if (!seen.insert(id).second) throw ConfigError("key-node group lists node " + std::to_string(id) + " twice");
    if (id < 1 || static_cast<std::size_t>(id) > ctx.layout.size()) {
      throw ConfigError("key-node group names unknown node " + std::to_string(id));
    }
    out.push_back(NodeId{id});
  }
  return out;
}

DensityGrid grid_of(const GmmParams& params, const GridSpec& grid) {
  return density_grid(params, grid.x_edges, grid.y_edges);
}

GmmParams benchmark(const StudyContext& ctx, const ConsensusConfig& cfg) {
  return centralized_benchmark(ctx.local, cfg).params;
}

FitConfig central_fit_config(const StudyContext& ctx) {
  FitConfig fc;
  fc.max_iters = ctx.config.central_max_iters;
  fc.tol = ctx.config.central_tol;
  fc.cov_floor = ctx.cov_floor;
  return fc;
}

/// DMAP estimate held by the virtual node attached to `keys`.
GmmParams vn_estimate(const StudyContext& ctx, const CommGraph& graph, const std::vector<NodeId>& keys,
                      const ConsensusConfig& cfg) {
  return run_dmap(attach_virtual_node(graph, keys), ctx.local, cfg).params.at(kVirtualNode);
}

CommGraph study_graph(const StudyContext& ctx) {
  CommGraph graph = build_threshold_graph(ctx.layout, ctx.config.threshold_km);
  require_connected(graph, ctx.config.threshold_km);
  return graph;
}

PlotSpec plot(std::string stem, std::string csv, PlotKind kind, std::string x, std::vector<std::string> ys,
              std::string title) {
  return PlotSpec{std::move(stem) + ".svg", std::move(csv), kind, std::move(x), std::move(ys), std::move(title)};
}

}  // namespace

StudyContext StudyContext::load(const ExperimentConfig& config) {
  config.validate();
  auto require_file = [](const std::string& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("file not found: " + path);
  };
  StudyContext ctx{config, builtin_layout(), {}, {}, {}, {}, 0.0};
  if (config.layout != "builtin") {
    require_file(config.layout);
    ctx.layout = load_layout_csv(config.layout);
  }
  const int farms = static_cast<int>(ctx.layout.size());
  const Partitioning partitioning =
      config.partitioning == "sorted" ? Partitioning::kSorted : Partitioning::kRoundRobin;
  if (config.data == "generate") {
    GroundTruth truth = GroundTruth::builtin(config.seed);
    truth.samples_per_day = config.samples_per_day;
    GeneratedData gen = generate(truth, farms, partitioning);
    ctx.window = std::move(gen.window);
    ctx.local = std::move(gen.local);
  } else {
    require_file(config.data);
    ctx.window = load_csv(config.data);
    ctx.local = partition(ctx.window.train, farms, partitioning);
  }
  for (Eigen::Index axis = 0; axis < ctx.window.train.rows(); ++axis) {
    const auto row = ctx.window.train.row(axis);
    if (!std::isfinite(row.maxCoeff() - row.minCoeff()) || !std::isfinite(row.squaredNorm())) {
      throw NumericError("training data range is not representable");
    }
  }
  ctx.grid = GridSpec::covering(ctx.window.train, config.grid_cells, config.grid_margin);
  ctx.prior = MapPrior::defaults_for(ctx.window.train);
  ctx.cov_floor = default_cov_floor(ctx.window.train);
  return ctx;
}

ConsensusConfig StudyContext::consensus(int order, int rounds) const {
  ConsensusConfig cfg;
  cfg.rounds_per_iteration = rounds;
  cfg.em_iterations = config.em_iterations;
  cfg.order = order;
  cfg.prior = prior;
  cfg.seed = config.seed;
  cfg.cov_floor = cov_floor;
  cfg.bootstrap_per_node = config.bootstrap_per_node;
  cfg.vn_mode = config.vn_mode == "readout" ? VnMode::kReadout : VnMode::kParticipant;
  return cfg;
}

std::vector<LocalDataset> StudyContext::local_for(const std::vector<NodeId>& members) const {
  std::vector<LocalDataset> out;
  for (const auto& ds : local) {
    if (std::find(members.begin(), members.end(), ds.owner) != members.end()) out.push_back(ds);
  }
  return out;
}

double percent_decrease(double a, double b) {
  if (a == 0.0) throw NumericError("percent change relative to zero");
  return (a - b) / a * 100.0;
}

std::vector<NodeId> choose_key_nodes(const StudyContext& ctx, const CommGraph& graph, double percentage) {
  const CorenessMap coreness = k_core_decomposition(graph);
  if (ctx.config.tiebreak == "degree") return select_key_nodes(coreness, percentage, degree_tiebreak(graph));
  const ConsensusConfig cfg = ctx.consensus(ctx.config.order, ctx.config.rounds);
  const DmapResult res = run_dmap(graph, ctx.local_for(graph.node_ids()), cfg);
  return select_key_nodes(coreness, percentage, per_node_rmse(res.params, benchmark(ctx, cfg), ctx.grid));
}

// ---------------------------------------------------------------------------
// Studies

CommandOutput cmd_coreness_table(const StudyContext& ctx) {
  const CommGraph graph = study_graph(ctx);
  const ConsensusConfig cfg = ctx.consensus(ctx.config.order, ctx.config.rounds);
  const GmmParams bench = benchmark(ctx, cfg);
  const DmapResult res = run_dmap(graph, ctx.local, cfg);
  const auto rmse = per_node_rmse(res.params, bench, ctx.grid);
  const CorenessMap coreness = k_core_decomposition(graph);

  std::map<int, std::pair<double, int>, std::greater<>> by_class;
  CsvTable nodes{{"node_id", "coreness", "rmse_to_benchmark"}, {}};
  CommandOutput out;
  for (const auto& [id, value] : rmse) {
    auto& [sum, count] = by_class[coreness.at(id)];
    sum += value;
    ++count;
    nodes.add_row({std::to_string(id.value), std::to_string(coreness.at(id)), fmt(value)});
    out.files["nodes/node_" + std::to_string(id.value) + ".json"] = params_to_json(res.params.at(id));
  }
  CsvTable table{{"coreness", "avg_rmse"}, {}};
  for (const auto& [k, acc] : by_class) table.add_row({std::to_string(k), fmt(acc.first / acc.second)});
  out.files["coreness_table.csv"] = table.to_text();
  out.files["node_summary.csv"] = nodes.to_text();
  out.files["benchmark.json"] = params_to_json(bench);
  out.plots.push_back(plot("coreness_table", "coreness_table.csv", PlotKind::kBar, "coreness", {"avg_rmse"},
                           "Average RMSE by coreness"));
  return out;
}

CommandOutput cmd_keynode_groups(const StudyContext& ctx) {
  const CommGraph graph = study_graph(ctx);
  const ConsensusConfig cfg = ctx.consensus(ctx.config.order, ctx.config.rounds);
  std::vector<std::vector<NodeId>> groups;
  for (const auto& g : ctx.config.groups) groups.push_back(group_nodes(ctx, g));
  const DensityGrid bench = grid_of(benchmark(ctx, cfg), ctx.grid);

  CsvTable table{{"group_id", "key_nodes", "vn_rmse"}, {}};
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const GmmParams vn = vn_estimate(ctx, graph, groups[k], cfg);
    table.add_row({std::to_string(k + 1), join_ids(groups[k]), fmt(rmse_between_grids(grid_of(vn, ctx.grid), bench))});
  }
  CommandOutput out;
  out.files["keynode_groups.csv"] = table.to_text();
  out.plots.push_back(plot("keynode_groups", "keynode_groups.csv", PlotKind::kBar, "group_id", {"vn_rmse"},
                           "Virtual node RMSE by key-node group"));
  return out;
}

CommandOutput cmd_keynode_percentage(const StudyContext& ctx) {
  const CommGraph graph = study_graph(ctx);
  const ConsensusConfig cfg = ctx.consensus(ctx.config.order, ctx.config.rounds);
  const DensityGrid bench = grid_of(benchmark(ctx, cfg), ctx.grid);

  CsvTable table{{"percentage", "key_nodes", "vn_rmse"}, {}};
  for (const double p : ctx.config.percentages) {
    const auto keys = choose_key_nodes(ctx, graph, p);
    const GmmParams vn = vn_estimate(ctx, graph, keys, cfg);
    table.add_row({text::format_double(p * 100.0, 6), join_ids(keys),
                   fmt(rmse_between_grids(grid_of(vn, ctx.grid), bench))});
  }
  CommandOutput out;
  out.files["keynode_percentage.csv"] = table.to_text();
  out.plots.push_back(plot("keynode_percentage", "keynode_percentage.csv", PlotKind::kLine, "percentage",
                           {"vn_rmse"}, "Virtual node RMSE by key-node percentage"));
  return out;
}

CommandOutput cmd_order_sweep(const StudyContext& ctx) {
  const CommGraph graph = study_graph(ctx);
  const auto keys = choose_key_nodes(ctx, graph, ctx.config.key_percentage);
  const DensityGrid empirical = empirical_density(ctx.window.test, ctx.grid.x_edges, ctx.grid.y_edges);

  CsvTable table{{"order", "vn_rmse_vs_empirical", "aic"}, {}};
  for (int order = ctx.config.order_min; order <= ctx.config.order_max; ++order) {
    const GmmParams vn = vn_estimate(ctx, graph, keys, ctx.consensus(order, ctx.config.rounds));
    const FitResult em = em_fit(ctx.window.train, order, ctx.config.seed, central_fit_config(ctx));
    table.add_row({std::to_string(order), fmt(rmse_between_grids(grid_of(vn, ctx.grid), empirical)),
                   fmt(aic(em.params, ctx.window.train))});
  }
  CommandOutput out;
  out.files["order_sweep.csv"] = table.to_text();
  out.plots.push_back(plot("order_sweep_rmse", "order_sweep.csv", PlotKind::kLine, "order",
                           {"vn_rmse_vs_empirical"}, "RMSE against the empirical distribution"));
  out.plots.push_back(plot("order_sweep_aic", "order_sweep.csv", PlotKind::kLine, "order", {"aic"}, "AIC by order"));
  return out;
}

CommandOutput cmd_order_compare(const StudyContext& ctx) {
  const CommGraph graph = study_graph(ctx);
  const auto keys = choose_key_nodes(ctx, graph, ctx.config.key_percentage);
  const DensityGrid empirical = empirical_density(ctx.window.test, ctx.grid.x_edges, ctx.grid.y_edges);

  struct Row {
    double aic, rmse, seconds;
  };
  std::map<int, Row> rows;
  for (const int order : {ctx.config.order_a, ctx.config.order_b}) {
    if (rows.count(order)) continue;
    const auto start = std::chrono::steady_clock::now();
    const FitResult em = em_fit(ctx.window.train, order, ctx.config.seed, central_fit_config(ctx));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const GmmParams vn = vn_estimate(ctx, graph, keys, ctx.consensus(order, ctx.config.rounds));
    rows[order] = Row{aic(em.params, ctx.window.train), rmse_between_grids(grid_of(vn, ctx.grid), empirical),
                      seconds};
  }
  const Row& a = rows.at(ctx.config.order_a);
  const Row& b = rows.at(ctx.config.order_b);
  CsvTable table{{"order", "aic", "rmse", "fit_seconds"}, {}};
  table.add_row({std::to_string(ctx.config.order_a), fmt(a.aic), fmt(a.rmse), fmt(a.seconds)});
  table.add_row({std::to_string(ctx.config.order_b), fmt(b.aic), fmt(b.rmse), fmt(b.seconds)});
  table.add_row({"decreased_by_order_" + std::to_string(ctx.config.order_b), fmt(percent_decrease(a.aic, b.aic)),
                 fmt(percent_decrease(a.rmse, b.rmse)), fmt(percent_decrease(a.seconds, b.seconds))});
  CommandOutput out;
  out.files["order_compare.csv"] = table.to_text();
  return out;
}

CommandOutput cmd_marginal_compare(const StudyContext& ctx) {
  const CommGraph graph = study_graph(ctx);
  const auto keys = choose_key_nodes(ctx, graph, ctx.config.key_percentage);
  const GmmParams vn = vn_estimate(ctx, graph, keys, ctx.consensus(ctx.config.order, ctx.config.rounds));
  const GmmParams em = em_fit(ctx.window.train, ctx.config.em_order, ctx.config.seed, central_fit_config(ctx)).params;

  CsvTable summary{{"axis", "algorithm", "order", "rmse"}, {}};
  CommandOutput out;
  for (int axis = 0; axis < 2; ++axis) {
    const auto& edges = axis == 0 ? ctx.grid.x_edges : ctx.grid.y_edges;
    const DensityCurve empirical = empirical_curve(ctx.window.test, axis, edges);
    const DensityCurve dmap_curve = density_curve(marginal(vn, axis), edges);
    const DensityCurve em_curve = density_curve(marginal(em, axis), edges);
    summary.add_row({axis_name(axis), "dmap_vn", std::to_string(ctx.config.order),
                     fmt(rmse_between_curves(dmap_curve, empirical))});
    summary.add_row({axis_name(axis), "centralized_em", std::to_string(ctx.config.em_order),
                     fmt(rmse_between_curves(em_curve, empirical))});

    CsvTable curves{{"x", "empirical", "dmap_vn", "centralized_em"}, {}};
    for (std::size_t i = 0; i < empirical.values.size(); ++i) {
      curves.add_row({fmt(0.5 * (edges[i] + edges[i + 1])), fmt(empirical.values[i]), fmt(dmap_curve.values[i]),
                      fmt(em_curve.values[i])});
    }
    const std::string name = std::string("marginal_") + axis_name(axis);
    out.files[name + ".csv"] = curves.to_text();
    out.plots.push_back(plot(name, name + ".csv", PlotKind::kLine, "x", {"empirical", "dmap_vn", "centralized_em"},
                             std::string("Marginal density of the ") + axis_name(axis) + " error"));
  }
  out.files["marginal_compare.csv"] = summary.to_text();
  return out;
}

CommandOutput cmd_threshold_sweep(const StudyContext& ctx) {
  const ConsensusConfig cfg = ctx.consensus(ctx.config.order, ctx.config.threshold_rounds);
  const GmmParams bench = benchmark(ctx, cfg);

  CsvTable table{{"threshold_km", "connected", "avg_node_rmse", "vn_rmse", "total_length_km"}, {}};
  for (const double threshold : ctx.config.thresholds) {
    const CommGraph graph = build_threshold_graph(ctx.layout, threshold);
    const CorenessMap coreness = k_core_decomposition(graph);
    const auto keys = select_key_nodes(coreness, ctx.config.key_percentage, degree_tiebreak(graph));
    const CommGraph augmented = attach_virtual_node(graph, keys);
    std::map<NodeId, double> rmse;
    for (const auto& members : connected_components(augmented)) {
      const DmapResult res = run_dmap(induced_subgraph(augmented, members), ctx.local_for(members), cfg);
      for (const auto& [id, v] : per_node_rmse(res.params, bench, ctx.grid)) rmse[id] = v;
    }
    double sum = 0.0;
    for (const auto& [id, v] : rmse) sum += v;
    table.add_row({fmt(threshold), is_connected(graph) ? "1" : "0", fmt(sum / static_cast<double>(rmse.size())),
                   fmt(rmse.at(kVirtualNode)), fmt(total_line_length(graph, ctx.layout))});
  }
  CommandOutput out;
  out.files["threshold_sweep.csv"] = table.to_text();
  out.plots.push_back(plot("threshold_sweep_rmse", "threshold_sweep.csv", PlotKind::kLine, "threshold_km",
                           {"avg_node_rmse", "vn_rmse"}, "Average RMSE by distance threshold"));
  out.plots.push_back(plot("threshold_sweep_length", "threshold_sweep.csv", PlotKind::kLine, "threshold_km",
                           {"total_length_km"}, "Total communication distance"));
  return out;
}

CommandOutput cmd_gen_data(const StudyContext& ctx) {
  CommandOutput out;
  out.files["data.csv"] = window_to_csv(ctx.window);
  out.files["layout.csv"] = layout_to_csv(ctx.layout);
  return out;
}

CommandOutput cmd_graph_export(const StudyContext& ctx) {
  CommGraph graph = build_threshold_graph(ctx.layout, ctx.config.threshold_km);
  if (ctx.config.attach_vn) graph = attach_virtual_node(graph, choose_key_nodes(ctx, graph, ctx.config.key_percentage));
  CommandOutput out;
  out.files["graph.csv"] = graph_to_csv(graph, ctx.layout);
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

using Command = CommandOutput (*)(const StudyContext&);

const std::vector<std::pair<std::string, Command>>& commands() {
  static const std::vector<std::pair<std::string, Command>> table = {
      {"coreness-table", cmd_coreness_table},         {"keynode-groups", cmd_keynode_groups},
      {"keynode-percentage", cmd_keynode_percentage}, {"order-sweep", cmd_order_sweep},
      {"order-compare", cmd_order_compare},           {"marginal-compare", cmd_marginal_compare},
      {"threshold-sweep", cmd_threshold_sweep},       {"gen-data", cmd_gen_data},
      {"graph-export", cmd_graph_export},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : commands()) out.push_back(name);
    return out;
  }();
  return names;
}

CommandOutput run_subcommand(const std::string& name, const ExperimentConfig& config) {
  for (const auto& [n, fn] : commands()) {
    if (n == name) return fn(StudyContext::load(config));
  }
  throw InvalidArgument("unknown subcommand '" + name + "'");
}

void write_output(const CommandOutput& output, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const fs::path root(config.out);
  fs::create_directories(root);
  for (const auto& [name, contents] : output.files) {
    const fs::path path = root / name;
    fs::create_directories(path.parent_path());
    text::write_file(path.string(), contents);
  }
  text::write_file((root / "effective_config.txt").string(), config_to_text(config));
  if (output.plots.empty()) return;
  const fs::path manifest = root / "plots.manifest";
  std::vector<PlotSpec> plots;
  if (fs::exists(manifest)) {
    for (auto& spec : parse_manifest(text::read_file(manifest.string()))) {
      const bool replaced = std::any_of(output.plots.begin(), output.plots.end(),
                                        [&](const PlotSpec& p) { return p.svg_name == spec.svg_name; });
      if (!replaced) plots.push_back(std::move(spec));
    }
  }
  plots.insert(plots.end(), output.plots.begin(), output.plots.end());
  text::write_file(manifest.string(), plots_to_manifest(plots));
  render_directory(root.string());
}

}  // namespace aggwind
