#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aggwind/config.hpp"
#include "aggwind/errors.hpp"
#include "aggwind/experiments.hpp"
#include "aggwind/plot.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> settings;
};

aggwind::ExperimentConfig resolve(const Options& opts) {
  aggwind::ExperimentConfig config =
      opts.config_path.empty() ? aggwind::ExperimentConfig{} : aggwind::load_config(opts.config_path);
  for (const auto& kv : opts.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw aggwind::ConfigError("--set expects key=value, got '" + kv + "'");
    aggwind::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.out.empty()) config.out = opts.out;
  config.validate();
  return config;
}

}  // namespace

const std::map<std::string, std::string> kDescriptions = {
    {"coreness-table", "average DMAP error per coreness class"},
    {"keynode-groups", "virtual-node error for each configured key-node group"},
    {"keynode-percentage", "virtual-node error versus share of ranked key nodes"},
    {"order-sweep", "virtual-node error and centralized AIC across GMM orders"},
    {"order-compare", "AIC, error and fit time for two GMM orders"},
    {"marginal-compare", "1-D marginals of DMAP against an unregularized centralized fit"},
    {"threshold-sweep", "errors and link length across communication thresholds"},
    {"gen-data", "write the synthetic dataset and farm layout"},
    {"graph-export", "write the edge list of the communication graph"},
};

int main(int argc, char** argv) {
  CLI::App app{"Distributed GMM estimation studies over a wind-farm communication network"};
  app.require_subcommand(1);

  Options opts;
  std::string selected;
  for (const auto& name : aggwind::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--set", opts.settings, "override one config key (key=value)");
    sub->callback([&selected, name] { selected = name; });
  }
  std::string plot_dir;
  CLI::App* plot = app.add_subcommand("plot", "re-render SVGs from the CSVs listed in DIR/plots.manifest");
  plot->add_option("dir", plot_dir, "output directory of an earlier run")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (plot->parsed()) {
      aggwind::render_directory(plot_dir);
      return 0;
    }
    const aggwind::ExperimentConfig config = resolve(opts);
    aggwind::write_output(aggwind::run_subcommand(selected, config), config);
    std::cout << "wrote " << selected << " results to " << config.out << "\n";
    return 0;
  } catch (const aggwind::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const aggwind::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const aggwind::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
