#include "aggwind/config.hpp"

#include <set>
#include <sstream>

#include "aggwind/errors.hpp"
#include "aggwind/text.hpp"

namespace aggwind {

namespace {

double to_double(const std::string& key, const std::string& value) {
  const auto v = text::parse_double(value);
  if (!v) throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  return *v;
}

long long to_int(const std::string& key, const std::string& value) {
  const auto v = text::parse_int(value);
  if (!v) throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  return *v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& part : text::split(value, ',')) out.push_back(to_double(key, part));
  return out;
}

std::string choice(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return value;
  }
  throw ConfigError("config key '" + key + "': unsupported value '" + value + "'");
}

std::string doubles_to_text(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (const double v : values) parts.push_back(text::format_double(v));
  return text::join(parts, ",");
}

}  // namespace

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(samples_per_day >= 1, "samples_per_day must be at least 1");
  require(threshold_km > 0.0, "threshold_km must be positive");
  require(!thresholds.empty(), "thresholds must not be empty");
  for (const double t : thresholds) require(t > 0.0, "thresholds must be positive");
  require(order >= 1 && order_a >= 1 && order_b >= 1 && em_order >= 1, "orders must be at least 1");
  require(order_min >= 1 && order_max >= order_min, "order range must be nonempty");
  require(key_percentage > 0.0 && key_percentage <= 1.0, "key_percentage must be in (0, 1]");
  require(!percentages.empty(), "percentages must not be empty");
  for (const double p : percentages) require(p > 0.0 && p <= 1.0, "percentages must be in (0, 1]");
  require(!groups.empty(), "groups must not be empty");
  for (const auto& g : groups) {
    require(!g.empty(), "key-node groups must not be empty");
    require(std::set<int>(g.begin(), g.end()).size() == g.size(), "key-node group lists a node twice");
    for (const int id : g) require(id >= 1, "key-node ids start at 1");
  }
  require(rounds >= 1 && threshold_rounds >= 1, "consensus rounds must be at least 1");
  require(em_iterations >= 1, "em_iterations must be at least 1");
  require(bootstrap_per_node >= 1, "bootstrap_per_node must be at least 1");
  require(central_max_iters >= 1, "central_max_iters must be at least 1");
  require(central_tol >= 0.0, "central_tol must be nonnegative");
  require(grid_cells >= 1, "grid_cells must be at least 1");
  require(grid_margin >= 0.0, "grid_margin must be nonnegative");
  require(!out.empty(), "out must not be empty");
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = text::trim(raw);
  auto as_int = [&] { return static_cast<int>(to_int(key, value)); };
  if (key == "layout") c.layout = value;
  else if (key == "data") c.data = value;
  else if (key == "seed") {
    const long long s = to_int(key, value);
    if (s < 0) throw ConfigError("seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  else if (key == "samples_per_day") c.samples_per_day = as_int();
  else if (key == "partitioning") c.partitioning = choice(key, value, {"round_robin", "sorted"});
  else if (key == "threshold_km") c.threshold_km = to_double(key, value);
  else if (key == "thresholds") c.thresholds = to_doubles(key, value);
  else if (key == "order") c.order = as_int();
  else if (key == "order_min") c.order_min = as_int();
  else if (key == "order_max") c.order_max = as_int();
  else if (key == "order_a") c.order_a = as_int();
  else if (key == "order_b") c.order_b = as_int();
  else if (key == "em_order") c.em_order = as_int();
  else if (key == "key_percentage") c.key_percentage = to_double(key, value);
  else if (key == "percentages") c.percentages = to_doubles(key, value);
  else if (key == "groups") {
    c.groups.clear();
    for (const auto& group : text::split(value, ';')) {
      std::vector<int> ids;
      std::istringstream in(group);
      std::string tok;
      while (in >> tok) ids.push_back(static_cast<int>(to_int(key, tok)));
      c.groups.push_back(std::move(ids));
    }
  }
  else if (key == "tiebreak") c.tiebreak = choice(key, value, {"degree", "rmse"});
  else if (key == "rounds") c.rounds = as_int();
  else if (key == "threshold_rounds") c.threshold_rounds = as_int();
  else if (key == "em_iterations") c.em_iterations = as_int();
  else if (key == "bootstrap_per_node") c.bootstrap_per_node = as_int();
  else if (key == "vn_mode") c.vn_mode = choice(key, value, {"participant", "readout"});
  else if (key == "attach_vn") c.attach_vn = to_bool(key, value);
  else if (key == "central_max_iters") c.central_max_iters = as_int();
  else if (key == "central_tol") c.central_tol = to_double(key, value);
  else if (key == "grid_cells") c.grid_cells = as_int();
  else if (key == "grid_margin") c.grid_margin = to_double(key, value);
  else if (key == "out") c.out = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& contents) {
  ExperimentConfig c;
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string t = text::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(c, text::trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string contents;
  try {
    contents = text::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(contents);
}

std::string config_to_text(const ExperimentConfig& c) {
  std::vector<std::string> groups;
  for (const auto& g : c.groups) {
    std::vector<std::string> ids;
    for (const int id : g) ids.push_back(std::to_string(id));
    groups.push_back(text::join(ids, " "));
  }
  std::ostringstream out;
  out << "# effective configuration\n"
      << "layout = " << c.layout << "\n"
      << "data = " << c.data << "\n"
      << "seed = " << c.seed << "\n"
      << "samples_per_day = " << c.samples_per_day << "\n"
      << "partitioning = " << c.partitioning << "\n"
      << "threshold_km = " << text::format_double(c.threshold_km) << "\n"
      << "thresholds = " << doubles_to_text(c.thresholds) << "\n"
      << "order = " << c.order << "\n"
      << "order_min = " << c.order_min << "\n"
      << "order_max = " << c.order_max << "\n"
      << "order_a = " << c.order_a << "\n"
      << "order_b = " << c.order_b << "\n"
      << "em_order = " << c.em_order << "\n"
      << "key_percentage = " << text::format_double(c.key_percentage) << "\n"
      << "percentages = " << doubles_to_text(c.percentages) << "\n"
      << "groups = " << text::join(groups, "; ") << "\n"
      << "tiebreak = " << c.tiebreak << "\n"
      << "rounds = " << c.rounds << "\n"
      << "threshold_rounds = " << c.threshold_rounds << "\n"
      << "em_iterations = " << c.em_iterations << "\n"
      << "bootstrap_per_node = " << c.bootstrap_per_node << "\n"
      << "vn_mode = " << c.vn_mode << "\n"
      << "attach_vn = " << (c.attach_vn ? "true" : "false") << "\n"
      << "central_max_iters = " << c.central_max_iters << "\n"
      << "central_tol = " << text::format_double(c.central_tol) << "\n"
      << "grid_cells = " << c.grid_cells << "\n"
      << "grid_margin = " << text::format_double(c.grid_margin) << "\n"
      << "out = " << c.out << "\n";
  return out.str();
}

}  // namespace aggwind
