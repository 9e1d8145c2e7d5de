#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>

#include <unistd.h>

#include "aggwind/config.hpp"
#include "aggwind/errors.hpp"
#include "aggwind/experiments.hpp"
#include "aggwind/table.hpp"
#include "aggwind/text.hpp"

using namespace aggwind;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("aggwind_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CsvTable table_of(const CommandOutput& out, const std::string& file) { return parse_csv_table(out.files.at(file)); }

CsvTable run(const std::string& command, const std::string& file, const ExperimentConfig& config = {}) {
  return table_of(run_subcommand(command, config), file);
}

int cli(const std::string& args) {
  const int status = std::system((std::string(AGGWIND_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("effective config round trips") {
    ExperimentConfig c;
    c.seed = 7;
    c.thresholds = {3.25, 4.0};
    c.groups = {{1, 2}, {3}};
    c.vn_mode = "readout";
    c.grid_margin = 0.1;
    const std::string text = config_to_text(c);
    CHECK(config_to_text(parse_config(text)) == text);
  }

  TEST_CASE("parsing") {
    const ExperimentConfig c = parse_config("# comment\nseed = 9  # trailing\n\ngroups = 1 2; 3 4 5\nrounds=7\n");
    CHECK(c.seed == 9);
    CHECK(c.rounds == 7);
    CHECK(c.groups == std::vector<std::vector<int>>{{1, 2}, {3, 4, 5}});
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("groups = 2 2 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("key_percentage = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("order_min = 5\norder_max = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("thresholds = \n"), ConfigError);
    CHECK_THROWS_AS(parse_config("vn_mode = sometimes\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/aggwind.cfg"), ConfigError);
  }

  TEST_CASE("referenced files must exist") {
    ExperimentConfig c;
    c.layout = "/nonexistent/layout.csv";
    CHECK_THROWS_AS(StudyContext::load(c), ConfigError);
    c = ExperimentConfig{};
    c.data = "/nonexistent/data.csv";
    CHECK_THROWS_AS(StudyContext::load(c), ConfigError);
  }
}

TEST_SUITE("coreness table") {
  TEST_CASE("default study orders the classes") {
    const CsvTable t = run("coreness-table", "coreness_table.csv");
    CHECK(t.header == std::vector<std::string>{"coreness", "avg_rmse"});
    CHECK(t.numeric_column("coreness") == std::vector<double>{4, 2, 1});
    const auto rmse = t.numeric_column("avg_rmse");
    CHECK(rmse[0] < rmse[1]);
    CHECK(rmse[1] < rmse[2]);
  }

  TEST_CASE("near-exact consensus drives every class to the benchmark") {
    ExperimentConfig c;
    c.rounds = 200;
    for (const double v : run("coreness-table", "coreness_table.csv", c).numeric_column("avg_rmse")) CHECK(v < 1e-5);
  }

  TEST_CASE("single farm gives one row with zero error") {
    const fs::path dir = scratch("single");
    text::write_file((dir / "layout.csv").string(), "node_id,x_km,y_km\n1,0,0\n");
    ExperimentConfig c;
    c.layout = (dir / "layout.csv").string();
    const CsvTable t = run("coreness-table", "coreness_table.csv", c);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.numeric_column("avg_rmse")[0] == 0.0);
  }

  TEST_CASE("disconnected graph is a config error") {
    ExperimentConfig c;
    c.threshold_km = 3.0;
    CHECK_THROWS_AS(run_subcommand("coreness-table", c), ConfigError);
  }

  TEST_CASE("node files accompany the table") {
    const CommandOutput out = run_subcommand("coreness-table", ExperimentConfig{});
    CHECK(out.files.count("nodes/node_10.json") == 1);
    CHECK(out.files.count("benchmark.json") == 1);
    CHECK(table_of(out, "node_summary.csv").rows.size() == 10);
  }
}

TEST_SUITE("key nodes") {
  TEST_CASE("group one beats group five by default") {
    const auto rmse = run("keynode-groups", "keynode_groups.csv").numeric_column("vn_rmse");
    REQUIRE(rmse.size() == 5);
    CHECK(rmse[0] < rmse[4]);
  }

  TEST_CASE("all nodes as a group is best") {
    ExperimentConfig c;
    c.groups.push_back({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const auto rmse = run("keynode-groups", "keynode_groups.csv", c).numeric_column("vn_rmse");
    CHECK(*std::min_element(rmse.begin(), rmse.end()) == rmse.back());
  }

  TEST_CASE("bad groups are config errors") {
    ExperimentConfig c;
    c.groups = {{2, 2, 5}};
    CHECK_THROWS_AS(run_subcommand("keynode-groups", c), ConfigError);
    c.groups = {{2, 11}};
    CHECK_THROWS_AS(run_subcommand("keynode-groups", c), ConfigError);
  }

  TEST_CASE("percentage rows list the ranked key nodes") {
    ExperimentConfig c;
    c.percentages = {0.1, 0.2, 0.3, 0.4, 0.5, 1.0};
    const CsvTable t = run("keynode-percentage", "keynode_percentage.csv", c);
    const std::vector<std::string> want = {"5", "5;4", "5;4;2", "5;4;2;7", "5;4;2;7;9"};
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(t.rows[k][1] == want[k]);
    CHECK(t.rows[0][0] == "10");
    const auto rmse = t.numeric_column("vn_rmse");
    CHECK(*std::min_element(rmse.begin(), rmse.end()) == rmse.back());
  }

  TEST_CASE("rmse tiebreak keeps the sets nested") {
    ExperimentConfig c;
    c.tiebreak = "rmse";
    const CsvTable t = run("keynode-percentage", "keynode_percentage.csv", c);
    for (std::size_t k = 1; k < t.rows.size(); ++k) CHECK(t.rows[k][1].rfind(t.rows[k - 1][1], 0) == 0);
  }
}

TEST_SUITE("order studies") {
  TEST_CASE("aic column matches standalone calls") {
    ExperimentConfig c;
    c.order_min = 1;
    c.order_max = 3;
    const CsvTable t = run("order-sweep", "order_sweep.csv", c);
    REQUIRE(t.rows.size() == 3);
    const StudyContext ctx = StudyContext::load(c);
    for (int order = 1; order <= 3; ++order) {
      FitConfig fc;
      fc.max_iters = c.central_max_iters;
      fc.tol = c.central_tol;
      fc.cov_floor = ctx.cov_floor;
      const double direct = aic(em_fit(ctx.window.train, order, c.seed, fc).params, ctx.window.train);
      CHECK(t.rows[static_cast<std::size_t>(order - 1)][2] == text::format_double(direct));
    }
  }

  TEST_CASE("percent decrease follows the table convention") {
    CHECK(percent_decrease(4526.031, 4526.182) == doctest::Approx(-0.0033).epsilon(0.01));
    CHECK(percent_decrease(0.085, 0.086) == doctest::Approx(-1.18).epsilon(0.01));
    CHECK(percent_decrease(1.23, 1.02) == doctest::Approx(17.07).epsilon(0.001));
    CHECK_THROWS_AS(percent_decrease(0.0, 1.0), NumericError);
  }

  TEST_CASE("comparing an order with itself gives zero differences") {
    ExperimentConfig c;
    c.order_a = 4;
    c.order_b = 4;
    const CsvTable t = run("order-compare", "order_compare.csv", c);
    REQUIRE(t.rows.size() == 3);
    CHECK(text::parse_double(t.rows[0][3]).value() > 0.0);
    for (std::size_t col = 1; col < 4; ++col) CHECK(text::parse_double(t.rows[2][col]).value() == 0.0);
  }

  TEST_CASE("inflated centralized order overfits the marginals") {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ExperimentConfig c;
      c.seed = seed;
      c.em_order = 30;
      const CsvTable t = run("marginal-compare", "marginal_compare.csv", c);
      const auto rmse = t.numeric_column("rmse");
      double dmap = 0.0, em = 0.0;
      for (std::size_t k = 0; k < t.rows.size(); ++k) (t.rows[k][1] == "dmap_vn" ? dmap : em) += rmse[k];
      wins += em > dmap ? 1 : 0;
    }
    CHECK(wins >= 7);
  }

  TEST_CASE("marginal curves are densities") {
    const CommandOutput out = run_subcommand("marginal-compare", ExperimentConfig{});
    for (const char* file : {"marginal_awo.csv", "marginal_fwo.csv"}) {
      const CsvTable t = table_of(out, file);
      const auto x = t.numeric_column("x");
      const double width = x[1] - x[0];
      for (const char* col : {"dmap_vn", "centralized_em"}) {
        double mass = 0.0;
        for (const double v : t.numeric_column(col)) mass += v * width;
        CHECK(std::abs(mass - 1.0) < 2e-2);
      }
    }
  }
}

TEST_SUITE("threshold sweep") {
  TEST_CASE("line length grows and connectivity starts at 4 km") {
    const CsvTable t = run("threshold-sweep", "threshold_sweep.csv");
    const auto length = t.numeric_column("total_length_km");
    for (std::size_t k = 1; k < length.size(); ++k) CHECK(length[k] >= length[k - 1]);
    const auto connected = t.numeric_column("connected");
    CHECK(connected[0] == 0.0);
    CHECK(connected[1] == 0.0);
    CHECK(connected[2] == 1.0);
    CHECK(connected.back() == 1.0);
  }
}

TEST_SUITE("output") {
  TEST_CASE("plots are pure views of the csv files") {
    ExperimentConfig c;
    c.out = scratch("plots").string();
    write_output(run_subcommand("keynode-percentage", c), c);
    write_output(run_subcommand("coreness-table", c), c);
    const std::string before = text::read_file(c.out + "/keynode_percentage.svg");
    CHECK(before.find("percentage") != std::string::npos);
    CHECK(before.find("vn_rmse") != std::string::npos);
    fs::remove(c.out + "/keynode_percentage.svg");
    fs::remove(c.out + "/coreness_table.svg");
    render_directory(c.out);
    CHECK(text::read_file(c.out + "/keynode_percentage.svg") == before);
    CHECK(fs::exists(c.out + "/coreness_table.svg"));
  }

  TEST_CASE("echoed config reproduces the outputs") {
    ExperimentConfig c;
    c.seed = 5;
    c.out = scratch("echo").string();
    const CommandOutput first = run_subcommand("keynode-groups", c);
    write_output(first, c);
    const ExperimentConfig echoed = load_config(c.out + "/effective_config.txt");
    CHECK(run_subcommand("keynode-groups", echoed).files == first.files);
  }

  TEST_CASE("manifest round trip") {
    const std::vector<PlotSpec> plots = {
        {"a.svg", "a.csv", PlotKind::kLine, "x", {"y1", "y2"}, "Title one"},
        {"b.svg", "b.csv", PlotKind::kBar, "k", {"v"}, "Title two"}};
    const auto back = parse_manifest(plots_to_manifest(plots));
    REQUIRE(back.size() == 2);
    CHECK(back[0].y_columns == plots[0].y_columns);
    CHECK(back[1].kind == PlotKind::kBar);
    CHECK_THROWS_AS(parse_manifest("a.svg,a.csv,pie,x,y,t\n"), ParseError);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    const fs::path dir = scratch("cli");
    CHECK(cli("gen-data --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "data.csv"));
    CHECK(fs::exists(dir / "ok" / "layout.csv"));
    text::write_file((dir / "bad.cfg").string(), "nonsense = 1\n");
    CHECK(cli("gen-data --config " + (dir / "bad.cfg").string() + " --out " + (dir / "x").string()) == 2);
    CHECK(cli("coreness-table --set threshold_km=3 --out " + (dir / "y").string()) == 2);
    CHECK(cli("gen-data --config /nonexistent.cfg") == 2);
    CHECK(cli("no-such-command") == 2);
  }

  TEST_CASE("numeric failure exits with 3") {
    const fs::path dir = scratch("numeric");
    std::string csv = "day,step,awo_err,fwo_err\n";
    for (int day = 0; day < 40; ++day) csv += std::to_string(day) + ",0,1e308,-1e308\n";
    text::write_file((dir / "data.csv").string(), csv);
    CHECK(cli("coreness-table --set data=" + (dir / "data.csv").string() + " --out " + (dir / "o").string()) == 3);
  }

  TEST_CASE("fast subcommands are byte-identical across runs") {
    const fs::path dir = scratch("determinism");
    for (const std::string cmd : {"gen-data", "graph-export", "coreness-table"}) {
      REQUIRE(cli(cmd + " --seed 3 --out " + (dir / (cmd + "_a")).string()) == 0);
      REQUIRE(cli(cmd + " --seed 3 --out " + (dir / (cmd + "_b")).string()) == 0);
      for (const auto& entry : fs::recursive_directory_iterator(dir / (cmd + "_a"))) {
        if (!entry.is_regular_file() || entry.path().filename() == "effective_config.txt") continue;
        const fs::path twin = dir / (cmd + "_b") / fs::relative(entry.path(), dir / (cmd + "_a"));
        CHECK(text::read_file(entry.path().string()) == text::read_file(twin.string()));
      }
    }
  }
}
