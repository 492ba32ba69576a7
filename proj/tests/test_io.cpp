#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "omd/experiment.hpp"
#include "omd/io.hpp"
#include "omd/svg_plot.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("omd_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "omd_cli_output.txt";
  const std::string cmd =
      std::string(OMD_CLI_BIN) + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.output = read_all(out);
  return result;
}

}  // namespace

TEST_CASE("fmt_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 12345.6789, 1e-300, 0.0}) {
    CHECK(std::stod(omd::fmt_double(v)) == v);
  }
}

TEST_CASE("instance json round-trips exactly") {
  const auto problem = omd::generate_instance(7, 3, 5, 424242);
  const auto j = omd::instance_to_json(problem);
  const auto back = omd::instance_from_json(j);
  REQUIRE(back.losses.size() == problem.losses.size());
  REQUIRE(back.constraints.size() == problem.constraints.size());
  for (std::size_t i = 0; i < problem.losses.size(); ++i) {
    CHECK((back.losses[i].a.array() == problem.losses[i].a.array()).all());
    CHECK(back.losses[i].b == problem.losses[i].b);
    CHECK(back.losses[i].mu == problem.losses[i].mu);
  }
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    CHECK((back.constraints[i].alpha.array() ==
           problem.constraints[i].alpha.array())
              .all());
    CHECK(back.constraints[i].beta == problem.constraints[i].beta);
    CHECK(back.constraints[i].mu_hat == problem.constraints[i].mu_hat);
  }
  CHECK(back.seed == problem.seed);

  const auto dir = temp_dir("instance");
  omd::save_instance(dir / "i.json", problem);
  const auto loaded = omd::load_instance(dir / "i.json");
  CHECK(loaded.losses[0].a[0] == problem.losses[0].a[0]);
  CHECK(loaded.loss_lipschitz[0] == doctest::Approx(problem.loss_lipschitz[0]));
}

TEST_CASE("trace csv round-trips and delta can be rebuilt from it") {
  const auto dir = temp_dir("trace");
  const auto problem = omd::generate_instance(6, 3, 40, 7);

  for (auto alg : {omd::Algorithm::Alg4, omd::Algorithm::Alg5}) {
    omd::SolverConfig config;
    config.algorithm = alg;
    config.epsilon = 0.3;
    config.target_productive_T = 40;
    if (alg == omd::Algorithm::Alg5) {
      config.regularizer = omd::RegularizerD::for_ball(1.0);
    }
    const auto trace = omd::run_solver(problem, config);
    const auto path = dir / (to_string(alg) + ".trace.csv");
    omd::save_trace_csv(path, trace, problem.seed);

    const auto file = omd::load_trace_csv(path);
    REQUIRE(int(file.rows.size()) == trace.total_steps());
    CHECK(file.header.at("algorithm").get<std::string>() == to_string(alg));
    CHECK(file.header.at("seed").get<std::uint64_t>() == problem.seed);
    CHECK(file.header.at("termination").get<std::string>() == "reached_T");
    CHECK(file.header.at("T").get<int>() == trace.productive_count);

    // Reconstruct the delta certificate from the CSV alone.
    const double m = file.header.at("m_bound").get<double>();
    const double eps = file.header.at("epsilon").get<double>();
    double sum = 0.0;
    double lam_prefix = 0.0;
    int t_count = 0, tj_count = 0;
    for (const auto& row : file.rows) {
      lam_prefix += row.lambda;
      const double mu_lam = 1.0 / row.eta;  // mu_{1:t} (+ lambda_{1:t} for alg5)
      if (alg == omd::Algorithm::Alg4) {
        sum += m * m / mu_lam;
      } else {
        const double num = m + row.lambda * 1.0;  // M_d = 1
        sum += num * num / mu_lam;
      }
      if (row.kind == "productive") {
        ++t_count;
      } else {
        ++tj_count;
      }
    }
    if (alg == omd::Algorithm::Alg5) sum += lam_prefix * 0.5;  // A2 = 1/2
    const double rebuilt = (sum - eps * tj_count) / t_count;
    CHECK(rebuilt ==
          doctest::Approx(omd::delta_certificate(trace, problem))
              .epsilon(1e-12));

    // Byte determinism of the writer.
    const auto path2 = dir / (to_string(alg) + ".trace2.csv");
    omd::save_trace_csv(path2, trace, problem.seed);
    CHECK(read_all(path) == read_all(path2));
  }
}

TEST_CASE("summary csv round-trip and wall-time stripping") {
  const auto dir = temp_dir("summary");
  std::vector<omd::SummaryRow> rows(2);
  rows[0] = {"alg4", 1, 100, 37, 1.234567, 0.5, 1.25, 3.5, "4/4", ""};
  rows[1] = {"baseline", 2, 200, 12,  0.01,
             std::numeric_limits<double>::quiet_NaN(), 1.5, -0.25, "1/1", ""};
  omd::save_summary_csv(dir / "summary.csv", rows);
  const auto back = omd::load_summary_csv(dir / "summary.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].algorithm == "alg4");
  CHECK(back[0].T_J == 37);
  CHECK(back[0].regret == 3.5);
  CHECK(std::isnan(back[1].delta));
  CHECK(back[1].regret == -0.25);

  const auto stripped = omd::summary_without_wall_time(dir / "summary.csv");
  CHECK(stripped.find("1.235") == std::string::npos);
  CHECK(stripped.find("alg4") != std::string::npos);
}

TEST_CASE("svg panels are well-formed and reference nothing external") {
  const auto dir = temp_dir("svg");
  std::vector<omd::SummaryRow> rows;
  for (int t : {50, 100, 200, 400}) {
    for (std::uint64_t seed : {1, 2}) {
      rows.push_back({"alg4", seed, t, t / 2, 0.1, 1.0 / t, 1.2, 0.3, "4/4", ""});
      rows.push_back({"baseline", seed, t, t / 3, 0.2,
                      std::numeric_limits<double>::quiet_NaN(), 1.3, 0.4,
                      "1/1", ""});
    }
  }
  const auto written = omd::write_summary_panels(rows, dir);
  REQUIRE(written.size() == 4);
  for (const auto& path : written) {
    const std::string svg = read_all(path);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("href") == std::string::npos);
    CHECK(svg.find("url(") == std::string::npos);
    // Axis labels come from the summary columns.
    CHECK(svg.find(">T<") != std::string::npos);
  }
  // delta panel only has the alg4 series; the others have two polylines.
  const std::string tj_panel = read_all(dir / "nonproductive_steps.svg");
  CHECK(std::count(tj_panel.begin(), tj_panel.end(), 'p') > 0);
  size_t polylines = 0;
  for (size_t pos = tj_panel.find("<polyline"); pos != std::string::npos;
       pos = tj_panel.find("<polyline", pos + 1)) {
    ++polylines;
  }
  CHECK(polylines == 2);
  const std::string delta_panel = read_all(dir / "delta.svg");
  polylines = 0;
  for (size_t pos = delta_panel.find("<polyline"); pos != std::string::npos;
       pos = delta_panel.find("<polyline", pos + 1)) {
    ++polylines;
  }
  CHECK(polylines == 1);

  CHECK_THROWS_AS(omd::write_summary_panels({}, dir), std::invalid_argument);
}

TEST_CASE("experiment spec validation") {
  omd::ExperimentSpec spec;
  spec.t_list = {};
  spec.seeds = {1};
  spec.algorithms = {omd::Algorithm::Alg4};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.t_list = {10};
  spec.seeds.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("run_sweep produces the cartesian product with artifacts") {
  omd::ExperimentSpec spec;
  spec.n = 6;
  spec.m = 2;
  spec.t_list = {6, 10};
  spec.seeds = {1, 2};
  spec.algorithms = {omd::Algorithm::Alg4, omd::Algorithm::AdaptiveBaseline};
  spec.output_dir = temp_dir("sweep");
  spec.jobs = 2;
  spec.oracle.switching_iters = 400;

  const auto rows = omd::run_sweep(spec);
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    CHECK(r.T > 0);
  }
  // Sorted by (algorithm, seed, T).
  CHECK(rows[0].algorithm == "alg4");
  CHECK(rows[0].seed == 1);
  CHECK(rows[0].T == 6);
  CHECK(rows.back().algorithm == "baseline");
  CHECK(rows.back().seed == 2);
  CHECK(rows.back().T == 10);

  CHECK(fs::exists(spec.output_dir / "summary.csv"));
  CHECK(fs::exists(spec.output_dir / "alg4_n6_m2_T6_seed1.trace.csv"));
  CHECK(fs::exists(spec.output_dir / "alg4_n6_m2_T6_seed1.analysis.json"));

  // Baseline rows carry no delta certificate.
  for (const auto& r : rows) {
    if (r.algorithm == "baseline") CHECK(std::isnan(r.delta));
  }

  // Each summary row's (T, T_J) re-derives from its trace file, and every
  // row respects the switching branch rule.
  for (const auto& r : rows) {
    const auto stem = spec.output_dir /
                      (r.algorithm + "_n6_m2_T" + std::to_string(r.T) +
                       "_seed" + std::to_string(r.seed));
    const auto file = omd::load_trace_csv(stem.string() + ".trace.csv");
    const double eps = file.header.at("epsilon").get<double>();
    int productive = 0, nonproductive = 0;
    for (const auto& row : file.rows) {
      const bool is_productive = row.kind == "productive";
      CHECK(is_productive == (row.g_value <= eps));
      (is_productive ? productive : nonproductive) += 1;
    }
    CHECK(productive == r.T);
    CHECK(nonproductive == r.T_J);
  }
}

TEST_CASE("cli generate is byte-deterministic") {
  const auto dir_a = temp_dir("gen_a");
  const auto dir_b = temp_dir("gen_b");
  const std::string common = "generate --n 5 --m 2 --T 4 --T 7 --seed 3";
  const auto a = run_cli(common + " --out " + dir_a.string());
  const auto b = run_cli(common + " --out " + dir_b.string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  for (const char* name :
       {"instance_n5_m2_T4_seed3.json", "instance_n5_m2_T7_seed3.json"}) {
    CHECK(read_all(dir_a / name) == read_all(dir_b / name));
  }
}

TEST_CASE("cli run, plot, and verify") {
  const auto dir = temp_dir("cli_run");
  const auto run = run_cli(
      "run --n 5 --m 2 --T 5 --T 8 --seed 1 --seed 2 --alg alg4 --alg "
      "baseline --eps-rule invsqrt --jobs 2 --out " +
      dir.string());
  REQUIRE(run.exit_code == 0);
  const auto rows = omd::load_summary_csv(dir / "summary.csv");
  CHECK(rows.size() == 8);

  const auto plots = run_cli("plot " + (dir / "summary.csv").string() +
                             " --out " + (dir / "plots").string());
  REQUIRE(plots.exit_code == 0);
  CHECK(fs::exists(dir / "plots" / "delta.svg"));
  CHECK(fs::exists(dir / "plots" / "nonproductive_steps.svg"));
  CHECK(fs::exists(dir / "plots" / "wall_time_s.svg"));
  CHECK(fs::exists(dir / "plots" / "mean_productive_objective.svg"));

  // Missing T list is a usage error.
  const auto bad = run_cli("run --n 5 --m 2 --seed 1 --alg alg4 --out " +
                           (dir / "bad").string());
  CHECK(bad.exit_code != 0);

  const auto filtered = run_cli("verify --filter lemma1");
  CHECK(filtered.exit_code == 0);
  CHECK(filtered.output.find("lemma1.ratio") != std::string::npos);
  CHECK(filtered.output.find("thm2") == std::string::npos);

  const auto mutated = run_cli("verify --mutate-eta");
  CHECK(mutated.exit_code != 0);
  CHECK(mutated.output.find("thm2") != std::string::npos);
  CHECK(mutated.output.find("FAIL") != std::string::npos);
}

TEST_CASE("cli config file is overridden by flags") {
  const auto dir = temp_dir("cli_config");
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"n": 5, "m": 2, "T": [4], "seeds": [9], "out": ")"
        << (dir / "from_config").string() << R"("})";
  }
  const auto gen = run_cli("generate --config " +
                           (dir / "config.json").string() + " --n 6");
  REQUIRE(gen.exit_code == 0);
  // n flag overrides the config file; the rest comes from the file.
  CHECK(fs::exists(dir / "from_config" / "instance_n6_m2_T4_seed9.json"));
}
