// omd: generate instances, run solver sweeps, plot the summary panels, and
// verify the bound-check battery.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "omd/experiment.hpp"
#include "omd/svg_plot.hpp"
#include "omd/verify.hpp"

namespace {

using nlohmann::json;

struct CliState {
  omd::ExperimentSpec spec;
  std::string eps_rule_name = "invsqrt";
  double eps_alpha = 0.25;
  double eps_value = 0.1;
  std::vector<std::string> algorithm_names;
  std::vector<int> t_values;
  std::vector<std::uint64_t> seed_values;
  std::string out_dir;
};

// Config file is JSON mirroring the experiment spec; CLI flags override
// whatever the file sets.
void apply_config_file(CliState& state, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json j = json::parse(in);
  if (j.contains("n")) state.spec.n = j["n"].get<int>();
  if (j.contains("m")) state.spec.m = j["m"].get<int>();
  if (j.contains("T")) state.t_values = j["T"].get<std::vector<int>>();
  if (j.contains("seeds")) {
    state.seed_values = j["seeds"].get<std::vector<std::uint64_t>>();
  }
  if (j.contains("algorithms")) {
    state.algorithm_names = j["algorithms"].get<std::vector<std::string>>();
  }
  if (j.contains("out")) state.out_dir = j["out"].get<std::string>();
  if (j.contains("jobs")) state.spec.jobs = j["jobs"].get<int>();
  if (j.contains("eps_rule")) {
    const auto& r = j["eps_rule"];
    if (r.is_string()) {
      state.eps_rule_name = r.get<std::string>();
    } else {
      if (r.contains("rule")) state.eps_rule_name = r["rule"].get<std::string>();
      if (r.contains("alpha")) state.eps_alpha = r["alpha"].get<double>();
      if (r.contains("value")) state.eps_value = r["value"].get<double>();
    }
  }
}

void finalize_spec(CliState& state, bool need_algorithms) {
  if (!state.t_values.empty()) state.spec.t_list = state.t_values;
  if (!state.seed_values.empty()) state.spec.seeds = state.seed_values;
  if (state.spec.seeds.empty()) state.spec.seeds = {1};
  if (!state.out_dir.empty()) state.spec.output_dir = state.out_dir;
  state.spec.eps_rule =
      omd::EpsRule::from_string(state.eps_rule_name, state.eps_alpha,
                                state.eps_value);
  state.spec.algorithms.clear();
  for (const auto& name : state.algorithm_names) {
    state.spec.algorithms.push_back(omd::algorithm_from_string(name));
  }
  if (need_algorithms && state.spec.algorithms.empty()) {
    state.spec.algorithms = {omd::Algorithm::Alg4,
                             omd::Algorithm::AdaptiveBaseline};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Online mirror-descent solvers with switching over productive and "
      "non-productive steps, bound verification, and experiment sweeps.\n"
      "Option precedence: built-in defaults < --config file < CLI flags."};
  app.require_subcommand(1);

  CliState state;
  std::string config_path;

  // Pre-scan for --config so flags parsed afterwards override it.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  if (!config_path.empty()) apply_config_file(state, config_path);

  const auto add_common = [&](CLI::App* cmd, bool with_eps) {
    cmd->add_option("--config", config_path,
                    "JSON config mirroring the experiment spec");
    cmd->add_option("--n", state.spec.n, "problem dimension");
    cmd->add_option("--m", state.spec.m, "number of constraint terms");
    cmd->add_option("--T", state.t_values,
                    "productive-step targets (repeatable)");
    cmd->add_option("--seed", state.seed_values, "instance seeds (repeatable)");
    cmd->add_option("--out", state.out_dir, "output directory");
    if (with_eps) {
      cmd->add_option("--eps-rule", state.eps_rule_name,
                      "epsilon rule: invsqrt|thm1|cor2case2|cor2case3|fixed");
      cmd->add_option("--eps-alpha", state.eps_alpha,
                      "alpha for the cor2case3 rule");
      cmd->add_option("--eps-value", state.eps_value,
                      "epsilon for the fixed rule");
    }
  };

  auto* generate = app.add_subcommand(
      "generate", "write one instance JSON per (seed, T)");
  add_common(generate, false);

  auto* run = app.add_subcommand(
      "run", "sweep algorithms x seeds x T; write traces, analysis, summary");
  add_common(run, true);
  run->add_option("--alg", state.algorithm_names,
                  "algorithms: alg1..alg5, baseline (repeatable)");
  run->add_option("--jobs", state.spec.jobs,
                  "worker threads (0 = hardware concurrency)");

  std::string summary_path;
  std::string plot_out = "plots";
  auto* plot = app.add_subcommand(
      "plot", "render the four summary panels as SVG");
  plot->add_option("summary", summary_path, "summary.csv from a run sweep")
      ->required();
  plot->add_option("--out", plot_out, "output directory for the SVG files");

  std::string filter;
  bool mutate_eta = false;
  auto* verify = app.add_subcommand(
      "verify", "run the bound-check battery; nonzero exit on any failure");
  verify->add_option("--filter", filter, "substring filter on check names");
  verify->add_flag("--mutate-eta", mutate_eta,
                   "test fixture: corrupt the step-size rule")
      ->group("");  // hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      finalize_spec(state, false);
      if (state.spec.algorithms.empty()) {
        state.spec.algorithms = {omd::Algorithm::Alg4};
      }
      const auto paths = omd::cmd_generate(state.spec);
      for (const auto& p : paths) std::cout << p.string() << "\n";
      return 0;
    }
    if (run->parsed()) {
      finalize_spec(state, true);
      const auto rows = omd::run_sweep(state.spec);
      int failed = 0;
      for (const auto& r : rows) failed += !r.error.empty();
      std::cout << "summary: " << (state.spec.output_dir / "summary.csv").string()
                << " (" << rows.size() << " runs, " << failed << " failed)\n";
      for (const auto& r : rows) {
        if (!r.error.empty()) {
          std::cout << "  failed: " << r.algorithm << " seed=" << r.seed
                    << " T=" << r.T << ": " << r.error << "\n";
        }
      }
      return 0;
    }
    if (plot->parsed()) {
      const auto rows = omd::load_summary_csv(summary_path);
      const auto written = omd::write_summary_panels(rows, plot_out);
      for (const auto& p : written) std::cout << p.string() << "\n";
      return 0;
    }
    if (verify->parsed()) {
      omd::VerifyOptions options;
      options.filter = filter;
      options.mutate_eta = mutate_eta;
      return omd::run_verify(options, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
