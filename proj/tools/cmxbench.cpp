// Benchmark CLI: run experiment configs, sweep hyperparameters, compare
// methods, and generate reproducible problem instances.
// Exit codes: 0 success, 1 validation/config error, 2 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cmx/data.hpp"
#include "cmx/harness.hpp"
#include "cmx/problems/policy_eval.hpp"

namespace {

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationFailure("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve_out_dir(const std::string& flag, const std::string& cfg_dir) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CMX_OUT_DIR"); env && *env) return env;
  return cfg_dir;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw cmx::IoError("cannot create output directory: " + dir);
}

cmx::RunConfig parse_or_fail(const std::string& path) {
  cmx::ParsedConfig parsed = cmx::parse_config(read_file(path));
  if (!parsed.ok()) {
    std::string msg = path + ": invalid config\n";
    for (const auto& e : parsed.errors) msg += "  " + e + "\n";
    throw ValidationFailure(msg);
  }
  return *parsed.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compositional minimax optimization benchmarks"};
  app.require_subcommand(1);

  std::string out_dir_flag;
  int workers = 1;
  bool quiet = false;
  app.add_option("--out-dir", out_dir_flag, "output directory (overrides config and CMX_OUT_DIR)");
  app.add_option("--workers", workers, "worker threads for seeds")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress progress output");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "execute one run config");
  run_cmd->add_option("config", config_path, "config file")->required();

  std::string sweep_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "expand and execute a hyperparameter sweep");
  sweep_cmd->add_option("config", sweep_path, "sweep config file")->required();

  std::vector<std::string> compare_paths;
  auto* compare_cmd = app.add_subcommand("compare", "compare methods on one problem");
  compare_cmd->add_option("configs", compare_paths, "config files, one per method")
      ->required()
      ->expected(-1);

  long gen_states = 50;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* mdp_cmd = app.add_subcommand("gen-mdp", "generate and save an MDP instance");
  mdp_cmd->add_option("--states", gen_states, "state count")->check(CLI::Range(2l, 100000l));
  mdp_cmd->add_option("--seed", gen_seed, "generation seed");
  mdp_cmd->add_option("--out", gen_out, "output file")->required();

  long auc_n = 1000, auc_d = 20;
  double auc_imratio = 0.1;
  auto* auc_cmd = app.add_subcommand("gen-auc-data", "generate and save a binary dataset");
  auc_cmd->add_option("--n", auc_n, "example count")->check(CLI::Range(2l, 10000000l));
  auc_cmd->add_option("--d", auc_d, "feature dimension")->check(CLI::PositiveNumber);
  auc_cmd->add_option("--imratio", auc_imratio, "positive-class fraction");
  auc_cmd->add_option("--seed", gen_seed, "generation seed");
  auc_cmd->add_option("--out", gen_out, "output file")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      cmx::RunConfig cfg = parse_or_fail(config_path);
      const std::string dir = resolve_out_dir(out_dir_flag, cfg.out_dir);
      ensure_dir(dir);
      cmx::RunResult res = cmx::run_single(cfg, workers);
      cmx::write_metrics_csv(res, dir + "/metrics.csv");
      cmx::write_summary_json(res, dir + "/summary.json");
      if (!quiet)
        std::cout << "run " << cfg.run_id << ": " << res.ok_seeds.size() << "/"
                  << cfg.seeds.size() << " seeds ok, wrote " << dir << "/metrics.csv\n";
      if (res.ok_seeds.empty()) throw cmx::NumericalFailure("every seed failed");
    } else if (*sweep_cmd) {
      cmx::ParsedSweep parsed = cmx::parse_sweep(read_file(sweep_path));
      if (!parsed.ok()) {
        std::string msg = sweep_path + ": invalid sweep\n";
        for (const auto& e : parsed.errors) msg += "  " + e + "\n";
        throw ValidationFailure(msg);
      }
      const cmx::ParsedConfig base = cmx::parse_config_kv(parsed.spec->base);
      const std::string dir = resolve_out_dir(out_dir_flag, base.config->out_dir);
      ensure_dir(dir);
      cmx::SweepResult res = cmx::run_sweep(*parsed.spec, workers);
      cmx::write_sweep_csv(res, dir + "/sweep.csv");
      for (std::size_t i = 0; i < res.points.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "point_%03zu_summary.json", i);
        cmx::write_summary_json(res.points[i].result, dir + "/" + name);
      }
      if (!quiet)
        std::cout << "sweep: " << res.points.size() << " points, wrote " << dir
                  << "/sweep.csv\n";
    } else if (*compare_cmd) {
      std::vector<cmx::RunConfig> cfgs;
      for (const auto& p : compare_paths) cfgs.push_back(parse_or_fail(p));
      const std::string dir = resolve_out_dir(out_dir_flag, cfgs.front().out_dir);
      ensure_dir(dir);
      cmx::CompareResult res;
      try {
        res = cmx::compare_methods(cfgs, workers);
      } catch (const cmx::ConfigError& e) {
        throw ValidationFailure(e.what());
      }
      cmx::write_compare_csv(res, dir + "/compare.csv");
      cmx::write_compare_json(res, dir + "/compare.json");
      if (!quiet) {
        std::cout << "compare: budget " << res.final_budget << " samples\n";
        for (const auto& [col, winner] : res.winners)
          std::cout << "  " << col << ": " << winner << "\n";
      }
    } else if (*mdp_cmd) {
      cmx::Mat p, r;
      cmx::generate_mdp(gen_states, gen_seed, p, r);
      cmx::save_mdp_instance(gen_out, gen_seed, p, r);
      if (!quiet) std::cout << "wrote " << gen_out << "\n";
    } else if (*auc_cmd) {
      cmx::AucDataset data;
      try {
        data = cmx::make_imbalanced_gaussian(auc_n, auc_d, auc_imratio, gen_seed);
      } catch (const cmx::ConfigError& e) {
        throw ValidationFailure(e.what());
      }
      cmx::save_auc_instance(gen_out, gen_seed, data);
      if (!quiet) std::cout << "wrote " << gen_out << "\n";
    }
  } catch (const ValidationFailure& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const cmx::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const cmx::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
