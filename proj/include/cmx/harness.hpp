#pragma once

#include <map>
#include <string>
#include <vector>

#include "cmx/config.hpp"

namespace cmx {

struct MetricsRow {
  std::string run_id;
  std::string method;
  std::uint64_t seed = 0;
  long t = 0;
  long samples = 0;
  double eta = 0.0;
  std::vector<double> values;  // aligned with RunResult::columns
  bool failed = false;         // marker row for a seed that threw
};

struct MetricStats {
  std::vector<double> per_seed;  // aligned with RunResult::ok_seeds
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string error;
};

struct RunResult {
  RunConfig cfg;
  std::vector<std::string> columns;  // metric column names, canonical order
  std::vector<MetricsRow> rows;      // grouped by seed, t increasing
  std::vector<std::uint64_t> ok_seeds;
  std::vector<SeedFailure> failures;
  std::map<std::string, MetricStats> finals;  // per column, at t = T
  std::string gap_definition;  // "phi_star" or "best_observed" when gap requested
  long total_samples = 0;      // per surviving seed (identical across seeds)
};

// Executes every seed (concurrently up to `workers`), never letting one
// failed seed abort its siblings. Output is deterministic for a fixed
// config regardless of worker count.
RunResult run_single(const RunConfig& cfg, int workers = 1);

void write_metrics_csv(const RunResult& res, const std::string& path);
void write_summary_json(const RunResult& res, const std::string& path);

struct SweepPoint {
  std::vector<std::string> axis_values;  // aligned with SweepSpec::axes
  RunResult result;
};

struct SweepResult {
  std::vector<std::string> axis_paths;
  std::vector<SweepPoint> points;
};

SweepResult run_sweep(const SweepSpec& spec, int workers = 1);
void write_sweep_csv(const SweepResult& res, const std::string& path);

struct CompareResult {
  std::vector<std::string> methods;  // method names, one per input config
  std::vector<std::string> columns;  // shared metric columns
  // one row per (method, logged point): medians across seeds
  struct Row {
    std::string method;
    long t = 0;
    long samples = 0;
    std::vector<double> medians;
  };
  std::vector<Row> rows;
  long final_budget = 0;  // largest samples_used reached by every method
  std::map<std::string, std::map<std::string, double>> finals;  // method -> column -> value
  std::map<std::string, std::string> winners;                   // column -> method or "tie"
};

// All configs must share the same problem instance, seeds and metric set.
CompareResult compare_methods(const std::vector<RunConfig>& cfgs, int workers = 1);
void write_compare_csv(const CompareResult& res, const std::string& path);
void write_compare_json(const CompareResult& res, const std::string& path);

}  // namespace cmx
