#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmx/optimizers.hpp"

namespace cmx {

// Flat key-value config text: one `dotted.path = value` per line, `#` starts
// a comment, blank lines ignored. Duplicate keys are an error.
struct KvFile {
  std::vector<std::pair<std::string, std::string>> items;

  const std::string* find(const std::string& key) const;
  void set(const std::string& key, const std::string& value);  // insert or override
};

KvFile parse_kv(const std::string& text);

struct ProblemSpec {
  std::string kind;  // toy | linquad | portfolio | policy_eval | linear_auc
  std::uint64_t seed = 0;
  std::string data_path;  // optional: returns CSV or a saved instance file

  // toy / linquad noise scales
  double noise_value = 0.5;
  double noise_jac = 0.5;
  double noise_grad = 0.5;

  Index dx = 10, dg = 10, dy = 10;  // linquad

  Index periods = 500, assets = 10;  // portfolio
  double lambda_risk = 1.0;
  double sqrt_floor = 1e-12;
  Index batch = 1;  // portfolio / linear_auc minibatch

  Index states = 50, features = 10;  // policy_eval
  double discount = 0.95;
  double beta_reg = 1.0;

  Index n = 1000, d = 20;  // linear_auc
  double imratio = 0.1;
  double alpha = 0.1;

  // Stable textual identity; two specs with equal strings build the same
  // instance. Used by the comparison validator.
  std::string canonical() const;
};

std::shared_ptr<CompositionalOracle> make_problem(const ProblemSpec& spec);

enum class Metric { GradPhiNorm, ObjectiveGap, EstimatorErrors, PathLength, VNorm, WNorm };

struct RunConfig {
  std::string run_id = "run";
  ProblemSpec problem;
  MethodConfig method;
  std::vector<std::uint64_t> seeds;
  long log_every = 1;
  std::vector<Metric> metrics;
  std::string out_dir = "out";

  // x start: zeros, unit gaussian scaled by x_scale, or an explicit vector.
  std::string x_init = "zeros";  // zeros | gaussian | given
  double x_scale = 1.0;
  Vec x_given;

  // y start: closed-form maximizer, projected exact ascent, or explicit.
  std::string y_init = "";  // defaulted per problem capability
  Vec y_given;
};

struct ParsedConfig {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Validates everything it can and reports every error found, not just the
// first. A config is returned only when the error list is empty.
ParsedConfig parse_config(const std::string& text);
ParsedConfig parse_config_kv(const KvFile& kv);

struct SweepAxis {
  std::string path;  // config key to vary
  std::vector<std::string> values;
};

// Sweep file: a full run config plus `sweep.<path> = v1, v2, ...` axis
// lines, expanded as a Cartesian product (file order, last axis fastest).
struct SweepSpec {
  KvFile base;
  std::vector<SweepAxis> axes;
};

struct ParsedSweep {
  std::optional<SweepSpec> spec;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

ParsedSweep parse_sweep(const std::string& text);

// Cartesian expansion; every point is re-validated from the overridden keys.
std::vector<RunConfig> expand_sweep(const SweepSpec& spec);

const char* metric_name(Metric m);

}  // namespace cmx
