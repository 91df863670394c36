#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "cmx/estimators.hpp"
#include "cmx/generators.hpp"
#include "cmx/oracle.hpp"

namespace cmx {

// Algorithm configuration for the plain NSTORM loop. gamma <= 1 keeps the
// x step size below the y step size.
struct NstormConfig {
  double gamma = 0.1;
  Schedule schedule;
  double c_g = 10.0;
  bool project_feasible = false;
  long T = 1000;
  bool project_initial = false;

  void validate() const {
    if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("NstormConfig: gamma must be in (0,1]");
    if (!(c_g > 0.0)) throw ConfigError("NstormConfig: C_g must be positive");
    if (T < 1) throw ConfigError("NstormConfig: T must be >= 1");
    schedule.validate();
  }
};

// Biased baselines share the NSTORM schedule so comparisons isolate the
// estimator design.
struct ScgdaConfig : NstormConfig {};
struct SgdaConfig : NstormConfig {};

// PL-condition variant: x' = x - gamma*eta*v, y' = y + lambda*eta*w.
struct PlConfig {
  double gamma = 0.1;
  double lambda = 1.0;
  Schedule schedule;
  double c_g = 10.0;
  bool project_feasible = false;
  long T = 1000;
  bool project_initial = false;

  void validate() const {
    if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("PlConfig: gamma must be in (0,1]");
    if (!(lambda > 0.0)) throw ConfigError("PlConfig: lambda must be positive");
    if (!(c_g > 0.0)) throw ConfigError("PlConfig: C_g must be positive");
    if (T < 1) throw ConfigError("PlConfig: T must be >= 1");
    schedule.validate();
  }
};

struct AdaNstormConfig {
  double gamma = 0.1;
  double lambda = 0.1;
  double tau = 0.9;    // (0,1]; tau = 1 freezes the accumulators at zero
  double rho = 0.1;
  GeneratorKind generator = GeneratorKind::Adam;
  double bound_lower = 0.0;   // AdaBound only
  double bound_upper = 100.0;
  Schedule schedule;
  double c_g = 10.0;
  bool project_feasible = false;
  long T = 1000;
  bool project_initial = false;

  void validate() const {
    if (!(gamma > 0.0)) throw ConfigError("AdaNstormConfig: gamma must be positive");
    if (!(lambda > 0.0)) throw ConfigError("AdaNstormConfig: lambda must be positive");
    if (!(tau > 0.0) || tau > 1.0) throw ConfigError("AdaNstormConfig: tau must be in (0,1]");
    if (!(rho > 0.0)) throw ConfigError("AdaNstormConfig: rho must be positive");
    if (generator == GeneratorKind::AdaBound &&
        (!(bound_lower >= 0.0) || !(bound_upper >= bound_lower)))
      throw ConfigError("AdaNstormConfig: AdaBound requires 0 <= C_l <= C_u");
    if (!(c_g > 0.0)) throw ConfigError("AdaNstormConfig: C_g must be positive");
    if (T < 1) throw ConfigError("AdaNstormConfig: T must be >= 1");
    schedule.validate();
  }
};

using MethodConfig = std::variant<NstormConfig, PlConfig, AdaNstormConfig, ScgdaConfig, SgdaConfig>;

const char* method_name(const MethodConfig& cfg);
long method_iterations(const MethodConfig& cfg);

struct Iterates {
  Vec x;
  Vec y;
};

struct StepOutput {
  Vec v;
  Vec w;
  double eta = 0.0;
};

// Single optimizer steps; each draws fresh inner/outer tokens, advances the
// estimators, and applies its update rule.
StepOutput nstorm_step(Iterates& it, EstimatorState& est, const NstormConfig& cfg,
                       const CompositionalOracle& oracle, Rng& rng);
StepOutput pl_step(Iterates& it, EstimatorState& est, const PlConfig& cfg,
                   const CompositionalOracle& oracle, Rng& rng);
StepOutput ada_nstorm_step(Iterates& it, EstimatorState& est, GeneratorState& gen,
                           const AdaNstormConfig& cfg, const CompositionalOracle& oracle,
                           Rng& rng);

// EMA-of-inner-value baseline (SCGDA-style) and the naive plug-in baseline.
struct BaselineState {
  Vec u;
  long t = 0;
};
StepOutput scgda_step(Iterates& it, BaselineState& st, const ScgdaConfig& cfg,
                      const CompositionalOracle& oracle, Rng& rng);
StepOutput sgda_step(Iterates& it, long& t, const SgdaConfig& cfg,
                     const CompositionalOracle& oracle, Rng& rng);

// y initialization: exact maximizer when the oracle declares it, a given
// vector, or K exact ascent steps with a crudely estimated step size.
struct YInitPolicy {
  enum class Kind { ExactYStar, Given, InnerAscent };
  Kind kind = Kind::ExactYStar;
  Vec given;
  int ascent_steps = 100;
};

Vec init_y(const CompositionalOracle& oracle, const Vec& x1, const YInitPolicy& policy);

struct TrajPoint {
  long t = 0;
  long samples = 0;       // cumulative tokens drawn
  double eta = 0.0;
  double path_length = 0.0;
  Vec x, y, v, w;
};

struct Trajectory {
  std::vector<TrajPoint> points;   // at t in {1, log_every, 2*log_every, ..., T}
  long total_samples = 0;
};

struct StepView {
  long t;
  long samples;
  double eta;
  double path_length;
  const Vec& x;
  const Vec& y;
  const Vec& v;
  const Vec& w;
  const EstimatorState* est;   // null for the baselines
};
using StepObserver = std::function<void(const StepView&)>;

// Runs any method for its configured T iterations. Point t = 1 is the
// initial iterate; iterations 2..T update. The observer fires at every
// iteration; the returned trajectory keeps only the log_every grid
// (always including t = 1 and t = T).
Trajectory run_method(const CompositionalOracle& oracle, const MethodConfig& cfg,
                      const Vec& x1, const YInitPolicy& yinit, Rng& rng,
                      long log_every = 1, const StepObserver& obs = {});

// Total displacement along a densely logged trajectory.
double path_length(const Trajectory& traj);

}  // namespace cmx
