#include "cmx/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <set>
#include <sstream>

#include "cmx/data.hpp"
#include "cmx/problems/linear_auc.hpp"
#include "cmx/problems/linquad.hpp"
#include "cmx/problems/policy_eval.hpp"
#include "cmx/problems/portfolio.hpp"
#include "cmx/problems/toy.hpp"

namespace cmx {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

const std::string* KvFile::find(const std::string& key) const {
  for (const auto& [k, v] : items)
    if (k == key) return &v;
  return nullptr;
}

void KvFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : items)
    if (k == key) {
      v = value;
      return;
    }
  items.emplace_back(key, value);
}

KvFile parse_kv(const std::string& text) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("line " + std::to_string(lineno) + ": empty key");
    if (kv.find(key))
      throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.items.emplace_back(key, value);
  }
  return kv;
}

namespace {

// Pulls typed values out of a KvFile, remembering which keys were touched so
// that leftovers can be reported as unknown, and collecting every error.
class Reader {
 public:
  explicit Reader(const KvFile& kv) : kv_(kv) {}

  std::vector<std::string>& errors() { return errors_; }

  void fail(const std::string& path, const std::string& msg) {
    errors_.push_back(path + ": " + msg);
  }

  bool has(const std::string& key) {
    return kv_.find(key) != nullptr;
  }

  std::string get_string(const std::string& key, const std::string& dflt) {
    consumed_.insert(key);
    const std::string* v = kv_.find(key);
    return v ? *v : dflt;
  }

  double get_double(const std::string& key, double dflt) {
    consumed_.insert(key);
    const std::string* v = kv_.find(key);
    if (!v) return dflt;
    double out = dflt;
    if (!parse_double(*v, out)) fail(key, "not a number: '" + *v + "'");
    return out;
  }

  long get_long(const std::string& key, long dflt) {
    consumed_.insert(key);
    const std::string* v = kv_.find(key);
    if (!v) return dflt;
    errno = 0;
    char* end = nullptr;
    const long out = std::strtol(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0' || errno == ERANGE) {
      fail(key, "not an integer: '" + *v + "'");
      return dflt;
    }
    return out;
  }

  bool get_bool(const std::string& key, bool dflt) {
    consumed_.insert(key);
    const std::string* v = kv_.find(key);
    if (!v) return dflt;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    fail(key, "not a boolean (true/false): '" + *v + "'");
    return dflt;
  }

  std::vector<std::string> get_list(const std::string& key, const std::string& dflt) {
    return split_list(get_string(key, dflt));
  }

  void report_unknown(const std::string& prefix) {
    for (const auto& [k, v] : kv_.items) {
      if (k.rfind(prefix, 0) != 0) continue;
      if (!consumed_.count(k)) errors_.push_back(k + ": unknown key");
    }
  }

  static bool parse_double(const std::string& s, double& out) {
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0' && errno != ERANGE;
  }

 private:
  const KvFile& kv_;
  std::set<std::string> consumed_;
  std::vector<std::string> errors_;
};

struct KindCaps {
  bool grad_phi;
  bool phi;
  bool y_star;
};

bool kind_caps(const std::string& kind, KindCaps& caps) {
  if (kind == "toy" || kind == "linquad") {
    caps = {true, true, true};
    return true;
  }
  if (kind == "portfolio") {
    caps = {false, false, false};
    return true;
  }
  if (kind == "policy_eval" || kind == "linear_auc") {
    caps = {false, true, true};
    return true;
  }
  return false;
}

void read_problem(Reader& r, ProblemSpec& p) {
  p.kind = r.get_string("problem.kind", "");
  p.seed = static_cast<std::uint64_t>(r.get_long("problem.seed", 0));
  p.data_path = r.get_string("problem.data", "");

  KindCaps caps{};
  if (!kind_caps(p.kind, caps)) {
    r.fail("problem.kind",
           "must be one of toy, linquad, portfolio, policy_eval, linear_auc (got '" +
               p.kind + "')");
    return;
  }

  if (p.kind == "toy" || p.kind == "linquad") {
    const double dflt = p.kind == "toy" ? 0.5 : 0.1;
    p.noise_value = r.get_double("problem.noise_value", dflt);
    p.noise_jac = r.get_double("problem.noise_jac", dflt);
    p.noise_grad = r.get_double("problem.noise_grad", dflt);
    if (p.noise_value < 0 || p.noise_jac < 0 || p.noise_grad < 0)
      r.fail("problem.noise_*", "noise scales must be nonnegative");
  }
  if (p.kind == "linquad") {
    p.dx = r.get_long("problem.dx", 10);
    p.dg = r.get_long("problem.dg", 10);
    p.dy = r.get_long("problem.dy", 10);
    if (p.dx < 1 || p.dg < 1 || p.dy < 1) r.fail("problem.d*", "dimensions must be positive");
  }
  if (p.kind == "portfolio") {
    p.periods = r.get_long("problem.periods", 500);
    p.assets = r.get_long("problem.assets", 10);
    p.lambda_risk = r.get_double("problem.lambda_risk", 1.0);
    p.sqrt_floor = r.get_double("problem.sqrt_floor", 1e-12);
    p.batch = r.get_long("problem.batch", 1);
    if (p.lambda_risk < 0) r.fail("problem.lambda_risk", "must be nonnegative");
    if (!(p.sqrt_floor > 0)) r.fail("problem.sqrt_floor", "must be positive");
    if (p.batch < 1) r.fail("problem.batch", "must be >= 1");
  }
  if (p.kind == "policy_eval") {
    p.states = r.get_long("problem.states", 50);
    p.features = r.get_long("problem.features", 10);
    p.discount = r.get_double("problem.discount", 0.95);
    p.beta_reg = r.get_double("problem.beta_reg", 1.0);
    if (p.states < 2) r.fail("problem.states", "must be >= 2");
    if (p.features < 1) r.fail("problem.features", "must be >= 1");
    if (!(p.discount >= 0) || p.discount >= 1) r.fail("problem.discount", "must be in [0,1)");
    if (p.beta_reg < 0) r.fail("problem.beta_reg", "must be nonnegative");
  }
  if (p.kind == "linear_auc") {
    p.n = r.get_long("problem.n", 1000);
    p.d = r.get_long("problem.d", 20);
    p.imratio = r.get_double("problem.imratio", 0.1);
    p.alpha = r.get_double("problem.alpha", 0.1);
    p.batch = r.get_long("problem.batch", 16);
    if (!(p.imratio > 0) || !(p.imratio < 1)) r.fail("problem.imratio", "must be in (0,1)");
    if (!(p.alpha > 0)) r.fail("problem.alpha", "must be positive");
    if (p.batch < 1) r.fail("problem.batch", "must be >= 1");
  }
  r.report_unknown("problem.");
}

void read_schedule(Reader& r, Schedule& s) {
  s.m = r.get_double("method.schedule.m", s.m);
  s.c1 = r.get_double("method.schedule.c1", s.c1);
  s.c2 = r.get_double("method.schedule.c2", s.c2);
  try {
    s.validate();
  } catch (const Error& e) {
    r.fail("method.schedule", e.what());
  }
}

template <typename Cfg>
void read_common_method(Reader& r, Cfg& cfg) {
  cfg.gamma = r.get_double("method.gamma", cfg.gamma);
  cfg.c_g = r.get_double("method.c_g", cfg.c_g);
  cfg.T = r.get_long("method.T", cfg.T);
  cfg.project_feasible = r.get_bool("method.project_feasible", cfg.project_feasible);
  cfg.project_initial = r.get_bool("method.project_initial", cfg.project_initial);
  read_schedule(r, cfg.schedule);
}

bool read_method(Reader& r, MethodConfig& out) {
  const std::string kind = r.get_string("method.kind", "");
  if (kind == "nstorm") {
    NstormConfig c;
    read_common_method(r, c);
    out = c;
  } else if (kind == "scgda") {
    ScgdaConfig c;
    read_common_method(r, c);
    out = c;
  } else if (kind == "sgda") {
    SgdaConfig c;
    read_common_method(r, c);
    out = c;
  } else if (kind == "nstorm_pl") {
    PlConfig c;
    read_common_method(r, c);
    c.lambda = r.get_double("method.lambda", c.lambda);
    out = c;
  } else if (kind == "ada_nstorm") {
    AdaNstormConfig c;
    read_common_method(r, c);
    c.lambda = r.get_double("method.lambda", c.lambda);
    c.tau = r.get_double("method.tau", c.tau);
    c.rho = r.get_double("method.rho", c.rho);
    c.bound_lower = r.get_double("method.bound_lower", c.bound_lower);
    c.bound_upper = r.get_double("method.bound_upper", c.bound_upper);
    const std::string gen = r.get_string("method.generator", "adam");
    if (gen == "adam")
      c.generator = GeneratorKind::Adam;
    else if (gen == "amsgrad")
      c.generator = GeneratorKind::AmsGrad;
    else if (gen == "adabelief")
      c.generator = GeneratorKind::AdaBelief;
    else if (gen == "adabound")
      c.generator = GeneratorKind::AdaBound;
    else
      r.fail("method.generator", "must be adam, amsgrad, adabelief or adabound (got '" +
                                     gen + "')");
    out = c;
  } else {
    r.fail("method.kind",
           "must be one of nstorm, nstorm_pl, ada_nstorm, scgda, sgda (got '" + kind + "')");
    r.report_unknown("method.");
    return false;
  }
  r.report_unknown("method.");
  try {
    std::visit([](const auto& c) { c.validate(); }, out);
  } catch (const Error& e) {
    r.fail("method", e.what());
  }
  return true;
}

bool parse_vec(const std::string& text, Vec& out) {
  const auto parts = split_list(text);
  out.resize(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    double v;
    if (!Reader::parse_double(parts[i], v)) return false;
    out[static_cast<Index>(i)] = v;
  }
  return true;
}

void read_run(Reader& r, RunConfig& cfg, bool have_kinds) {
  cfg.run_id = r.get_string("run.id", "run");
  cfg.log_every = r.get_long("run.log_every", 1);
  if (cfg.log_every < 1) r.fail("run.log_every", "must be >= 1");
  cfg.out_dir = r.get_string("output.dir", "out");

  for (const std::string& s : r.get_list("run.seeds", "1")) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
      r.fail("run.seeds", "not an integer: '" + s + "'");
      continue;
    }
    cfg.seeds.push_back(v);
  }
  if (cfg.seeds.empty()) r.fail("run.seeds", "need at least one seed");

  KindCaps caps{};
  const bool caps_known = have_kinds && kind_caps(cfg.problem.kind, caps);
  const std::string mkind = cfg.problem.kind.empty() ? "" : method_name(cfg.method);
  const bool storm_family =
      mkind == "nstorm" || mkind == "nstorm_pl" || mkind == "ada_nstorm";

  std::set<Metric> seen;
  for (const std::string& name : r.get_list("run.metrics", "v_norm,w_norm")) {
    Metric m;
    if (name == "grad_phi_norm")
      m = Metric::GradPhiNorm;
    else if (name == "objective_gap")
      m = Metric::ObjectiveGap;
    else if (name == "estimator_errors")
      m = Metric::EstimatorErrors;
    else if (name == "path_length")
      m = Metric::PathLength;
    else if (name == "v_norm")
      m = Metric::VNorm;
    else if (name == "w_norm")
      m = Metric::WNorm;
    else {
      r.fail("run.metrics", "unknown metric '" + name + "'");
      continue;
    }
    if (!seen.insert(m).second) continue;
    if (caps_known) {
      if (m == Metric::GradPhiNorm && !caps.grad_phi)
        r.fail("run.metrics", "capability grad_phi missing on problem " + cfg.problem.kind);
      if (m == Metric::EstimatorErrors && have_kinds && !storm_family)
        r.fail("run.metrics", "estimator_errors only applies to nstorm-family methods");
    }
    cfg.metrics.push_back(m);
  }

  cfg.x_init = r.get_string("run.x_init", "zeros");
  cfg.x_scale = r.get_double("run.x_scale", 1.0);
  if (cfg.x_init != "zeros" && cfg.x_init != "gaussian") {
    Vec given;
    if (parse_vec(cfg.x_init, given)) {
      cfg.x_given = std::move(given);
      cfg.x_init = "given";
    } else {
      r.fail("run.x_init", "must be zeros, gaussian, or a comma list of numbers");
    }
  }

  cfg.y_init = r.get_string("run.y_init", "");
  if (cfg.y_init.empty()) {
    cfg.y_init = caps_known && caps.y_star ? "y_star" : "ascent";
  } else if (cfg.y_init != "y_star" && cfg.y_init != "ascent") {
    Vec given;
    if (parse_vec(cfg.y_init, given)) {
      cfg.y_given = std::move(given);
      cfg.y_init = "given";
    } else {
      r.fail("run.y_init", "must be y_star, ascent, or a comma list of numbers");
    }
  }
  if (cfg.y_init == "y_star" && caps_known && !caps.y_star)
    r.fail("run.y_init", "capability y_star missing on problem " + cfg.problem.kind);

  r.report_unknown("run.");
  r.report_unknown("output.");
}

}  // namespace

ParsedConfig parse_config_kv(const KvFile& kv) {
  ParsedConfig out;
  Reader r(kv);
  RunConfig cfg;

  read_problem(r, cfg.problem);
  const bool have_method = read_method(r, cfg.method);
  read_run(r, cfg, have_method && !cfg.problem.kind.empty());

  for (const auto& [k, v] : kv.items) {
    if (k.rfind("problem.", 0) == 0 || k.rfind("method.", 0) == 0 ||
        k.rfind("run.", 0) == 0 || k.rfind("output.", 0) == 0 || k.rfind("sweep.", 0) == 0)
      continue;
    r.errors().push_back(k + ": unknown key");
  }

  out.errors = r.errors();
  std::sort(out.errors.begin(), out.errors.end());
  if (out.errors.empty()) out.config = std::move(cfg);
  return out;
}

ParsedConfig parse_config(const std::string& text) {
  try {
    return parse_config_kv(parse_kv(text));
  } catch (const ParseError& e) {
    ParsedConfig out;
    out.errors.push_back(e.what());
    return out;
  }
}

ParsedSweep parse_sweep(const std::string& text) {
  ParsedSweep out;
  KvFile kv;
  try {
    kv = parse_kv(text);
  } catch (const ParseError& e) {
    out.errors.push_back(e.what());
    return out;
  }

  SweepSpec spec;
  for (const auto& [k, v] : kv.items) {
    if (k.rfind("sweep.", 0) != 0) {
      spec.base.items.emplace_back(k, v);
      continue;
    }
    SweepAxis axis;
    axis.path = k.substr(6);
    axis.values = split_list(v);
    if (axis.path.empty() || axis.values.empty()) {
      out.errors.push_back(k + ": axis needs a path and at least one value");
      continue;
    }
    spec.axes.push_back(std::move(axis));
  }

  ParsedConfig base = parse_config_kv(spec.base);
  for (const auto& e : base.errors) out.errors.push_back("base: " + e);

  // Every axis path must resolve: a single-point override must still parse.
  for (const auto& axis : spec.axes) {
    KvFile probe = spec.base;
    probe.set(axis.path, axis.values.front());
    ParsedConfig p = parse_config_kv(probe);
    if (!p.ok() && base.ok())
      out.errors.push_back("sweep." + axis.path + ": does not resolve against the base config");
  }

  if (out.errors.empty()) out.spec = std::move(spec);
  return out;
}

std::vector<RunConfig> expand_sweep(const SweepSpec& spec) {
  std::vector<RunConfig> points;
  std::vector<std::size_t> pick(spec.axes.size(), 0);
  while (true) {
    KvFile kv = spec.base;
    for (std::size_t a = 0; a < spec.axes.size(); ++a)
      kv.set(spec.axes[a].path, spec.axes[a].values[pick[a]]);
    ParsedConfig p = parse_config_kv(kv);
    if (!p.ok()) {
      std::string msg = "sweep point invalid:";
      for (const auto& e : p.errors) msg += " " + e + ";";
      throw ConfigError(msg);
    }
    points.push_back(std::move(*p.config));
    // odometer increment, last axis fastest
    bool carried_out = true;
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      if (++pick[a] < spec.axes[a].values.size()) {
        carried_out = false;
        break;
      }
      pick[a] = 0;
    }
    if (carried_out) break;
  }
  return points;
}

std::string ProblemSpec::canonical() const {
  std::ostringstream ss;
  ss << kind << " seed=" << seed;
  if (!data_path.empty()) ss << " data=" << data_path;
  if (kind == "toy" || kind == "linquad")
    ss << " noise=" << noise_value << "," << noise_jac << "," << noise_grad;
  if (kind == "linquad") ss << " dims=" << dx << "," << dg << "," << dy;
  if (kind == "portfolio")
    ss << " periods=" << periods << " assets=" << assets << " lambda=" << lambda_risk
       << " floor=" << sqrt_floor << " batch=" << batch;
  if (kind == "policy_eval")
    ss << " states=" << states << " features=" << features << " discount=" << discount
       << " beta=" << beta_reg;
  if (kind == "linear_auc")
    ss << " n=" << n << " d=" << d << " imratio=" << imratio << " alpha=" << alpha
       << " batch=" << batch;
  return ss.str();
}

std::shared_ptr<CompositionalOracle> make_problem(const ProblemSpec& spec) {
  if (spec.kind == "toy") return make_toy(spec.noise_value, spec.noise_jac, spec.noise_grad);
  if (spec.kind == "linquad")
    return make_linquad(spec.dx, spec.dg, spec.dy, spec.seed, spec.noise_value, spec.noise_jac,
                        spec.noise_grad);
  if (spec.kind == "portfolio") {
    Mat returns = spec.data_path.empty()
                      ? synthetic_returns(spec.periods, spec.assets, spec.seed)
                      : load_returns_csv(spec.data_path);
    return make_portfolio(std::move(returns), spec.lambda_risk, spec.sqrt_floor, spec.batch);
  }
  if (spec.kind == "policy_eval") {
    if (spec.data_path.empty())
      return make_policy_eval(spec.states, spec.features, spec.seed, spec.discount,
                              spec.beta_reg);
    std::uint64_t file_seed = 0;
    Mat p, rw;
    load_mdp_instance(spec.data_path, file_seed, p, rw);
    Rng rng(file_seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat z(p.rows(), spec.features);
    for (Index s = 0; s < z.rows(); ++s)
      for (Index k = 0; k < z.cols(); ++k) z(s, k) = nd(rng);
    return make_policy_eval(std::move(p), std::move(rw), std::move(z), spec.discount,
                            spec.beta_reg);
  }
  if (spec.kind == "linear_auc") {
    AucDataset data;
    if (spec.data_path.empty()) {
      data = make_imbalanced_gaussian(spec.n, spec.d, spec.imratio, spec.seed);
    } else {
      std::uint64_t file_seed = 0;
      data = load_auc_instance(spec.data_path, file_seed);
    }
    return make_linear_auc(std::move(data), spec.alpha, spec.batch);
  }
  throw ConfigError("make_problem: unknown kind '" + spec.kind + "'");
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::GradPhiNorm: return "grad_phi_norm";
    case Metric::ObjectiveGap: return "objective_gap";
    case Metric::EstimatorErrors: return "estimator_errors";
    case Metric::PathLength: return "path_length";
    case Metric::VNorm: return "v_norm";
    case Metric::WNorm: return "w_norm";
  }
  return "?";
}

}  // namespace cmx
