#include "cmx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

namespace cmx {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed, config-independent column order for a given metric set.
std::vector<std::string> columns_for(const std::vector<Metric>& metrics) {
  const bool gap = std::count(metrics.begin(), metrics.end(), Metric::ObjectiveGap) > 0;
  const bool est = std::count(metrics.begin(), metrics.end(), Metric::EstimatorErrors) > 0;
  std::vector<std::string> cols;
  auto want = [&](Metric m) { return std::count(metrics.begin(), metrics.end(), m) > 0; };
  if (want(Metric::GradPhiNorm)) cols.push_back("grad_phi_norm");
  if (gap) {
    cols.push_back("objective_gap");
    cols.push_back("gap_normalized");
  }
  if (est) {
    cols.push_back("err_u");
    cols.push_back("err_vprime");
    cols.push_back("err_vdprime");
    cols.push_back("err_w");
  }
  if (want(Metric::PathLength)) cols.push_back("path_length");
  if (want(Metric::VNorm)) cols.push_back("v_norm");
  if (want(Metric::WNorm)) cols.push_back("w_norm");
  return cols;
}

std::size_t col_index(const std::vector<std::string>& cols, const std::string& name) {
  const auto it = std::find(cols.begin(), cols.end(), name);
  return it == cols.end() ? cols.size() : static_cast<std::size_t>(it - cols.begin());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const int w = std::min<int>(workers, static_cast<int>(n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int k = 0; k < w; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNan;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MetricStats stats_of(std::vector<double> per_seed) {
  MetricStats s;
  s.per_seed = per_seed;
  s.median = median_of(per_seed);
  if (per_seed.empty()) {
    s.mean = s.stddev = kNan;
    return s;
  }
  double sum = 0.0;
  for (double v : per_seed) sum += v;
  s.mean = sum / static_cast<double>(per_seed.size());
  double sq = 0.0;
  for (double v : per_seed) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(per_seed.size()));
  return s;
}

struct SeedOutcome {
  std::vector<MetricsRow> rows;
  bool failed = false;
  std::string error;
  long total_samples = 0;
};

Vec make_x1(const RunConfig& cfg, const Dims& dims, std::uint64_t seed) {
  if (cfg.x_init == "zeros") return Vec::Zero(dims.dx);
  if (cfg.x_init == "gaussian") {
    Rng rng(seed ^ 0x5bf03635bd1a6f3bull);
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec x(dims.dx);
    for (Index i = 0; i < dims.dx; ++i) x[i] = cfg.x_scale * nd(rng);
    return x;
  }
  if (cfg.x_given.size() != dims.dx)
    throw ConfigError("run.x_init: vector has dimension " +
                      std::to_string(cfg.x_given.size()) + ", problem needs " +
                      std::to_string(dims.dx));
  return cfg.x_given;
}

YInitPolicy make_y_policy(const RunConfig& cfg, const Dims& dims) {
  YInitPolicy p;
  if (cfg.y_init == "y_star") {
    p.kind = YInitPolicy::Kind::ExactYStar;
  } else if (cfg.y_init == "ascent") {
    p.kind = YInitPolicy::Kind::InnerAscent;
  } else {
    if (cfg.y_given.size() != dims.dy)
      throw ConfigError("run.y_init: vector has dimension " +
                        std::to_string(cfg.y_given.size()) + ", problem needs " +
                        std::to_string(dims.dy));
    p.kind = YInitPolicy::Kind::Given;
    p.given = cfg.y_given;
  }
  return p;
}

SeedOutcome run_seed(const RunConfig& cfg, const CompositionalOracle& oracle,
                     std::uint64_t seed, const std::vector<std::string>& cols) {
  SeedOutcome out;
  const std::size_t i_phi = col_index(cols, "grad_phi_norm");
  const std::size_t i_gap = col_index(cols, "objective_gap");
  const std::size_t i_eu = col_index(cols, "err_u");
  const std::size_t i_evp = col_index(cols, "err_vprime");
  const std::size_t i_evd = col_index(cols, "err_vdprime");
  const std::size_t i_ew = col_index(cols, "err_w");
  const std::size_t i_plen = col_index(cols, "path_length");
  const std::size_t i_v = col_index(cols, "v_norm");
  const std::size_t i_w = col_index(cols, "w_norm");
  const std::size_t ncols = cols.size();
  const long T = method_iterations(cfg.method);
  const OracleCapabilities caps = oracle.capabilities();
  const char* mname = method_name(cfg.method);

  StepObserver obs = [&](const StepView& view) {
    const bool logged =
        view.t == 1 || view.t == T || (cfg.log_every > 0 && view.t % cfg.log_every == 0);
    if (!logged) return;
    MetricsRow row;
    row.run_id = cfg.run_id;
    row.method = mname;
    row.seed = seed;
    row.t = view.t;
    row.samples = view.samples;
    row.eta = view.eta;
    row.values.assign(ncols, kNan);
    if (i_phi < ncols) row.values[i_phi] = oracle.grad_phi(view.x).norm();
    if (i_gap < ncols) {
      // raw objective value; turned into a gap after all seeds finish
      row.values[i_gap] = caps.has_phi ? oracle.phi(view.x)
                                       : oracle.exact_f(oracle.exact_g(view.x), view.y);
    }
    if (i_eu < ncols && view.est) {
      const EstimatorState& est = *view.est;
      const Vec g = oracle.exact_g(est.prev_x);
      const Mat jac = oracle.exact_jacobian(est.prev_x);
      const Vec gg = oracle.exact_grad_g_f(g, est.prev_y);
      const Vec gy = oracle.exact_grad_y_f(g, est.prev_y);
      row.values[i_eu] = (est.u - g).norm() / (1.0 + g.norm());
      row.values[i_evp] = (est.v_prime - jac).norm() / (1.0 + jac.norm());
      row.values[i_evd] = (est.v_dprime - gg).norm() / (1.0 + gg.norm());
      row.values[i_ew] = (est.w - gy).norm() / (1.0 + gy.norm());
    }
    if (i_plen < ncols) row.values[i_plen] = view.path_length;
    if (i_v < ncols) row.values[i_v] = view.v.norm();
    if (i_w < ncols) row.values[i_w] = view.w.norm();
    out.rows.push_back(std::move(row));
  };

  try {
    Rng rng(seed);
    const Dims dims = oracle.dims();
    const Vec x1 = make_x1(cfg, dims, seed);
    const YInitPolicy yinit = make_y_policy(cfg, dims);
    Trajectory traj = run_method(oracle, cfg.method, x1, yinit, rng, cfg.log_every, obs);
    out.total_samples = traj.total_samples;
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    MetricsRow marker;
    marker.run_id = cfg.run_id;
    marker.method = mname;
    marker.seed = seed;
    marker.t = -1;
    marker.samples = 0;
    marker.eta = kNan;
    marker.values.assign(ncols, kNan);
    marker.failed = true;
    out.rows.push_back(std::move(marker));
  }
  return out;
}

// Turns the raw objective values recorded under objective_gap into gaps
// against phi_min (when published) or the best value observed in this run.
void finish_gap_columns(RunResult& res, const CompositionalOracle& oracle) {
  const std::size_t i_gap = col_index(res.columns, "objective_gap");
  if (i_gap >= res.columns.size()) return;
  const std::size_t i_norm = col_index(res.columns, "gap_normalized");

  const std::optional<double> phi_star = oracle.phi_min();
  double best;
  if (phi_star) {
    res.gap_definition = "phi_star";
    best = *phi_star;
  } else {
    res.gap_definition = "best_observed";
    best = std::numeric_limits<double>::infinity();
    for (const auto& row : res.rows)
      if (!row.failed && std::isfinite(row.values[i_gap]))
        best = std::min(best, row.values[i_gap]);
    if (!std::isfinite(best)) best = 0.0;
  }

  std::uint64_t cur_seed = 0;
  bool have_seed = false;
  double gap1 = kNan;
  for (auto& row : res.rows) {
    if (row.failed) continue;
    row.values[i_gap] -= best;
    if (!have_seed || row.seed != cur_seed) {
      cur_seed = row.seed;
      have_seed = true;
      gap1 = row.values[i_gap];
    }
    row.values[i_norm] = gap1 != 0.0 ? row.values[i_gap] / gap1 : kNan;
  }
}

}  // namespace

RunResult run_single(const RunConfig& cfg, int workers) {
  RunResult res;
  res.cfg = cfg;
  res.columns = columns_for(cfg.metrics);

  std::shared_ptr<CompositionalOracle> oracle = make_problem(cfg.problem);

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), workers, [&](std::size_t i) {
    outcomes[i] = run_seed(cfg, *oracle, cfg.seeds[i], res.columns);
  });

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    SeedOutcome& o = outcomes[i];
    if (o.failed)
      res.failures.push_back({cfg.seeds[i], o.error});
    else {
      res.ok_seeds.push_back(cfg.seeds[i]);
      res.total_samples = o.total_samples;
    }
    for (auto& row : o.rows) res.rows.push_back(std::move(row));
  }

  finish_gap_columns(res, *oracle);

  // finals: the t = T row of every surviving seed
  std::map<std::string, std::vector<double>> finals;
  const long T = method_iterations(cfg.method);
  for (const auto& row : res.rows) {
    if (row.failed || row.t != T) continue;
    for (std::size_t c = 0; c < res.columns.size(); ++c)
      finals[res.columns[c]].push_back(row.values[c]);
  }
  for (auto& [name, vals] : finals) res.finals[name] = stats_of(std::move(vals));
  return res;
}

void write_metrics_csv(const RunResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "run_id,method,seed,t,samples_used,eta_t";
  for (const auto& c : res.columns) out << "," << c;
  out << ",status\n";
  for (const auto& row : res.rows) {
    out << row.run_id << "," << row.method << "," << row.seed << "," << row.t << ","
        << row.samples << "," << fmt17(row.eta);
    for (double v : row.values) out << "," << fmt17(v);
    out << "," << (row.failed ? "failed" : "ok") << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

nlohmann::json stats_json(const MetricStats& s) {
  nlohmann::json j;
  j["median"] = s.median;
  j["mean"] = s.mean;
  j["stddev"] = s.stddev;
  j["per_seed"] = s.per_seed;
  return j;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_summary_json(const RunResult& res, const std::string& path) {
  nlohmann::json j;
  j["run_id"] = res.cfg.run_id;
  j["method"] = method_name(res.cfg.method);
  j["problem"] = res.cfg.problem.canonical();
  j["seeds"] = res.cfg.seeds;
  j["ok_seeds"] = res.ok_seeds;
  j["survivors"] = res.ok_seeds.size();
  j["failures"] = nlohmann::json::array();
  for (const auto& f : res.failures)
    j["failures"].push_back({{"seed", f.seed}, {"error", f.error}});
  j["total_samples"] = res.total_samples;
  if (!res.gap_definition.empty()) j["gap_definition"] = res.gap_definition;
  j["finals"] = nlohmann::json::object();
  for (const auto& [name, s] : res.finals) j["finals"][name] = stats_json(s);
  write_json_file(j, path);
}

SweepResult run_sweep(const SweepSpec& spec, int workers) {
  SweepResult res;
  for (const auto& axis : spec.axes) res.axis_paths.push_back(axis.path);

  std::vector<std::size_t> pick(spec.axes.size(), 0);
  while (true) {
    KvFile kv = spec.base;
    SweepPoint point;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      kv.set(spec.axes[a].path, spec.axes[a].values[pick[a]]);
      point.axis_values.push_back(spec.axes[a].values[pick[a]]);
    }
    ParsedConfig p = parse_config_kv(kv);
    if (!p.ok()) {
      std::string msg = "sweep point invalid:";
      for (const auto& e : p.errors) msg += " " + e + ";";
      throw ConfigError(msg);
    }
    point.result = run_single(*p.config, workers);
    res.points.push_back(std::move(point));

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
  return res;
}

void write_sweep_csv(const SweepResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "point";
  for (const auto& p : res.axis_paths) out << "," << p;
  out << ",survivors";
  const std::vector<std::string>* cols =
      res.points.empty() ? nullptr : &res.points.front().result.columns;
  if (cols)
    for (const auto& c : *cols) out << ",final_" << c;
  out << "\n";
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const SweepPoint& p = res.points[i];
    out << i;
    for (const auto& v : p.axis_values) out << "," << v;
    out << "," << p.result.ok_seeds.size();
    if (cols)
      for (const auto& c : *cols) {
        const auto it = p.result.finals.find(c);
        out << "," << fmt17(it == p.result.finals.end() ? kNan : it->second.median);
      }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

CompareResult compare_methods(const std::vector<RunConfig>& cfgs, int workers) {
  if (cfgs.empty()) throw ConfigError("compare: need at least one config");
  const std::string problem = cfgs.front().problem.canonical();
  const auto& seeds = cfgs.front().seeds;
  const auto columns = columns_for(cfgs.front().metrics);
  for (const auto& cfg : cfgs) {
    if (cfg.problem.canonical() != problem)
      throw ConfigError("compare: configs reference different problems ('" + problem +
                        "' vs '" + cfg.problem.canonical() + "')");
    if (cfg.seeds != seeds) throw ConfigError("compare: configs must share the seed list");
    if (columns_for(cfg.metrics) != columns)
      throw ConfigError("compare: configs must request the same metrics");
  }

  CompareResult res;
  res.columns = columns;
  res.final_budget = std::numeric_limits<long>::max();

  std::vector<RunResult> runs(cfgs.size());
  parallel_for(cfgs.size(), 1, [&](std::size_t i) { runs[i] = run_single(cfgs[i], workers); });

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunResult& run = runs[i];
    std::string name = method_name(cfgs[i].method);
    // disambiguate repeated methods by run_id
    if (std::count_if(cfgs.begin(), cfgs.end(), [&](const RunConfig& c) {
          return std::string(method_name(c.method)) == name;
        }) > 1)
      name += ":" + cfgs[i].run_id;
    res.methods.push_back(name);
    if (run.ok_seeds.empty())
      throw NumericalFailure("compare: every seed of " + name + " failed");

    // median across surviving seeds at each logged t
    std::map<long, std::pair<long, std::vector<std::vector<double>>>> grid;
    for (const auto& row : run.rows) {
      if (row.failed) continue;
      auto& cell = grid[row.t];
      cell.first = row.samples;
      if (cell.second.empty()) cell.second.resize(columns.size());
      for (std::size_t c = 0; c < columns.size(); ++c)
        cell.second[c].push_back(row.values[c]);
    }
    long max_samples = 0;
    for (const auto& [t, cell] : grid) {
      CompareResult::Row row;
      row.method = name;
      row.t = t;
      row.samples = cell.first;
      for (const auto& vals : cell.second) row.medians.push_back(median_of(vals));
      max_samples = std::max(max_samples, cell.first);
      res.rows.push_back(std::move(row));
    }
    res.final_budget = std::min(res.final_budget, max_samples);
  }

  std::stable_sort(res.rows.begin(), res.rows.end(),
                   [](const CompareResult::Row& a, const CompareResult::Row& b) {
                     return a.samples != b.samples ? a.samples < b.samples
                                                   : a.method < b.method;
                   });

  // per-method final point within the common budget
  for (const auto& name : res.methods) {
    const CompareResult::Row* last = nullptr;
    for (const auto& row : res.rows)
      if (row.method == name && row.samples <= res.final_budget) last = &row;
    if (!last) throw NumericalFailure("compare: " + name + " has no point within the budget");
    for (std::size_t c = 0; c < columns.size(); ++c)
      res.finals[name][columns[c]] = last->medians[c];
  }
  for (const auto& col : columns) {
    std::string winner = "tie";
    double best = std::numeric_limits<double>::infinity();
    bool unique = false;
    for (const auto& name : res.methods) {
      const double v = res.finals[name][col];
      if (std::isnan(v)) continue;
      if (v < best) {
        best = v;
        winner = name;
        unique = true;
      } else if (v == best) {
        unique = false;
      }
    }
    res.winners[col] = unique ? winner : "tie";
  }
  return res;
}

void write_compare_csv(const CompareResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "method,t,samples_used";
  for (const auto& c : res.columns) out << ",median_" << c;
  out << "\n";
  for (const auto& row : res.rows) {
    out << row.method << "," << row.t << "," << row.samples;
    for (double v : row.medians) out << "," << fmt17(v);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_compare_json(const CompareResult& res, const std::string& path) {
  nlohmann::json j;
  j["methods"] = res.methods;
  j["final_budget"] = res.final_budget;
  j["finals"] = res.finals;
  j["winners"] = res.winners;
  write_json_file(j, path);
}

}  // namespace cmx
