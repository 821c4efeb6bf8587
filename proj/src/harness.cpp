#include "sparseoc/harness.hpp"

#include "sparseoc/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace sparseoc {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ExampleKind kind) {
  switch (kind) {
    case ExampleKind::example1: return "example1";
    case ExampleKind::example2_comparison: return "example2_comparison";
    case ExampleKind::example3_box: return "example3_box";
    case ExampleKind::custom: return "custom";
  }
  return "custom";
}

ExampleKind example_from_string(const std::string& name) {
  if (name == "example1") return ExampleKind::example1;
  if (name == "example2_comparison") return ExampleKind::example2_comparison;
  if (name == "example3_box") return ExampleKind::example3_box;
  if (name == "custom") return ExampleKind::custom;
  throw std::invalid_argument("unknown example '" + name + "'");
}

const char* to_string(Algorithm a) { return a == Algorithm::dca ? "dca" : "pd"; }

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "dca") return Algorithm::dca;
  if (name == "pd") return Algorithm::pd;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

ResolvedConfig resolve(const RunConfig& c) {
  ResolvedConfig r;
  r.alpha = 0.25;
  r.beta = 2e-4;
  r.gamma = 1000.0;
  r.p = 2.0;
  r.max_outer = 200;
  switch (c.example) {
    case ExampleKind::example1:
    case ExampleKind::custom:
      break;
    case ExampleKind::example2_comparison:
      r.alpha = 0.0;
      r.beta = 5e-4;
      r.quadrature = QuadratureRule::uniform;
      r.gradient_weight = 1.0;
      r.max_outer = 100;
      break;
    case ExampleKind::example3_box:
      r.alpha = 0.0;
      r.beta = 1e-4;
      r.box = std::pair{-0.035, 0.035};
      break;
  }
  if (c.alpha) r.alpha = *c.alpha;
  if (c.beta) r.beta = *c.beta;
  if (c.p) r.p = *c.p;
  if (c.box) r.box = c.box;
  if (c.quadrature) r.quadrature = *c.quadrature;
  if (c.gradient_weight) r.gradient_weight = *c.gradient_weight;
  if (c.max_outer) r.max_outer = *c.max_outer;
  if (c.example == ExampleKind::example2_comparison && r.p > 1.0) {
    const MatchedRegularization m = match_regularization(r.p, c.regularization_error, c.regularization_measure);
    r.gamma = m.gamma;
    r.epsilon = m.epsilon;
  } else {
    r.epsilon = 1e-4;
  }
  if (c.gamma) r.gamma = *c.gamma;
  if (c.epsilon) r.epsilon = *c.epsilon;
  return r;
}

void validate(const RunConfig& c) {
  if (c.n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (c.alpha && !(*c.alpha >= 0.0)) throw std::invalid_argument("config: alpha must be >= 0");
  if (c.beta && !(*c.beta >= 0.0)) throw std::invalid_argument("config: beta must be >= 0");
  if (c.gamma && !(*c.gamma > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
  if (c.p && !(*c.p >= 1.0)) throw std::invalid_argument("config: p must be >= 1");
  if (!(c.outer_tol > 0.0)) throw std::invalid_argument("config: outer_tol must be > 0");
  if (c.max_outer && *c.max_outer < 0) throw std::invalid_argument("config: max_outer must be >= 0");
  if (c.inner_max_iter < 1) throw std::invalid_argument("config: inner_max_iter must be >= 1");
  if (c.epsilon && !(*c.epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be > 0");
  if (c.gradient_weight && !(*c.gradient_weight >= 0.0))
    throw std::invalid_argument("config: gradient_weight must be >= 0");
  if (!(c.regularization_error > 0.0)) throw std::invalid_argument("config: regularization_error must be > 0");
  if (c.box) {
    const auto [lo, hi] = *c.box;
    if (!(lo <= 0.0 && hi >= 0.0 && lo < hi)) throw std::invalid_argument("config: box needs lo <= 0 <= hi, lo < hi");
  }
  if (c.sweep) {
    static const std::set<std::string> allowed{"gamma", "beta", "p", "alpha"};
    if (!allowed.count(c.sweep->param)) throw std::invalid_argument("config: cannot sweep '" + c.sweep->param + "'");
    if (c.sweep->values.empty()) throw std::invalid_argument("config: empty sweep");
  }
}

namespace {

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::set<std::string> known{
      "example", "n", "alpha", "beta", "gamma", "p", "box", "algorithm", "outer_tol", "max_outer",
      "inner_max_iter", "sweep", "output_dir", "seed", "quadrature", "linear_solver", "c0", "gradient_weight",
      "y_d_constant", "f_constant", "epsilon", "row2_sign", "regularization_error", "regularization_measure"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw std::invalid_argument("config: unknown key '" + item.key() + "'");
  }
  RunConfig c;
  try {
    if (j.contains("example")) c.example = example_from_string(j.at("example").get<std::string>());
    read(j, "n", c.n);
    read_opt(j, "alpha", c.alpha);
    read_opt(j, "beta", c.beta);
    read_opt(j, "gamma", c.gamma);
    read_opt(j, "p", c.p);
    if (j.contains("box") && !j.at("box").is_null()) {
      const auto b = j.at("box").get<std::vector<double>>();
      if (b.size() != 2) throw std::invalid_argument("config: box must be [lo, hi]");
      c.box = std::pair{b[0], b[1]};
    }
    if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    read(j, "outer_tol", c.outer_tol);
    read_opt(j, "max_outer", c.max_outer);
    read(j, "inner_max_iter", c.inner_max_iter);
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
      SweepSpec s;
      s.param = j.at("sweep").at("param").get<std::string>();
      s.values = j.at("sweep").at("values").get<std::vector<double>>();
      c.sweep = s;
    }
    read(j, "output_dir", c.output_dir);
    read(j, "seed", c.seed);
    if (j.contains("quadrature")) c.quadrature = quadrature_from_string(j.at("quadrature").get<std::string>());
    if (j.contains("linear_solver")) c.linear_solver = solver_from_string(j.at("linear_solver").get<std::string>());
    read(j, "c0", c.c0);
    read_opt(j, "gradient_weight", c.gradient_weight);
    read(j, "y_d_constant", c.y_d_constant);
    read(j, "f_constant", c.f_constant);
    read_opt(j, "epsilon", c.epsilon);
    if (j.contains("row2_sign")) c.row2_sign = row2_sign_from_string(j.at("row2_sign").get<std::string>());
    read(j, "regularization_error", c.regularization_error);
    if (j.contains("regularization_measure"))
      c.regularization_measure = measure_from_string(j.at("regularization_measure").get<std::string>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["example"] = to_string(c.example);
  j["n"] = c.n;
  auto put = [&j](const char* key, const std::optional<double>& v) { j[key] = v ? json(*v) : json(nullptr); };
  put("alpha", c.alpha);
  put("beta", c.beta);
  put("gamma", c.gamma);
  put("p", c.p);
  j["box"] = c.box ? json::array({c.box->first, c.box->second}) : json(nullptr);
  j["algorithm"] = to_string(c.algorithm);
  j["outer_tol"] = c.outer_tol;
  j["max_outer"] = c.max_outer ? json(*c.max_outer) : json(nullptr);
  j["inner_max_iter"] = c.inner_max_iter;
  j["sweep"] = c.sweep ? json{{"param", c.sweep->param}, {"values", c.sweep->values}} : json(nullptr);
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  if (c.quadrature) j["quadrature"] = to_string(*c.quadrature);
  j["linear_solver"] = to_string(c.linear_solver);
  j["c0"] = c.c0;
  put("gradient_weight", c.gradient_weight);
  j["y_d_constant"] = c.y_d_constant;
  j["f_constant"] = c.f_constant;
  put("epsilon", c.epsilon);
  j["row2_sign"] = to_string(c.row2_sign);
  j["regularization_error"] = c.regularization_error;
  j["regularization_measure"] = to_string(c.regularization_measure);
  return j;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

namespace {

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
    }
    if (used != item.size()) throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::pair<double, double> parse_box(const std::string& text) {
  const auto v = parse_list(text, "--box");
  if (v.size() != 2) throw std::invalid_argument("--box expects lo,hi");
  return {v[0], v[1]};
}

SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--sweep expects param=v1,v2,...");
  SweepSpec s;
  s.param = text.substr(0, eq);
  s.values = parse_list(text.substr(eq + 1), "--sweep");
  if (s.values.empty()) throw std::invalid_argument("--sweep: no values");
  return s;
}

ControlProblem build_example(const RunConfig& config) {
  validate(config);
  const ResolvedConfig r = resolve(config);
  auto grid = std::make_shared<const Grid>(config.n, r.quadrature);
  constexpr double pi = std::numbers::pi;
  Field y_d;
  switch (config.example) {
    case ExampleKind::example1:
    case ExampleKind::example2_comparison:
      y_d = grid->sample([](double x, double y) {
        const double c = std::cos(2.0 * pi * x * y);
        return std::exp(-c * c / 0.1);
      });
      break;
    case ExampleKind::example3_box:
      y_d = grid->sample([](double x, double y) { return std::sin(2.0 * pi * x) * std::sin(2.0 * pi * y); });
      break;
    case ExampleKind::custom:
      y_d = grid->constant(config.y_d_constant);
      break;
  }
  std::optional<BoxConstraints> box;
  if (r.box) box = BoxConstraints::uniform(*grid, r.box->first, r.box->second);
  return ControlProblem(grid, EllipticOperatorSpec{config.c0}, std::move(y_d), grid->constant(config.f_constant),
                        PenaltyParams(r.p, r.gamma, r.alpha, r.beta), std::move(box), config.linear_solver,
                        r.gradient_weight);
}

namespace {

DcaOptions dca_options(const RunConfig& config, const ResolvedConfig& r) {
  DcaOptions o;
  o.outer_tol = config.outer_tol;
  o.max_outer = r.max_outer;
  o.inner_max_iter = config.inner_max_iter;
  return o;
}

PDParams pd_params(const ControlProblem& problem, const RunConfig& config, const ResolvedConfig& r) {
  PDParams pd;
  pd.epsilon = r.epsilon;
  pd.p = problem.params().p();
  pd.beta = problem.params().beta();
  pd.max_iter = std::max(1, r.max_outer);
  pd.sign = config.row2_sign;
  return pd;
}

}  // namespace

SolveReport run_single(const RunConfig& config) {
  const ControlProblem problem = build_example(config);
  const ResolvedConfig r = resolve(config);
  const Field u0 = problem.grid().zeros();
  if (config.algorithm == Algorithm::pd) return pd_solve(problem, pd_params(problem, config, r), u0);
  return dca_solve(problem, u0, dca_options(config, r));
}

std::vector<SweepRow> run_sweep(const RunConfig& config) {
  if (!config.sweep) throw std::invalid_argument("run_sweep: config has no sweep");
  const ControlProblem base = build_example(config);
  const ResolvedConfig r = resolve(config);
  const std::string& param = config.sweep->param;
  // gamma sweeps continue from the previous solution; the others restart at 0.
  const bool continuation = param == "gamma";
  Field u = base.grid().zeros();
  std::vector<SweepRow> rows;
  for (double v : config.sweep->values) {
    PenaltyParams pp = base.params();
    if (param == "gamma") pp = pp.with_gamma(v);
    else if (param == "beta") pp = pp.with_beta(v);
    else if (param == "p") pp = pp.with_p(v);
    else pp = pp.with_alpha(v);
    const ControlProblem problem = base.with_params(pp);
    const Field u0 = continuation ? u : base.grid().zeros();
    SolveReport rep;
    if (config.algorithm == Algorithm::pd) {
      rep = pd_solve(problem, pd_params(problem, config, r), u0);
    } else {
      rep = dca_solve(problem, u0, dca_options(config, r));
    }
    SweepRow row;
    row.value = v;
    row.cost = rep.cost.total;
    row.null_entries = sparsity_count(rep.u);
    row.iterations = static_cast<int>(rep.iterations.size());
    row.converged = rep.converged;
    rows.push_back(row);
    u = rep.u;
  }
  return rows;
}

ComparisonResult run_comparison(const RunConfig& config) {
  const ControlProblem problem = build_example(config);
  const ResolvedConfig r = resolve(config);
  const PenaltyParams& pp = problem.params();
  ComparisonResult out;
  out.u0 = solve_unpenalized(problem);

  DcaOptions o = dca_options(config, r);
  o.fixed_iterations = true;
  out.dca = dca_solve(problem, out.u0, o);

  PDParams pd = pd_params(problem, config, r);
  pd.fixed_iterations = true;
  out.pd = pd_solve(problem, pd, out.u0);

  // Both costs use the exact quasinorm.
  const double dca_cost = cost_J(problem, out.dca.u).total;
  const double pd_cost = out.pd.cost.total;
  const auto m = config.regularization_measure;
  out.rows.push_back({"dca", "gamma", pp.gamma(), huber_regularization_error(pp.p(), pp.gamma(), m), dca_cost,
                      sparsity_count(out.dca.u), sparsity_count(out.dca.u, 1e-3),
                      static_cast<int>(out.dca.iterations.size())});
  out.rows.push_back({"pd", "epsilon", pd.epsilon, pd_regularization_error(pp.p(), pd.epsilon, m), pd_cost,
                      sparsity_count(out.pd.u), sparsity_count(out.pd.u, 1e-3),
                      static_cast<int>(out.pd.iterations.size())});
  return out;
}

namespace {

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

json report_json(const ControlProblem& problem, const SolveReport& rep) {
  json j;
  j["cost"] = {{"tracking", rep.cost.tracking},
               {"tikhonov", rep.cost.tikhonov},
               {"control_gradient", rep.cost.control_gradient},
               {"sparsity", rep.cost.sparsity},
               {"total", rep.cost.total}};
  j["cost_exact_penalty"] = cost_J(problem, rep.u).total;
  j["null_entries"] = sparsity_count(rep.u);
  j["converged"] = rep.converged;
  j["stop_reason"] = rep.stop_reason;
  j["iterations"] = rep.iterations.size();
  j["residual"] = rep.residual;
  j["kkt"] = {{"gradient_eq", rep.kkt.gradient_eq},
              {"zeta_bound", rep.kkt.zeta_bound},
              {"sign_consistency", rep.kkt.sign_consistency},
              {"complementarity", rep.kkt.complementarity}};
  j["max_abs_u"] = max_abs(rep.u);
  return j;
}

json resolved_json(const ResolvedConfig& r) {
  json j{{"alpha", r.alpha}, {"beta", r.beta}, {"gamma", r.gamma}, {"p", r.p},
         {"quadrature", to_string(r.quadrature)}, {"gradient_weight", r.gradient_weight},
         {"max_outer", r.max_outer}, {"epsilon", r.epsilon}};
  j["box"] = r.box ? json::array({r.box->first, r.box->second}) : json(nullptr);
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setw(2) << j << "\n";
}

}  // namespace

void write_iterations_csv(const fs::path& path, const std::vector<IterationRecord>& records) {
  auto out = open_csv(path);
  out << "k,cost,residual,zeta_gap,null_entries,inner_iterations,elapsed_seconds\n";
  for (const auto& r : records) {
    out << r.k << ',' << r.cost << ',' << r.residual << ',' << r.zeta_gap << ',' << r.null_entries << ','
        << r.inner_iterations << ',' << r.elapsed_seconds << '\n';
  }
}

void write_field_csv(const fs::path& path, const Grid& grid, const Field& field) {
  require_on_grid(grid, field, "write_field_csv");
  auto out = open_csv(path);
  out << "x,y,value\n";
  for (Index k = 0; k < grid.size(); ++k) out << grid.x(k) << ',' << grid.y(k) << ',' << field[k] << '\n';
}

Field read_field_csv(const fs::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "x,y,value") throw std::invalid_argument("field csv: bad header");
  Field f(grid.size());
  Index k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k >= grid.size()) throw std::invalid_argument("field csv: too many rows");
    const auto v = parse_list(line, "field csv");
    if (v.size() != 3) throw std::invalid_argument("field csv: expected 3 columns");
    f[k++] = v[2];
  }
  if (k != grid.size()) throw std::invalid_argument("field csv: too few rows");
  return f;
}

void write_sweep_csv(const fs::path& path, const std::string& param, const std::vector<SweepRow>& rows) {
  auto out = open_csv(path);
  out << param << ",cost,null_entries,iterations,converged\n";
  for (const auto& r : rows) {
    out << r.value << ',' << r.cost << ',' << r.null_entries << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << '\n';
  }
}

void write_comparison_csv(const fs::path& path, const std::vector<ComparisonRow>& rows) {
  auto out = open_csv(path);
  out << "algorithm,regularization,parameter,re,cost,null_entries,near_zero_entries,iterations\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.regularization << ',' << r.parameter << ',' << r.re << ',' << r.cost << ','
        << r.null_entries << ',' << r.near_zero_entries << ',' << r.iterations << '\n';
  }
}

int run(const RunConfig& config) {
  try {
    validate(config);
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    const ResolvedConfig r = resolve(config);
    json summary;
    summary["config"] = config_to_json(config);
    summary["resolved"] = resolved_json(r);

    if (config.sweep) {
      const auto rows = run_sweep(config);
      write_sweep_csv(dir / "sweep.csv", config.sweep->param, rows);
      json entries = json::array();
      for (const auto& row : rows) {
        entries.push_back({{"value", row.value}, {"cost", row.cost}, {"null_entries", row.null_entries},
                           {"iterations", row.iterations}, {"converged", row.converged}});
      }
      summary["sweep"] = entries;
    } else if (config.example == ExampleKind::example2_comparison) {
      const ControlProblem problem = build_example(config);
      const ComparisonResult res = run_comparison(config);
      write_comparison_csv(dir / "comparison.csv", res.rows);
      write_iterations_csv(dir / "iterations_dca.csv", res.dca.iterations);
      write_iterations_csv(dir / "iterations_pd.csv", res.pd.iterations);
      write_field_csv(dir / "u_dca.csv", problem.grid(), res.dca.u);
      write_field_csv(dir / "u_pd.csv", problem.grid(), res.pd.u);
      write_field_csv(dir / "u0.csv", problem.grid(), res.u0);
      summary["dca"] = report_json(problem, res.dca);
      summary["pd"] = report_json(problem, res.pd);
    } else {
      const ControlProblem problem = build_example(config);
      const SolveReport rep = run_single(config);
      write_iterations_csv(dir / "iterations.csv", rep.iterations);
      write_field_csv(dir / "u.csv", problem.grid(), rep.u);
      write_field_csv(dir / "y.csv", problem.grid(), rep.y);
      write_field_csv(dir / "phi.csv", problem.grid(), rep.phi);
      summary["result"] = report_json(problem, rep);
    }
    summary["status"] = "ok";
    write_json(dir / "summary.json", summary);
    return 0;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    // Files already written are partial; mark the run as failed.
    try {
      json failed;
      failed["status"] = "failed";
      failed["error"] = e.what();
      failed["residual"] = e.residual();
      failed["config"] = config_to_json(config);
      write_json(fs::path(config.output_dir) / "summary.json", failed);
    } catch (const std::exception&) {
    }
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sparseoc
