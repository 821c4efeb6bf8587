// Command-line front end: sparseoc solve --config run.json [overrides]

#include "sparseoc/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace sparseoc;
  CLI::App app{"Sparse optimal control with nonconvex L^{1/p} penalties"};
  app.require_subcommand(1);
  CLI::App* solve = app.add_subcommand("solve", "run a solve, sweep or comparison");

  std::string config_path, example, box, algorithm, sweep, out, quadrature, solver;
  std::optional<int> n, max_outer;
  std::optional<double> alpha, beta, gamma, p, outer_tol, epsilon;
  solve->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  solve->add_option("--example", example, "example1 | example2_comparison | example3_box | custom");
  solve->add_option("--n", n, "interior nodes per axis");
  solve->add_option("--alpha", alpha);
  solve->add_option("--beta", beta);
  solve->add_option("--gamma", gamma);
  solve->add_option("--p", p);
  solve->add_option("--box", box, "lo,hi");
  solve->add_option("--algorithm", algorithm, "dca | pd");
  solve->add_option("--outer-tol", outer_tol);
  solve->add_option("--max-outer", max_outer);
  solve->add_option("--sweep", sweep, "param=v1,v2,...");
  solve->add_option("--epsilon", epsilon, "PD smoothing parameter");
  solve->add_option("--quadrature", quadrature, "trapezoid | uniform");
  solve->add_option("--linear-solver", solver, "cg | cholesky");
  solve->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!example.empty()) config.example = example_from_string(example);
    if (n) config.n = *n;
    if (alpha) config.alpha = alpha;
    if (beta) config.beta = beta;
    if (gamma) config.gamma = gamma;
    if (p) config.p = p;
    if (!box.empty()) config.box = parse_box(box);
    if (!algorithm.empty()) config.algorithm = algorithm_from_string(algorithm);
    if (outer_tol) config.outer_tol = *outer_tol;
    if (max_outer) config.max_outer = max_outer;
    if (!sweep.empty()) config.sweep = parse_sweep(sweep);
    if (epsilon) config.epsilon = epsilon;
    if (!quadrature.empty()) config.quadrature = quadrature_from_string(quadrature);
    if (!solver.empty()) config.linear_solver = solver_from_string(solver);
    if (!out.empty()) config.output_dir = out;
    validate(config);
    return run(config);
  } catch (const std::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  }
}
